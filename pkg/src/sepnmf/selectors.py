"""Strongly convex selector functions used to pick a column at each
extraction step.

Three families are built in:

    l2           f(x) = sum x_i^2                  (mu = L = 2)
    robust:a     f(x) = sum x_i^2/(a + |x_i|)      (bounded influence of
                 large entries; on |y| <= K the curvature lies between
                 2a^2/(a+K)^3 and 2/a, which are the stored mu and L --
                 note that choosing a = K makes L/mu = (a+K)^3/a^3 = 8)
    pnorm:p      f(x) = (sum |x_i|^p)^(2/p),  1 < p < inf

All selectors satisfy f(0) = 0 and f(x) > 0 for x != 0.  The (mu, L)
constants feed error-bound reporting and the sandwich check only; the
extraction argmax never uses them.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidOptionsError

_KINDS = ("l2", "robust", "pnorm")


@dataclass(frozen=True)
class SelectorSpec:
    """One selector family with its parameters.

    `radius_k`, when set, overrides the bounding-ball radius used for the
    local constants; extraction defaults it to the max column norm of the
    input matrix.
    """

    kind: str = "l2"
    alpha: float | None = None
    p: float | None = None
    radius_k: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidOptionsError(f"unknown selector kind {self.kind!r}")
        if self.kind == "robust":
            if self.alpha is None or not (self.alpha > 0):
                raise InvalidOptionsError("robust selector needs alpha > 0")
        if self.kind == "pnorm":
            if self.p is None or not (1.0 < self.p < math.inf):
                raise InvalidOptionsError("pnorm selector needs 1 < p < inf")

    def describe(self):
        if self.kind == "robust":
            return f"robust:{self.alpha:g}"
        if self.kind == "pnorm":
            return f"pnorm:{self.p:g}"
        return "l2"


L2 = SelectorSpec("l2")


def parse_selector(text):
    """Parse the CLI selector syntax: `l2`, `robust:<alpha>`, `pnorm:<p>`."""
    parts = text.strip().split(":")
    if parts[0] == "l2" and len(parts) == 1:
        return SelectorSpec("l2")
    if parts[0] == "robust" and len(parts) == 2:
        try:
            return SelectorSpec("robust", alpha=float(parts[1]))
        except ValueError as exc:
            raise InvalidOptionsError(f"bad robust alpha {parts[1]!r}") from exc
    if parts[0] == "pnorm" and len(parts) == 2:
        try:
            return SelectorSpec("pnorm", p=float(parts[1]))
        except ValueError as exc:
            raise InvalidOptionsError(f"bad pnorm exponent {parts[1]!r}") from exc
    raise InvalidOptionsError(
        f"cannot parse selector {text!r} (expected l2, robust:<alpha> or pnorm:<p>)"
    )


def column_scores(spec, X):
    """Selector value of every column of X (vectorized evaluate)."""
    X = np.asarray(X, dtype=float)
    if spec.kind == "l2":
        return np.einsum("ij,ij->j", X, X)
    if spec.kind == "robust":
        ax = np.abs(X)
        return np.sum(X * X / (spec.alpha + ax), axis=0)
    p = spec.p
    return np.sum(np.abs(X) ** p, axis=0) ** (2.0 / p)


def evaluate(spec, x):
    """f(x) for a single vector."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return float(column_scores(spec, x[:, None])[0])


def gradient(spec, x):
    """Analytic gradient of f at x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if spec.kind == "l2":
        return 2.0 * x
    if spec.kind == "robust":
        a = spec.alpha
        ax = np.abs(x)
        return np.sign(x) * ax * (2.0 * a + ax) / (a + ax) ** 2
    p = spec.p
    ax = np.abs(x)
    norm_p = np.sum(ax ** p) ** (1.0 / p)
    if norm_p == 0.0:
        return np.zeros_like(x)
    return 2.0 * norm_p ** (2.0 - p) * np.sign(x) * ax ** (p - 1.0)


def constants(spec, K, dim=None):
    """(mu, L) valid on the ball of radius K (Euclidean norm).

    l2 is globally (2, 2).  robust uses the closed-form curvature bounds.
    pnorm stores conservative l2-equivalent local constants: for p <= 2,
    mu = 2(p-1) (exact, since ||.||_p >= ||.||_2) and L = 2*dim^(2/p-1)
    (norm equivalence, needs `dim`); for p > 2, L = 2(p-1) (exact by
    duality) and mu = 0 -- no positive l2 modulus exists on a centered
    ball because the curvature vanishes transversally at sparse points.
    """
    if not K > 0:
        raise InvalidOptionsError("ball radius K must be positive")
    if spec.kind == "l2":
        return 2.0, 2.0
    if spec.kind == "robust":
        a = spec.alpha
        return 2.0 * a * a / (a + K) ** 3, 2.0 / a
    p = spec.p
    if p <= 2.0:
        if dim is None:
            raise InvalidOptionsError("pnorm constants with p < 2 need the ambient dim")
        return 2.0 * (p - 1.0), 2.0 * float(dim) ** (2.0 / p - 1.0)
    return 0.0, 2.0 * (p - 1.0)


def sandwich_check(spec, x, K):
    """True iff mu/2 ||x||^2 <= f(x) <= L/2 ||x||^2 within tolerance."""
    x = np.asarray(x, dtype=float).reshape(-1)
    mu, L = constants(spec, K, dim=x.size)
    nx2 = float(x @ x)
    fx = evaluate(spec, x)
    tol = 1e-9 * (1.0 + nx2)
    return (mu / 2.0) * nx2 - tol <= fx <= (L / 2.0) * nx2 + tol
