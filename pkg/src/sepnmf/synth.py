"""Synthetic benchmark suites: two basis generators (uniform and
ill-conditioned) crossed with two mixing/noise schemes (middle points with
outward structured noise, and Dirichlet mixtures with Gaussian noise).

Suite ids map to (basis, mixing) as 1=(uniform, middle), 2=(uniform,
dirichlet), 3=(ill-conditioned, middle), 4=(ill-conditioned, dirichlet).
Everything is a pure function of (config, seed); identical inputs produce
bit-identical instances.
"""

import json
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from . import linalg
from .errors import InvalidOptionsError
from .rng import Stream

PAPER_M = 200
PAPER_R = 20
PAPER_N_MIX = 200

_W_KIND = {1: "uniform", 2: "uniform", 3: "illcond", 4: "illcond"}
_HN_KIND = {1: "middle", 2: "dirichlet", 3: "middle", 4: "dirichlet"}


@dataclass(frozen=True)
class ExperimentConfig:
    """One synthetic suite at a given noise level and seed.

    `m`, `r`, `n_mix` default to the benchmark scale (200, 20, 200); desk
    tests shrink them without changing the structure.
    """

    exp_id: int
    delta: float = 0.0
    seed: int = 0
    m: int = PAPER_M
    r: int = PAPER_R
    n_mix: int = PAPER_N_MIX

    def __post_init__(self):
        if self.exp_id not in (1, 2, 3, 4):
            raise InvalidOptionsError(f"exp_id must be in 1..4, got {self.exp_id}")
        if self.delta < 0:
            raise InvalidOptionsError("delta must be nonnegative")
        if self.m < self.r:
            raise InvalidOptionsError("m must be >= r")

    @property
    def n_cols(self):
        if _HN_KIND[self.exp_id] == "middle":
            return self.r + self.r * (self.r - 1) // 2
        return 2 * self.r + self.n_mix


@dataclass
class GroundTruth:
    """Instance bookkeeping: the factors, the noise, and which columns are
    pure (pure_column_map[j] is the endmember index, or None for mixtures)."""

    W: np.ndarray
    H: np.ndarray
    N: np.ndarray
    pure_column_map: list

    @property
    def r(self):
        return self.W.shape[1]


def gen_w_uniform(m, r, seed):
    """m x r basis with i.i.d. uniform [0,1) entries (column-major fill)."""
    u = Stream(seed, "w-uniform").uniforms(m * r)
    return u.reshape((m, r), order="F")


def gen_w_illconditioned(m, r, seed):
    """Basis with singular values alpha^(i-1), alpha^(r-1) = 1e-3.

    A uniform draw supplies the singular subspaces (via its compact SVD);
    the spectrum is replaced by the geometric sequence, so sigma_1 = 1,
    sigma_r = 1e-3, kappa = 1000 exactly.  Entries may be negative.
    """
    base = Stream(seed, "w-illcond").uniforms(m * r).reshape((m, r), order="F")
    U, _, V = linalg.svd(base)
    if r > 1:
        alpha = 10.0 ** (-3.0 / (r - 1))
        spectrum = alpha ** np.arange(r)
    else:
        spectrum = np.ones(1)
    return np.asfortranarray((U * spectrum) @ V.T)


def gen_middle_points(W, delta):
    """Mixing scheme: all pairwise midpoints, pushed outward by the noise.

    H = [I, H'] where H' holds every half-half combination of two distinct
    endmembers (lexicographic pair order).  Pure columns are left exact;
    each midpoint column is perturbed by delta * (column - mean endmember),
    which moves it outside the convex hull while keeping rank(M') = r.
    """
    W = linalg.as_matrix(W, "W")
    m, r = W.shape
    pairs = list(combinations(range(r), 2))
    H = np.zeros((r, r + len(pairs)), order="F")
    H[:, :r] = np.eye(r)
    for k, (i, j) in enumerate(pairs):
        H[i, r + k] = 0.5
        H[j, r + k] = 0.5
    M = W @ H
    wbar = W.mean(axis=1)
    N = np.zeros_like(M)
    N[:, r:] = delta * (M[:, r:] - wbar[:, None])
    truth = GroundTruth(W=W, H=H, N=N,
                        pure_column_map=list(range(r)) + [None] * len(pairs))
    return np.asfortranarray(M + N), truth


def gen_dirichlet_gaussian(W, n_mix, delta, seed):
    """Mixing scheme: duplicated pure columns plus Dirichlet mixtures, with
    i.i.d. delta*N(0,1) noise on every entry.

    H = [I, I, H']; the Dirichlet parameter vector is drawn once per
    instance, uniformly in [0,1]^r, and shared by all n_mix columns (each
    of which sums to 1 exactly).
    """
    W = linalg.as_matrix(W, "W")
    m, r = W.shape
    alpha = Stream(seed, "h-params").uniforms(r)
    Hmix = Stream(seed, "h-mix").dirichlet_columns(alpha, n_mix)
    H = np.zeros((r, 2 * r + n_mix), order="F")
    H[:, :r] = np.eye(r)
    H[:, r:2 * r] = np.eye(r)
    H[:, 2 * r:] = Hmix
    M = W @ H
    n = 2 * r + n_mix
    N = delta * Stream(seed, "noise").normals(m * n).reshape((m, n), order="F")
    truth = GroundTruth(W=W, H=H, N=N,
                        pure_column_map=list(range(r)) * 2 + [None] * n_mix)
    return np.asfortranarray(M + N), truth


def generate_w(config):
    if _W_KIND[config.exp_id] == "uniform":
        return gen_w_uniform(config.m, config.r, config.seed)
    return gen_w_illconditioned(config.m, config.r, config.seed)


def generate_instance(config):
    """Build (noisy matrix, ground truth) for one config; bit-reproducible."""
    W = generate_w(config)
    if _HN_KIND[config.exp_id] == "middle":
        return gen_middle_points(W, config.delta)
    return gen_dirichlet_gaussian(W, config.n_mix, config.delta, config.seed)


TRUTH_SCHEMA_VERSION = 1


def truth_sidecar_dict(config, truth):
    """JSON-serializable sidecar: config, seed, and the pure-column map."""
    return {
        "schema_version": TRUTH_SCHEMA_VERSION,
        "exp_id": config.exp_id,
        "m": config.m,
        "r": config.r,
        "n_mix": config.n_mix,
        "delta": config.delta,
        "seed": config.seed,
        "pure_column_map": truth.pure_column_map,
    }


def load_truth_sidecar(path):
    """Read a sidecar back into (ExperimentConfig, pure_column_map)."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    config = ExperimentConfig(exp_id=data["exp_id"], delta=data["delta"],
                              seed=data["seed"], m=data["m"], r=data["r"],
                              n_mix=data["n_mix"])
    return config, data["pure_column_map"]


def with_delta_seed(config, delta, seed):
    """Convenience copy used by sweeps."""
    return replace(config, delta=delta, seed=seed)
