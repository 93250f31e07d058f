"""Recursive column extraction by selector argmax and orthogonal-complement
projection, in a naive-residual variant (any selector) and a fast norm-update
variant (squared-l2 selector only), plus the a-priori recovery noise bound.

Indices are 0-based throughout the library; the CLI prints them 1-based.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg, selectors
from .errors import InvalidOptionsError, RankDeficiencyError

_TIE_REL = 1e-12
_DEFAULT_TOL_FACTOR = 1e-12


@dataclass
class ExtractionOptions:
    """Controls one extraction run.

    Exactly one stopping rule is required: `target_r` extracts that many
    columns (RankDeficiencyError if the residual dies first), otherwise the
    loop runs until the max remaining column norm falls below `residual_tol`.
    The fast variant is only valid with the squared-l2 selector.
    """

    target_r: int | None = None
    residual_tol: float | None = None
    selector: selectors.SelectorSpec = field(default_factory=lambda: selectors.L2)
    variant: str = "naive"
    l1_normalize: bool = False

    def validate(self):
        if self.target_r is None and self.residual_tol is None:
            raise InvalidOptionsError("set target_r and/or residual_tol")
        if self.target_r is not None and self.target_r < 1:
            raise InvalidOptionsError("target_r must be >= 1")
        if self.residual_tol is not None and self.residual_tol < 0:
            raise InvalidOptionsError("residual_tol must be nonnegative")
        if self.variant not in ("naive", "fast"):
            raise InvalidOptionsError(f"unknown variant {self.variant!r}")
        if self.variant == "fast" and self.selector.kind != "l2":
            raise InvalidOptionsError("the fast norm-update variant requires the l2 selector")


@dataclass
class ExtractionResult:
    """Ordered extracted column indices with per-step diagnostics.

    `step_scores[k]` is the selector value of the column chosen at step k
    (at selection time); `residual_norms[k]` is the max remaining column
    norm after step k's projection.
    """

    indices: list[int]
    step_scores: list[float]
    residual_norms: list[float]


def l1_normalize_columns(M):
    """Divide each column by its l1 norm; zero columns keep scale 1.

    Returns (normalized matrix, scales).
    """
    M = linalg.as_matrix(M)
    scales = np.abs(M).sum(axis=0)
    scales = np.where(scales == 0.0, 1.0, scales)
    return M / scales, scales


def _argmax_tiebreak(scores, original_scores, active):
    """Argmax over active columns; near-ties (1e-12 relative) resolve by the
    selector value on the input matrix, then by smallest index."""
    s = np.where(active, scores, -np.inf)
    smax = s.max()
    tied = np.nonzero(s >= smax - _TIE_REL * abs(smax))[0]
    if tied.size > 1:
        o = original_scores[tied]
        omax = o.max()
        tied = tied[o >= omax - _TIE_REL * abs(omax)]
    return int(tied[0])


def _finish(indices, scores, res_norms, target_r):
    result = ExtractionResult(indices=indices, step_scores=scores, residual_norms=res_norms)
    if target_r is not None and len(indices) < target_r:
        raise RankDeficiencyError(
            f"residual vanished after {len(indices)} of {target_r} requested columns",
            extracted_count=len(indices),
            result=result,
        )
    return result


def _extract_naive(M, target_r, tol, spec):
    m, n = M.shape
    R = M.copy(order="F")
    active = np.ones(n, dtype=bool)
    original_scores = selectors.column_scores(spec, M)
    norms_sq = linalg.column_norms_sq(M)
    max_steps = target_r if target_r is not None else min(m, n)
    indices, scores_out, res_norms = [], [], []
    for _ in range(max_steps):
        if np.sqrt(norms_sq[active].max(initial=0.0)) <= tol:
            break
        scores = selectors.column_scores(spec, R)
        j = _argmax_tiebreak(scores, original_scores, active)
        u = R[:, j].copy()
        indices.append(j)
        scores_out.append(float(scores[j]))
        active[j] = False
        nu2 = float(u @ u)
        coeffs = (u @ R) / nu2
        R -= np.outer(u, coeffs)
        R[:, j] = 0.0
        norms_sq = np.einsum("ij,ij->j", R, R)
        res_norms.append(float(np.sqrt(norms_sq[active].max(initial=0.0))))
    return _finish(indices, scores_out, res_norms, target_r)


def _extract_fast(M, target_r, tol):
    m, n = M.shape
    norms_sq = linalg.column_norms_sq(M)
    original_scores = norms_sq.copy()
    active = np.ones(n, dtype=bool)
    max_steps = target_r if target_r is not None else min(m, n)
    dirs = np.zeros((m, max_steps), order="F")
    indices, scores_out, res_norms = [], [], []
    k = 0
    while k < max_steps:
        if np.sqrt(norms_sq[active].max(initial=0.0)) <= tol:
            break
        j = _argmax_tiebreak(norms_sq, original_scores, active)
        # rebuild the residual direction from the original column: modified
        # Gram-Schmidt against the stored basis, one re-pass
        u = M[:, j].copy()
        for _ in range(2):
            for i in range(k):
                u -= (dirs[:, i] @ u) * dirs[:, i]
        nu = float(np.sqrt(u @ u))
        if nu <= tol:
            break
        q = u / nu
        dirs[:, k] = q
        indices.append(j)
        scores_out.append(float(norms_sq[j]))
        active[j] = False
        w = q @ M
        norms_sq = np.maximum(norms_sq - w * w, 0.0)
        norms_sq[indices] = 0.0
        res_norms.append(float(np.sqrt(norms_sq[active].max(initial=0.0))))
        k += 1
    return _finish(indices, scores_out, res_norms, target_r)


def extract(M, opts):
    """Extract columns of M per `opts`; see ExtractionOptions.

    In the noiseless separable case (full-rank basis, mixing weights in the
    unit simplex) the returned indices are exactly the pure columns, for any
    built-in selector.
    """
    opts.validate()
    M = linalg.as_matrix(M)
    if opts.target_r is not None and opts.target_r > min(M.shape):
        raise InvalidOptionsError(
            f"target_r={opts.target_r} exceeds min(rows, cols)={min(M.shape)}"
        )
    work = M
    if opts.l1_normalize:
        work, _ = l1_normalize_columns(M)
    init_max = float(np.sqrt(linalg.column_norms_sq(work).max()))
    tol = opts.residual_tol if opts.residual_tol is not None else _DEFAULT_TOL_FACTOR * init_max
    if opts.variant == "fast":
        return _extract_fast(work, opts.target_r, tol)
    return _extract_naive(work, opts.target_r, tol, opts.selector)


def extract_fast(M, r):
    """Fast norm-update extraction of r columns (l2 selector).

    Maintains per-column squared norms through the rank-one update identity
    and never materializes the residual matrix; index sequences match the
    naive l2 variant on tie-free inputs.
    """
    return extract(M, ExtractionOptions(target_r=r, variant="fast"))


@dataclass(frozen=True)
class BoundEstimate:
    """A-priori noise tolerance for exact-support recovery.

    Perturbations with per-column norm below `eps_max` leave every extracted
    column within `eps * err_factor` of a distinct basis column.
    """

    eps_max: float
    err_factor: float
    sigma_r: float
    K: float
    mu: float
    L: float


def recovery_bound(W, selector=selectors.L2):
    """Evaluate the recovery noise bound for a full-column-rank basis W.

    eps_max = sigma_r * min(1/(2(r-1)), sqrt(mu/L)/4) / err_factor with
    err_factor = 1 + 80 K^2 L / (sigma_r^2 mu).  Raises RankDeficiencyError
    when W is (numerically) rank deficient.
    """
    W = linalg.as_matrix(W, "W")
    m, r = W.shape
    s = linalg.svd(W)[1]
    sigma_r = float(s[-1])
    if sigma_r <= max(m, r) * np.finfo(float).eps * float(s[0]):
        raise RankDeficiencyError("W is rank deficient; the bound is undefined")
    K = selector.radius_k
    if K is None:
        K = float(np.sqrt(linalg.column_norms_sq(W).max()))
    mu, L = selectors.constants(selector, K, dim=m)
    if mu == 0.0:
        return BoundEstimate(eps_max=0.0, err_factor=np.inf,
                             sigma_r=sigma_r, K=K, mu=mu, L=L)
    err_factor = 1.0 + 80.0 * (K * K / (sigma_r * sigma_r)) * (L / mu)
    term = 0.25 * np.sqrt(mu / L)
    if r >= 2:
        term = min(term, 1.0 / (2.0 * (r - 1)))
    eps_max = sigma_r * term / err_factor
    return BoundEstimate(eps_max=float(eps_max), err_factor=float(err_factor),
                         sigma_r=sigma_r, K=K, mu=mu, L=L)
