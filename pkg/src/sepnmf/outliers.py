"""Outlier-tolerant extraction: over-extract r+t columns, fit
simplex-constrained abundances by accelerated projected gradient, and keep
the r candidates whose abundance rows carry the most total weight.

In the noiseless model with t outlier columns appended to a separable
matrix, every basis row of the abundance matrix sums to more than 1 (its
identity entry plus its share of the mixed columns) while outlier rows sum
to exactly 1, so the row-l1 score separates them.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg, selectors, spa
from .errors import InvalidOptionsError, RankDeficiencyError

_DEFAULT_QP_TOL_FACTOR = 1e-8
DEFAULT_QP_MAX_ITERS = 5000


@dataclass
class OutlierOptions:
    r: int
    t: int
    selector: selectors.SelectorSpec = field(default_factory=lambda: selectors.L2)
    qp_tol: float | None = None
    qp_max_iters: int = DEFAULT_QP_MAX_ITERS


@dataclass
class AbundanceSolution:
    """Columnwise solution of min ||M - A X||_F^2 over unit-simplex columns.

    `converged` is False when the iteration cap was hit; the best (last)
    iterate is returned either way.  `fp_residuals` holds the per-column
    projected-gradient fixed-point residuals at termination.
    """

    G: np.ndarray
    objective: float
    iterations: int
    converged: bool
    fp_residuals: np.ndarray
    objective_trace: list[float] | None = None


def simplex_least_squares(A, M, tol=None, max_iters=DEFAULT_QP_MAX_ITERS,
                          record_history=False):
    """Solve the per-column QPs min ||m_j - A x||^2 s.t. x in the unit simplex.

    Accelerated projected gradient with step 1/L, L = sigma_max(A)^2, and a
    per-column momentum restart whenever a column's objective would increase,
    which keeps every column's objective non-increasing.  Convergence is the
    fixed-point test ||g - P(g - grad/L)|| <= tol per column.
    """
    A = linalg.as_matrix(A, "A")
    M = linalg.as_matrix(M, "M")
    if A.shape[0] != M.shape[0]:
        raise InvalidOptionsError(f"row mismatch: A has {A.shape[0]}, M has {M.shape[0]}")
    s, n = A.shape[1], M.shape[1]
    if tol is None:
        tol = _DEFAULT_QP_TOL_FACTOR * float(np.sqrt((M * M).sum()))
    smax = float(linalg.svd(A)[1][0])
    if smax == 0.0:
        G = np.zeros((s, n))
        obj = float((M * M).sum())
        return AbundanceSolution(G=G, objective=obj, iterations=0, converged=True,
                                 fp_residuals=np.zeros(n),
                                 objective_trace=[obj] if record_history else None)
    Lf = smax * smax
    gram = A.T @ A
    AtM = A.T @ M

    def col_obj(G):
        R = M - A @ G
        return np.einsum("ij,ij->j", R, R)

    def grad(G):
        return gram @ G - AtM

    G = linalg.simplex_project_columns(AtM / Lf)
    f_cur = col_obj(G)
    Y = G.copy()
    tvec = np.ones(n)
    trace = [float(f_cur.sum())] if record_history else None
    iterations = 0
    converged = False
    fp_res = np.full(n, np.inf)
    for it in range(1, max_iters + 1):
        iterations = it
        G_new = linalg.simplex_project_columns(Y - grad(Y) / Lf)
        f_new = col_obj(G_new)
        worse = f_new > f_cur
        if worse.any():
            # momentum restart: fall back to a plain projected-gradient step,
            # which cannot increase the objective
            gsub = G[:, worse]
            step = linalg.simplex_project_columns(gsub - (gram @ gsub - AtM[:, worse]) / Lf)
            G_new[:, worse] = step
            Rs = M[:, worse] - A @ step
            f_new[worse] = np.einsum("ij,ij->j", Rs, Rs)
            tvec[worse] = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tvec * tvec))
        Y = G_new + ((tvec - 1.0) / t_next) * (G_new - G)
        G, f_cur, tvec = G_new, f_new, t_next
        if record_history:
            trace.append(float(f_cur.sum()))
        fp = G - linalg.simplex_project_columns(G - grad(G) / Lf)
        fp_res = np.sqrt(np.einsum("ij,ij->j", fp, fp))
        if (fp_res <= tol).all():
            converged = True
            break
    return AbundanceSolution(G=G, objective=float(f_cur.sum()), iterations=iterations,
                             converged=converged, fp_residuals=fp_res,
                             objective_trace=trace)


def outlier_score_report(G, J):
    """Row-l1 scores of G attached to the candidate indices J.

    Sorted by descending score; ties keep the original J order.
    """
    G = np.asarray(G, dtype=float)
    if G.shape[0] != len(J):
        raise InvalidOptionsError(f"G has {G.shape[0]} rows but J lists {len(J)} indices")
    scores = np.abs(G).sum(axis=1)
    order = np.argsort(-scores, kind="stable")
    return [(int(J[i]), float(scores[i])) for i in order]


@dataclass
class OutlierResult(spa.ExtractionResult):
    """Kept indices (descending score) plus the over-extraction diagnostics.

    The base fields describe the kept set: `step_scores` are the row-l1
    scores and `residual_norms` the candidate run's residual norms at the
    steps where the kept columns were extracted.
    """

    candidate_result: spa.ExtractionResult = None
    abundances: AbundanceSolution = None
    scores: list = None


def extract_with_outliers(M, opts):
    """Run the over-extract / refit / rescore pipeline; see module docstring."""
    M = linalg.as_matrix(M)
    m, n = M.shape
    if opts.r < 2:
        raise InvalidOptionsError("r must be >= 2")
    if opts.t < 0:
        raise InvalidOptionsError("t must be >= 0")
    if opts.r + opts.t > min(m, n):
        raise InvalidOptionsError(f"r + t = {opts.r + opts.t} exceeds min(rows, cols) = {min(m, n)}")
    if opts.t > m - opts.r:
        raise InvalidOptionsError(f"t = {opts.t} exceeds rows - r = {m - opts.r}")
    variant = "fast" if opts.selector.kind == "l2" else "naive"
    try:
        cand = spa.extract(M, spa.ExtractionOptions(
            target_r=opts.r + opts.t, selector=opts.selector, variant=variant))
    except RankDeficiencyError as exc:
        # proceed with whatever was found, as long as r candidates exist
        if exc.extracted_count < opts.r:
            raise
        cand = exc.result
    J = cand.indices
    sol = simplex_least_squares(M[:, J], M, tol=opts.qp_tol, max_iters=opts.qp_max_iters)
    report = outlier_score_report(sol.G, J)
    kept = report[:opts.r]
    pos = {idx: k for k, idx in enumerate(J)}
    return OutlierResult(
        indices=[idx for idx, _ in kept],
        step_scores=[score for _, score in kept],
        residual_norms=[cand.residual_norms[pos[idx]] for idx, _ in kept],
        candidate_result=cand,
        abundances=sol,
        scores=report,
    )
