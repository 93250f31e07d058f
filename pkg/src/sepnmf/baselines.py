"""Comparison extractors: pixel-purity voting (PPI), per-step random
directions after PCA (VCA), and a greedy distance-geometry volume heuristic
(SiVM).  All randomness flows from the options seed, so results are
bit-reproducible given (input, seed).

The returned ExtractionResult reuses the shared fields loosely:
`step_scores` holds each algorithm's own selection score (vote counts for
PPI, |c.x| for VCA, the log-distance proxy for SiVM) and `residual_norms`
is populated only by VCA (the other two never form residuals).
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidOptionsError, RankDeficiencyError
from .rng import Stream
from .spa import ExtractionResult

DEFAULT_PPI_DIRECTIONS = 1000


@dataclass
class BaselineOptions:
    r: int
    seed: int = 0
    ppi_k: int = DEFAULT_PPI_DIRECTIONS
    vca_use_pca: bool = True

    def validate(self):
        if self.r < 1:
            raise InvalidOptionsError("r must be >= 1")
        if self.ppi_k < 1:
            raise InvalidOptionsError("ppi_k must be >= 1")


def ppi(M, opts):
    """Pixel-purity voting: each random direction votes for the columns
    attaining the max and min of c^T M; the r most-voted columns win.

    Exact vote ties (and exact score ties in the final ranking) resolve to
    the smallest column index, so exact duplicate columns do not split votes.
    """
    opts.validate()
    M = linalg.as_matrix(M)
    n = M.shape[1]
    if opts.r > n:
        raise InvalidOptionsError(f"r={opts.r} exceeds column count {n}")
    C = Stream(opts.seed, "ppi").sphere_directions(opts.ppi_k, M.shape[0])
    S = C @ M
    votes = np.zeros(n, dtype=np.int64)
    np.add.at(votes, np.argmax(S, axis=1), 1)
    np.add.at(votes, np.argmin(S, axis=1), 1)
    order = np.lexsort((np.arange(n), -votes))
    chosen = order[:opts.r]
    return ExtractionResult(indices=[int(j) for j in chosen],
                            step_scores=[float(votes[j]) for j in chosen],
                            residual_norms=[])


def _orthogonalize(v, Q, k):
    if k:
        for _ in range(2):
            v = v - Q[:, :k] @ (Q[:, :k].T @ v)
    return v


def vca(M, opts):
    """Vertex component analysis: optional PCA to the top-r components,
    then r rounds of (random direction in the unextracted complement,
    argmax |c^T column|, project out)."""
    opts.validate()
    M = linalg.as_matrix(M)
    m, n = M.shape
    r = opts.r
    if r > min(m, n):
        raise InvalidOptionsError(f"r={r} exceeds min(rows, cols)={min(m, n)}")
    stream = Stream(opts.seed, "vca")
    if opts.vca_use_pca:
        mean = M.mean(axis=1)
        centered = M - mean[:, None]
        U = linalg.svd(centered)[0]
        Y = np.asfortranarray(U[:, :r].T @ centered)
    else:
        Y = M.copy(order="F")
    d = Y.shape[0]
    R = Y.copy(order="F")
    init_max = float(np.sqrt(linalg.column_norms_sq(Y).max()))
    Q = np.zeros((d, r), order="F")
    active = np.ones(n, dtype=bool)
    indices, step_scores, res_norms = [], [], []

    def bail(msg, k):
        raise RankDeficiencyError(msg, extracted_count=k, result=ExtractionResult(
            indices=indices, step_scores=step_scores, residual_norms=res_norms))

    for k in range(r):
        norms_sq = linalg.column_norms_sq(R)
        if np.sqrt(norms_sq[active].max(initial=0.0)) <= 1e-12 * init_max:
            bail(f"residual vanished after {k} of {r} columns", k)
        c = _orthogonalize(stream.normals(d), Q, k)
        nc = float(np.sqrt(c @ c))
        tries = 0
        while nc <= 1e-12 and tries < 32:
            c = _orthogonalize(stream.normals(d), Q, k)
            nc = float(np.sqrt(c @ c))
            tries += 1
        if nc <= 1e-12:
            bail(f"no direction left in the complement after {k} columns", k)
        c = c / nc
        vals = np.abs(c @ R)
        vals[~active] = -1.0
        j = int(np.argmax(vals))
        u = R[:, j].copy()
        nu2 = float(u @ u)
        if nu2 == 0.0:
            bail(f"selected column has zero residual at step {k}", k)
        indices.append(j)
        step_scores.append(float(vals[j]))
        active[j] = False
        R -= np.outer(u, (u @ R) / nu2)
        R[:, j] = 0.0
        q = _orthogonalize(u, Q, k)
        Q[:, k] = q / np.sqrt(q @ q)
        rem = linalg.column_norms_sq(R)[active]
        res_norms.append(float(np.sqrt(rem.max(initial=0.0))))
    return ExtractionResult(indices=indices, step_scores=step_scores,
                            residual_norms=res_norms)


def sivm(M, opts):
    """Greedy simplex-volume heuristic under the equidistance assumption.

    Candidate score is sum_{i in S} log(d(m_j, m_i)^2 + eta); the start
    column is the one farthest from the column farthest from column 0.
    Deterministic; the seed is unused.
    """
    opts.validate()
    M = linalg.as_matrix(M)
    n = M.shape[1]
    r = opts.r
    if r < 2:
        raise InvalidOptionsError("sivm needs r >= 2")
    if r > n:
        raise InvalidOptionsError(f"r={r} exceeds column count {n}")
    eta = 1e-12
    norms_sq = linalg.column_norms_sq(M)
    d2 = norms_sq[:, None] + norms_sq[None, :] - 2.0 * (M.T @ M)
    np.maximum(d2, 0.0, out=d2)
    logd = np.log(d2 + eta)
    far = int(np.argmax(d2[0]))
    first = int(np.argmax(d2[far]))
    indices = [first]
    step_scores = [float(logd[far, first])]
    acc = logd[first].copy()
    acc[first] = -np.inf
    for _ in range(r - 1):
        j = int(np.argmax(acc))
        indices.append(j)
        step_scores.append(float(acc[j]))
        acc += logd[j]
        acc[j] = -np.inf
    return ExtractionResult(indices=indices, step_scores=step_scores,
                            residual_norms=[])
