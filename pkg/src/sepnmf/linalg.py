"""Dense-matrix primitives: column norms, orthogonal-complement projection,
the rank-one norm-update identity, a one-sided Jacobi SVD, and Euclidean
projection onto the unit simplex.

Matrices are plain float64 numpy arrays held column-major (Fortran order);
`as_matrix` is the validating constructor every public entry point runs its
input through.  All functions are pure; nothing here mutates its arguments.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (
    ConvergenceFailureError,
    InvalidMatrixError,
    ZeroDirectionError,
)

SVD_MAX_SWEEPS = 60
SVD_REL_TOL = 1e-12


def as_matrix(a, name="matrix"):
    """Validate and return `a` as a column-major float64 2-D array.

    Rejects empty dimensions and non-finite entries.
    """
    out = np.asarray(a, dtype=float)
    if out.ndim != 2:
        raise InvalidMatrixError(f"{name} must be 2-D, got ndim={out.ndim}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise InvalidMatrixError(f"{name} must have at least one row and column, got {out.shape}")
    if not np.isfinite(out).all():
        raise InvalidMatrixError(f"{name} contains NaN or Inf entries")
    return np.asfortranarray(out)


def column_norms_sq(M):
    """Vector of squared Euclidean column norms."""
    M = as_matrix(M)
    return np.einsum("ij,ij->j", M, M)


def project_out(R, u):
    """Project every column of R onto the orthogonal complement of u.

    Returns R - (u/||u||^2) (u^T R).  Raises ZeroDirectionError when u = 0.
    """
    R = as_matrix(R, "R")
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != R.shape[0]:
        raise InvalidMatrixError(f"direction length {u.shape[0]} != row count {R.shape[0]}")
    nu2 = float(u @ u)
    if nu2 == 0.0:
        raise ZeroDirectionError("cannot project out a zero direction")
    coeffs = (u @ R) / nu2
    return R - np.outer(u, coeffs)


def norm_sq_after_projection(norm_sq_v, dot_uv, norm_sq_u):
    """Squared norm of v after projecting out u, from scalars only.

    ||(I - uu^T/||u||^2) v||^2 = ||v||^2 - (u^T v)^2/||u||^2, clamped at 0
    (the subtraction cancels catastrophically when u is almost parallel to v;
    only the argmax over columns matters downstream, so clamping is harmless).
    """
    if norm_sq_u == 0.0:
        raise ZeroDirectionError("norm_sq_u must be positive")
    return max(norm_sq_v - dot_uv * dot_uv / norm_sq_u, 0.0)


@njit(cache=True)
def _jacobi_sweeps(X, V, max_sweeps, tol):
    """Cyclic one-sided Jacobi sweeps on the rows of X (rows = columns of A).

    Rotates row pairs (p, q), p < q in lexicographic order, until every
    off-diagonal dot product satisfies |x_p.x_q| <= tol*||x_p||*||x_q||.
    The same rotations are applied to the rows of V.  Returns (sweeps,
    converged).
    """
    n, m = X.shape
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                a = 0.0
                b = 0.0
                c = 0.0
                for k in range(m):
                    xp = X[p, k]
                    xq = X[q, k]
                    a += xp * xp
                    b += xq * xq
                    c += xp * xq
                if abs(c) <= tol * np.sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (2.0 * c)
                sgn = 1.0 if zeta >= 0.0 else -1.0
                t = sgn / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * cs
                for k in range(m):
                    xp = X[p, k]
                    xq = X[q, k]
                    X[p, k] = cs * xp - sn * xq
                    X[q, k] = sn * xp + cs * xq
                for k in range(V.shape[1]):
                    vp = V[p, k]
                    vq = V[q, k]
                    V[p, k] = cs * vp - sn * vq
                    V[q, k] = sn * vp + cs * vq
        if not rotated:
            return sweeps, True
    return sweeps, False


def _complete_basis(U, bad):
    """Replace near-null columns of U (indices in `bad`) with unit vectors
    orthogonal to every other column."""
    m = U.shape[0]
    for j in bad:
        for k in range(m):
            v = np.zeros(m)
            v[k] = 1.0
            for _ in range(2):
                v -= U @ (U.T @ v)
            nv = np.sqrt(v @ v)
            if nv > 0.5 / np.sqrt(m):
                U[:, j] = v / nv
                break
    return U


def svd(M, max_sweeps=SVD_MAX_SWEEPS, rel_tol=SVD_REL_TOL):
    """Compact SVD via one-sided Jacobi with cyclic sweeps.

    Returns (U, S, V) with M = U @ diag(S) @ V.T, S nonnegative and
    non-increasing, and U, V orthonormal.  Raises ConvergenceFailureError if
    the sweep limit is exhausted before all rotations fall below `rel_tol`
    relative size.
    """
    A = as_matrix(M)
    m, n = A.shape
    if m < n:
        U, S, V = svd(A.T, max_sweeps=max_sweeps, rel_tol=rel_tol)
        return V, S, U
    # explicit copy: A.T of an F-ordered input is already C-contiguous and
    # the sweep kernel works in place
    X = np.array(A.T, dtype=float, order="C", copy=True)
    VR = np.eye(n)
    _, converged = _jacobi_sweeps(X, VR, max_sweeps, rel_tol)
    if not converged:
        raise ConvergenceFailureError(
            f"Jacobi SVD did not converge within {max_sweeps} sweeps on a {m}x{n} matrix"
        )
    s = np.sqrt(np.einsum("ij,ij->i", X, X))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    cutoff = max(m, n) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    safe = np.where(s > cutoff, s, 1.0)
    U = np.asfortranarray((X[order] / safe[:, None]).T)
    bad = np.nonzero(s <= cutoff)[0]
    if bad.size:
        U[:, bad] = 0.0
        U = _complete_basis(U, bad)
    V = np.asfortranarray(VR[order].T)
    return U, s, V


def _simplex_tau(Z):
    """Per-column threshold tau with sum(max(z - tau, 0)) = 1 (sort method)."""
    d = Z.shape[0]
    S = -np.sort(-Z, axis=0)
    css = np.cumsum(S, axis=0) - 1.0
    counts = np.arange(1, d + 1, dtype=float)[:, None]
    cond = S - css / counts > 0.0
    # row 0 always satisfies the condition; take the last row that does
    rho = d - 1 - np.argmax(cond[::-1, :], axis=0)
    cols = np.arange(Z.shape[1])
    return css[rho, cols] / (rho + 1.0)


def simplex_project_columns(Y):
    """Project every column of Y onto the unit simplex {x >= 0, sum x <= 1}."""
    Y = np.asarray(Y, dtype=float)
    out = np.maximum(Y, 0.0)
    over = out.sum(axis=0) > 1.0
    if over.any():
        tau = _simplex_tau(Y[:, over])
        out[:, over] = np.maximum(Y[:, over] - tau[None, :], 0.0)
    return out


def simplex_project(x):
    """Euclidean projection of a vector onto {x >= 0, sum x <= 1}.

    Points already in the simplex are returned unchanged; otherwise the
    nonnegative clip is used when it lands inside, else the sort-based
    projection onto the face {x >= 0, sum x = 1}.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.isfinite(x).all():
        raise InvalidMatrixError("simplex_project input must be finite")
    return simplex_project_columns(x[:, None])[:, 0]


@dataclass(frozen=True)
class WGeometry:
    """Column-geometry constants of a basis matrix W.

    K/nu are the max/min column norms, gamma the min pairwise column
    distance, omega = min(nu, gamma/sqrt(2)); omega >= sigma_min always
    holds, and sigma_max >= K >= nu >= omega.
    """

    K: float
    nu: float
    gamma: float
    omega: float
    sigma_min: float
    sigma_max: float
    kappa: float


def w_geometry(W):
    """Compute the WGeometry constants (gamma is +inf for a single column)."""
    W = as_matrix(W, "W")
    norms_sq = column_norms_sq(W)
    norms = np.sqrt(norms_sq)
    K = float(norms.max())
    nu = float(norms.min())
    r = W.shape[1]
    if r > 1:
        gram = W.T @ W
        d2 = norms_sq[:, None] + norms_sq[None, :] - 2.0 * gram
        iu = np.triu_indices(r, k=1)
        gamma = float(np.sqrt(max(d2[iu].min(), 0.0)))
    else:
        gamma = np.inf
    omega = min(nu, gamma / np.sqrt(2.0))
    s = svd(W)[1]
    sigma_max = float(s[0])
    sigma_min = float(s[-1])
    kappa = sigma_max / sigma_min if sigma_min > 0 else np.inf
    return WGeometry(K=K, nu=nu, gamma=gamma, omega=omega,
                     sigma_min=sigma_min, sigma_max=sigma_max, kappa=kappa)
