"""Weighted least squares via Householder QR, and SPD inversion."""

import numpy as np
from scipy.linalg import solve_triangular

from . import _kernels
from .errors import DefinitenessError, RankDeficiencyError

RANK_TOL = 1e-10


def solve_wls(X, y, w=None, names=None):
    """Minimise ``sum(w * (y - X @ beta)**2)``.

    Parameters
    ----------
    X : ndarray, shape (n, p)
    y : ndarray, shape (n,)
    w : ndarray, shape (n,), optional
        Nonnegative weights; ones when omitted.
    names : sequence of str, optional
        Column names, used in the rank-deficiency message.

    Returns
    -------
    beta : ndarray, shape (p,)
    xtwx_inv : ndarray, shape (p, p)
        ``inv(X.T @ diag(w) @ X)``, computed from the triangular factor.

    Raises
    ------
    RankDeficiencyError
        If a diagonal element of R falls below ``RANK_TOL`` times the largest.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be two-dimensional")
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n < p:
        raise ValueError(f"underdetermined system: n={n} < p={p}")
    if w is None:
        sw = np.ones(n)
    else:
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (n,) or np.any(w < 0):
            raise ValueError("weights must be a nonnegative vector of length n")
        sw = np.sqrt(w)

    R, qtb = _kernels.householder(X * sw[:, None], y * sw)
    diag = np.abs(np.diag(R))
    top = diag.max() if p else 0.0
    for j in range(p):
        if not diag[j] > RANK_TOL * top:
            label = names[j] if names is not None else f"x{j}"
            raise RankDeficiencyError(label, j)
    beta = solve_triangular(R, qtb, lower=False)
    r_inv = solve_triangular(R, np.eye(p), lower=False)
    xtwx_inv = r_inv @ r_inv.T
    return beta, 0.5 * (xtwx_inv + xtwx_inv.T)


def invert_spd(A):
    """Inverse of a symmetric positive-definite matrix via Cholesky."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(np.abs(A).max(), 1e-300)
    if np.abs(A - A.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    L, failed = _kernels.cholesky(0.5 * (A + A.T))
    if failed >= 0:
        raise DefinitenessError(int(failed))
    l_inv = solve_triangular(L, np.eye(A.shape[0]), lower=True)
    out = l_inv.T @ l_inv
    return 0.5 * (out + out.T)
