"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``GRAVFIT_DISABLE_NUMBA=1`` before import to force the numpy path.
Both implementations are always importable as ``numba_impl`` / ``numpy_impl``
so the test-suite and the benchmark can compare them directly.
"""

import math
import os
import types

import numpy as np
from scipy import special

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

DISABLED = os.environ.get("GRAVFIT_DISABLE_NUMBA", "").strip().lower() not in (
    "",
    "0",
    "false",
    "no",
)
HAVE_NUMBA = numba is not None

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT1_2 = math.sqrt(0.5)
# below this point log(Phi) and phi/Phi use an asymptotic series
_TAIL = -20.0


def _maybe_njit(fn, reassoc=False):
    if numba is None:
        return fn
    # reassociation lets the reductions vectorise; NaN/inf semantics are kept
    return numba.njit(cache=True, fastmath={"reassoc"} if reassoc else False)(fn)


# ---------------------------------------------------------------------------
# numba sources (plain loops; also valid, if slow, as pure Python)
# ---------------------------------------------------------------------------


def _log_ndtr_and_mills(w):
    """Return (log Phi(w), phi(w)/Phi(w)) for scalar w."""
    if w > _TAIL:
        cdf = 0.5 * math.erfc(-w * _SQRT1_2)
        logpdf = -0.5 * w * w - _LOG_SQRT_2PI
        if w > 3.0:
            # upper tail: keep the tiny deficit 1 - Phi(w)
            return math.log1p(-0.5 * math.erfc(w * _SQRT1_2)), math.exp(logpdf) / cdf
        return math.log(cdf), math.exp(logpdf) / cdf
    w2 = 1.0 / (w * w)
    series = 1.0 - w2 * (1.0 - 3.0 * w2 * (1.0 - 5.0 * w2 * (1.0 - 7.0 * w2)))
    logpdf = -0.5 * w * w - _LOG_SQRT_2PI
    return logpdf - math.log(-w) + math.log(series), -w / series


def _tobit_terms_loop(y, xb, censored, bound, log_sigma):
    n = y.shape[0]
    sigma = math.exp(log_sigma)
    ll = np.empty(n)
    d_xb = np.empty(n)
    d_ls = np.empty(n)
    for i in range(n):
        if censored[i]:
            w = (bound - xb[i]) / sigma
            lcdf, mills = _log_ndtr_and_mills(w)
            ll[i] = lcdf
            d_xb[i] = -mills / sigma
            d_ls[i] = -mills * w
        else:
            z = (y[i] - xb[i]) / sigma
            ll[i] = -0.5 * z * z - _LOG_SQRT_2PI - log_sigma
            d_xb[i] = z / sigma
            d_ls[i] = z * z - 1.0
    return ll, d_xb, d_ls


def _opg_loop(X, d_xb, d_ls):
    n, p = X.shape
    k = p + 1
    # score rows stored column-wise so each dot product streams contiguous memory
    G = np.empty((k, n))
    for i in range(n):
        for j in range(p):
            G[j, i] = X[i, j] * d_xb[i]
        G[p, i] = d_ls[i]
    out = np.empty((k, k))
    for a in range(k):
        for b in range(a, k):
            s = 0.0
            for i in range(n):
                s += G[a, i] * G[b, i]
            out[a, b] = s
            out[b, a] = s
    return out


def _householder_loop(A, b):
    """Householder QR of A (n x p, n >= p) applied to b.

    Returns (R, qtb) with R upper-triangular p x p and qtb = (Q^T b)[:p].
    """
    n, p = A.shape
    Rt = A.T.copy()  # column j of A is the contiguous row Rt[j]
    qtb = b.copy()
    v = np.empty(n)
    for j in range(p):
        norm = 0.0
        for i in range(j, n):
            norm += Rt[j, i] * Rt[j, i]
        norm = math.sqrt(norm)
        if norm == 0.0:
            continue
        alpha = -norm if Rt[j, j] >= 0.0 else norm
        for i in range(j, n):
            v[i] = Rt[j, i]
        v[j] -= alpha
        vnorm2 = 0.0
        for i in range(j, n):
            vnorm2 += v[i] * v[i]
        if vnorm2 == 0.0:
            continue
        for c in range(j, p):
            s = 0.0
            for i in range(j, n):
                s += v[i] * Rt[c, i]
            s = 2.0 * s / vnorm2
            for i in range(j, n):
                Rt[c, i] -= s * v[i]
        s = 0.0
        for i in range(j, n):
            s += v[i] * qtb[i]
        s = 2.0 * s / vnorm2
        for i in range(j, n):
            qtb[i] -= s * v[i]
    out = np.zeros((p, p))
    for i in range(p):
        for c in range(i, p):
            out[i, c] = Rt[c, i]
    return out, qtb[:p].copy()


def _cholesky_loop(A):
    """Lower Cholesky factor; returns (L, failed_pivot) with -1 on success."""
    p = A.shape[0]
    L = np.zeros((p, p))
    for j in range(p):
        s = A[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not s > 0.0:
            return L, j
        d = math.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, p):
            t = A[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / d
    return L, -1


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _tobit_terms_np(y, xb, censored, bound, log_sigma):
    sigma = np.exp(log_sigma)
    cens = np.asarray(censored, dtype=bool)
    z = (y - xb) / sigma
    w = (bound - xb) / sigma
    lcdf = special.log_ndtr(np.where(cens, w, 0.0))
    logpdf = -0.5 * w * w - _LOG_SQRT_2PI
    mills = np.exp(logpdf - lcdf)
    ll = np.where(cens, lcdf, -0.5 * z * z - _LOG_SQRT_2PI - log_sigma)
    d_xb = np.where(cens, -mills / sigma, z / sigma)
    d_ls = np.where(cens, -mills * w, z * z - 1.0)
    return ll, d_xb, d_ls


def _opg_np(X, d_xb, d_ls):
    G = np.column_stack((X * d_xb[:, None], d_ls))
    return G.T @ G


def _householder_np(A, b):
    Q, R = np.linalg.qr(A, mode="reduced")
    return R, Q.T @ b


def _cholesky_np(A):
    p = A.shape[0]
    L = np.zeros((p, p))
    for j in range(p):
        s = A[j, j] - L[j, :j] @ L[j, :j]
        if not s > 0.0:
            return L, j
        L[j, j] = np.sqrt(s)
        L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L, -1


numpy_impl = types.SimpleNamespace(
    name="numpy",
    tobit_terms=_tobit_terms_np,
    opg=_opg_np,
    householder=_householder_np,
    cholesky=_cholesky_np,
)

if HAVE_NUMBA:
    _log_ndtr_and_mills = _maybe_njit(_log_ndtr_and_mills)
    numba_impl = types.SimpleNamespace(
        name="numba",
        tobit_terms=_maybe_njit(_tobit_terms_loop),
        opg=_maybe_njit(_opg_loop, reassoc=True),
        householder=_maybe_njit(_householder_loop, reassoc=True),
        cholesky=_maybe_njit(_cholesky_loop),
    )
else:  # pragma: no cover
    numba_impl = None

active = numpy_impl if (DISABLED or numba_impl is None) else numba_impl


def tobit_terms(y, xb, censored, bound, log_sigma):
    """Per-row Tobit log-likelihood and its derivatives.

    Returns ``(ll, d_xb, d_ls)``: each row's contribution, its derivative
    with respect to the linear index and with respect to log(sigma).
    """
    return active.tobit_terms(
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(xb, dtype=np.float64),
        np.ascontiguousarray(censored, dtype=np.bool_),
        float(bound),
        float(log_sigma),
    )


def opg(X, d_xb, d_ls):
    """Sum of outer products of per-row scores ``[d_xb * x_i, d_ls]``."""
    return active.opg(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(d_xb, dtype=np.float64),
        np.ascontiguousarray(d_ls, dtype=np.float64),
    )


def householder(A, b):
    return active.householder(
        np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
    )


def cholesky(A):
    return active.cholesky(np.ascontiguousarray(A, dtype=np.float64))
