"""Independent reference computations shared by the test modules."""

import math

import numpy as np
import scipy.stats


def gauss_solve(A, b):
    """Plain Gaussian elimination with partial pivoting."""
    A = [list(map(float, row)) for row in A]
    b = list(map(float, b))
    n = len(b)
    for k in range(n):
        piv = max(range(k, n), key=lambda i: abs(A[i][k]))
        A[k], A[piv] = A[piv], A[k]
        b[k], b[piv] = b[piv], b[k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            for j in range(k, n):
                A[i][j] -= f * A[k][j]
            b[i] -= f * b[k]
    x = [0.0] * n
    for i in reversed(range(n)):
        x[i] = (b[i] - sum(A[i][j] * x[j] for j in range(i + 1, n))) / A[i][i]
    return np.array(x)


def central_diff(f, theta):
    """Central differences with step 1e-6 * max(1, |theta_j|)."""
    g = np.empty_like(theta)
    for j in range(theta.size):
        h = 1e-6 * max(1.0, abs(theta[j]))
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (f(up) - f(dn)) / (2 * h)
    return g


def reference_tobit_loglik(problem, theta):
    """Tobit log-likelihood built on scipy.stats."""
    X, y = problem.design.X, problem.design.y
    s = math.exp(theta[-1])
    xb = X @ theta[:-1]
    c = problem.censored
    return float(
        np.sum(scipy.stats.norm.logcdf((problem.left_bound - xb[c]) / s))
        + np.sum(scipy.stats.norm.logpdf(y[~c], loc=xb[~c], scale=s))
    )
