import numpy as np

from ..linalg import solve_wls
from .results import FitResult


def fit_ols(design, model="ols"):
    """Ordinary least squares with classical standard errors.

    ``cov = s2 * inv(X'X)`` with ``s2 = RSS / (n - p)``.
    """
    X, y = design.X, design.y
    n, p = X.shape
    beta, xtx_inv = solve_wls(X, y, names=design.names)
    fitted = X @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    df = n - p
    s2 = rss / df if df > 0 else np.nan
    loglik = -0.5 * n * (np.log(2.0 * np.pi * rss / n) + 1.0) if rss > 0 else np.inf
    return FitResult(
        model=model,
        names=tuple(design.names),
        beta=beta,
        cov=s2 * xtx_inv,
        dispersion=s2,
        n_obs=n,
        iterations=1,
        converged=True,
        fitted_mu=fitted,
        linear_predictor=fitted,
        loglik=loglik,
        df_resid=df,
        reference_dist="t",
        info={"rss": rss},
    )
