"""Log-link GLMs fitted by iteratively reweighted least squares.

Two families are supported, both with a log link:

* ``quasi_poisson``: variance proportional to the mean, dispersion from the
  Pearson statistic. Point estimates are the Poisson pseudo-ML estimates.
* ``gaussian_log``: constant variance, i.e. nonlinear least squares for
  ``E[y|x] = exp(x'b)``. Dispersion is RSS / (n - p).
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError, NonConvergenceError
from ..linalg import solve_wls
from .results import FitResult

log = logging.getLogger(__name__)

# exp() overflows a double a little above 709
_ETA_MAX = 700.0


@dataclass(frozen=True)
class Family:
    kind: str

    def __post_init__(self):
        if self.kind not in ("quasi_poisson", "gaussian_log"):
            raise ValueError(f"unknown family {self.kind!r}")

    link = "log"

    @property
    def dispersion_rule(self):
        return "pearson_over_df" if self.kind == "quasi_poisson" else "rss_over_df"

    def variance(self, mu):
        return mu if self.kind == "quasi_poisson" else np.ones_like(mu)

    def deviance(self, y, mu):
        if self.kind == "gaussian_log":
            r = y - mu
            return float(r @ r)
        with np.errstate(divide="ignore", invalid="ignore"):
            ylogy = np.where(y > 0, y * np.log(y / mu), 0.0)
        return float(2.0 * np.sum(ylogy - (y - mu)))

    def check_response(self, y):
        if self.kind == "quasi_poisson" and np.any(y < 0):
            raise ValueError("quasi-Poisson response must be nonnegative")


QUASI_POISSON = Family("quasi_poisson")
GAUSSIAN_LOG = Family("gaussian_log")


@dataclass(frozen=True)
class WarmStart:
    """Starting point carried over from a previous fit.

    The linear predictor wins over the coefficients when both are given.
    """

    coefficients: np.ndarray | None = None
    linear_predictor: np.ndarray | None = None
    fitted: np.ndarray | None = None

    @classmethod
    def from_fit(cls, fit):
        return cls(fit.beta.copy(), fit.linear_predictor.copy(), fit.fitted_mu.copy())


def _initial_eta(X, y, start):
    n, p = X.shape
    if start is not None:
        if start.linear_predictor is not None:
            eta = np.asarray(start.linear_predictor, dtype=np.float64)
            if eta.shape != (n,):
                raise ValueError("warm-start linear predictor has the wrong length")
            return eta.copy()
        if start.coefficients is not None:
            b = np.asarray(start.coefficients, dtype=np.float64)
            if b.shape != (p,):
                raise ValueError("warm-start coefficients have the wrong length")
            return X @ b
        if start.fitted is not None:
            mu = np.asarray(start.fitted, dtype=np.float64)
            if mu.shape != (n,) or np.any(mu <= 0):
                raise ValueError("warm-start fitted values must be positive with length n")
            return np.log(mu)
    return np.log(y + 0.1)


def fit_glm_irls(design, family=QUASI_POISSON, start=None, max_iter=25, epsilon=1e-8, model=None, dispersion=None):
    """Fit a log-link GLM by IRLS.

    Parameters
    ----------
    design : DesignMatrix
    family : Family
    start : WarmStart, optional
        Without one the iteration starts from ``mu = y + 0.1``.
    max_iter : int
    epsilon : float
        Convergence when ``|dev - dev_old| / (|dev| + 0.1) < epsilon``.
    dispersion : float, optional
        Fix the dispersion instead of estimating it (1.0 gives plain Poisson
        standard errors). Point estimates do not depend on it.

    Returns
    -------
    FitResult
        ``cov = dispersion * inv(X' W X)`` evaluated at the converged mean.

    Raises
    ------
    NonConvergenceError
        After ``max_iter`` iterations; ``last_iterate`` holds the coefficients.
    DivergenceError
        If the linear predictor grows large enough to overflow ``exp``.
    """
    X, y = design.X, design.y
    n, p = X.shape
    family.check_response(y)

    eta = _initial_eta(X, y, start)
    if np.any(eta > _ETA_MAX) or not np.all(np.isfinite(eta)):
        raise DivergenceError("initial linear predictor is not finite or overflows exp()")
    mu = np.exp(eta)
    dev_old = family.deviance(y, mu)
    beta = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        var = family.variance(mu)
        w = mu * mu / var
        z = eta + (y - mu) / mu
        beta, _ = solve_wls(X, z, w, names=design.names)
        eta = X @ beta
        if not np.all(np.isfinite(eta)) or np.any(eta > _ETA_MAX):
            raise DivergenceError(f"IRLS diverged at iteration {it}: linear predictor overflows exp()")
        mu = np.exp(eta)
        dev = family.deviance(y, mu)
        if not np.isfinite(dev):
            raise DivergenceError(f"IRLS diverged at iteration {it}: deviance is not finite")
        log.debug("irls %s iter %d deviance %.10g", family.kind, it, dev)
        if abs(dev - dev_old) / (abs(dev) + 0.1) < epsilon:
            converged = True
            break
        dev_old = dev
    if not converged:
        raise NonConvergenceError(
            f"IRLS ({family.kind}) did not converge in {max_iter} iterations", last_iterate=beta
        )

    var = family.variance(mu)
    w = mu * mu / var
    _, xtwx_inv = solve_wls(X, np.zeros(n), w, names=design.names)
    df = n - p
    resid = y - mu
    if dispersion is not None:
        dispersion = float(dispersion)
    elif family.kind == "quasi_poisson":
        dispersion = float(np.sum(resid * resid / mu)) / df
    else:
        dispersion = float(resid @ resid) / df
    return FitResult(
        model=model or family.kind,
        names=tuple(design.names),
        beta=beta,
        cov=dispersion * xtwx_inv,
        dispersion=dispersion,
        n_obs=n,
        iterations=it,
        converged=True,
        fitted_mu=mu,
        linear_predictor=eta,
        loglik=None,
        df_resid=df,
        reference_dist="t",
        info={"deviance": dev, "family": family.kind},
    )
