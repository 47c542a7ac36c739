"""Left-censored normal regression (Tobit) fitted with BHHH.

Parameters are ``theta = (beta, logSigma)``. The censoring bound is the
smallest response value; rows at the bound contribute ``log Phi`` terms.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import DefinitenessError, FitError, NonConvergenceError, SearchFailureError
from ..linalg import invert_spd
from ..model_frame import Transform, build_design
from .results import FitResult

log = logging.getLogger(__name__)

LOG_SIGMA = "logSigma"


@dataclass(frozen=True)
class TobitProblem:
    design: object
    left_bound: float
    censored: np.ndarray

    @classmethod
    def from_design(cls, design, left_bound=None):
        y = design.y
        bound = float(np.min(y)) if left_bound is None else float(left_bound)
        censored = y <= bound
        censored.setflags(write=False)
        return cls(design=design, left_bound=bound, censored=censored)

    @property
    def names(self):
        return (*self.design.names, LOG_SIGMA)

    @property
    def n_params(self):
        return self.design.p + 1

    def terms(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.n_params,):
            raise ValueError(f"theta has shape {theta.shape}, expected ({self.n_params},)")
        xb = self.design.X @ theta[:-1]
        return _kernels.tobit_terms(self.design.y, xb, self.censored, self.left_bound, theta[-1])


def tobit_loglik(problem, theta):
    ll, _, _ = problem.terms(theta)
    return float(np.sum(ll))


def tobit_score(problem, theta):
    """Per-observation gradient matrix, shape (n, p + 1)."""
    _, d_xb, d_ls = problem.terms(theta)
    return np.column_stack((problem.design.X * d_xb[:, None], d_ls))


def tobit_hessian(problem, theta):
    """Analytic Hessian of the total log-likelihood in (beta, logSigma)."""
    theta = np.asarray(theta, dtype=np.float64)
    X, y = problem.design.X, problem.design.y
    xb = X @ theta[:-1]
    sigma = np.exp(theta[-1])
    cens = problem.censored
    _, d_xb, d_ls = problem.terms(theta)

    z = (y - xb) / sigma
    w = (problem.left_bound - xb) / sigma
    lam = np.where(cens, -d_xb * sigma, 0.0)  # phi(w) / Phi(w)
    dlam = lam * (w + lam)
    h_bb = np.where(cens, -dlam / sigma**2, -1.0 / sigma**2)
    h_bs = np.where(cens, (lam - w * dlam) / sigma, -2.0 * z / sigma)
    h_ss = np.where(cens, lam * w - w * w * dlam, -2.0 * z * z)

    k = problem.n_params
    H = np.empty((k, k))
    H[:-1, :-1] = (X * h_bb[:, None]).T @ X
    H[:-1, -1] = H[-1, :-1] = X.T @ h_bs
    H[-1, -1] = h_ss.sum()
    return H


def _gradient_and_opg(problem, theta):
    ll, d_xb, d_ls = problem.terms(theta)
    X = problem.design.X
    grad = np.append(X.T @ d_xb, d_ls.sum())
    return float(np.sum(ll)), grad, _kernels.opg(X, d_xb, d_ls)


def fit_tobit_bhhh(
    problem,
    start=None,
    max_iter=500,
    gradtol=1e-6,
    reltol=1e-9,
    min_step=2.0**-30,
    cov_type="opg",
    model="tobit",
):
    """Maximise the Tobit log-likelihood with BHHH steps and step halving.

    Each iteration moves along ``inv(OPG) @ grad``, halving the step length
    from 1 until the log-likelihood increases. Iteration stops when
    ``max|grad| < gradtol`` or the relative log-likelihood change falls below
    ``reltol``. If no step length down to ``min_step`` improves the
    objective the change is zero and the fit is reported as converged.

    ``cov_type="opg"`` reports ``inv(OPG)`` at the optimum; ``"hessian"``
    reports the inverse of minus the analytic Hessian.
    """
    k = problem.n_params
    theta = np.zeros(k) if start is None else np.array(start, dtype=np.float64)
    if theta.shape != (k,):
        raise ValueError(f"start vector has {theta.size} entries, expected {k}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("start vector must be finite")

    ll, grad, opg = _gradient_and_opg(problem, theta)
    if not np.isfinite(ll):
        raise FitError("log-likelihood is not finite at the start vector")
    trace = [ll]
    converged = False
    reason = ""
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(grad)) < gradtol:
            converged, reason, it = True, "gradient", it - 1
            break
        try:
            direction = invert_spd(opg) @ grad
        except DefinitenessError as exc:
            raise FitError(f"outer-product-of-gradients matrix is singular at iteration {it}") from exc
        lam = 1.0
        while True:
            cand = theta + lam * direction
            ll_new = tobit_loglik(problem, cand)
            if np.isfinite(ll_new) and ll_new > ll:
                break
            lam *= 0.5
            if lam < min_step:
                cand, ll_new = theta, ll
                break
        change = abs(ll_new - ll) / max(abs(ll), 1e-300)
        theta = cand
        ll, grad, opg = _gradient_and_opg(problem, theta)
        trace.append(ll)
        log.debug("bhhh iter %d loglik %.12g step %.3g max|g| %.3g", it, ll, lam, np.max(np.abs(grad)))
        if change < reltol:
            converged, reason = True, "loglik" if lam >= min_step else "no_improvement"
            break
    if not converged:
        raise NonConvergenceError(
            f"BHHH did not converge in {max_iter} iterations", last_iterate=theta, trace=trace
        )

    if cov_type == "opg":
        cov_src = opg
    elif cov_type == "hessian":
        cov_src = -tobit_hessian(problem, theta)
    else:
        raise ValueError(f"unknown cov_type {cov_type!r}")
    try:
        cov = invert_spd(cov_src)
    except DefinitenessError as exc:
        raise FitError(f"{cov_type} matrix is not positive definite at the optimum") from exc

    xb = problem.design.X @ theta[:-1]
    return FitResult(
        model=model,
        names=problem.names,
        beta=theta,
        cov=cov,
        dispersion=1.0,
        n_obs=problem.design.n,
        iterations=it,
        converged=True,
        fitted_mu=xb,
        linear_predictor=xb,
        loglik=ll,
        df_resid=None,
        reference_dist="normal",
        info={
            "left_bound": problem.left_bound,
            "n_censored": int(problem.censored.sum()),
            "loglik_trace": trace,
            "stop_reason": reason,
            "cov_type": cov_type,
            "max_abs_gradient": float(np.max(np.abs(grad))),
        },
    )


def tobit_problem(table, spec, a):
    design = build_design(table, spec.with_transform(Transform.log_shift(a)))
    return TobitProblem.from_design(design)


@dataclass
class ShiftSearchState:
    a: float
    target: float
    tol: float
    iterations: int = 0
    trace: list = field(default_factory=list)  # (a used for the fit, slope estimate)

    @property
    def fitted_a(self):
        return self.trace[-1][0] if self.trace else None


def search_censor_shift(table, spec, target=1.058, tol=0.001, a0=200.0, slope_index=1, on_step=None, **fit_kw):
    """Search the shift ``a`` in ``log(a + y)`` so a Tobit slope hits ``target``.

    Each pass fits the Tobit at the current ``a`` from a zero start and reads
    coefficient ``slope_index``. ``a`` drops by 5 while the estimate is more
    than ``2 * tol`` off target and by 1 otherwise; the loop ends once the
    estimate is within ``tol``. The decrement is applied on the final pass as
    well, so the returned ``a`` is one below the shift used by the returned
    fit (``state.fitted_a``).

    Returns
    -------
    a : float
    state : ShiftSearchState
    fit : FitResult
    """
    if not a0 > 0:
        raise SearchFailureError(f"initial shift must be positive, got {a0}", a=a0)
    state = ShiftSearchState(a=float(a0), target=target, tol=tol)
    a = float(a0)
    estimate = 2.0 * target
    fit = None
    while fit is None or abs(estimate - target) > tol:
        if not a > 0:
            raise SearchFailureError(
                f"shift search reached a={a:g} without |slope - {target}| <= {tol}", a=a, trace=state.trace
            )
        try:
            fit = fit_tobit_bhhh(tobit_problem(table, spec, a), **fit_kw)
        except FitError as exc:
            exc.a = a
            exc.args = (f"{exc} (shift search at a={a:g})",) + exc.args[1:]
            raise
        estimate = float(fit.beta[slope_index])
        state.trace.append((a, estimate))
        state.iterations += 1
        log.info("shift search: a=%g slope=%.6f iterations=%d", a, estimate, fit.iterations)
        if on_step is not None:
            on_step(a, estimate, fit)
        a = a - 5.0 if abs(estimate - target) > 2.0 * tol else a - 1.0
        state.a = a
    fit.info["shift"] = state.fitted_a
    return a, state, fit
