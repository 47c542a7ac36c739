from .glm import GAUSSIAN_LOG, QUASI_POISSON, Family, WarmStart, fit_glm_irls
from .ols import fit_ols
from .results import FitResult
from .tobit import (
    ShiftSearchState,
    TobitProblem,
    fit_tobit_bhhh,
    search_censor_shift,
    tobit_hessian,
    tobit_loglik,
    tobit_problem,
    tobit_score,
)

__all__ = [
    "Family",
    "FitResult",
    "GAUSSIAN_LOG",
    "QUASI_POISSON",
    "ShiftSearchState",
    "TobitProblem",
    "WarmStart",
    "fit_glm_irls",
    "fit_ols",
    "fit_tobit_bhhh",
    "search_censor_shift",
    "tobit_hessian",
    "tobit_loglik",
    "tobit_problem",
    "tobit_score",
]
