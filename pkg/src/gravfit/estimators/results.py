from dataclasses import dataclass, field

import numpy as np
from scipy import stats


@dataclass
class FitResult:
    """Estimates and inference for one fitted model.

    ``reference_dist`` selects the distribution behind p-values: ``"t"`` uses
    Student t with ``df_resid`` degrees of freedom, ``"normal"`` the standard
    normal (likelihood-based fits).
    """

    model: str
    names: tuple
    beta: np.ndarray
    cov: np.ndarray
    dispersion: float
    n_obs: int
    iterations: int
    converged: bool
    fitted_mu: np.ndarray = field(repr=False)
    linear_predictor: np.ndarray = field(repr=False)
    loglik: float | None = None
    df_resid: int | None = None
    reference_dist: str = "t"
    info: dict = field(default_factory=dict, repr=False)

    @property
    def se(self):
        return np.sqrt(np.diag(self.cov))

    @property
    def tvalues(self):
        return self.beta / self.se

    @property
    def pvalues(self):
        t = np.abs(self.tvalues)
        if self.reference_dist == "normal":
            return 2.0 * stats.norm.sf(t)
        return 2.0 * stats.t.sf(t, self.df_resid)

    def _index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"{self.model}: no coefficient named {name!r}") from None

    def coef(self, name):
        return float(self.beta[self._index(name)])

    def stderr(self, name):
        return float(self.se[self._index(name)])

    def as_dict(self):
        return {n: (float(b), float(s)) for n, b, s in zip(self.names, self.beta, self.se)}
