"""Synthetic bilateral-trade data with the replication dataset's columns.

Used by the test-suite and the benchmark when the real file is unavailable,
and to exercise the whole pipeline at realistic sizes.
"""

import numpy as np

from .data_ingest import ColumnTable
from .model_frame import GRAVITY_REGRESSORS

# slopes near the full-sample PPML estimates; intercept set for a ~50% zero share
DEFAULT_BETA = np.array(
    [-18.0, 0.73, 0.74, 0.16, 0.14, -0.78, 0.19, 0.75, 0.03, -0.86, -0.70, 0.66, 0.56, 0.18, -0.11]
)


def gravity_table(n=18360, seed=0, beta=DEFAULT_BETA, shape=0.7, zero_below=25.0):
    """Draw a gravity-shaped table.

    Trade is ``exp(x'b)`` times mean-one gamma noise, recorded as zero when it
    falls below ``zero_below`` (mimicking reporting thresholds).
    """
    rng = np.random.default_rng(seed)
    n_countries = max(int(np.sqrt(n)) + 1, 3)
    lyc = rng.normal(24.0, 2.0, n_countries)
    lypc = rng.normal(8.0, 1.2, n_countries)
    landl = (rng.random(n_countries) < 0.15).astype(float)
    lremot = rng.normal(8.5, 0.4, n_countries)
    wto = (rng.random(n_countries) < 0.6).astype(float)

    ex = rng.integers(0, n_countries, n)
    im = (ex + rng.integers(1, n_countries, n)) % n_countries
    cols = {
        "lypex": lypc[ex],
        "lypim": lypc[im],
        "lyex": lyc[ex],
        "lyim": lyc[im],
        "ldist": rng.normal(8.2, 0.8, n),
        "border": (rng.random(n) < 0.03).astype(float),
        "comlang": (rng.random(n) < 0.15).astype(float),
        "colony": (rng.random(n) < 0.12).astype(float),
        "landl_ex": landl[ex],
        "landl_im": landl[im],
        "lremot_ex": lremot[ex],
        "lremot_im": lremot[im],
        "comfrt_wto": (rng.random(n) < 0.05).astype(float),
        "open_wto": wto[ex] * wto[im],
    }
    X = np.column_stack([np.ones(n)] + [cols[k] for k in GRAVITY_REGRESSORS])
    mu = np.exp(X @ np.asarray(beta, dtype=float))
    trade = mu * rng.gamma(shape, 1.0 / shape, n)
    trade[trade < zero_below] = 0.0
    return ColumnTable({"trade": trade, **cols}, source=f"synthetic(n={n}, seed={seed})")


def tobit_data(n=200, p=3, seed=0, censor_quantile=0.3, sigma=1.0):
    """Small left-censored normal regression problem: (X, y) with X[:, 0] = 1."""
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
    beta = rng.normal(size=p)
    y = X @ beta + sigma * rng.normal(size=n)
    if censor_quantile > 0:
        c = np.quantile(y, censor_quantile)
        y = np.maximum(y, c)
    return X, y
