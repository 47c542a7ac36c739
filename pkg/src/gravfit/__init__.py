"""Gravity-equation estimators: OLS, PPML, NLS and Tobit, from scratch."""

from .data_ingest import ColumnTable, fetch_archive, load_table, read_csv, read_dta, write_csv
from .estimators import (
    GAUSSIAN_LOG,
    QUASI_POISSON,
    FitResult,
    WarmStart,
    fit_glm_irls,
    fit_ols,
    fit_tobit_bhhh,
    search_censor_shift,
)
from .model_frame import DesignMatrix, ModelSpec, Transform, build_design, gravity_spec
from .report import ReplicationTable, render, run_replication

__version__ = "0.1.0"
