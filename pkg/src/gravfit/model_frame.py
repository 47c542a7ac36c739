"""From a ColumnTable and a ModelSpec to numeric arrays."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, EmptyDesignError, MissingValueError

GRAVITY_REGRESSORS = (
    "lypex",
    "lypim",
    "lyex",
    "lyim",
    "ldist",
    "border",
    "comlang",
    "colony",
    "landl_ex",
    "landl_im",
    "lremot_ex",
    "lremot_im",
    "comfrt_wto",
    "open_wto",
)

INTERCEPT = "(Intercept)"
TRANSFORMS = ("identity", "log", "log1p", "log_shift")
ROW_FILTERS = ("all", "positive_response")


@dataclass(frozen=True)
class Transform:
    kind: str = "identity"
    shift: float | None = None

    def __post_init__(self):
        if self.kind not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.kind!r}")
        if self.kind == "log_shift":
            if self.shift is None or not self.shift > 0:
                raise ValueError(f"log_shift needs a positive shift, got {self.shift!r}")
        elif self.shift is not None:
            raise ValueError(f"transform {self.kind!r} takes no shift")

    @classmethod
    def log_shift(cls, a):
        return cls("log_shift", float(a))

    def __str__(self):
        return f"log_shift({self.shift:g})" if self.kind == "log_shift" else self.kind


IDENTITY = Transform("identity")
LOG = Transform("log")
LOG1P = Transform("log1p")


def _as_transform(t):
    return t if isinstance(t, Transform) else Transform(t)


@dataclass(frozen=True)
class ModelSpec:
    """One regression: response (after transform) on an intercept and regressors."""

    response: str = "trade"
    transform: Transform = IDENTITY
    regressors: tuple = GRAVITY_REGRESSORS
    row_filter: str = "all"
    include_intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "transform", _as_transform(self.transform))
        object.__setattr__(self, "regressors", tuple(self.regressors))
        if not self.regressors:
            raise ValueError("regressor list is empty")
        if len(set(self.regressors)) != len(self.regressors):
            raise ValueError("duplicate regressors")
        if self.response in self.regressors:
            raise ValueError(f"response {self.response!r} is also a regressor")
        if self.row_filter not in ROW_FILTERS:
            raise ValueError(f"unknown row filter {self.row_filter!r}")

    def with_transform(self, transform):
        return ModelSpec(self.response, transform, self.regressors, self.row_filter, self.include_intercept)


@dataclass(frozen=True)
class DesignMatrix:
    y: np.ndarray
    X: np.ndarray
    names: tuple
    rows: np.ndarray = field(repr=False)  # indices of surviving table rows

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]


def _transform_argument(v, t):
    if t.kind == "log":
        return v
    if t.kind == "log1p":
        return 1.0 + v
    return t.shift + v


def response_transform(value, transform):
    """Apply a response transform to a scalar (natural logs throughout)."""
    t = _as_transform(transform)
    v = float(value)
    if t.kind == "identity":
        return v
    arg = _transform_argument(v, t)
    if not arg > 0:
        raise DomainError(f"{t}: value {v!r} outside the domain")
    if t.kind == "log1p":
        return math.log1p(v)
    return math.log(arg)


def _transform_vector(values, t, rows):
    if t.kind == "identity":
        return values.copy()
    arg = _transform_argument(values, t)
    bad = np.flatnonzero(~(arg > 0))
    if bad.size:
        i = bad[0]
        raise DomainError(f"{t} undefined for response value {values[i]!r} at table row {rows[i]}")
    if t.kind == "log1p":
        return np.log1p(values)
    return np.log(arg)


def build_design(table, spec):
    """Filter rows, transform the response and stack the regressors.

    Rows are dropped by ``spec.row_filter`` before the transform is applied.
    Any NaN in a referenced column is an error; nothing is dropped silently.
    """
    for name in (spec.response, *spec.regressors):
        table[name]

    response = np.asarray(table[spec.response])
    if spec.row_filter == "positive_response":
        rows = np.flatnonzero(response > 0)
    else:
        rows = np.arange(table.n_rows)
    if rows.size == 0:
        raise EmptyDesignError(f"no rows left for response {spec.response!r} under filter {spec.row_filter!r}")

    raw_y = response[rows]
    for name in (spec.response, *spec.regressors):
        col = np.asarray(table[name])[rows]
        bad = np.flatnonzero(~np.isfinite(col))
        if bad.size:
            raise MissingValueError(f"column {name!r} has a missing/non-finite value at table row {rows[bad[0]]}")

    y = _transform_vector(raw_y, spec.transform, rows)
    cols = [np.asarray(table[name])[rows] for name in spec.regressors]
    names = list(spec.regressors)
    if spec.include_intercept:
        cols.insert(0, np.ones(rows.size))
        names.insert(0, INTERCEPT)
    X = np.column_stack(cols)
    if X.shape[0] < X.shape[1]:
        raise DataError(f"{X.shape[0]} rows cannot identify {X.shape[1]} parameters")
    y.setflags(write=False)
    X.setflags(write=False)
    return DesignMatrix(y=y, X=X, names=tuple(names), rows=rows)


def gravity_spec(transform=IDENTITY, row_filter="all", regressors=GRAVITY_REGRESSORS, response="trade"):
    return ModelSpec(response=response, transform=transform, regressors=regressors, row_filter=row_filter)
