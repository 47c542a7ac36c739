import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gravfit.data_ingest import ColumnTable
from gravfit.errors import ColumnNameError, DomainError, EmptyDesignError, MissingValueError
from gravfit.model_frame import (
    GRAVITY_REGRESSORS,
    INTERCEPT,
    LOG,
    LOG1P,
    ModelSpec,
    Transform,
    build_design,
    gravity_spec,
    response_transform,
)


def _small():
    return ColumnTable(
        {
            "trade": [0.0, 3.0, 0.0, 7.5, 1.25],
            "x1": [1.0, 2.0, 3.0, 4.0, 5.0],
            "x2": [0.0, 1.0, 1.0, 0.0, 1.0],
        }
    )


def test_response_transform_examples():
    assert response_transform(0.0, LOG1P) == 0.0
    assert response_transform(math.e - 1, LOG1P) == pytest.approx(1.0, rel=1e-15)
    # ln 159 = 5.06890420222...
    assert response_transform(0.0, Transform.log_shift(159)) == pytest.approx(5.0689042022202315, rel=1e-15)
    assert response_transform(4.0, "identity") == 4.0
    assert response_transform(math.e, LOG) == pytest.approx(1.0)


@pytest.mark.parametrize("value,transform", [(0.0, LOG), (-1.0, LOG1P), (-159.0, Transform.log_shift(159))])
def test_response_transform_domain(value, transform):
    with pytest.raises(DomainError):
        response_transform(value, transform)


@pytest.mark.parametrize("a", [0.0, -1.0, None])
def test_log_shift_needs_positive_shift(a):
    with pytest.raises(ValueError):
        Transform("log_shift", a)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e6), st.floats(0.0, 1e12))
def test_log_shift_bounded_below_by_log_a(a, v):
    y = response_transform(v, Transform.log_shift(a))
    assert y >= math.log(a)
    if v == 0.0:
        assert y == math.log(a)


def test_filter_then_transform():
    spec = ModelSpec("trade", LOG, ("x1", "x2"), row_filter="positive_response")
    d = build_design(_small(), spec)
    assert d.n == 3 and d.p == 3
    assert d.names == (INTERCEPT, "x1", "x2")
    np.testing.assert_array_equal(d.rows, [1, 3, 4])
    np.testing.assert_allclose(d.y, np.log([3.0, 7.5, 1.25]))
    np.testing.assert_array_equal(d.X[:, 0], 1.0)
    np.testing.assert_array_equal(d.X[:, 1], [2.0, 4.0, 5.0])


def test_log_without_filter_names_row():
    spec = ModelSpec("trade", LOG, ("x1",))
    with pytest.raises(DomainError, match="row 0"):
        build_design(_small(), spec)


def test_log_shift_on_zero_flow():
    d = build_design(_small(), ModelSpec("trade", Transform.log_shift(159.0), ("x1",)))
    assert d.y[0] == math.log(159.0) and d.y[2] == math.log(159.0)
    assert d.y[1] == math.log(162.0)


def test_missing_column():
    with pytest.raises(ColumnNameError, match="x9"):
        build_design(_small(), ModelSpec("trade", LOG1P, ("x1", "x9")))


def test_empty_design():
    t = ColumnTable({"trade": [0.0, 0.0], "x1": [1.0, 2.0]})
    with pytest.raises(EmptyDesignError):
        build_design(t, ModelSpec("trade", LOG, ("x1",), row_filter="positive_response"))


def test_nan_in_referenced_column_is_an_error():
    t = ColumnTable({"trade": [1.0, 2.0, 3.0], "x1": [1.0, np.nan, 2.0], "unused": [np.nan] * 3})
    with pytest.raises(MissingValueError, match="row 1"):
        build_design(t, ModelSpec("trade", LOG1P, ("x1",)))
    # NaN outside the spec is ignored, NaN in a filtered-out row too
    t2 = ColumnTable({"trade": [0.0, 2.0, 4.0], "x1": [np.nan, 2.0, 1.0], "y2": [np.nan, 1.0, 1.0]})
    build_design(t2, ModelSpec("trade", LOG, ("x1",), row_filter="positive_response"))


@pytest.mark.parametrize(
    "kw",
    [dict(regressors=()), dict(regressors=("x1", "x1")), dict(regressors=("trade",)), dict(row_filter="some")],
)
def test_spec_invariants(kw):
    base = dict(response="trade", transform=LOG1P, regressors=("x1",))
    base.update(kw)
    with pytest.raises(ValueError):
        ModelSpec(**base)


def test_gravity_spec_shape(synthetic_small):
    d = build_design(synthetic_small, gravity_spec(LOG1P))
    assert d.p == 15 == 1 + len(GRAVITY_REGRESSORS)
    assert d.n == synthetic_small.n_rows
    positive = int(np.sum(synthetic_small["trade"] > 0))
    assert build_design(synthetic_small, gravity_spec(LOG, "positive_response")).n == positive


def test_design_is_order_preserving_and_deterministic(synthetic_small):
    spec = gravity_spec(LOG, "positive_response")
    d1 = build_design(synthetic_small, spec)
    d2 = build_design(synthetic_small, spec)
    assert np.all(np.diff(d1.rows) > 0)
    np.testing.assert_array_equal(d1.X, d2.X)
    for j, name in enumerate(GRAVITY_REGRESSORS, start=1):
        np.testing.assert_array_equal(d1.X[:, j], synthetic_small[name][d1.rows])
    assert not d1.X.flags.writeable
