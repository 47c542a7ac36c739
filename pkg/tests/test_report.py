import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gravfit.data_ingest import GRAVITY_COLUMNS, ColumnTable
from gravfit.errors import ColumnNameError, GravfitError
from gravfit.report import (
    MODELS,
    TERMS,
    Cell,
    ReplicationTable,
    compare_tables,
    format_cell,
    load_expected_table,
    parse_csv,
    render,
    round_half_away,
    run_replication,
    stars_for,
)


@pytest.fixture(scope="module")
def replication(synthetic_small):
    return run_replication(synthetic_small, tobit_shift=159.0)


@pytest.mark.parametrize(
    "x,expected",
    [
        (0.0005, "0.001"),
        (-0.0005, "-0.001"),
        (0.0015, "0.002"),
        (2.675, "2.675"),
        (1.0625, "1.063"),
        (-1.0625, "-1.063"),
        (-0.0004, "0.000"),
        (-28.4915, "-28.492"),
        (0.6774, "0.677"),
    ],
)
def test_round_half_away(x, expected):
    assert round_half_away(x) == expected


@pytest.mark.parametrize("p,stars", [(0.2, 0), (0.1, 0), (0.0999, 1), (0.05, 1), (0.049, 2), (0.01, 2), (0.009, 3)])
def test_star_thresholds(p, stars):
    assert stars_for(p) == stars


def test_log_sigma_cell_text_form():
    assert format_cell(Cell(0.6771, 0.00702, 3)) == "0.677*** (0.007)"


def test_table_shape(replication, synthetic_small):
    assert replication.model_labels == MODELS
    assert replication.terms == TERMS
    n_pos = int(np.sum(synthetic_small["trade"] > 0))
    n = synthetic_small.n_rows
    assert [replication.n_obs[m] for m in MODELS] == [n_pos, n, n, n, n_pos, n]
    assert replication.cell("logSigma", "tobit") is not None
    assert all(replication.cell("logSigma", m) is None for m in MODELS if m != "tobit")
    for m in MODELS:
        assert replication.cell("lypex", m).estimate == replication.fits[m].coef("lypex")
    replication.validate()


def test_csv_round_trip_is_bit_exact(replication):
    text = render(replication, "csv")
    back = parse_csv(text)
    for m in MODELS:
        fit = replication.fits[m]
        for name, b, s in zip(fit.names, fit.beta, fit.se):
            term = "Constant" if name == "(Intercept)" else name
            c = back.cell(term, m)
            assert c.estimate == float(b) and c.se == float(s)
    assert render(back, "csv") == text
    assert back.n_obs == replication.n_obs


finite = st.floats(-1e6, 1e6, allow_nan=False).filter(lambda v: v != 0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(finite, st.floats(1e-9, 1e3), st.integers(0, 3)), min_size=3, max_size=3))
def test_csv_render_parse_render_idempotent(values):
    cells = {(t, "m1"): Cell(e, s, k) for t, (e, s, k) in zip(("a", "b", "c"), values)}
    t = ReplicationTable(model_labels=("m1",), terms=("a", "b", "c"), cells=cells, n_obs={"m1": 10})
    once = render(t, "csv")
    assert render(parse_csv(once), "csv") == once
    assert parse_csv(once).cells == cells


def test_text_layout(replication):
    text = render(replication, "text")
    lines = text.splitlines()
    assert lines[0].split() == ["(1)", "(2)", "(3)", "(4)", "(5)", "(6)"]
    i = next(k for k, ln in enumerate(lines) if ln.startswith("logSigma"))
    c = replication.cell("logSigma", "tobit")
    assert lines[i].split() == ["logSigma", round_half_away(c.estimate) + "*" * c.stars]
    assert lines[i + 1].split() == [f"({round_half_away(c.se)})"]
    assert "Observations" in text and f"{replication.n_obs['ols2']:,}" in text


def test_latex_structure(replication):
    tex = render(replication, "latex")
    assert tex.startswith("\\begin{tabular}{lcccccc}")
    assert tex.rstrip().endswith("\\end{tabular}")
    assert "usepackage" not in tex
    assert "landl\\_ex" in tex
    body = [ln for ln in tex.splitlines() if ln.startswith("lypex")][0]
    assert body.count("&") == 6
    assert re.search(r"\$\^\{\*{1,3}\}\$", tex)
    # no bare hyphen minus in numbers
    assert not re.search(r"& -\d", tex)


def test_empty_column_is_structural_error(replication):
    broken = ReplicationTable(
        model_labels=(*MODELS, "extra"),
        terms=replication.terms,
        cells=replication.cells,
        n_obs={**replication.n_obs, "extra": 1},
    )
    for fmt in ("text", "latex", "csv"):
        with pytest.raises(GravfitError, match="extra"):
            render(broken, fmt)


def test_missing_column_names_itself(synthetic_small):
    cols = {k: synthetic_small[k] for k in synthetic_small.names if k != "comfrt_wto"}
    with pytest.raises(ColumnNameError, match="comfrt_wto"):
        run_replication(ColumnTable(cols), tobit_shift=159.0)


def test_deterministic(synthetic_small, replication):
    again = run_replication(synthetic_small, tobit_shift=159.0)
    assert render(again, "csv") == render(replication, "csv")


def test_permutation_invariance(synthetic_small, replication):
    perm = np.random.default_rng(99).permutation(synthetic_small.n_rows)
    shuffled = synthetic_small.take(perm)
    other = run_replication(shuffled, tobit_shift=159.0)
    assert other.n_obs == replication.n_obs
    for key, c in replication.cells.items():
        o = other.cells[key]
        assert o.estimate == pytest.approx(c.estimate, rel=1e-6, abs=1e-8)
        assert o.se == pytest.approx(c.se, rel=1e-6)


def test_fitter_error_names_model(synthetic_small):
    with pytest.raises(GravfitError, match="model ppml2"):
        run_replication(synthetic_small, tobit_shift=159.0, glm_max_iter=1)


def test_nls_is_warm_started_from_full_sample_ppml(replication):
    # warm start from the converged PPML means few Gauss-Newton steps
    assert replication.fits["nls"].iterations < 200
    assert replication.fits["nls"].n_obs == replication.fits["ppml2"].n_obs


def test_compare_tables(replication):
    assert compare_tables(replication, replication) == []
    cells = dict(replication.cells)
    c = cells[("lypex", "ols1")]
    cells[("lypex", "ols1")] = Cell(c.estimate + 0.0011, c.se, c.stars)
    c = cells[("lypex", "tobit")]
    cells[("lypex", "tobit")] = Cell(c.estimate + 0.0015, c.se, c.stars)
    changed = ReplicationTable(replication.model_labels, replication.terms, cells, replication.n_obs)
    bad = compare_tables(changed, replication)
    assert [(m.term, m.model, m.what) for m in bad] == [("lypex", "ols1", "estimate")]
    n_obs = dict(replication.n_obs, ppml1=1)
    bad = compare_tables(ReplicationTable(replication.model_labels, replication.terms, cells, n_obs), replication)
    assert ("Observations", "ppml1", "n") in [(m.term, m.model, m.what) for m in bad]


def test_expected_table_contents():
    exp = load_expected_table()
    assert exp.model_labels == MODELS
    assert [exp.n_obs[m] for m in MODELS] == [9613, 18360, 18360, 18360, 9613, 18360]
    assert [exp.estimate("lypex", m) for m in MODELS] == [0.938, 1.128, 1.059, 0.738, 0.721, 0.732]
    assert format_cell(exp.cell("logSigma", "tobit")) == "0.677*** (0.007)"
    assert exp.cell("logSigma", "ols1") is None
    assert exp.estimate("Constant", "ols1") == -28.492
    assert exp.cell("colony", "ppml2").stars == 0
    assert set(exp.terms) == set(TERMS)
    # every published cell is present: 15 coefficients per model plus logSigma
    assert len(exp.cells) == 6 * 15 + 1
    assert all(math.isfinite(c.se) and c.se > 0 for c in exp.cells.values())


def test_gravity_columns_are_all_required(synthetic_small):
    assert set(GRAVITY_COLUMNS) <= set(synthetic_small.names)
