"""The six-model replication table: computation, rendering, CSV parsing."""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .data_ingest import GRAVITY_COLUMNS, validate_gravity_table
from .errors import GravfitError
from .estimators import (
    GAUSSIAN_LOG,
    QUASI_POISSON,
    WarmStart,
    fit_glm_irls,
    fit_ols,
    fit_tobit_bhhh,
    search_censor_shift,
    tobit_problem,
)
from .estimators.tobit import LOG_SIGMA
from .model_frame import GRAVITY_REGRESSORS, INTERCEPT, LOG, LOG1P, build_design, gravity_spec

log = logging.getLogger(__name__)

MODELS = ("ols1", "ols2", "tobit", "nls", "ppml1", "ppml2")
MODEL_TITLES = {
    "ols1": "OLS log(trade), trade > 0",
    "ols2": "OLS log(1 + trade)",
    "tobit": "Tobit log(a + trade)",
    "nls": "NLS (Gaussian, log link)",
    "ppml1": "PPML, trade > 0",
    "ppml2": "PPML",
}
CONSTANT = "Constant"
TERMS = (*GRAVITY_REGRESSORS, LOG_SIGMA, CONSTANT)
STAR_LEVELS = (0.01, 0.05, 0.1)


def stars_for(pvalue):
    """Number of stars for a two-sided p-value: 3 (<0.01), 2 (<0.05), 1 (<0.1)."""
    if not np.isfinite(pvalue):
        return 0
    return sum(pvalue < level for level in STAR_LEVELS)


@dataclass(frozen=True)
class Cell:
    estimate: float
    se: float
    stars: int


@dataclass
class ReplicationTable:
    model_labels: tuple = MODELS
    terms: tuple = TERMS
    cells: dict = field(default_factory=dict)  # (term, model) -> Cell
    n_obs: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict, repr=False, compare=False)

    def cell(self, term, model):
        return self.cells.get((term, model))

    def estimate(self, term, model):
        return self.cells[(term, model)].estimate

    def se(self, term, model):
        return self.cells[(term, model)].se

    def validate(self):
        if not self.model_labels:
            raise GravfitError("replication table has no model columns")
        for m in self.model_labels:
            if not any((t, m) in self.cells for t in self.terms):
                raise GravfitError(f"model column {m!r} is empty")
        for (t, m), c in self.cells.items():
            if not (math.isfinite(c.estimate) and math.isfinite(c.se) and c.se > 0):
                raise GravfitError(f"cell ({t}, {m}) has a non-finite estimate or non-positive se")


def _term_name(name):
    return CONSTANT if name == INTERCEPT else name


def table_from_fits(fits, labels=MODELS, diagnostics=None):
    cells = {}
    n_obs = {}
    for m in labels:
        fit = fits[m]
        pv = fit.pvalues
        for name, b, s, p in zip(fit.names, fit.beta, fit.se, pv):
            cells[(_term_name(name), m)] = Cell(float(b), float(s), stars_for(p))
        n_obs[m] = int(fit.n_obs)
    terms = [t for t in TERMS if any((t, m) in cells for m in labels)]
    extra = [t for (t, _m) in cells if t not in terms]
    terms += list(dict.fromkeys(extra))
    return ReplicationTable(
        model_labels=tuple(labels),
        terms=tuple(terms),
        cells=cells,
        n_obs=n_obs,
        diagnostics=dict(diagnostics or {}),
        fits=dict(fits),
    )


def _named(label, fn, /, *args, **kw):
    try:
        return fn(*args, **kw)
    except GravfitError as exc:
        exc.args = (f"model {label}: {exc}",) + exc.args[1:]
        exc.model = label
        raise


def run_replication(
    table,
    a0=200.0,
    target=1.058,
    tol=0.001,
    tobit_shift=None,
    nls_max_iter=200,
    glm_max_iter=25,
    tobit_cov="opg",
    regressors=GRAVITY_REGRESSORS,
    response="trade",
    on_step=None,
):
    """Fit the six models and assemble the coefficient table.

    The Tobit shift comes from :func:`search_censor_shift` unless
    ``tobit_shift`` fixes it. The NLS fit starts from the full-sample PPML
    estimates.
    """
    need = GRAVITY_COLUMNS if regressors == GRAVITY_REGRESSORS and response == "trade" else (response, *regressors)
    validate_gravity_table(table, need)
    base = gravity_spec(regressors=regressors, response=response)
    positive = gravity_spec(row_filter="positive_response", regressors=regressors, response=response)
    fits = {}
    diag = {}

    fits["ols1"] = _named("ols1", lambda: fit_ols(build_design(table, positive.with_transform(LOG)), model="ols1"))
    fits["ols2"] = _named("ols2", lambda: fit_ols(build_design(table, base.with_transform(LOG1P)), model="ols2"))

    if tobit_shift is None:
        a_final, state, tobit = _named(
            "tobit",
            search_censor_shift,
            table,
            base,
            target=target,
            tol=tol,
            a0=a0,
            on_step=on_step,
            cov_type=tobit_cov,
        )
        diag["shift_search"] = {
            "a": a_final,
            "fitted_a": state.fitted_a,
            "iterations": state.iterations,
            "trace": list(state.trace),
        }
    else:
        tobit = _named("tobit", lambda: fit_tobit_bhhh(tobit_problem(table, base, tobit_shift), cov_type=tobit_cov))
        tobit.info["shift"] = float(tobit_shift)
    tobit.model = "tobit"
    fits["tobit"] = tobit

    full = build_design(table, base)
    fits["ppml2"] = _named("ppml2", fit_glm_irls, full, QUASI_POISSON, max_iter=glm_max_iter, model="ppml2")
    fits["nls"] = _named(
        "nls",
        fit_glm_irls,
        full,
        GAUSSIAN_LOG,
        start=WarmStart.from_fit(fits["ppml2"]),
        max_iter=nls_max_iter,
        model="nls",
    )
    fits["ppml1"] = _named(
        "ppml1", lambda: fit_glm_irls(build_design(table, positive), QUASI_POISSON, max_iter=glm_max_iter, model="ppml1")
    )

    for m in MODELS:
        f = fits[m]
        diag.setdefault("fits", {})[m] = {
            "iterations": f.iterations,
            "dispersion": f.dispersion,
            "n_obs": f.n_obs,
            "loglik": f.loglik,
        }
    diag["tobit_shift"] = fits["tobit"].info.get("shift")
    return table_from_fits(fits, MODELS, diag)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def round_half_away(x, digits=3):
    """Decimal string of ``x`` rounded half away from zero."""
    q = Decimal(1).scaleb(-digits)
    d = Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP)
    if d == 0:
        d = abs(d)
    return f"{d:.{digits}f}"


def format_cell(cell, digits=3):
    """Inline form, e.g. ``"0.677*** (0.007)"``."""
    return f"{round_half_away(cell.estimate, digits)}{'*' * cell.stars} ({round_half_away(cell.se, digits)})"


def _render_text(t, digits):
    header = [""] + [f"({i + 1})" for i in range(len(t.model_labels))]
    rows = [header, [""] + list(t.model_labels)]
    for term in t.terms:
        est, se = [term], [""]
        for m in t.model_labels:
            c = t.cell(term, m)
            est.append("" if c is None else round_half_away(c.estimate, digits) + "*" * c.stars)
            se.append("" if c is None else f"({round_half_away(c.se, digits)})")
        rows += [est, se]
    rows.append(["Observations"] + [f"{t.n_obs[m]:,}" for m in t.model_labels])
    widths = [max(len(r[j]) for r in rows) for j in range(len(header))]
    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    lines = []
    for i, r in enumerate(rows):
        if i == 2 or i == len(rows) - 1:
            lines.append(rule)
        lines.append("  ".join(r[0].ljust(widths[0]) if j == 0 else r[j].rjust(widths[j]) for j in range(len(r))).rstrip())
    lines.append(rule)
    lines.append("Note: *p<0.1; **p<0.05; ***p<0.01")
    return "\n".join(lines) + "\n"


def _latex_num(s):
    return s.replace("-", "$-$")


def _render_latex(t, digits):
    k = len(t.model_labels)
    out = [
        "\\begin{tabular}{l" + "c" * k + "}",
        "\\hline\\hline",
        " & \\multicolumn{" + str(k) + "}{c}{\\textit{Dependent variable:}} \\\\",
        "\\cline{2-" + str(k + 1) + "}",
        " & " + " & ".join(f"({i + 1})" for i in range(k)) + " \\\\",
        "\\hline",
    ]
    for term in t.terms:
        est, se = [], []
        for m in t.model_labels:
            c = t.cell(term, m)
            if c is None:
                est.append("")
                se.append("")
                continue
            star = f"$^{{{'*' * c.stars}}}$" if c.stars else ""
            est.append(_latex_num(round_half_away(c.estimate, digits)) + star)
            se.append(f"({round_half_away(c.se, digits)})")
        out.append(term.replace("_", "\\_") + " & " + " & ".join(est) + " \\\\")
        out.append(" & " + " & ".join(se) + " \\\\")
    out += [
        "\\hline",
        "Observations & " + " & ".join(f"{t.n_obs[m]:,}" for m in t.model_labels) + " \\\\",
        "\\hline\\hline",
        "\\textit{Note:} & \\multicolumn{" + str(k) + "}{r}{$^{*}$p$<$0.1; $^{**}$p$<$0.05; $^{***}$p$<$0.01} \\\\",
        "\\end{tabular}",
    ]
    return "\n".join(out) + "\n"


def _render_csv(t):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["term", "statistic", *t.model_labels])
    for term in t.terms:
        for stat in ("estimate", "se", "stars"):
            row = [term, stat]
            for m in t.model_labels:
                c = t.cell(term, m)
                if c is None:
                    row.append("")
                elif stat == "stars":
                    row.append(str(c.stars))
                else:
                    row.append(repr(float(getattr(c, stat))))
            w.writerow(row)
    w.writerow(["Observations", "n", *(str(t.n_obs[m]) for m in t.model_labels)])
    return buf.getvalue()


def render(table, fmt="text", digits=3):
    table.validate()
    if fmt == "text":
        return _render_text(table, digits)
    if fmt == "latex":
        return _render_latex(table, digits)
    if fmt == "csv":
        return _render_csv(table)
    raise ValueError(f"unknown format {fmt!r}")


def parse_csv(text):
    """Inverse of ``render(table, "csv")``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[:2] != ["term", "statistic"]:
        raise GravfitError("not a replication-table CSV (bad header)")
    labels = tuple(header[2:])
    parts = {}
    terms = []
    n_obs = {}
    for row in reader:
        if not row:
            continue
        term, stat, values = row[0], row[1], row[2:]
        if len(values) != len(labels):
            raise GravfitError(f"row for {term}/{stat} has {len(values)} values, expected {len(labels)}")
        if term == "Observations":
            n_obs = {m: int(v) for m, v in zip(labels, values)}
            continue
        if term not in terms:
            terms.append(term)
        for m, v in zip(labels, values):
            if v != "":
                parts.setdefault((term, m), {})[stat] = v
    cells = {}
    for key, d in parts.items():
        try:
            cells[key] = Cell(float(d["estimate"]), float(d["se"]), int(d.get("stars", 0)))
        except KeyError as exc:
            raise GravfitError(f"cell {key} lacks {exc.args[0]!r}") from None
    return ReplicationTable(model_labels=labels, terms=tuple(terms), cells=cells, n_obs=n_obs)


# ---------------------------------------------------------------------------
# verification against expected values
# ---------------------------------------------------------------------------

DISPLAY_TOL = 5e-4
TOBIT_TOL = 2e-3


@dataclass
class Mismatch:
    term: str
    model: str
    what: str
    produced: object
    expected: object

    def __str__(self):
        return f"{self.model}/{self.term} {self.what}: produced {self.produced}, expected {self.expected}"


def compare_tables(produced, expected, digits=3, tobit_tol=TOBIT_TOL, check_stars=True, loose_models=("tobit",)):
    """List the differences between a produced and an expected table.

    Expected values are published, rounded figures. Cells of ``loose_models``
    pass within ``tobit_tol`` absolute; every other cell must round (half
    away from zero) to the expected figure.
    """
    bad = []
    for m in expected.model_labels:
        if m not in produced.model_labels:
            bad.append(Mismatch("*", m, "column", "missing", "present"))
            continue
        if produced.n_obs.get(m) != expected.n_obs.get(m):
            bad.append(Mismatch("Observations", m, "n", produced.n_obs.get(m), expected.n_obs.get(m)))
        for term in expected.terms:
            e = expected.cell(term, m)
            p = produced.cell(term, m)
            if e is None:
                if p is not None:
                    bad.append(Mismatch(term, m, "cell", "present", "absent"))
                continue
            if p is None:
                bad.append(Mismatch(term, m, "cell", "absent", "present"))
                continue
            for what in ("estimate", "se"):
                pv, ev = getattr(p, what), getattr(e, what)
                if m in loose_models:
                    ok = abs(pv - ev) <= tobit_tol + 1e-12
                else:
                    ok = round_half_away(pv, digits) == round_half_away(ev, digits)
                if not ok:
                    bad.append(Mismatch(term, m, what, pv, ev))
            if check_stars and p.stars != e.stars:
                bad.append(Mismatch(term, m, "stars", p.stars, e.stars))
    return bad


def expected_table_path():
    from importlib.resources import files

    return files("gravfit").joinpath("data/expected_table.csv")


def load_expected_table():
    return parse_csv(expected_table_path().read_text(encoding="utf-8"))
