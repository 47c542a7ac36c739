"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 fit failure,
4 verification mismatch.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import data_ingest
from .data_ingest import ARCHIVE_URL, DATASET_MEMBER, load_table, write_csv
from .errors import DataError, FitError, GravfitError
from .estimators import GAUSSIAN_LOG, QUASI_POISSON, WarmStart, fit_glm_irls, fit_ols, search_censor_shift
from .model_frame import LOG, LOG1P, build_design, gravity_spec
from .report import (
    MODELS,
    compare_tables,
    load_expected_table,
    parse_csv,
    render,
    run_replication,
    table_from_fits,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FIT, EXIT_MISMATCH = 0, 1, 2, 3, 4
DEFAULT_DATA = Path("fixtures") / "log_of_gravity.csv"

log = logging.getLogger("gravfit")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _diag(msg):
    print(msg, file=sys.stderr)


def _write(text, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        _diag(f"wrote {out}")


def _search_progress(a, slope, fit):
    _diag(f"  shift search: a={a:g} slope={slope:.6f} (bhhh iterations {fit.iterations})")


def _cmd_fetch(args):
    path = data_ingest.fetch_archive(args.url, args.dest)
    print(path)
    return EXIT_OK


def _cmd_convert(args):
    table = load_table(args.input)
    write_csv(table, args.output)
    _diag(f"converted {table.source}: {table.n_rows} rows, {len(table.names)} numeric columns -> {args.output}")
    return EXIT_OK


def _fit_one(table, model, args):
    base = gravity_spec()
    positive = gravity_spec(row_filter="positive_response")
    max_iter = args.max_iter
    if model == "ols1":
        return fit_ols(build_design(table, positive.with_transform(LOG)), model=model)
    if model == "ols2":
        return fit_ols(build_design(table, base.with_transform(LOG1P)), model=model)
    if model == "ppml1":
        return fit_glm_irls(build_design(table, positive), QUASI_POISSON, max_iter=max_iter or 25, model=model)
    if model == "ppml2":
        return fit_glm_irls(build_design(table, base), QUASI_POISSON, max_iter=max_iter or 25, model=model)
    if model == "nls":
        design = build_design(table, base)
        ppml = fit_glm_irls(design, QUASI_POISSON, model="ppml2")
        return fit_glm_irls(design, GAUSSIAN_LOG, start=WarmStart.from_fit(ppml), max_iter=max_iter or 200, model=model)
    a, state, fit = search_censor_shift(
        table, base, target=args.target, tol=args.tol, a0=args.a0, on_step=_search_progress
    )
    _diag(f"final a={a:g} after {state.iterations} iterations (last fit used a={state.fitted_a:g})")
    return fit


def _cmd_fit(args):
    table = load_table(args.data)
    fit = _fit_one(table, args.model, args)
    _diag(f"{args.model}: n={fit.n_obs} iterations={fit.iterations} dispersion={fit.dispersion:.6g}")
    _write(render(table_from_fits({args.model: fit}, (args.model,)), args.format), args.out)
    return EXIT_OK


def _cmd_replicate(args):
    table = load_table(args.data)
    _diag(f"loaded {table.source}: {table.n_rows} rows")
    result = run_replication(
        table,
        a0=args.a0,
        target=args.target,
        tol=args.tol,
        nls_max_iter=args.max_iter or 200,
        on_step=_search_progress,
    )
    search = result.diagnostics.get("shift_search")
    if search:
        _diag(f"final a={search['a']:g} after {search['iterations']} iterations (last fit used a={search['fitted_a']:g})")
    for m, d in result.diagnostics["fits"].items():
        _diag(f"  {m}: n={d['n_obs']} iterations={d['iterations']} dispersion={d['dispersion']:.6g}")
    if args.diagnostics:
        Path(args.diagnostics).write_text(json.dumps(result.diagnostics, indent=2, default=float), encoding="utf-8")
    _write(render(result, args.format), args.out)
    return EXIT_OK


def _cmd_verify(args):
    try:
        produced = parse_csv(Path(args.produced).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read {args.produced}: {exc}") from exc
    if args.expected:
        expected = parse_csv(Path(args.expected).read_text(encoding="utf-8"))
    else:
        expected = load_expected_table()
    bad = compare_tables(produced, expected, tobit_tol=args.tobit_tol, check_stars=not args.no_stars)
    for m in bad:
        _diag(f"MISMATCH {m}")
    n_cells = sum(1 for m in expected.model_labels for t in expected.terms if expected.cell(t, m))
    _diag(f"verify: {n_cells} expected cells, {len(bad)} mismatches")
    return EXIT_MISMATCH if bad else EXIT_OK


def build_parser():
    p = _Parser(prog="gravfit", description="Gravity-equation estimators and the six-model replication table.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, data=True):
        if data:
            sp.add_argument("--data", default=str(DEFAULT_DATA), help="dataset (.dta or .csv)")
        sp.add_argument("--a0", type=float, default=200.0, help="initial censoring shift")
        sp.add_argument("--target", type=float, default=1.058, help="target lypex slope for the shift search")
        sp.add_argument("--tol", type=float, default=0.001, help="shift search tolerance")
        sp.add_argument("--max-iter", type=int, default=None, help="iteration cap for the GLM fits")
        sp.add_argument("--format", choices=("text", "latex", "csv"), default="text")
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    sp = sub.add_parser("fetch", help="download and extract the original archive")
    sp.add_argument("--url", default=ARCHIVE_URL)
    sp.add_argument("--dest", default="regressors")
    sp.set_defaults(func=_cmd_fetch)

    sp = sub.add_parser("convert", help="convert a .dta dataset to CSV")
    sp.add_argument("input", nargs="?", default=str(Path("regressors") / DATASET_MEMBER))
    sp.add_argument("output", nargs="?", default=str(DEFAULT_DATA))
    sp.set_defaults(func=_cmd_convert)

    sp = sub.add_parser("fit", help="fit one model")
    sp.add_argument("--model", required=True, choices=MODELS)
    common(sp)
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("replicate", help="fit all six models and print the table")
    common(sp)
    sp.add_argument("--diagnostics", default=None, help="write fit diagnostics as JSON")
    sp.set_defaults(func=_cmd_replicate)

    sp = sub.add_parser("verify", help="compare a produced CSV table with expected values")
    sp.add_argument("produced", help="CSV written by `replicate --format csv`")
    sp.add_argument("--expected", default=None, help="expected CSV (default: the bundled published table)")
    sp.add_argument("--tobit-tol", type=float, default=2e-3)
    sp.add_argument("--no-stars", action="store_true", help="do not compare significance stars")
    sp.set_defaults(func=_cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        _diag(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except DataError as exc:
        _diag(f"data error: {exc}")
        return EXIT_DATA
    except FitError as exc:
        _diag(f"fit failure: {exc}")
        return EXIT_FIT
    except GravfitError as exc:
        _diag(f"error: {exc}")
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
