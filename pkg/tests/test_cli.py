import subprocess
import sys

import pytest

from dta_writer import write_dta
from gravfit.cli import main
from gravfit.data_ingest import read_csv, write_csv
from gravfit.estimators import fit_tobit_bhhh, tobit_problem
from gravfit.model_frame import gravity_spec
from gravfit.report import MODELS, parse_csv
from gravfit.synthetic import gravity_table


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    table = gravity_table(n=1200, seed=8)
    path = tmp_path_factory.mktemp("cli") / "g.csv"
    write_csv(table, path)
    # a target hit exactly at a0 keeps the search to a single Tobit fit
    slope = float(fit_tobit_bhhh(tobit_problem(table, gravity_spec(), 80.0)).beta[1])
    return path, table, slope


def test_convert_dta_to_csv(tmp_path):
    table = gravity_table(n=50, seed=1)
    cols = {k: table[k] for k in table.names}
    write_dta(tmp_path / "g.dta", cols, version=114, strings={"iso": ["AAA"] * 50})
    assert main(["convert", str(tmp_path / "g.dta"), str(tmp_path / "g.csv")]) == 0
    assert read_csv(tmp_path / "g.csv") == table


def test_fit_single_model_csv(data_csv, tmp_path, capsys):
    path, table, _ = data_csv
    out = tmp_path / "ols1.csv"
    assert main(["fit", "--model", "ols1", "--data", str(path), "--format", "csv", "--out", str(out)]) == 0
    t = parse_csv(out.read_text())
    assert t.model_labels == ("ols1",)
    assert t.n_obs["ols1"] == int((table["trade"] > 0).sum())
    assert "ols1: n=" in capsys.readouterr().err


def test_fit_tobit_reports_final_shift(data_csv, capsys):
    path, _, slope = data_csv
    code = main(["fit", "--model", "tobit", "--data", str(path), "--a0", "80", "--target", repr(slope)])
    assert code == 0
    cap = capsys.readouterr()
    assert "final a=79 after 1 iterations (last fit used a=80)" in cap.err
    assert "logSigma" in cap.out and "final a" not in cap.out


def test_replicate_then_verify(data_csv, tmp_path, capsys):
    path, _, slope = data_csv
    out = tmp_path / "rep.csv"
    diag = tmp_path / "diag.json"
    args = ["replicate", "--data", str(path), "--a0", "80", "--target", repr(slope), "--format", "csv"]
    assert main(args + ["--out", str(out), "--diagnostics", str(diag)]) == 0
    t = parse_csv(out.read_text())
    assert t.model_labels == MODELS
    assert '"shift_search"' in diag.read_text()

    assert main(["verify", str(out), "--expected", str(out)]) == 0
    lines = out.read_text().splitlines()
    i = next(k for k, ln in enumerate(lines) if ln.startswith("lypex,estimate"))
    parts = lines[i].split(",")
    parts[2] = repr(float(parts[2]) + 0.01)
    lines[i] = ",".join(parts)
    tampered = tmp_path / "exp.csv"
    tampered.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["verify", str(out), "--expected", str(tampered)]) == 4
    assert "MISMATCH ols1/lypex estimate" in capsys.readouterr().err


def test_verify_against_bundled_table_mismatches_on_synthetic(data_csv, tmp_path):
    path, _, slope = data_csv
    out = tmp_path / "rep.csv"
    main(["replicate", "--data", str(path), "--a0", "80", "--target", repr(slope), "--format", "csv", "--out", str(out)])
    assert main(["verify", str(out)]) == 4


def test_usage_errors(capsys):
    assert main(["fit", "--model", "ols1", "--bogus"]) == 1
    assert main(["fit", "--model", "probit"]) == 1
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_data_error_exit(tmp_path, capsys):
    assert main(["fit", "--model", "ols1", "--data", str(tmp_path / "missing.csv")]) == 2
    (tmp_path / "bad.csv").write_text("trade,lypex\n1,abc\n")
    assert main(["fit", "--model", "ols1", "--data", str(tmp_path / "bad.csv")]) == 2
    assert "data error" in capsys.readouterr().err


def test_fit_failure_exit(data_csv, capsys):
    path, _, _ = data_csv
    assert main(["fit", "--model", "ppml2", "--data", str(path), "--max-iter", "1"]) == 3
    assert "fit failure" in capsys.readouterr().err
    # unreachable target: the shift search runs a below zero
    assert main(["fit", "--model", "tobit", "--data", str(path), "--a0", "1", "--target", "50"]) == 3


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "gravfit", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("fetch", "convert", "fit", "replicate", "verify"):
        assert cmd in out.stdout
