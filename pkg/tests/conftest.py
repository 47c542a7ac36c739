import os
from pathlib import Path

import numpy as np
import pytest

from gravfit.data_ingest import DATASET_MEMBER, load_table
from gravfit.synthetic import gravity_table

ROOT = Path(__file__).resolve().parents[1]
DATA_CANDIDATES = (
    ROOT / "fixtures" / "log_of_gravity.csv",
    ROOT / "tests" / "fixtures" / "log_of_gravity.csv",
    ROOT / "regressors" / DATASET_MEMBER,
)


def locate_dataset():
    env = os.environ.get("GRAVFIT_DATA")
    if env:
        return Path(env)
    for path in DATA_CANDIDATES:
        if path.exists():
            return path
    return None


@pytest.fixture(scope="session")
def real_table():
    """The original replication dataset. A missing file is a failure, not a skip."""
    path = locate_dataset()
    if path is None or not path.exists():
        pytest.fail(
            "replication dataset not found: set GRAVFIT_DATA or run "
            "`gravfit fetch && gravfit convert` to create fixtures/log_of_gravity.csv",
            pytrace=False,
        )
    return load_table(path)


@pytest.fixture(scope="session")
def synthetic_full():
    return gravity_table(n=18360, seed=0)


@pytest.fixture(scope="session")
def synthetic_small():
    return gravity_table(n=1500, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one PASS/FAIL line per acceptance criterion in the terminal summary
_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        prev = _ACCEPTANCE.get(name)
        if prev in (None, "passed"):
            _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
