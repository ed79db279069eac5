import io
import json
import time

import pytest

from tdlc import cli
from tdlc.properties import _SPECS, model

FIXTURE_IDS = list(_SPECS)
ACCEPTANCE = []


def run_cli(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def timed_cli(*argv):
    t = time.perf_counter()
    code, text = run_cli(*argv)
    return code, text, time.perf_counter() - t


@pytest.fixture(scope="session")
def models():
    return {fid: model(fid) for fid in FIXTURE_IDS}


@pytest.fixture(scope="session")
def verify_all():
    """One `verify all --seed 7` run: (exit code, JSON text, seconds)."""
    return timed_cli("verify", "all", "--seed", "7", "--format", "json")


@pytest.fixture(scope="session")
def fixture_runs():
    """Every fixture through the CLI at the default resolution: id -> (code, report, seconds)."""
    out = {}
    for fid in FIXTURE_IDS:
        code, text, t = timed_cli("run", "--fixture", fid, "--format", "json")
        out[fid] = (code, json.loads(text), t)
    return out


@pytest.fixture(scope="session")
def fixture_runs_k6():
    out = {}
    for fid in FIXTURE_IDS:
        code, text = run_cli("run", "--fixture", fid, "--format", "json", "--resolution", "6")
        out[fid] = (code, json.loads(text))
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}")
