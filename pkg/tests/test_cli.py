import json
import subprocess
import sys

import pytest

from conftest import FIXTURE_IDS, run_cli

from tdlc import cli


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_all_fixtures_exit_zero(fixture_runs):
    bad = {fid: code for fid, (code, _, _) in fixture_runs.items() if code != 0}
    assert not bad


def test_padic_t_report(fixture_runs):
    code, report, _ = fixture_runs["padic-t"]
    by = {r["id"]: r for r in report["results"]}
    assert by["s"]["value"] == "1" and by["s_inv"]["value"] == "2"
    assert by["s"]["certificate"] == "Exact"
    assert set(report) == {"version", "scenario", "results", "summary"}


def test_badnub_report_chain(fixture_runs):
    code, report, _ = fixture_runs["badnub-tower"]
    chain = {r["id"]: r for r in report["results"]}["chain"]["value"]
    assert len(chain) == 3 and chain[1] == "span(00001)" and chain[2] == "span(0)"


def test_integers_are_strings_in_json(fixture_runs):
    def walk(x):
        if isinstance(x, dict):
            for v in x.values():
                walk(v)
        elif isinstance(x, list):
            for v in x:
                walk(v)
        else:
            assert not (isinstance(x, int) and not isinstance(x, bool)), x
    for _, report, _ in fixture_runs.values():
        walk(report)


def test_malformed_file_exit_3(tmp_path):
    code, _ = run_cli("run", write(tmp_path, "queries: [\n  - id: x"))
    assert code == cli.PARSE
    assert run_cli("run", str(tmp_path / "missing.yaml"))[0] == cli.PARSE
    assert run_cli("run", "--fixture", "nope")[0] == cli.PARSE


def test_mismatch_exit_2(tmp_path):
    p = write(tmp_path, "fixture: padic-t\nqueries:\n  - {id: s, op: scale, args: {g: t}, expect: 2}\n")
    code, text = run_cli("run", p)
    assert code == cli.MISMATCH and "MISMATCH" in text


def test_budget_exit_4(tmp_path):
    p = write(tmp_path, "fixture: shift-onesided\nbudget: 1\nqueries:\n  - {id: u, op: tidy, args: {g: s}}\n")
    code, text = run_cli("run", p)
    assert code == cli.BUDGET and "u [tidy] BUDGET" in text


def test_query_error_exit_1(tmp_path):
    p = write(tmp_path, "fixture: padic-t\nqueries:\n  - {id: pr, op: proximal, args: {gens: t, K: whole}}\n")
    assert run_cli("run", p)[0] == cli.FAILED


def test_bad_word_is_parse_error(tmp_path):
    p = write(tmp_path, "fixture: padic-t\nqueries:\n  - {id: s, op: scale, args: {g: zz}}\n")
    assert run_cli("run", p)[0] == cli.PARSE


def test_unknown_op_is_error(tmp_path):
    p = write(tmp_path, "fixture: padic-t\nqueries:\n  - {id: s, op: dance, args: {}}\n")
    code, text = run_cli("run", p)
    assert code == cli.FAILED and "dance" in text


def test_scenario_with_model_and_names(tmp_path):
    p = write(tmp_path, """
model: {family: PAdicToral, params: {p: 2, n: 1, actors: {t: {exps: [1]}}}}
elements: {u: t^3}
queries:
  - {id: su, op: scale, args: {g: u^-1}, expect: 8}
  - {id: c, op: contracts, args: {g: t, x: "(1/2; 0)"}, expect: "true"}
""")
    code, text = run_cli("run", p, "--format", "json")
    assert code == 0, text
    assert [r["status"] for r in json.loads(text)["results"]] == ["ok", "ok"]


def test_flags_override_scenario(tmp_path):
    p = write(tmp_path, "fixture: padic-t\nresolution: 2\nseed: 3\nqueries:\n  - {id: s, op: scale, args: {g: t}}\n")
    scen = json.loads(run_cli("run", p, "--format", "json", "--resolution", "5")[1])["scenario"]
    assert scen["resolution"] == "5" and scen["seed"] == "3"


def test_json_run_is_deterministic():
    a = run_cli("run", "--fixture", "shift-onesided", "--format", "json", "--seed", "3")
    b = run_cli("run", "--fixture", "shift-onesided", "--format", "json", "--seed", "3")
    assert a == b


def test_jobs_keep_scenario_order():
    a = json.loads(run_cli("run", "--fixture", "padic-t", "--format", "json")[1])
    b = json.loads(run_cli("run", "--fixture", "padic-t", "--format", "json", "--jobs", "3")[1])
    assert a == b


def test_export_then_run(tmp_path):
    out = str(tmp_path / "t.yaml")
    assert run_cli("export-fixture", "tree-hyperbolic", "-o", out)[0] == 0
    code, text = run_cli("run", out)
    assert code == 0, text
    assert run_cli("export-fixture", "nope")[0] == cli.FAILED


def test_list_fixtures():
    code, text = run_cli("list-fixtures")
    assert code == 0 and sorted([line.split()[0] for line in text.splitlines()]) == sorted(FIXTURE_IDS)
    rows = json.loads(run_cli("list-fixtures", "--format", "json")[1])["fixtures"]
    assert sorted(r["id"] for r in rows) == sorted(FIXTURE_IDS)


def test_verify_single_suite_text():
    code, text = run_cli("verify", "--suite", "flat")
    assert code == 0 and text.strip().endswith("properties hold")
    assert run_cli("verify", "everything")[0] == cli.PARSE


def test_verify_failure_exit_1(monkeypatch):
    from tdlc import properties

    def fails(rng, k=4):
        return properties.PropertyResult("flat", "always fails", False, 1, {"x": 1})

    monkeypatch.setitem(properties.PROPERTIES, "flat", [fails])
    code, text = run_cli("verify", "flat")
    assert code == cli.FAILED and "first failure: flat: always fails" in text


def test_scan_makes_no_claims():
    code, text = run_cli("scan")
    assert code == 0 and len(text.splitlines()) == len(FIXTURE_IDS)


def test_bad_arguments():
    assert run_cli("frobnicate")[0] == cli.PARSE
    assert run_cli("run", "--format", "xml")[0] == cli.PARSE


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "tdlc.cli", "run", "--fixture", "padic-t"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0 and "8 queries: ok 8" in r.stdout
