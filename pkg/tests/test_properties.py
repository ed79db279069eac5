import json
import random

import pytest

from tdlc.properties import PROPERTIES, SUITES, run_suite


def test_every_property_holds(verify_all):
    code, text, _ = verify_all
    rows = json.loads(text)["results"]
    failed = [(r["suite"], r["name"], r["witness"]) for r in rows if not r["ok"]]
    assert code == 0 and not failed
    assert {r["suite"] for r in rows} == set(SUITES)
    assert all(int(r["checked"]) > 0 for r in rows)


def test_suites_cover_all_properties(verify_all):
    rows = json.loads(verify_all[1])["results"]
    assert len(rows) == sum(len(PROPERTIES[s]) for s in SUITES)


def test_run_suite_reports_failures_instead_of_raising(monkeypatch):
    from tdlc import properties

    def broken(rng, k=4):
        raise properties.TdlcError("boom")

    monkeypatch.setitem(properties.PROPERTIES, "flat", [broken])
    (r,) = run_suite("flat")
    assert not r.ok and "boom" in str(r.witness)


@pytest.mark.parametrize("fn", PROPERTIES["tidy"][:1])
def test_seed_changes_only_samples(fn):
    a = fn(random.Random("1:x"))
    b = fn(random.Random("2:x"))
    assert a.ok and b.ok and a.checked == b.checked
