import pytest

from conftest import FIXTURE_IDS

from tdlc import catalog


@pytest.mark.parametrize("fid", FIXTURE_IDS)
def test_fixture_matches_oracle_and_references(fid):
    run = catalog.run_fixture(catalog.get_fixture(fid))
    assert not run.errors, run.errors
    bad = [(c.expect.query, c.expect.field, c.expected, c.actual) for c in run.checks if not c.ok]
    assert not bad


def test_every_expectation_says_where_it_comes_from():
    for f in catalog.list_fixtures():
        for e in f.expected:
            assert e.origin in ("oracle", "reference", "definition")
            # oracle-backed entries are computed, never written down
            assert (e.oracle is not None) == (e.value is None), (f.id, e.query)


def test_oracle_backed_fixtures_have_oracles():
    for f in catalog.list_fixtures():
        if any(e.oracle for e in f.expected):
            assert f.oracle is not None and f.oracle_note


def test_unknown_fixture():
    with pytest.raises(KeyError):
        catalog.get_fixture("no-such-fixture")


def test_padic_oracle_table():
    s, s_inv, table = catalog.padic_scale_oracle(2, [1], depth=6)
    assert (s, s_inv) == (1, 2)
    assert all(v == (1, 2) for v in table.values())


def test_subspace_count():
    # number of subspaces of F_2^4: 1 + 15 + 35 + 15 + 1
    assert len(catalog._subspaces(4)) == 67
