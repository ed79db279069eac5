import pytest
from hypothesis import given, settings, strategies as st

from tdlc import scenario as sc
from tdlc.core import ParseError

GOOD = """
version: 1
fixture: padic-t
resolution: 5
elements: {u: t^2}
queries:
  - {id: s, op: scale, args: {g: u}, expect: 1}
  - id: env
    op: envelope
    args: {gens: t}
    expect:
      - {field: cocompact, value: "true"}
      - {field: E, value: "exp(-inf)"}
"""


def test_parse_shorthand_and_list_checks():
    s = sc.loads(GOOD)
    assert s.fixture == "padic-t" and s.resolution == 5 and s.elements == {"u": "t^2"}
    assert s.queries[0].expect == [sc.Check(1, None)]
    assert [c.field for c in s.queries[1].expect] == ["cocompact", "E"]


def test_round_trip_on_canonical_form():
    s = sc.loads(GOOD)
    assert sc.loads(sc.dumps(s)) == s
    assert sc.dumps(sc.loads(sc.dumps(s))) == sc.dumps(s)


@pytest.mark.parametrize("fid", ["padic-t", "badnub-tower", "tree-hyperbolic"])
def test_exported_fixture_round_trips(fid):
    s = sc.export_fixture(fid)
    assert sc.loads(sc.dumps(s)) == s
    assert s.model is not None and all(q.expect for q in s.queries)


@pytest.mark.parametrize("text", [
    "queries: [\n - id: x",                    # not YAML
    "- 1\n- 2",                                 # not a record
    "fixture: padic-t\nqueries: []",            # no queries
    "fixture: padic-t\nmodel: {family: Shift}\nqueries: [{id: a, op: scale}]",
    "fixture: padic-t\nqueries: [{id: a, op: scale}, {id: a, op: scale}]",
    "fixture: padic-t\nqueries: [{id: a, op: scale, colour: red}]",
    "fixture: padic-t\nresolution: high\nqueries: [{id: a, op: scale}]",
    "version: 9\nfixture: padic-t\nqueries: [{id: a, op: scale}]",
    "fixture: padic-t\nqueries: [{id: a, op: scale, field: x}]",
])
def test_malformed(text):
    with pytest.raises(ParseError):
        sc.loads(text)


ident = st.text("abcdefgh", min_size=1, max_size=6)
values = st.one_of(st.integers(-50, 50), st.booleans(), ident, st.lists(ident, max_size=3))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(ident, st.sampled_from(["scale", "nub", "flat"]), st.lists(
    st.tuples(st.one_of(st.none(), ident), values), max_size=3)), min_size=1, max_size=4, unique_by=lambda q: q[0]),
    st.one_of(st.none(), st.integers(0, 9)))
def test_generated_round_trip(queries, k):
    s = sc.Scenario(fixture="padic-t", resolution=k, queries=[
        sc.ScenarioQuery(qid, op, {"g": "t"}, [sc.Check(v, f) for f, v in checks]) for qid, op, checks in queries])
    assert sc.loads(sc.dumps(s)) == s
