"""Scenario files: the one external input format.

A scenario is a single YAML document::

    version: 1
    fixture: padic-t            # or  model: {family: PAdicToral, params: {...}}
    resolution: 4               # optional, --resolution overrides
    budget: 1000000             # optional, --budget overrides
    seed: 0                     # optional, --seed overrides
    elements:                   # optional extra names, words or literals
      u: t^2
    queries:
      - id: s
        op: scale
        args: {g: t^-1}
        expect: 2               # shorthand for one check on the whole value
      - id: env
        op: envelope
        args: {gens: t}
        expect:                 # canonical form: a list of checks
          - {field: E, value: "Q_2"}
          - {field: cocompact, value: "true"}

A shorthand `expect: v` may carry a sibling `field: name`.  dump() always
writes the canonical list form, so load(dump(s)) == s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from .core import ParseError, TdlcError

VERSION = 1
_TOP = {"version", "fixture", "model", "resolution", "budget", "seed", "elements", "queries"}
_QUERY = {"id", "op", "args", "expect", "field"}


@dataclass
class Check:
    value: object
    field: str | None = None


@dataclass
class ScenarioQuery:
    id: str
    op: str
    args: dict
    expect: list = field(default_factory=list)


@dataclass
class Scenario:
    model: dict | None = None
    fixture: str | None = None
    queries: list = field(default_factory=list)
    elements: dict = field(default_factory=dict)
    resolution: int | None = None
    budget: int | None = None
    seed: int | None = None
    version: int = VERSION

    def model_spec(self):
        if self.model is not None:
            return self.model
        from .catalog import get_fixture
        try:
            return get_fixture(self.fixture).model_spec
        except KeyError:
            raise ParseError(f"unknown fixture {self.fixture!r}") from None


def _int(doc, key):
    v = doc.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ParseError(f"{key} must be an integer")
    try:
        return int(v)
    except ValueError:
        raise ParseError(f"{key} must be an integer, got {v!r}") from None


def _checks(q, where):
    raw = q.get("expect")
    if raw is None:
        if "field" in q:
            raise ParseError(f"{where}: field given without expect")
        return []
    if isinstance(raw, list) and "field" not in q and all(isinstance(c, dict) and "value" in c for c in raw):
        out = []
        for c in raw:
            extra = set(c) - {"value", "field"}
            if extra:
                raise ParseError(f"{where}: unknown check keys {sorted(extra)}")
            out.append(Check(c["value"], c.get("field")))
        return out
    return [Check(raw, q.get("field"))]


def from_document(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("a scenario is a key-value document")
    extra = set(doc) - _TOP
    if extra:
        raise ParseError(f"unknown scenario keys {sorted(extra)}")
    version = _int(doc, "version")
    if version not in (None, VERSION):
        raise ParseError(f"unsupported scenario version {version}")
    if ("fixture" in doc) == ("model" in doc):
        raise ParseError("a scenario names exactly one of fixture or model")
    model = doc.get("model")
    if model is not None and not (isinstance(model, dict) and "family" in model):
        raise ParseError("model must be a record with a family")
    elements = doc.get("elements") or {}
    if not isinstance(elements, dict):
        raise ParseError("elements must map names to words")
    queries = doc.get("queries")
    if not isinstance(queries, list) or not queries:
        raise ParseError("queries must be a non-empty list")
    out, seen = [], set()
    for i, q in enumerate(queries):
        where = f"query {i + 1}"
        if not isinstance(q, dict):
            raise ParseError(f"{where}: must be a record")
        extra = set(q) - _QUERY
        if extra:
            raise ParseError(f"{where}: unknown keys {sorted(extra)}")
        for key in ("id", "op"):
            if not isinstance(q.get(key), str) or not q[key]:
                raise ParseError(f"{where}: {key} must be a non-empty string")
        if q["id"] in seen:
            raise ParseError(f"{where}: duplicate id {q['id']!r}")
        seen.add(q["id"])
        args = q.get("args") or {}
        if not isinstance(args, dict):
            raise ParseError(f"query {q['id']}: args must be a record")
        out.append(ScenarioQuery(q["id"], q["op"], dict(args), _checks(q, f"query {q['id']}")))
    fixture = doc.get("fixture")
    if fixture is not None:
        fixture = str(fixture)
    return Scenario(model, fixture, out, {str(k): str(v) for k, v in elements.items()},
                    _int(doc, "resolution"), _int(doc, "budget"), _int(doc, "seed"), VERSION)


def loads(text) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"not a YAML document: {exc}") from None
    return from_document(doc)


def load(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def to_document(s: Scenario) -> dict:
    doc = {"version": s.version}
    if s.fixture is not None:
        doc["fixture"] = s.fixture
    else:
        doc["model"] = s.model
    for key in ("resolution", "budget", "seed"):
        if getattr(s, key) is not None:
            doc[key] = getattr(s, key)
    if s.elements:
        doc["elements"] = dict(s.elements)
    qs = []
    for q in s.queries:
        d = {"id": q.id, "op": q.op, "args": dict(q.args)}
        if q.expect:
            d["expect"] = [{"value": c.value} if c.field is None else {"field": c.field, "value": c.value}
                           for c in q.expect]
        qs.append(d)
    doc["queries"] = qs
    return doc


def dumps(s: Scenario) -> str:
    return yaml.safe_dump(to_document(s), sort_keys=False, allow_unicode=True)


def export_fixture(fid) -> Scenario:
    """A self-contained scenario for a catalog fixture, oracle values already computed."""
    from .catalog import _resolve, get_fixture, run_oracle

    try:
        f = get_fixture(fid)
    except KeyError:
        raise TdlcError(f"unknown fixture {fid!r}") from None
    M = f.model()
    oracle = run_oracle(f) if f.oracle is not None else {}
    queries = [ScenarioQuery(q.id, q.op, dict(q.args)) for q in f.queries]
    by_id = {q.id: q for q in queries}
    for e in f.expected:
        value = oracle.get(e.oracle) if e.oracle else e.value
        by_id[e.query].expect.append(Check(_resolve(M, value), e.field))
    return Scenario(model=f.model_spec, queries=queries)
