"""tdlc command line: run scenarios, verify property suites, list and export fixtures.

Exit codes: 0 success, 1 verify failure or query error, 2 expectation mismatch,
3 parse error, 4 budget exhausted in a query.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import scenario as sc
from .core import BudgetExhausted, InvalidParameter, ParseError, TdlcError
from .models import build_model
from .queries import Context, default_names, element, run_query

REPORT_VERSION = "1"
OK, FAILED, MISMATCH, PARSE, BUDGET = 0, 1, 2, 3, 4


def plain(x):
    """JSON-ready copy of x: integers become decimal strings, keys are strings."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, str):
        return x
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(plain(v) for v in x)
    return str(x)


def _same(expected, actual):
    def norm(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        return plain(v)
    return norm(expected) == norm(actual)


def _pick(res, fld):
    if fld is None:
        return res.value
    if isinstance(res.value, dict) and fld in res.value:
        return res.value[fld]
    if isinstance(res.witness, dict):
        return res.witness.get(fld)
    return None


# ---------------------------------------------------------------- run
def _context(s, args):
    def pick(flag, own, default):
        if flag is not None:
            return flag
        return own if own is not None else default
    k = pick(args.resolution, s.resolution, 4)
    budget = pick(args.budget, s.budget, 10**6)
    seed = pick(args.seed, s.seed, 0)
    if k < 0:
        raise InvalidParameter("resolution", "must be non-negative")
    return k, budget, seed


def _one(M, q, ctx):
    t = time.perf_counter()
    entry = {"id": q.id, "op": q.op}
    try:
        res = run_query(M, q.op, q.args, ctx)
    except BudgetExhausted as exc:
        entry.update(status="budget", error={"code": exc.code, "message": str(exc)})
    except ParseError as exc:
        entry.update(status="parse", error={"code": exc.code, "message": str(exc)})
    except TdlcError as exc:
        entry.update(status="error", error={"code": exc.code, "message": str(exc)})
    else:
        checks = []
        for c in q.expect:
            actual = _pick(res, c.field)
            checks.append({"field": c.field, "expected": plain(c.value), "actual": plain(actual),
                           "ok": _same(c.value, actual)})
        entry.update(status="ok" if all(c["ok"] for c in checks) else "mismatch",
                     value=plain(res.value), certificate=res.certificate, witness=plain(res.witness),
                     checks=checks)
    return entry, time.perf_counter() - t


def execute(s: sc.Scenario, k=4, budget=10**6, seed=0, jobs=1):
    """Run every query of a scenario; returns (results, wall times) in scenario order."""
    M = build_model(s.model_spec())
    names = default_names(M)
    for name, word in s.elements.items():
        names[name] = element(M, word, names)
    ctx = Context(k, budget, seed, names)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            done = list(pool.map(lambda q: _one(M, q, ctx), s.queries))
    else:
        done = [_one(M, q, ctx) for q in s.queries]
    return [e for e, _ in done], [t for _, t in done]


def _exit_code(results):
    statuses = {r["status"] for r in results}
    if "parse" in statuses:
        return PARSE
    if "budget" in statuses:
        return BUDGET
    if "error" in statuses:
        return FAILED
    if "mismatch" in statuses:
        return MISMATCH
    return OK


def _summary(results):
    out = {}
    for r in results:
        out[r["status"]] = out.get(r["status"], 0) + 1
    return {"queries": len(results), "counts": out}


def _load_target(target, fixture):
    if fixture is not None:
        if target is not None:
            raise ParseError("give either a scenario path or --fixture, not both")
        target = f"fixture:{fixture}"
    if target is None:
        raise ParseError("nothing to run: give a scenario path or --fixture")
    if target.startswith("fixture:"):
        fid = target.split(":", 1)[1]
        try:
            return target, sc.export_fixture(fid)
        except TdlcError as exc:
            raise ParseError(str(exc)) from None
    return target, sc.load(target)


def _show(value):
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return "null" if value is None else str(value)


def _text_run(name, results, times, out):
    out.write(f"scenario {name}\n")
    for r, t in zip(results, times):
        if "error" in r:
            out.write(f"  {r['id']} [{r['op']}] {r['status'].upper()} {r['error']['code']}: "
                      f"{r['error']['message']}  ({t * 1000:.0f} ms)\n")
            continue
        out.write(f"  {r['id']} [{r['op']}] = {_show(r['value'])}  <{r['certificate']}>  ({t * 1000:.0f} ms)\n")
        for c in r["checks"]:
            label = "value" if c["field"] is None else c["field"]
            mark = "ok" if c["ok"] else "MISMATCH"
            out.write(f"      {mark} {label}: expected {_show(c['expected'])}, got {_show(c['actual'])}\n")
    s = _summary(results)
    counts = ", ".join(f"{k} {v}" for k, v in sorted(s["counts"].items()))
    out.write(f"{s['queries']} queries: {counts}\n")


def cmd_run(args, out):
    try:
        name, s = _load_target(args.scenario, args.fixture)
        k, budget, seed = _context(s, args)
        results, times = execute(s, k, budget, seed, args.jobs)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return PARSE
    except TdlcError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return FAILED
    if args.format == "json":
        report = {"version": REPORT_VERSION,
                  "scenario": {"source": name, "resolution": str(k), "budget": str(budget), "seed": str(seed)},
                  "results": results, "summary": _summary(results)}
        report["summary"] = plain(report["summary"])
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        _text_run(name, results, times, out)
    return _exit_code(results)


# ---------------------------------------------------------------- verify
def cmd_verify(args, out):
    from .properties import SUITES, run_suite

    suite = args.suite_flag or args.suite or "all"
    names = list(SUITES) if suite == "all" else [suite]
    if any(n not in SUITES for n in names):
        sys.stderr.write(f"parse error: unknown suite {suite!r}; choose from {', '.join(SUITES)}, all\n")
        return PARSE
    seed = args.seed if args.seed is not None else 0
    k = args.resolution if args.resolution is not None else 4
    rows = []
    for n in names:
        for r in run_suite(n, seed=seed, k=k):
            rows.append({"suite": r.suite, "name": r.name, "ok": r.ok, "checked": plain(r.checked),
                         "witness": plain(r.witness)})
    failed = [r for r in rows if not r["ok"]]
    if args.format == "json":
        report = {"version": REPORT_VERSION,
                  "scenario": {"source": f"verify:{suite}", "resolution": str(k), "seed": str(seed)},
                  "results": rows,
                  "summary": {"properties": str(len(rows)), "passed": str(len(rows) - len(failed)),
                              "failed": str(len(failed))}}
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        for r in rows:
            out.write(f"{'PASS' if r['ok'] else 'FAIL'} {r['suite']}: {r['name']} ({r['checked']} checked)\n")
        out.write(f"{len(rows) - len(failed)}/{len(rows)} properties hold\n")
        if failed:
            out.write(f"first failure: {failed[0]['suite']}: {failed[0]['name']} "
                      f"witness {json.dumps(failed[0]['witness'], sort_keys=True)}\n")
    return FAILED if failed else OK


# ---------------------------------------------------------------- fixtures
def cmd_list(args, out):
    from .catalog import list_fixtures

    fs = list_fixtures()
    if args.format == "json":
        rows = [{"id": f.id, "family": f.model_spec["family"], "description": f.description,
                 "queries": str(len(f.queries))} for f in fs]
        out.write(json.dumps({"version": REPORT_VERSION, "fixtures": rows}, sort_keys=True, indent=2) + "\n")
    else:
        for f in fs:
            out.write(f"{f.id:24s} {f.model_spec['family']:12s} {f.description}\n")
    return OK


def cmd_export(args, out):
    fid = args.fixture_id or args.fixture
    if fid is None:
        sys.stderr.write("parse error: export-fixture needs a fixture id\n")
        return PARSE
    try:
        s = sc.export_fixture(fid)
    except TdlcError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return FAILED
    text = sc.dumps(s)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return OK


# ---------------------------------------------------------------- scan
def cmd_scan(args, out):
    """Report, per fixture, whether the Tits core of the default generators looks dense.

    The question is open in general; this only lists what the models show at
    the given resolution and claims nothing.
    """
    from .catalog import list_fixtures
    from .residuals import tits_core

    k = args.resolution if args.resolution is not None else 4
    rows = []
    for f in list_fixtures():
        M = f.model()
        gens = list(default_names(M).values())
        try:
            h = tits_core(M, gens, k)
            rows.append({"fixture": f.id, "tits_core": M.format_descriptor(h.outer),
                         "whole": M.contains(h.outer, M.whole()), "certificate": h.certificate.label})
        except TdlcError as exc:
            rows.append({"fixture": f.id, "error": exc.code})
    if args.format == "json":
        out.write(json.dumps({"version": REPORT_VERSION, "results": plain(rows)}, sort_keys=True, indent=2) + "\n")
    else:
        for r in rows:
            if "error" in r:
                out.write(f"{r['fixture']:24s} error {r['error']}\n")
            else:
                out.write(f"{r['fixture']:24s} core {r['tits_core']}  "
                          f"{'whole' if r['whole'] else 'proper'}  <{r['certificate']}>\n")
    return OK


def parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--resolution", type=int, default=None, help="resolution level k (default 4)")
    common.add_argument("--budget", type=int, default=None, help="step budget (default 10^6)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=None, help="sampling seed (default 0)")
    common.add_argument("--fixture", default=None, help="catalog fixture id")
    common.add_argument("--suite", dest="suite_flag", default=None, help="property suite name")

    p = argparse.ArgumentParser(prog="tdlc", description="Scale, tidy subgroup and residual workbench.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run a scenario file or fixture:<id>")
    r.add_argument("scenario", nargs="?")
    r.add_argument("--jobs", type=int, default=1, help="run queries on this many threads")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", parents=[common], help="run a property suite")
    v.add_argument("suite", nargs="?")
    v.set_defaults(func=cmd_verify)
    ls = sub.add_parser("list-fixtures", parents=[common], help="list catalog fixtures")
    ls.set_defaults(func=cmd_list)
    e = sub.add_parser("export-fixture", parents=[common], help="write a fixture as a scenario file")
    e.add_argument("fixture_id", nargs="?")
    e.add_argument("-o", "--output", default=None)
    e.set_defaults(func=cmd_export)
    s = sub.add_parser("scan", parents=[common], help="Tits-core density scan over the catalog (no claims)")
    s.set_defaults(func=cmd_scan)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    p = parser()
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return PARSE if exc.code else OK
    return args.func(args, out)


if __name__ == "__main__":
    sys.exit(main())
