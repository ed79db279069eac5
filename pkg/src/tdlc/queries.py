"""Named query operations over a model, with plain (JSON-ready) results.

Both the fixture catalog and the command line go through run_query, so a
query in a scenario file and a query in a fixture mean the same thing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import contraction, flat, residuals, tidy
from .core import Certificate, InvalidParameter, ParseError, Verdict
from .words import parse_word


@dataclass
class Context:
    k: int = 4
    budget: int = 10**6
    seed: int = 0
    names: dict = field(default_factory=dict)


@dataclass
class QueryResult:
    value: object
    certificate: str
    witness: object = None


def default_names(M):
    """Generator names every scenario can use without declaring them."""
    fam = M.family
    if fam == "PAdicToral":
        return dict(M.actors)
    if fam == "FiniteLevel":
        return dict(M.actions)
    if fam == "Shift":
        return {"s": M.sigma}
    if fam == "TreeProduct":
        if M.r == 1:
            return {"tau": M.tau(0)}
        return {f"tau{i + 1}": M.tau(i) for i in range(M.r)}
    return {}


def element(M, text, names):
    text = str(text).strip()
    if text and text[0] in "([{":
        return M.parse_element(text)
    return parse_word(M, text, names)


def elements(M, items, names):
    if isinstance(items, str):
        items = [w for w in items.split(",") if w.strip()]
    return [element(M, w, names) for w in items]


def descriptor(M, text):
    """'whole', 'trivial', 'basis:k', or 'axis' (tree models: the fixator of the spine)."""
    text = str(text).strip()
    if text == "axis" and M.family == "TreeProduct":
        return M.spine_fixator()
    if text == "whole":
        return M.whole()
    if text == "trivial":
        return M.trivial()
    if text.startswith("basis:"):
        try:
            return M.basis(int(text.split(":", 1)[1]))
        except ValueError:
            raise ParseError(f"bad basis level in {text!r}") from None
    raise ParseError(f"unknown descriptor {text!r}")


def _verdict(v: Verdict):
    return v.outcome.value


def _fmt(M, D):
    return None if D is None else M.format_descriptor(D)


def q_scale(M, a, c):
    g = element(M, a["g"], c.names)
    r = tidy.scale(M, g, c.budget, c.k)
    return QueryResult(r.value, r.certificate.label, {m: r.values[m] for m in sorted(r.values)})


def q_tidy(M, a, c):
    g = element(M, a["g"], c.names)
    r = tidy.find_tidy(M, g, c.budget, c.k)
    return QueryResult(_fmt(M, r.U), r.certificate.label, {"interval_length": r.interval_length})


def q_contraction(M, a, c):
    g = element(M, a["g"], c.names)
    r = contraction.contraction_report(M, g, c.k, c.budget)
    value = {"con": _fmt(M, r.con.outer), "con_inv": _fmt(M, r.con_inv.outer), "closed": _verdict(r.closed)}
    return QueryResult(value, r.certificate.label)


def q_nub(M, a, c):
    g = element(M, a["g"], c.names)
    r = contraction.nub_element(M, g, c.budget, a.get("k", c.k))
    return QueryResult(_fmt(M, r.descriptor), r.certificate.label, {"levels": list(r.levels)})


def q_contracts(M, a, c):
    g = element(M, a["g"], c.names)
    x = element(M, a["x"], c.names)
    v = contraction.contracts(M, g, x, c.k, c.budget)
    return QueryResult(_verdict(v), str(v.certificate))


def q_closure_decomposition(M, a, c):
    g = element(M, a["g"], c.names)
    v = contraction.closure_decomposition_check(M, g, a.get("k", 3), c.budget)
    return QueryResult(_verdict(v), str(v.certificate))


def q_anisotropic(M, a, c):
    g = element(M, a["g"], c.names)
    v = contraction.is_anisotropic(M, g, c.budget, c.k)
    return QueryResult(_verdict(v), str(v.certificate))


def _flat(M, a, c):
    gens = elements(M, a["gens"], c.names)
    return gens, flat.find_common_tidy(M, gens, c.budget, c.k)


def q_flat(M, a, c):
    gens, rep = _flat(M, a, c)
    value = {"flat": rep.flat, "rank": None}
    witness = None
    if rep.flat:
        flat.eigenfactor_decomposition(M, rep, c.k, c.budget)
        value["rank"] = flat.flat_rank(M, rep)
        value["common_tidy"] = _fmt(M, rep.common_tidy)
    else:
        witness = rep.verdict.witness
        if isinstance(witness, dict):
            witness = {k: (M.format_element(v) if M.is_element(v) else v) for k, v in witness.items()}
    cert = rep.certificate.label if rep.certificate is not None else str(rep.verdict.certificate)
    return QueryResult(value, cert, witness)


def q_nub_flat(M, a, c):
    gens, rep = _flat(M, a, c)
    d = flat.nub_flat(M, rep, k=a.get("depth", c.k), budget=c.budget)
    return QueryResult({"nub": _fmt(M, d.nub_H), "factors": [lab for lab, _ in d.factors]},
                       d.certificate.label, {"verified_at": d.verified_at})


def q_rnub(M, a, c):
    gens, rep = _flat(M, a, c)
    h = flat.rnub(M, rep, c.k, c.budget)
    return QueryResult(_fmt(M, h.outer), h.certificate.label)


def q_tits_core(M, a, c):
    gens = elements(M, a["gens"], c.names)
    h = residuals.tits_core(M, gens, c.k, c.budget)
    return QueryResult(_fmt(M, h.outer), h.certificate.label)


def q_residual(M, a, c):
    gens = elements(M, a["gens"], c.names)
    r = residuals.discrete_residual(M, gens, c.k, c.budget)
    checks = {name: _verdict(v) for name, v in sorted(r.identity_checks.items())}
    return QueryResult(_fmt(M, r.res.outer), r.certificate.label, checks)


def q_res_chain(M, a, c):
    gens = elements(M, a["gens"], c.names)
    r = residuals.res_infty(M, gens, c.k, c.budget)
    return QueryResult([_fmt(M, h.outer) for h in r.res_chain], r.certificate.label)


def q_proximal(M, a, c):
    gens = elements(M, a["gens"], c.names)
    K = descriptor(M, a.get("K", "basis:0"))
    w = residuals.proximal_search(M, gens, K, budget=a.get("depth", 8), k=c.k)
    if isinstance(w, residuals.NoneFound):
        return QueryResult(None, Certificate.bounded(w.budget).label, {"reason": w.reason})
    value = {"x": M.format_element(w.x), "L": _fmt(M, w.L), "levels": len(w.trace)}
    return QueryResult(value, Certificate.bounded(len(w.trace)).label)


def q_distality(M, a, c):
    gens = elements(M, a["gens"], c.names)
    K = descriptor(M, a.get("K", "whole"))
    r = residuals.distality_report(M, gens, K, k=c.k)
    return QueryResult(r.case, "Exact" if r.case != "c" else Certificate.bounded(c.k).label,
                       {"hypothesis_sin": r.hypothesis_sin, "note": r.note})


def q_envelope(M, a, c):
    gens = elements(M, a["gens"], c.names)
    r = residuals.reduced_envelope(M, gens, c.k, a.get("samples", 200), c.budget, c.seed)
    cc = r.cocompactness
    value = {"E": _fmt(M, r.E.outer), "U_zero": _fmt(M, r.components[1]), "cocompact": _verdict(cc),
             "constant": (cc.witness or {}).get("constant")}
    return QueryResult(value, r.E.certificate.label, {k: list(v) for k, v in r.membership.items()})


def q_p_set(M, a, c):
    g = element(M, a["g"], c.names)
    v = residuals.p_set_membership(M, g, c.k, c.budget)
    return QueryResult(_verdict(v), str(v.certificate))


OPERATIONS = {
    "scale": q_scale,
    "tidy": q_tidy,
    "contraction": q_contraction,
    "nub": q_nub,
    "contracts": q_contracts,
    "closure_decomposition": q_closure_decomposition,
    "anisotropic": q_anisotropic,
    "flat": q_flat,
    "nub_flat": q_nub_flat,
    "rnub": q_rnub,
    "tits_core": q_tits_core,
    "residual": q_residual,
    "res_chain": q_res_chain,
    "proximal": q_proximal,
    "distality": q_distality,
    "envelope": q_envelope,
    "p_set": q_p_set,
}


def _required(op):
    if op == "contracts":
        return ("g", "x")
    if op in ("scale", "tidy", "contraction", "nub", "closure_decomposition", "anisotropic", "p_set"):
        return ("g",)
    return ("gens",)


def run_query(M, op, args, ctx: Context) -> QueryResult:
    if op not in OPERATIONS:
        raise InvalidParameter("op", f"unknown operation {op!r}")
    if not isinstance(args, dict):
        raise InvalidParameter("args", "query arguments must be a record")
    for name in _required(op):
        if name not in args:
            raise InvalidParameter(f"args.{name}", f"{op} needs {name}")
    return OPERATIONS[op](M, args, ctx)
