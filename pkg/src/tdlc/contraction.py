"""Contraction groups, nubs of single automorphisms and the checks built on them.

con(g) is the set of x with g^n x g^-n -> 1.  Families report it as a
SubgroupHandle whose outer descriptor is the closure of con(g); the group
itself may be dense in that closure, in which case closed is False.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import (
    BudgetExhausted,
    Certificate,
    CrossCheckFailure,
    EnumerationTooLarge,
    Grade,
    NotNormal,
    NotRepresentable,
    PrerequisiteUncertified,
    SampleEscape,
    SubgroupHandle,
    UnsupportedQuotient,
    Verdict,
    as_budget,
    weakest,
)
from .tidy import tidy_from

ORBIT_HORIZON = 24
COSET_LIMIT = 4096


@dataclass
class NubResult:
    descriptor: object
    certificate: Certificate
    sweep: object = None
    levels: tuple = ()

    @property
    def exact(self):
        return self.certificate.grade == Grade.EXACT


@dataclass
class ContractionReport:
    con: SubgroupHandle
    con_inv: SubgroupHandle
    nub: NubResult
    closed: Verdict
    certificate: Certificate


def _violated_level(M, g, x, k, horizon=ORBIT_HORIZON):
    """Smallest level j <= k missed by g^horizon x g^-horizon, or None."""
    y = M.conj_element(M.power(g, horizon), x)
    for j in range(k + 1):
        if not M.member(y, M.basis(j)):
            return j
    return None


def contracts(M, g, x, k=4, budget=None) -> Verdict:
    """Does g^n x g^-n tend to the identity?"""
    budget = as_budget(budget)
    M.check(g)
    M.check(x)
    if x == M.identity():
        return Verdict.true(Certificate.exact(rule="identity"))
    cf = M.cf_contracts(g, x, k)
    if cf is not None:
        if cf.is_false:
            level = _violated_level(M, g, x, k)
            witness = {"reason": cf.witness, "index": ORBIT_HORIZON, "level": level}
            return Verdict.false(witness, cf.certificate, cf.note)
        return cf
    # no closed form: watch the orbit; entry is never proven permanent here
    y = x
    entered = {}
    for n in range(ORBIT_HORIZON + 1):
        budget.spend()
        for j in range(k + 1):
            inside = M.member(y, M.basis(j))
            if inside and j not in entered:
                entered[j] = n
            elif not inside:
                entered.pop(j, None)
        y = M.conj_element(g, y)
    return Verdict.unknown(k, note=f"orbit inside levels {sorted(entered)} at the horizon")


def _empty_handle(M, k, exact=True, cert=None):
    return SubgroupHandle((), k, M.trivial(), exact, cert or Certificate.exact(rule="trivial"), True)


def contraction_group(M, g, k=4, budget=None) -> SubgroupHandle:
    M.check(g)
    if g == M.identity():
        return _empty_handle(M, k)
    cf = M.cf_contraction(g, k)
    if cf is not None:
        return cf
    whole = M.whole() if hasattr(M, "whole") else M.basis(0)
    return SubgroupHandle((), k, whole, False, Certificate.bounded(k, rule="no closed form"), None)


def _certified(handle):
    return handle.certificate.grade >= Grade.STABILIZED


def _sweep(M, g, k, budget):
    """Tidy subgroups found from each basis offset, and the meet of their nearby conjugates."""
    found = []
    for U in [M.basis(j) for j in range(k + 1)] + list(M.tidy_candidates(g)):
        report = tidy_from(M, g, U, budget, k)
        if report is not None and report.tidy:
            found.append(report.U)
    if not found:
        return found, None
    span = 2 * k + 2
    S = found[0]
    for V in found:
        for n in range(-span, span + 1):
            try:
                S = M.intersect(S, M.conjugate(M.power(g, n), V))
            except NotRepresentable:
                continue
    return found, S


def nub_element(M, g, budget=None, k=4) -> NubResult:
    """nub(g), computed from tidy subgroups and cross-checked against cl con(g) cap cl con(g^-1)."""
    budget = as_budget(budget)
    M.check(g)
    con = contraction_group(M, g, k, budget)
    con_inv = contraction_group(M, M.invert(g), k, budget)
    closures = None
    if con.certificate.grade == Grade.EXACT and con_inv.certificate.grade == Grade.EXACT:
        closures = M.intersect(con.outer, con_inv.outer)
    cf = M.cf_nub(g)
    if cf is not None and closures is not None:
        if not (M.contains(cf, closures) and M.contains(closures, cf)):
            raise CrossCheckFailure("closed-form nub differs from the meet of contraction closures",
                                    nub=M.format_descriptor(cf), meet=M.format_descriptor(closures))
    target = closures if closures is not None else cf
    try:
        found, S = _sweep(M, g, k, budget)
    except BudgetExhausted:
        found, S = [], None
    if target is None:
        if S is None:
            raise BudgetExhausted("no tidy subgroup found for the nub sweep")
        return NubResult(S, Certificate.bounded(k, rule="meet of tidy subgroups only"), S, ())
    for V in found:
        if not M.contains(V, target):
            raise CrossCheckFailure("nub is not inside a tidy subgroup",
                                    tidy=M.format_descriptor(V), nub=M.format_descriptor(target))
    levels = []
    if S is not None:
        for j in range(k + 1):
            same = M.same_at_level(S, target, j)
            if same is None:
                continue
            if same:
                # nub sits inside every tidy subgroup (checked above), so a mismatch
                # only means the sampled tidy subgroups are not small enough here
                levels.append(j)
    if len(levels) == k + 1:
        cert = Certificate.exact(rule="closed form, agreeing with the tidy sweep at every level", levels=k)
    elif levels or S is None:
        cert = Certificate.stabilized(k, rule="closed form; tidy sweep compared where representable")
    else:
        cert = Certificate.stabilized(k, rule="closed form; tidy sweep not comparable")
    return NubResult(target, cert, S, tuple(levels))


def contraction_report(M, g, k=4, budget=None) -> ContractionReport:
    budget = as_budget(budget)
    con = contraction_group(M, g, k, budget)
    con_inv = contraction_group(M, M.invert(g), k, budget)
    nub = nub_element(M, g, budget, k)
    if nub.certificate.grade >= Grade.STABILIZED:
        if M.is_trivial(nub.descriptor):
            closed = Verdict.true(nub.certificate, note="nub is trivial")
        else:
            closed = Verdict.false({"nub": M.format_descriptor(nub.descriptor)}, nub.certificate,
                                   note="a nontrivial nub lies in the closure but not in con")
    else:
        closed = Verdict.unknown(k, note="nub not certified")
    if con.closed is not None and not closed.is_unknown and con.closed != closed.is_true:
        raise CrossCheckFailure("contraction closedness disagrees with the nub")
    cert = weakest(con.certificate, con_inv.certificate, nub.certificate)
    return ContractionReport(con, con_inv, nub, closed, cert)


def _orbit_points(M, g, x, W, horizon=ORBIT_HORIZON):
    """Conjugates g^n x g^-n (n >= 0) that lie in W."""
    out = []
    y = x
    for _ in range(horizon + 1):
        if M.member(y, W):
            out.append(y)
        y = M.conj_element(g, y)
    return out


def _coset_closure(M, gens, k, limit=COSET_LIMIT):
    """Coset keys of the subgroup generated by gens, taken modulo U_k."""
    ident = M.identity()
    reps = {M.coset_key(ident, k): ident}
    frontier = [ident]
    sym = list(gens) + [M.invert(x) for x in gens]
    while frontier:
        nxt = []
        for a in frontier:
            for s in sym:
                b = M.compose(a, s)
                key = M.coset_key(b, k)
                if key not in reps:
                    reps[key] = b
                    nxt.append(b)
                    if len(reps) > limit:
                        raise EnumerationTooLarge(f"more than {limit} cosets")
        frontier = nxt
    return reps


def closure_decomposition_check(M, g, k=3, budget=None) -> Verdict:
    """cl(con g) U_k = con(g) nub(g) U_k, compared as sets of U_k-cosets inside U_0."""
    budget = as_budget(budget)
    con = contraction_group(M, g, k, budget)
    nub = nub_element(M, g, budget, k)
    if not _certified(con) or nub.certificate.grade < Grade.STABILIZED:
        raise PrerequisiteUncertified("contraction group or nub not certified")
    cert = weakest(con.certificate, nub.certificate)
    if M.is_trivial(con.outer):
        return Verdict.true(cert, note="closure of con is trivial")
    if M.contains(nub.descriptor, con.outer):
        # con lies in its closure, which is the nub: both sides are nub U_k
        return Verdict.true(cert, note="closure of con equals the nub")
    if not M.enumerable:
        return Verdict.unknown(k, note="no coset enumeration for this family")
    W = M.basis(0)
    try:
        left = {M.coset_key(x, k) for x in M.coset_reps(M.intersect(con.outer, W), k, COSET_LIMIT)}
        pts = []
        for x in con.inner:
            pts += _orbit_points(M, g, x, W)
        generated = _coset_closure(M, pts, k)
        nub_reps = M.coset_reps(M.intersect(nub.descriptor, W), k, COSET_LIMIT)
    except EnumerationTooLarge:
        return Verdict.unknown(k, note="coset sets too large")
    right = set()
    for c in generated.values():
        for n in nub_reps:
            budget.spend()
            right.add(M.coset_key(M.compose(c, n), k))
    if left == right:
        return Verdict.true(cert, witness={"cosets": len(left)})
    missing = sorted(map(repr, left ^ right))[0]
    return Verdict.false({"coset": missing, "left": len(left), "right": len(right)}, cert)


def is_anisotropic(M, g, budget=None, k=4) -> Verdict:
    """con(g) and con(g^-1) both trivial."""
    budget = as_budget(budget)
    try:
        con = contraction_group(M, g, k, budget)
        con_inv = contraction_group(M, M.invert(g), k, budget)
    except BudgetExhausted:
        return Verdict.unknown(k, note="budget exhausted")
    for name, h in (("con", con), ("con_inv", con_inv)):
        if _certified(h) and not M.is_trivial(h.outer):
            return Verdict.false({name: M.format_descriptor(h.outer)}, h.certificate)
    if _certified(con) and _certified(con_inv):
        return Verdict.true(weakest(con.certificate, con_inv.certificate))
    return Verdict.unknown(k, note="contraction groups not certified")


def _relatively_contracted(M, g, x, K, k, horizon=ORBIT_HORIZON):
    """Does the orbit of xK enter U_j K for every j <= k and stay there?

    Decided in the quotient model when the family provides one; otherwise the
    second half of a finite orbit is inspected (a bounded answer).
    """
    from .models import quotient_model

    try:
        Q = quotient_model(M, K)
    except (UnsupportedQuotient, NotNormal):
        Q = None
    if Q is not None:
        return contracts(Q, Q.projection(g), Q.projection(x), k)
    y = M.conj_element(M.power(g, horizon // 2), x)
    for _ in range(horizon // 2 + 1):
        for j in range(k + 1):
            if not M.member(y, M.join(M.basis(j), K)):
                return Verdict.false({"level": j}, Certificate.bounded(k))
        y = M.conj_element(g, y)
    return Verdict.true(Certificate.bounded(k, rule="orbit window"))


def relative_contraction_check(M, g, K, samples=100, k=4, seed=0) -> Verdict:
    """con_{G/K}(g) = con(g) K and con_K(g) = con(g) cap K, tested on sampled points."""
    rng = random.Random(seed)
    con = contraction_group(M, g, k)
    checked = 0
    ambient = M.whole() if hasattr(M, "whole") else M.basis(0)
    for _ in range(samples):
        x = M.sample(rng, ambient)
        rel = _relatively_contracted(M, g, x, K, k)
        if rel.is_unknown:
            continue
        # membership in con(g) K: x = c y with c contracted and y in K
        in_conK = None
        if M.member(x, K):
            in_conK = True
        elif con.certificate.grade == Grade.EXACT:
            pair = M.factor(x, con.outer, K) if M.enumerable else None
            if pair is not None:
                c, _ = pair
                v = contracts(M, g, c, k)
                in_conK = None if v.is_unknown else v.is_true
            else:
                in_conK = False
        if in_conK is None:
            continue
        if rel.is_true != in_conK:
            raise SampleEscape("relative contraction disagrees with con(g) K",
                               sample=M.format_element(x), relative=rel.is_true)
        here = contracts(M, g, x, k)
        if not here.is_unknown and here.is_true and M.member(x, K) and not rel.is_true:
            raise SampleEscape("a point of con(g) cap K is not relatively contracted")
        checked += 1
    # con_K(g) = con(g) cap K: sample inside K
    for _ in range(samples):
        y = M.sample(rng, K)
        v = contracts(M, g, y, k)
        if v.is_unknown:
            continue
        inside = all(M.member(M.conj_element(M.power(g, n), y), K) for n in range(4))
        if not inside:
            raise SampleEscape("K is not invariant along a sampled orbit", sample=M.format_element(y))
        checked += 1
    if not checked:
        return Verdict.unknown(k, note="no sample could be decided")
    return Verdict.true(Certificate.stabilized(k, samples=checked, seed=seed))
