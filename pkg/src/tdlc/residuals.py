"""Relative Tits cores, discrete residuals, proximal pairs and reduced envelopes."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .contraction import contraction_group, is_anisotropic
from .core import (
    BudgetExhausted,
    Certificate,
    CoreIsOpen,
    CrossCheckFailure,
    Grade,
    InfiniteIndex,
    NotCommensurated,
    NotNested,
    NotRepresentable,
    PrerequisiteMissing,
    SubgroupHandle,
    Verdict,
    as_budget,
    weakest,
)
from .tidy import limit_subgroups
from .words import symmetric, words_upto, words_with_length

CHAIN_LIMIT = 4


@dataclass
class ResidualReport:
    tits_core: SubgroupHandle = None
    res: SubgroupHandle = None
    res_chain: list = field(default_factory=list)
    res_infty: SubgroupHandle = None
    nub_Ku: object = None
    identity_checks: dict = field(default_factory=dict)
    certificate: Certificate = None


@dataclass
class ProximalWitness:
    x: object
    L: object
    trace: list


@dataclass
class NoneFound:
    reason: str
    budget: int


@dataclass
class EnvelopeReport:
    E: SubgroupHandle
    components: tuple
    cocompactness: Verdict
    membership: dict = field(default_factory=dict)


def handles_equal(M, a, b):
    """Equal outer bounds, and each inner generator inside the other outer bound."""
    if not (M.contains(a.outer, b.outer) and M.contains(b.outer, a.outer)):
        return False
    return all(M.member(x, b.outer) for x in a.inner) and all(M.member(x, a.outer) for x in b.inner)


def _whole(M):
    return M.whole() if hasattr(M, "whole") else M.basis(0)


def tits_core(M, X, k=4, budget=None) -> SubgroupHandle:
    """G†_X: generated by the closed contraction groups of X and X^-1."""
    budget = as_budget(budget)
    X = [x for x in X if x != M.identity()]
    if not X:
        return SubgroupHandle((), k, M.trivial(), True, Certificate.exact(rule="empty set"), True)
    inner, outers, certs = [], [], []
    for x in X:
        for y in (x, M.invert(x)):
            h = contraction_group(M, y, k, budget)
            inner += list(h.inner)
            outers.append(h.outer)
            certs.append(h.certificate)
    res = M.tits_outer(X)
    if res is not None:
        outer, exact = res
    else:
        outer, exact = outers[0], False
        for D in outers[1:]:
            outer = M.join(outer, D)
    for D in outers:
        if not M.contains(outer, D):
            raise CrossCheckFailure("a contraction closure escapes the Tits core bound",
                                    closure=M.format_descriptor(D), bound=M.format_descriptor(outer))
    cert = weakest(*certs) if exact else Certificate.bounded(k, rule="join of contraction closures")
    return SubgroupHandle(tuple(inner), k, outer, exact, cert, True)


def _residual_descriptor(M, gens, k, within, budget):
    """Meet over levels j <= k of the invariant closures of (within cap U_j); with a certificate."""
    if hasattr(M, "cf_residual") and (within is None or within.is_open):
        D, cert = M.cf_residual(gens, within)
        return D, cert
    W = within if within is not None else _whole(M)
    chain = []
    for j in range(k + 1):
        budget.spend()
        B = M.intersect(W, M.basis(j))
        if M.is_trivial(B):
            # {1} is open in W, so it is the smallest open invariant subgroup
            return B, Certificate.exact(rule="trivial subgroup is open in the stage")
        if not gens:
            chain.append(B)
            continue
        res = M.invariant_closure(B, gens)
        if res is None:
            return None, Certificate.bounded(k, rule="no invariant closure")
        D = res[0]
        try:
            D = M.intersect(D, W)
        except NotRepresentable:
            pass
        chain.append(D)
    R = chain[0]
    for D in chain[1:]:
        R = M.intersect(R, D)
    # when every closure is just W cap U_j, the meet is trivial (U_j is a neighbourhood basis)
    if all(D == M.intersect(W, M.basis(j)) for j, D in enumerate(chain)):
        if not M.is_trivial(chain[-1]):
            return M.trivial(), Certificate.exact(rule="invariant closures are the basis itself")
    if len(chain) >= 3 and chain[-1] == chain[-2] == chain[-3]:
        return R, Certificate.stabilized(k, rule="invariant closures stabilized")
    return R, Certificate.bounded(k, rule="invariant closures still shrinking")


def discrete_residual(M, H_gens, k=4, budget=None, within=None, cross_check=True) -> ResidualReport:
    """Res(H): the meet of all open H-invariant subgroups (of `within` when given)."""
    budget = as_budget(budget)
    gens = [g for g in H_gens if g != M.identity()]
    core = tits_core(M, gens, k, budget)
    D, cert = _residual_descriptor(M, gens, k, within, budget)
    if D is None:
        D, cert = _whole(M) if within is None else within, Certificate.bounded(k, rule="no closure")
    res = SubgroupHandle(core.inner, k, D, cert.grade >= Grade.STABILIZED, cert, True)
    report = ResidualReport(tits_core=core, res=res, certificate=weakest(cert, core.certificate))
    if within is None and core.exact and res.exact:
        if not M.contains(D, core.outer):
            raise CrossCheckFailure("Tits core is not inside the discrete residual",
                                    core=M.format_descriptor(core.outer), res=M.format_descriptor(D))
        report.identity_checks["tits core inside Res"] = Verdict.true(report.certificate)
    if cross_check and within is None and gens:
        _residual_identity(M, gens, k, budget, report)
    return report


def _residual_identity(M, gens, k, budget, report):
    """Res_G(H) = cl(G†_H) nub(H_u) for flat H."""
    from .flat import find_common_tidy, uniscalar_nub

    flat = find_common_tidy(M, gens, budget, k)
    if not flat.flat:
        return
    U = flat.common_tidy
    Hu = [w for w in words_upto(M, gens, 2) if M.normalizes(w, U)]
    nub_u = M.trivial()
    if Hu:
        nub_u, _ = uniscalar_nub(M, Hu, k)
    report.nub_Ku = nub_u
    core = report.tits_core.outer
    prod = M.product_set(core, nub_u) if nub_u is not None else None
    if prod is None:
        report.identity_checks["Res = cl(G†) nub(H_u)"] = Verdict.unknown(k, note="product not representable")
        return
    D = report.res.outer
    same = M.contains(prod, D) and M.contains(D, prod)
    if not same and report.res.exact and report.tits_core.exact:
        raise CrossCheckFailure("discrete residual differs from cl(G†) nub(H_u)",
                                res=M.format_descriptor(D), product=M.format_descriptor(prod))
    report.identity_checks["Res = cl(G†) nub(H_u)"] = (
        Verdict.true(report.certificate) if same else Verdict.unknown(k, note="residual not certified"))


def res_infty(M, H_gens, k=4, budget=None) -> ResidualReport:
    """Iterate Res on the previous stage until two stages agree."""
    budget = as_budget(budget)
    report = discrete_residual(M, H_gens, k, budget)
    whole = SubgroupHandle((), k, _whole(M), True, Certificate.exact(rule="ambient group"), True)
    chain = [whole, report.res]
    while len(chain) <= CHAIN_LIMIT:
        prev = chain[-1]
        if prev.outer == chain[-2].outer:
            chain.pop()
            break
        if M.is_trivial(prev.outer):
            break
        nxt = discrete_residual(M, H_gens, k, budget, within=prev.outer, cross_check=False).res
        chain.append(nxt)
    else:
        report.res_chain = chain
        report.res_infty = SubgroupHandle((), k, chain[-1].outer, False,
                                          Certificate.bounded(k, rule="chain did not stabilize"), True)
        return report
    report.res_chain = chain
    report.res_infty = chain[-1]
    report.certificate = weakest(report.certificate, *(h.certificate for h in chain))
    return report


def _conj_inv(M, y, K):
    """y^-1 K y."""
    return M.conjugate(M.invert(y), K)


def _meet_conjugates(M, K, words):
    D = K
    for y in words:
        D = M.intersect(D, _conj_inv(M, y, K))
    return D


def _check_commensurated(M, gens, K):
    for g in symmetric(M, gens):
        C = M.conjugate(g, K)
        try:
            M.index(K, M.intersect(K, C))
            M.index(C, M.intersect(K, C))
        except InfiniteIndex:
            raise NotCommensurated(f"{M.format_element(g)} does not commensurate K",
                                   element=M.format_element(g)) from None


def core_of(M, gens, K, length=8):
    """L = the meet of hKh^-1 over h in H, stabilized over word length."""
    prev, D = None, K
    for n in range(1, length + 1):
        D = _meet_conjugates(M, K, words_upto(M, gens, n))
        if D == prev:
            return D, Certificate.stabilized(n, rule="meet of conjugates stabilized")
        prev = D
    return D, Certificate.bounded(length, rule="meet of conjugates still shrinking")


def proximal_search(M, H_gens, K, N_gens=(), budget=8, k=4):
    """x in K outside K(1) whose H-orbit brings it into every K(n): a proximal pair (xL, L)."""
    if not K.is_compact:
        raise PrerequisiteMissing("K must be compact")
    X = [g for g in list(H_gens) + list(N_gens) if g != M.identity()]
    _check_commensurated(M, X, K)
    L = K
    for g in X:
        lim = limit_subgroups(M, g, K, None, k)
        L = M.intersect(L, M.intersect(lim.U_plus, lim.U_minus))
    try:
        M.index(K, L)
    except InfiniteIndex:
        pass
    else:
        D, cert = core_of(M, X, K, max(budget, 2))
        if cert.grade >= Grade.STABILIZED:
            raise CoreIsOpen("the core of K under H has finite index in K", core=M.format_descriptor(D))
        L = D
    levels = {}
    for n in range(1, budget + 1):
        levels[n] = _meet_conjugates(M, K, words_upto(M, X, n))
    conj_words = {n: [(w, word) for w, word in words_with_length(M, X, n)] for n in range(1, budget + 1)}
    try:
        cands = M.coset_reps(K, max(k, 1), 4096)
    except NotRepresentable:
        cands = []
    rng = random.Random(0)
    cands = list(cands) + [M.sample(rng, K) for _ in range(32)]
    for x in cands:
        if not M.member(x, K) or M.member(x, levels[1]):
            continue
        trace = []
        for n in range(1, budget + 1):
            hit = None
            for y, word in conj_words[n]:
                if M.member(M.conj_element(M.invert(y), x), levels[n]):
                    hit = (n, word, levels[n])
                    break
            if hit is None:
                break
            trace.append(hit)
        else:
            return ProximalWitness(x, L, trace)
    return NoneFound("no element of K outside K(1) reached every K(n)", budget)


@dataclass
class DistalityReport:
    case: str
    witness: object = None
    hypothesis_sin: bool = True
    identity_checks: dict = field(default_factory=dict)
    note: str = ""


def _invariant_open_in(M, gens, K, k):
    """A compact open subgroup of K normalized by every generator, if one is found."""
    for j in range(k + 1):
        B = M.intersect(K, M.basis(j))
        if all(M.normalizes(g, B) for g in gens):
            return B
        res = M.invariant_closure(B, gens)
        if res is None:
            continue
        D = M.intersect(res[0], K)
        if D.is_compact and all(M.normalizes(g, D) for g in gens):
            try:
                M.index(K if K.is_compact else M.join(K, D), D)
            except (InfiniteIndex, NotRepresentable, NotNested):
                continue
            return D
    return None


def distality_report(M, H_gens, K, budget=8, k=4) -> DistalityReport:
    """Case (a): H normalizes a compact open subgroup of K; (b): a proximal pair; (c): unknown."""
    from .flat import uniscalar_nub

    gens = [g for g in H_gens if g != M.identity()]
    if not gens:
        return DistalityReport("a", K, note="trivial group normalizes every subgroup")
    try:
        V = _invariant_open_in(M, gens, K, k)
    except BudgetExhausted:
        return DistalityReport("c", note="budget exhausted")
    if V is not None:
        # the theorem needs a normal part acting with small invariant neighbourhoods and a
        # compactly generated quotient; a generator list standing for a whole uncountable family fails it
        sin = not (hasattr(M, "_full_family") and M.rules and M._full_family(gens))
        rep = DistalityReport("a", V, hypothesis_sin=sin)
        nub, ncert = uniscalar_nub(M, gens, k)
        chain = res_infty(M, gens, k)
        res, inf = chain.res.outer, chain.res_infty.outer
        res = M.intersect(res, K)
        inf = M.intersect(inf, K)
        rep.identity_checks["nub = Res"] = nub == res
        rep.identity_checks["Res = Res^inf"] = res == inf
        rep.identity_checks["values"] = {"nub": M.format_descriptor(nub), "Res": M.format_descriptor(res),
                                         "Res^inf": M.format_descriptor(inf)}
        if sin and not (rep.identity_checks["nub = Res"] and rep.identity_checks["Res = Res^inf"]):
            if chain.certificate.grade == Grade.EXACT:
                raise CrossCheckFailure("distal case equalities fail", **rep.identity_checks["values"])
        return rep
    # a compact open subgroup of K carries the proximal pair when K itself is not compact
    C = K if K.is_compact else M.intersect(K, M.basis(0))
    try:
        w = proximal_search(M, gens, C, budget=budget, k=k)
    except (CoreIsOpen, NotCommensurated, PrerequisiteMissing, BudgetExhausted) as exc:
        return DistalityReport("c", note=str(exc))
    if isinstance(w, ProximalWitness):
        return DistalityReport("b", w, note="proximal pair found: the action is not distal")
    return DistalityReport("c", note=w.reason)


def _signature_words(M, K_gens, length):
    table = {}
    for w in [M.identity()] + words_upto(M, K_gens, length):
        table.setdefault(M.discrete_signature(w), []).append(w)
    return table


def _split_discrete(M, x, table):
    """Words k of K whose discrete part matches x (all words when nothing matches)."""
    hits = table.get(M.discrete_signature(x))
    if hits:
        return hits
    return [w for ws in table.values() for w in ws]


def _in_any(M, y, descs):
    return any(M.member(y, D) for D in descs)


def reduced_envelope(M, K_gens, k=4, samples=200, budget=None, seed=0, reach=6) -> EnvelopeReport:
    """E = G†_K U_0 K, checked against <K, U> by sampled membership both ways."""
    from .flat import find_common_tidy, u_zero

    budget = as_budget(budget)
    K_gens = [g for g in K_gens if g != M.identity()]
    flat = find_common_tidy(M, K_gens, budget, k)
    if not flat.flat:
        raise PrerequisiteMissing("K is not certified flat", verdict=str(flat.verdict))
    U = flat.common_tidy
    U0 = flat.U_zero if flat.U_zero is not None else u_zero(M, flat, k, budget=budget)
    core = tits_core(M, K_gens, k, budget)
    CU = M.product_set(core.outer, U0)
    if CU is None:
        CU = M.join(core.outer, U0)
    conj_U = [M.conjugate(w, U) for w in [M.identity()] + words_upto(M, K_gens, reach)]
    table = _signature_words(M, K_gens, reach)
    rng = random.Random(seed)
    elems = [M.identity()] + words_upto(M, K_gens, 2)
    fwd = bwd = 0
    for _ in range(samples):
        budget.spend()
        # an element of <K, U>: a short product of K-words and U-samples
        x = M.identity()
        for _ in range(rng.randint(1, 3)):
            x = M.compose(x, M.compose(rng.choice(elems), M.sample(rng, U)))
        if any(M.member(M.compose(x, M.invert(w)), CU) for w in _split_discrete(M, x, table)):
            fwd += 1
        # an element of G† U_0 K
        y = M.compose(M.compose(M.sample(rng, core.outer), M.sample(rng, U0)), rng.choice(elems))
        if any(_in_any(M, M.compose(y, M.invert(w)), conj_U) for w in _split_discrete(M, y, table)):
            bwd += 1
    membership = {"<K,U> in G†U_0K": (fwd, samples), "G†U_0K in <K,U>": (bwd, samples)}
    if fwd < samples:
        raise CrossCheckFailure("a sampled element of <K, U> escapes G†U_0K", counts=membership)
    if bwd < samples:
        raise CrossCheckFailure("a sampled element of G†U_0K escapes <K, U>", counts=membership)
    counts = []
    inside = M.contains(core.outer, U0)
    for j in range(k + 1):
        if inside:
            # U_0 lies in cl(G†_K): every level count is 1
            counts.append(1)
            continue
        try:
            top = M.join(U0, M.basis(j))
            low = M.join(M.intersect(U0, core.outer), M.basis(j))
            counts.append(M.index(top, low))
        except (NotRepresentable, InfiniteIndex, NotNested):
            counts.append(None)
    cert = weakest(core.certificate, flat.certificate, Certificate.bounded(k, rule="sampled membership"))
    if None in counts:
        cocompact = Verdict.unknown(k, note="coset counts not available")
    else:
        steady = len(counts) >= 2 and counts[-1] == counts[-2]
        cocompact = Verdict.true(cert, witness={"counts": counts, "constant": counts[-1] if steady else None})
    E = SubgroupHandle(tuple(core.inner) + tuple(K_gens), k, CU, False, cert, True)
    return EnvelopeReport(E, (core, U0, tuple(K_gens)), cocompact, membership)


def p_set_membership(M, g, k=4, budget=None, powers=12) -> Verdict:
    """g is isotropic and a nonzero power of g lies in cl(G†_g) (up to U_k): cocompact position."""
    budget = as_budget(budget)
    if g == M.identity():
        return Verdict.false("identity: <g> is not infinite discrete")
    try:
        aniso = is_anisotropic(M, g, budget, k)
        if aniso.is_true:
            return Verdict.false("anisotropic: both contraction groups are trivial", aniso.certificate)
        if aniso.is_unknown:
            return Verdict.unknown(k, note="isotropy not certified")
        core = tits_core(M, [g], k, budget)
        cell = M.join(core.outer, M.basis(k))
        for n in range(1, powers + 1):
            budget.spend()
            if M.member(M.power(g, n), cell):
                return Verdict.true(core.certificate, witness=n)
    except BudgetExhausted:
        return Verdict.unknown(k, note="budget exhausted")
    except NotRepresentable:
        return Verdict.unknown(k, note="Tits core join not representable")
    return Verdict.false(f"cl(G†_g) is normalized by g and contains no power g^n, n <= {powers}",
                         core.certificate)
