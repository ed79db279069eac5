"""Flat groups generated by finitely many elements: common tidy subgroups and their structure.

H is given by generators.  A compact open U is tidy for H when it is tidy
for every element; the tidying set actually checked is the generators
together with their pairwise products (and, after certification, every
word up to the configured length).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy

from .core import (
    BudgetExhausted,
    Certificate,
    DecompositionFailure,
    DecompositionNotFound,
    EigenfactorsMissing,
    Grade,
    InfiniteIndex,
    InvalidParameter,
    NotNested,
    NotRepresentable,
    Verdict,
    as_budget,
    weakest,
)
from .tidy import check_tidy, displacement, limit_subgroups, scale
from .words import symmetric, words_upto, words_with_length

SWEEP_LENGTH = 6
ORDER_WORDS = 4


@dataclass
class FlatReport:
    generators: list
    common_tidy: object = None
    verdict: Verdict = None
    H_u_members: list = field(default_factory=list)
    flat_rank: int | None = None
    eigenfactors: list = field(default_factory=list)
    U_zero: object = None
    certificate: Certificate = None
    words_checked: int = 0
    quotient_rank: int | None = None
    notes: dict = field(default_factory=dict)

    @property
    def flat(self):
        return self.verdict is not None and self.verdict.is_true


@dataclass
class NubDecomposition:
    nub_H: object
    factors: list
    verified_at: int
    certificate: Certificate
    upper: object = None


def element_scale(M, g, k=4):
    s = M.cf_scale(g)
    if s is not None:
        return s
    return scale(M, g, k=k).value


def _ilog(n, base):
    e = 0
    while n > 1 and n % base == 0:
        n //= base
        e += 1
    if n != 1:
        raise DecompositionFailure(f"index is not a power of {base}")
    return e


def _commutator_witness(M, gens, k):
    """First commutator of (inverse) generators whose scale is not 1."""
    sym = symmetric(M, gens)
    ident = M.identity()
    for i, a in enumerate(sym):
        for j, b in enumerate(sym):
            c = M.commutator(a, b)
            if c == ident:
                continue
            s, s_inv = element_scale(M, c, k), element_scale(M, M.invert(c), k)
            if s != 1 or s_inv != 1:
                return {"commutator": M.format_element(c), "letters": (i, j),
                        "scale": s, "inverse_scale": s_inv, "combined": s * s_inv}
    return None


def _tidying_set(M, gens):
    ident = M.identity()
    out = []
    for g in gens:
        if g != ident and g not in out:
            out.append(g)
    for i, a in enumerate(list(out)):
        for b in list(out)[i + 1:]:
            ab = M.compose(a, b)
            if ab != ident and ab not in out:
                out.append(ab)
    return out


def _tidy_below_start(M, X):
    U = M.basis(0)
    for x in X:
        nub = M.cf_nub(x)
        if nub is not None and not M.contains(U, nub):
            try:
                U = M.join(U, nub)
            except NotRepresentable:
                pass
    return U


def _conjugate_meet(M, gens, U, length):
    V = U
    for w in words_upto(M, gens, length):
        try:
            V = M.intersect(V, M.conjugate(w, U))
        except NotRepresentable:
            continue
    return V


def _saturate(M, gens, V):
    """Close an H-normalized V under the model's invariance rules (hidden automorphisms)."""
    if not all(getattr(M, "is_compact_element", lambda g: False)(g) for g in gens):
        return V
    if not all(M.normalizes(g, V) for g in gens):
        return V
    res = M.invariant_closure(V, gens)
    if res is None:
        return V
    return res[0]


def find_common_tidy(M, gens, budget=None, k=4, max_length=SWEEP_LENGTH, start=None) -> FlatReport:
    """A compact open subgroup tidy for every element of <gens>, or a reason there is none."""
    gens = list(gens)
    if not gens:
        raise InvalidParameter("gens", "need at least one generator")
    for g in gens:
        M.check(g)
    budget = as_budget(budget)
    report = FlatReport(gens)
    X = _tidying_set(M, gens)
    if not X:
        report.common_tidy = M.basis(0)
        report.verdict = Verdict.true(Certificate.exact(rule="trivial group"))
        report.certificate = report.verdict.certificate
        report.flat_rank = 0
        report.U_zero = report.common_tidy
        return report
    witness = _commutator_witness(M, gens, k)
    if witness is not None:
        report.verdict = Verdict.false(witness, Certificate.exact(rule="commutators of a flat group are uniscalar"))
        report.certificate = report.verdict.certificate
        return report
    U = start if start is not None else _tidy_below_start(M, X)
    best = None
    for length in range(max_length + 1):
        try:
            V = _saturate(M, gens, _conjugate_meet(M, gens, U, length))
            certs = []
            for x in X:
                rep = check_tidy(M, x, V, k, budget)
                if not rep.tidy:
                    break
                certs.append(rep.certificate)
            else:
                for g in gens:
                    if displacement(M, g, V) != element_scale(M, g, k):
                        raise DecompositionFailure("displacement differs from scale at a certified tidy subgroup")
                report.common_tidy = V
                cert = weakest(*certs, Certificate.stabilized(2, rule="tidy for generators and pairwise products"))
                report.verdict = Verdict.true(cert, witness={"sweep_length": length})
                report.certificate = cert
                report.words_checked = len(X)
                return report
        except BudgetExhausted:
            break
        best = V
    report.common_tidy = None
    report.notes["best_candidate"] = best
    report.verdict = Verdict.unknown(max_length, note="no common tidy subgroup within the sweep")
    report.certificate = report.verdict.certificate
    return report


def _require_flat(report):
    if not report.flat:
        raise InvalidParameter("report", "flatness is not certified")


def u_zero(M, report, k=4, max_length=4, budget=None):
    """U_0: the meet of all H-conjugates of the common tidy subgroup."""
    _require_flat(report)
    budget = as_budget(budget)
    gens = report.generators
    U = report.common_tidy
    W0 = U
    certs = []
    for w in words_upto(M, gens, max_length):
        lim = limit_subgroups(M, w, U, budget, k)
        certs.append(lim.certificate)
        try:
            W0 = M.intersect(W0, M.intersect(lim.U_plus, lim.U_minus))
        except NotRepresentable:
            continue
    for rounds in range(3):
        if all(M.normalizes(g, W0) for g in gens):
            # H-invariant and inside every U_{w,+} cap U_{w,-}: it is the meet
            cert = weakest(*certs) if all(c.grade == Grade.EXACT for c in certs) \
                else Certificate.stabilized(max_length, rule="partial meets stabilized")
            report.U_zero = W0
            report.notes["U_zero_certificate"] = cert
            return W0
        W0 = _conjugate_meet(M, gens, W0, 2)
    report.U_zero = W0
    report.notes["U_zero_certificate"] = Certificate.bounded(max_length, rule="meet not yet invariant")
    return W0


def factor_displacement(M, g, K):
    """log |K : K cap gKg^-1| - log |gKg^-1 : K cap gKg^-1| in the model's index base."""
    C = M.conjugate(g, K)
    meet = M.intersect(K, C)
    b = M.index_base
    return _ilog(M.index(K, meet), b) - _ilog(M.index(C, meet), b)


def _ordered(M, K, words):
    for h in words:
        C = M.conjugate(h, K)
        if not (M.contains(C, K) or M.contains(K, C)):
            return False
    return True


def _commensurated(M, K, gens):
    for g in gens:
        for h in (g, M.invert(g)):
            C = M.conjugate(h, K)
            meet = M.intersect(K, C)
            try:
                M.index(K, meet)
                M.index(C, meet)
            except (InfiniteIndex, NotNested):
                return False
    return True


def _recovered(M, K, U, words, budget, k):
    """K = meet of hUh^-1 over tested h with hKh^-1 >= K, powers taken through limits."""
    R = U
    for h in words:
        C = M.conjugate(h, K)
        if not M.contains(C, K):
            continue
        lim = limit_subgroups(M, h, U, budget, k)
        piece = lim.U_plus if C != K else M.intersect(lim.U_plus, lim.U_minus)
        try:
            R = M.intersect(R, piece)
        except NotRepresentable:
            return None
    return M.contains(K, R) and M.contains(R, K)


def eigenfactor_decomposition(M, report, k=4, budget=None, order_words=ORDER_WORDS):
    """The distinct U-eigenfactors of H with per-generator displacement integers."""
    _require_flat(report)
    budget = as_budget(budget)
    U = report.common_tidy
    U0 = report.U_zero if report.U_zero is not None else u_zero(M, report, k, budget=budget)
    gens = report.generators
    words = words_upto(M, gens, order_words)
    found = []
    for K in M.eigenfactor_candidates(U, U0):
        if any(M.contains(K, F) and M.contains(F, K) for F, _ in found):
            continue
        if not (_commensurated(M, K, gens) and _ordered(M, K, words)):
            continue
        if not _recovered(M, K, U, words, budget, k):
            continue
        found.append((K, tuple(factor_displacement(M, g, K) for g in gens)))
    if not found:
        raise DecompositionFailure("no eigenfactor found; U_0 should always qualify")
    P = found[0][0]
    for K, _ in found[1:]:
        P = M.product_set(P, K)
        if P is None:
            raise DecompositionFailure("eigenfactor product is not a recognised subgroup")
    if not (M.contains(P, U) and M.contains(U, P)):
        raise DecompositionFailure("U is not the product of its eigenfactors",
                                   product=M.format_descriptor(P), U=M.format_descriptor(U))
    report.eigenfactors = found
    return report


def _word_vector(M, w, factors):
    return tuple(factor_displacement(M, w, K) for K, _ in factors)


def _lattice_rank(vectors):
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return 0
    return int(sympy.Matrix(rows).rank())


def uniscalar_part(M, report, word_length_bound=3, k=4):
    """Sort words into H_u (normalizers of the common tidy subgroup) and record displacement vectors."""
    _require_flat(report)
    if not report.eigenfactors:
        eigenfactor_decomposition(M, report, k)
    U = report.common_tidy
    factors = report.eigenfactors
    base = {g: _word_vector(M, g, factors) for g in report.generators}
    members, vectors = [M.format_element(M.identity())], []
    for w, word in words_with_length(M, report.generators, word_length_bound):
        vec = _word_vector(M, w, factors)
        expect = [0] * len(factors)
        for i, sign in word:
            expect = [a + sign * b for a, b in zip(expect, base[report.generators[i]])]
        if tuple(expect) != vec:
            raise DecompositionFailure("displacement is not additive along a word",
                                       word=M.format_element(w))
        vectors.append(vec)
        if M.normalizes(w, U):
            members.append(M.format_element(w))
    report.H_u_members = members
    report.quotient_rank = _lattice_rank(vectors)
    report.notes["word_vectors"] = len(vectors)
    return report


def flat_rank(M, report):
    """Rank of the lattice spanned by the generators' displacement vectors."""
    _require_flat(report)
    if not report.eigenfactors:
        raise EigenfactorsMissing("run eigenfactor_decomposition first")
    vecs = [tuple(d[i] for _, d in report.eigenfactors) for i in range(len(report.generators))]
    report.flat_rank = _lattice_rank(vecs)
    return report.flat_rank


def uniscalar_nub(M, gens, k=4):
    """nub of a group normalizing a compact open subgroup: its small invariant subgroups meet here."""
    if hasattr(M, "cf_residual"):
        D, cert = M.cf_residual(gens)
        return D, cert
    R = None
    for j in range(k + 1):
        res = M.invariant_closure(M.basis(j), gens)
        if res is None:
            return None, None
        R = res[0] if R is None else M.intersect(R, res[0])
    return R, Certificate.stabilized(k, rule="meet of invariant closures of U_0..U_k")


def nub_flat(M, report, L=None, k=4, budget=None, word_length=2) -> NubDecomposition:
    """nub(H) as nub(L) times nubs of finitely many elements, matched against U_0."""
    _require_flat(report)
    budget = as_budget(budget)
    U0 = report.U_zero if report.U_zero is not None else u_zero(M, report, k, budget=budget)
    ident = M.identity()
    if L is None:
        U = report.common_tidy
        L = [g for g in report.generators if M.normalizes(g, U) and g != ident]
    factors = []
    certs = []
    P = M.trivial()
    if L:
        nubL, cert = uniscalar_nub(M, L, k)
        if nubL is not None and not M.is_trivial(nubL):
            factors.append(("nub(L)", nubL))
            certs.append(cert)
            P = nubL
    for w in words_upto(M, report.generators, word_length):
        n = M.cf_nub(w)
        if n is None or M.is_trivial(n) or M.contains(P, n):
            continue
        Q = M.product_set(P, n)
        if Q is None:
            continue
        factors.append((M.format_element(w), n))
        P = Q
    # upper bound: meet of U_0 over common tidy subgroups grown from each basis level
    upper = U0
    for j in range(1, k + 1):
        rep = find_common_tidy(M, report.generators, budget, k, max_length=2, start=M.basis(j))
        if not rep.flat:
            continue
        try:
            upper = M.intersect(upper, u_zero(M, rep, k, budget=budget))
        except NotRepresentable:
            continue
    try:
        inside = M.contains(upper, P)
    except NotRepresentable:
        inside = None
    if inside is False:
        raise DecompositionNotFound("product of nubs is not inside the tidy meet",
                                    product=M.format_descriptor(P), upper=M.format_descriptor(upper))
    # the upper bound only meets the tidy subgroups we managed to grow, so it can be
    # larger than the nub; count the levels where the two agree
    verified = 0
    for j in range(k + 1):
        same = M.same_at_level(P, upper, j)
        if same is None:
            same = bool(inside) and M.contains(P, upper)
        if not same:
            break
        verified = j + 1
    if verified == 0:
        raise DecompositionNotFound("product of nubs differs from the tidy meet at level 0",
                                    product=M.format_descriptor(P), upper=M.format_descriptor(upper))
    cert = weakest(report.certificate, *certs)
    if verified <= k:
        cert = weakest(cert, Certificate.bounded(verified - 1, rule="tidy meet agrees up to this level"))
    return NubDecomposition(P, factors, verified - 1, cert, upper)


def rnub(M, report, k=4, budget=None):
    """Meet of the conjugates of Res_{U_0}(H) by the relative Tits core."""
    from .residuals import discrete_residual, tits_core

    _require_flat(report)
    U0 = report.U_zero if report.U_zero is not None else u_zero(M, report, k, budget=budget)
    R = discrete_residual(M, report.generators, within=U0, k=k, cross_check=False).res
    core = tits_core(M, report.generators, k)
    D = R.outer
    for r in core.inner:
        for _ in range(8):
            E = M.intersect(D, M.conjugate(r, D))
            if E == D:
                break
            D = E
    exact = R.exact and core.exact
    return type(R)(R.inner, k, D, exact, weakest(R.certificate, core.certificate), True)
