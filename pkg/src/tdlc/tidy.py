"""Scale, tidy-above/tidy-below checks and tidying procedures for one automorphism.

The automorphism is always inner: alpha(x) = g x g^-1 for an element g of
the model (declared automorphisms are elements of the model's semidirect
product).  alpha^n(U) is therefore model.conjugate(g^n, U).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    BudgetExhausted,
    Certificate,
    EnumerationTooLarge,
    Grade,
    InfiniteIndex,
    MethodDisagreement,
    NotRepresentable,
    SubgroupHandle,
    Verdict,
    as_budget,
    weakest,
)

COSET_BOUND = 10**6
RATIO_WINDOW = 3
MAX_ITER = 64


@dataclass
class LimitSubgroups:
    U: object
    U_plus: object
    U_minus: object
    U_pp: SubgroupHandle
    U_mm: SubgroupHandle
    L_U: SubgroupHandle
    certificate: Certificate


@dataclass
class TidyReport:
    U: object
    above: Verdict
    below: Verdict
    certificate: Certificate
    start: object = None
    interval_length: int | None = None

    @property
    def tidy(self):
        return self.above.is_true and self.below.is_true


@dataclass
class ScaleResult:
    value: int
    tidy_witness: object
    certificate: Certificate
    methods_agreeing: frozenset
    values: dict = field(default_factory=dict)


def displacement(M, g, U):
    """|alpha(U) : alpha(U) cap U|."""
    aU = M.conjugate(g, U)
    return M.index(aU, M.intersect(aU, U))


def _limit_one(M, g, U, sign, budget):
    cf = M.cf_limit(g, U, sign)
    if cf is not None:
        return cf, Certificate.exact(rule="closed form")
    h = g if sign > 0 else M.invert(g)
    V, conj = U, U
    for n in range(1, MAX_ITER + 1):
        budget.spend()
        conj = M.conjugate(h, conj)
        W = M.intersect(V, conj)
        if W == V:
            # V cap alpha(V_n) = V_n forces every later partial intersection to agree
            return V, Certificate.exact(rule="partial intersections stabilized", n=n)
        V = W
    return V, Certificate.bounded(MAX_ITER, rule="partial intersections still descending")


def _ascending_union(M, g, V, steps=12):
    """Outer bound for the union of alpha^n(V), n >= 0."""
    cur = V
    for n in range(steps):
        nxt = M.join(cur, M.conjugate(g, cur))
        if nxt == cur:
            return cur, True
        cur = nxt
    res = M.invariant_closure(V, [g])
    if res is not None:
        return res[0], False
    return cur, False


def limit_subgroups(M, g, U, budget=None, k=4) -> LimitSubgroups:
    budget = as_budget(budget)
    try:
        Up, cp = _limit_one(M, g, U, 1, budget)
        Um, cm = _limit_one(M, g, U, -1, budget)
    except BudgetExhausted:
        cert = Certificate.bounded(k, rule="budget")
        empty = SubgroupHandle((), k, U, False, cert)
        return LimitSubgroups(U, U, U, empty, empty, empty, cert)
    handles = []
    for V, h in ((Up, g), (Um, M.invert(g))):
        try:
            outer, exact = _ascending_union(M, h, V)
        except NotRepresentable:
            outer, exact = None, False
        handles.append(SubgroupHandle((), k, outer, exact,
                                      Certificate.exact() if exact else Certificate.bounded(k)))
    pp, mm = handles
    if pp.outer is not None and mm.outer is not None:
        L_outer = M.intersect(pp.outer, mm.outer)
    else:
        L_outer = None
    L = SubgroupHandle((), k, L_outer, pp.exact and mm.exact, weakest(pp.certificate, mm.certificate))
    return LimitSubgroups(U, Up, Um, pp, mm, L, weakest(cp, cm))


def _index_criterion(M, g, U, lim):
    # |alpha(U) : alpha(U) cap U| >= |alpha(U_+) : U_+| with equality iff U = U_+ U_-
    d = displacement(M, g, U)
    e = M.index(M.conjugate(g, lim.U_plus), lim.U_plus)
    return d, e


def tidy_above_check(M, g, U, k=4, budget=None, limit=COSET_BOUND, lim=None) -> Verdict:
    budget = as_budget(budget)
    lim = lim or limit_subgroups(M, g, U, budget, k)
    if lim.certificate.grade == Grade.BOUNDED:
        return Verdict.unknown(k, note="limit subgroups not certified")
    if not M.enumerable:
        d, e = _index_criterion(M, g, U, lim)
        cert = weakest(lim.certificate, Certificate.exact(criterion="index", displacement=d, limit_index=e))
        if d == e:
            return Verdict.true(cert, witness={"criterion": "index", "displacement": d, "limit_index": e})
        return Verdict.false({"criterion": "index", "displacement": d, "limit_index": e}, cert)
    if hasattr(M, "factor_cosets"):
        try:
            ok, count, bad = M.factor_cosets(U, lim.U_plus, lim.U_minus, k, limit)
        except EnumerationTooLarge:
            return Verdict.unknown(k, note="coset enumeration too large")
        budget.spend(count.bit_length())
        if not ok:
            return Verdict.false({"coset": M.format_element(bad), "k": k},
                                 weakest(lim.certificate, Certificate.exact()))
        structural = M.product_equals(U, lim.U_plus, lim.U_minus)
        grade = Certificate.exact(criterion="coset factorization", cosets=count) if structural \
            else Certificate.stabilized(k, criterion="coset factorization", cosets=count)
        return Verdict.true(weakest(lim.certificate, grade), witness={"cosets": count, "k": k, "sample": []})
    try:
        reps = M.coset_reps(U, k, limit)
    except EnumerationTooLarge:
        return Verdict.unknown(k, note="coset enumeration too large")
    factored = []
    for u in reps:
        budget.spend()
        f = M.factor(u, lim.U_plus, lim.U_minus, k)
        if f is None:
            return Verdict.false({"coset": M.format_element(u), "k": k},
                                 weakest(lim.certificate, Certificate.exact()))
        if len(factored) < 8:
            factored.append((M.format_element(u), M.format_element(f[0]), M.format_element(f[1])))
    structural = M.product_equals(U, lim.U_plus, lim.U_minus)
    grade = Certificate.exact(criterion="coset factorization", cosets=len(reps)) if structural \
        else Certificate.stabilized(k, criterion="coset factorization", cosets=len(reps))
    return Verdict.true(weakest(lim.certificate, grade),
                        witness={"cosets": len(reps), "k": k, "sample": factored})


def interval_intersection(M, g, U, length):
    V, conj = U, U
    for _ in range(length - 1):
        conj = M.conjugate(g, conj)
        V = M.intersect(V, conj)
    return V


def tidy_above_procedure(M, g, U, budget=None, k=4, max_length=MAX_ITER):
    """Return (V, length, verdict): V = cap of alpha^i(U), 0 <= i < length, tidy above."""
    budget = as_budget(budget)
    V, conj = U, U
    for length in range(1, max_length + 1):
        if length > 1:
            conj = M.conjugate(g, conj)
            V = M.intersect(V, conj)
        budget.spend()
        verdict = tidy_above_check(M, g, V, k, budget)
        if verdict.is_true:
            return V, length, verdict
    raise BudgetExhausted(f"no tidy-above interval up to length {max_length}", partial=V)


def element_nub(M, g):
    nub = M.cf_nub(g)
    if nub is not None:
        return nub, Certificate.exact(rule="closed form")
    return None, None


def tidy_below_check(M, g, U, budget=None, k=4, lim=None) -> Verdict:
    nub, cert = element_nub(M, g)
    if nub is not None:
        if M.contains(U, nub):
            return Verdict.true(cert, witness={"criterion": "nub contained", "nub": M.format_descriptor(nub)})
        return Verdict.false({"criterion": "nub not contained", "nub": M.format_descriptor(nub)}, cert)
    lim = lim or limit_subgroups(M, g, U, budget, k)
    L = lim.L_U
    if L.outer is not None and M.contains(U, L.outer):
        return Verdict.true(Certificate.stabilized(k, criterion="L_U in U"),
                            witness={"criterion": "L_U in U"})
    return Verdict.unknown(k, note="no nub closed form and L_U not certified inside U")


def check_tidy(M, g, U, k=4, budget=None) -> TidyReport:
    budget = as_budget(budget)
    lim = limit_subgroups(M, g, U, budget, k)
    above = tidy_above_check(M, g, U, k, budget, lim=lim)
    below = tidy_below_check(M, g, U, budget, k, lim=lim)
    return TidyReport(U, above, below, weakest(above.certificate, below.certificate), U, 1)


def tidy_from(M, g, U, budget=None, k=4):
    """Run the tidying procedure from U; (report, tidy) or None when the budget runs out.

    When the result is tidy above but not below, the procedure is rerun
    from the join with the nub.
    """
    budget = as_budget(budget)
    try:
        V, length, above = tidy_above_procedure(M, g, U, budget, k)
    except BudgetExhausted:
        return None
    below = tidy_below_check(M, g, V, budget, k)
    report = TidyReport(V, above, below, weakest(above.certificate, below.certificate), U, length)
    if report.tidy:
        return report
    nub, _ = element_nub(M, g)
    if nub is None:
        return report
    try:
        W = M.join(V, nub)
        W2, length2, above2 = tidy_above_procedure(M, g, W, budget, k)
    except (NotRepresentable, BudgetExhausted):
        return report
    below2 = tidy_below_check(M, g, W2, budget, k)
    report2 = TidyReport(W2, above2, below2, weakest(above2.certificate, below2.certificate), U, length2)
    return report2 if report2.tidy else report


def find_tidy(M, g, budget=None, k=4, depth=None) -> TidyReport:
    budget = as_budget(budget)
    depth = k if depth is None else depth
    starts = [M.basis(j) for j in range(depth + 1)] + list(M.tidy_candidates(g))
    best = None
    for U in starts:
        report = tidy_from(M, g, U, budget, k)
        if report is None:
            continue
        if report.tidy:
            return report
        best = best or report
    raise BudgetExhausted("no tidy subgroup found among the candidates", partial=best)


def asymptotic_scale(M, g, U=None, window=RATIO_WINDOW, max_n=14):
    """Integer ratio test on |alpha^n(U) : alpha^n(U) cap U|; returns (value, n) or None."""
    U = M.basis(0) if U is None else U
    prev, run, ratio = None, 0, None
    gn = M.identity()
    for n in range(1, max_n + 1):
        gn = M.compose(gn, g)
        try:
            d = displacement(M, gn, U)
        except InfiniteIndex:
            return None
        if prev is not None:
            if d % prev:
                run, ratio = 0, None
            else:
                r = d // prev
                run = run + 1 if r == ratio else 1
                ratio = r
                if run >= window:
                    return ratio, n
        prev = d
    return None


def scale(M, g, budget=None, k=4, window=RATIO_WINDOW) -> ScaleResult:
    budget = as_budget(budget)
    values, grades = {}, {}
    witness = None
    try:
        rep = find_tidy(M, g, budget, k)
        witness = rep.U
        values["minimization"] = displacement(M, g, rep.U)
        grades["minimization"] = rep.certificate
    except BudgetExhausted:
        pass
    asym = asymptotic_scale(M, g, window=window)
    if asym is not None:
        values["asymptotic"] = asym[0]
        grades["asymptotic"] = Certificate.stabilized(asym[1], window=window)
    cf = M.cf_scale(g)
    if cf is not None:
        values["closed_form"] = cf
        grades["closed_form"] = Certificate.exact(rule="closed form")
    if not values:
        raise BudgetExhausted("no scale method completed")
    distinct = set(values.values())
    if len(distinct) > 1:
        raise MethodDisagreement(f"scale methods disagree: {values}", values=values)
    value = distinct.pop()
    exact = [grades[m] for m in ("minimization", "closed_form")
             if m in grades and grades[m].grade == Grade.EXACT]
    cert = Certificate.exact(methods=sorted(values)) if exact else weakest(*grades.values())
    return ScaleResult(value, witness, cert, frozenset(values), values)
