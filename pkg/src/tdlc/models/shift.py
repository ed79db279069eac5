"""Shift groups F^Z (two-sided, compact) and the restricted one-sided version S.

Functions Z -> X are stored as Piecewise(left, lo, vals, right): the value is
left below lo, vals[i - lo] on the window and right above it.  Elements are
(f, m) acting as f * sigma^m, where sigma f sigma^-1 (i) = f(i - 1).
Descriptors are Piecewise maps into subgroup ids of F.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import lcm

from ..core import (
    Certificate,
    EnumerationTooLarge,
    InfiniteIndex,
    InvalidParameter,
    NotNested,
    ParseError,
    SubgroupHandle,
    UnsupportedQuotient,
    NotNormal,
    Verdict,
)
from .base import GroupModel
from .finite_group import FiniteGroup


_COMBINED = {}


@dataclass(frozen=True)
class Piecewise:
    left: int
    lo: int
    vals: tuple
    right: int

    @staticmethod
    def make(left, lo, vals, right):
        vals = list(vals)
        while vals and vals[-1] == right:
            vals.pop()
        start = 0
        while start < len(vals) and vals[start] == left:
            start += 1
        lo += start
        vals = vals[start:]
        if not vals and left == right:
            lo = 0
        return Piecewise(left, lo, tuple(vals), right)

    @staticmethod
    def const(x):
        return Piecewise(x, 0, (), x)

    @property
    def hi(self):
        return self.lo + len(self.vals)

    def __call__(self, i):
        if i < self.lo:
            return self.left
        if i >= self.hi:
            return self.right
        return self.vals[i - self.lo]

    def span(self, other=None):
        los = [self.lo]
        his = [self.hi]
        if other is not None:
            los.append(other.lo)
            his.append(other.hi)
        return min(los), max(his)

    def combine(self, other, op):
        lo, hi = self.span(other)
        key = (self, other, op)
        hit = _COMBINED.get(key)
        if hit is not None:
            return hit
        vals = [op(a, b) for a, b in zip(self._window(lo, hi), other._window(lo, hi))]
        out = Piecewise.make(op(self.left, other.left), lo, vals, op(self.right, other.right))
        if len(_COMBINED) > 200000:
            _COMBINED.clear()
        _COMBINED[key] = out
        return out

    def _window(self, lo, hi):
        # values on [lo, hi), which contains the support of self
        return [self.left] * (self.lo - lo) + list(self.vals) + [self.right] * (hi - self.hi)

    def map(self, op):
        return Piecewise.make(op(self.left), self.lo, [op(v) for v in self.vals], op(self.right))

    def shift(self, m):
        return Piecewise.make(self.left, self.lo + m, self.vals, self.right)

    def reflect(self):
        # (rho f)(i) = f(-i)
        if not self.vals and self.left == self.right:
            return self
        vals = tuple(reversed(self.vals))
        return Piecewise.make(self.right, -self.hi + 1, vals, self.left)

    def points(self):
        return range(self.lo, self.hi)


@dataclass(frozen=True)
class SElem:
    f: Piecewise
    m: int


@dataclass(frozen=True)
class SDesc:
    labels: Piecewise
    kind = "window"
    one_sided: bool = False
    full_id: int = 0

    @property
    def is_compact(self):
        return not self.one_sided or self.labels.left == 0

    @property
    def is_open(self):
        if self.one_sided:
            return self.labels.right == self.full_id
        return self.labels.left == self.full_id and self.labels.right == self.full_id


class Shift(GroupModel):
    family = "Shift"

    def __init__(self, spec):
        super().__init__(spec)
        self.F = FiniteGroup.from_spec(spec.get("F", "C2"))
        n = len(self.F.names)
        self.abelian = all(self.F.m(a, b) == self.F.m(b, a) for a in range(n) for b in range(n))
        variant = spec.get("variant", "one-sided-restricted")
        if variant not in ("one-sided-restricted", "two-sided-full"):
            raise InvalidParameter("variant", f"unknown shift variant {variant!r}")
        self.one_sided = variant == "one-sided-restricted"
        self.index_base = self.F.order
        self.sigma = SElem(Piecewise.const(0), 1)
        self.actors = {"s": self.sigma}

    # elements
    def identity(self):
        return SElem(Piecewise.const(0), 0)

    def is_element(self, x):
        return isinstance(x, SElem) and (not self.one_sided or x.f.left == 0)

    def element(self, values=None, m=0, left=0, right=0):
        """f with the given finite values (identity elsewhere in the window) and tails."""
        values = values or {}
        lo = min(values) if values else 0
        hi = max(values) + 1 if values else 0
        vals = [values.get(i, 0) for i in range(lo, hi)]
        return self.check(SElem(Piecewise.make(left, lo, vals, right), m))

    def compose(self, g, h):
        self.check(g)
        self.check(h)
        F = self.F
        return SElem(g.f.combine(h.f.shift(g.m), F.m), g.m + h.m)

    def invert(self, g):
        self.check(g)
        return SElem(g.f.map(lambda a: self.F.inv[a]).shift(-g.m), -g.m)

    # descriptors
    def _d(self, labels):
        return SDesc(labels, self.one_sided, self.F.full_id)

    def from_labels(self, left, lo, vals, right):
        return self._d(Piecewise.make(left, lo, vals, right))

    def basis(self, k):
        full = self.F.full_id
        if self.one_sided:
            return self._d(Piecewise.make(0, k, [], full))
        if k == 0:
            return self._d(Piecewise.const(full))
        return self._d(Piecewise.make(full, -(k - 1), [0] * (2 * k - 1), full))

    def trivial(self):
        return self._d(Piecewise.const(0))

    def whole(self):
        return self._d(Piecewise.const(self.F.full_id))

    def conjugate(self, g, D):
        self.check(g)
        F = self.F
        return self._d(g.f.combine(D.labels.shift(g.m), F.conj_sub))

    def intersect(self, A, B):
        return self._d(A.labels.combine(B.labels, self.F.meet))

    def join(self, A, B):
        return self._d(A.labels.combine(B.labels, self.F.join))

    def contains(self, sup, sub):
        tester = sup.labels.combine(sub.labels, lambda a, b: 1 if self.F.leq(b, a) else 0)
        return tester == Piecewise.const(1)

    def index(self, sup, sub):
        if not self.contains(sup, sub):
            raise NotNested(f"{sub} is not contained in {sup}")
        F = self.F
        ratio = sup.labels.combine(sub.labels, lambda a, b: len(F.sub(a)) // len(F.sub(b)))
        if ratio.left != 1 or ratio.right != 1:
            raise InfiniteIndex("descriptors differ on an infinite region")
        out = 1
        for r in ratio.vals:
            out *= r
        return out

    def member(self, x, D):
        self.check(x)
        if x.m != 0:
            return False
        test = x.f.combine(D.labels, lambda a, s: 1 if a in self.F.sub(s) else 0)
        return test == Piecewise.const(1)

    # enumeration
    def coset_reps(self, D, k, limit):
        F = self.F
        B = self.basis(k)
        meet = D.labels.combine(B.labels, F.meet)
        if meet.left != D.labels.left or meet.right != D.labels.right:
            raise EnumerationTooLarge("infinitely many cosets")
        lo, hi = D.labels.span(meet)
        per, count = [], 1
        for i in range(lo, hi):
            reps = F.coset_reps(D.labels(i), meet(i))
            count *= len(reps)
            if count > limit:
                raise EnumerationTooLarge(f"more than {limit} cosets")
            per.append(reps)
        out = []
        for vals in itertools.product(*per):
            out.append(SElem(Piecewise.make(0, lo, vals, 0), 0))
        return out

    def coset_key(self, x, k):
        B = self.basis(k).labels
        F = self.F

        def label(a, s):
            # canonical coset a*B(i) as its minimal element
            return min(F.m(a, b) for b in F.sub(s))

        return (x.m, x.f.combine(B, label))

    def _factor_coordinate(self, u, a_sub, b_sub, c_sub):
        F = self.F
        for a in sorted(F.sub(a_sub)):
            for b in sorted(F.sub(b_sub)):
                w = F.m(F.inv[F.m(a, b)], u)
                if w in F.sub(c_sub):
                    return a, b
        return None

    def factor_cosets(self, D, A, B, k, limit):
        """Decide whether every coset of U_k in D factors through A*B, one coordinate at a time.

        Window subgroups are products over coordinates, so this is the same test
        as factoring each product coset; returns (ok, coset count, failing element).
        """
        F = self.F
        C = self.basis(k).labels
        meet = D.labels.combine(C, F.meet)
        if meet.left != D.labels.left or meet.right != D.labels.right:
            raise EnumerationTooLarge("infinitely many cosets")
        lo = min(D.labels.lo, A.labels.lo, B.labels.lo, C.lo)
        hi = max(D.labels.hi, A.labels.hi, B.labels.hi, C.hi)
        count = 1
        for i in range(lo, hi):
            reps = F.coset_reps(D.labels(i), meet(i))
            count *= len(reps)
            for a in reps:
                if self._factor_coordinate(a, A.labels(i), B.labels(i), C(i)) is None:
                    return False, count, SElem(Piecewise.make(0, i, [a], 0), 0)
        return True, count, None

    def factor(self, u, A, B, k=None):
        if u.m != 0:
            return None
        C = self.basis(k).labels if k is not None else Piecewise.const(0)
        lo = min(u.f.lo, A.labels.lo, B.labels.lo, C.lo)
        hi = max(u.f.hi, A.labels.hi, B.labels.hi, C.hi)
        avals, bvals = [], []
        tails = []
        for i in list(range(lo, hi)) + ["left", "right"]:
            if i == "left":
                args = (u.f.left, A.labels.left, B.labels.left, C.left)
            elif i == "right":
                args = (u.f.right, A.labels.right, B.labels.right, C.right)
            else:
                args = (u.f(i), A.labels(i), B.labels(i), C(i))
            res = self._factor_coordinate(*args)
            if res is None:
                return None
            if isinstance(i, str):
                tails.append(res)
            else:
                avals.append(res[0])
                bvals.append(res[1])
        (al, bl), (ar, br) = tails
        a = SElem(Piecewise.make(al, lo, avals, ar), 0)
        b = SElem(Piecewise.make(bl, lo, bvals, br), 0)
        return a, b

    def product_equals(self, U, A, B):
        F = self.F

        def prod(a, b):
            return frozenset(F.m(x, y) for x in F.sub(a) for y in F.sub(b))

        test = U.labels.combine(A.labels.combine(B.labels, lambda a, b: (a, b)),
                                lambda u, ab: 1 if prod(*ab) == F.sub(u) else 0)
        return test == Piecewise.const(1)

    def sample(self, rng, D=None):
        F = self.F
        if D is None:
            lo = rng.randint(-4, 2)
            vals = [rng.randrange(F.order) for _ in range(rng.randint(0, 6))]
            right = 0 if rng.random() < 0.5 else rng.randrange(F.order)
            left = 0 if self.one_sided or rng.random() < 0.5 else rng.randrange(F.order)
            return SElem(Piecewise.make(left, lo, vals, right), rng.randint(-2, 2))
        L = D.labels

        def pick(s):
            return rng.choice(sorted(F.sub(s)))

        lo, hi = L.lo - 3, L.hi + 3
        vals = [pick(L(i)) for i in range(lo, hi)]
        left = 0 if self.one_sided else pick(L.left)
        right = pick(L.right) if rng.random() < 0.7 else 0
        return SElem(Piecewise.make(left, lo, vals, right), 0)

    # closed forms
    def cf_scale(self, g):
        self.check(g)
        if self.one_sided:
            return self.F.order ** max(0, -g.m)
        return 1

    def _tail_order(self, a):
        return self.F.element_order(a)

    def _limit_forward(self, f, m, U):
        """Labels of the cap of alpha^n(U), n >= 0, for alpha = (f, m) with m > 0."""
        F = self.F
        L = U.labels
        if not (F.is_normal(L.left) and F.is_normal(L.right)):
            return None
        B = max(L.hi, f.hi)
        start = min(L.lo, f.lo, B) - 1
        period = m * self._tail_order(f.right)

        def label_at(i):
            lab = L(i)
            conj = 0
            n = 0
            while True:
                conj = F.m(conj, f(i - n * m))
                n += 1
                j = i - n * m
                lab = F.meet(lab, F.conj_sub(conj, L(j)))
                if j < L.lo:
                    return lab

        right_vals = {label_at(i) for i in range(B, B + period)}
        if len(right_vals) != 1:
            return None
        right = right_vals.pop()
        vals = [label_at(i) for i in range(start, B)]
        return Piecewise.make(L.left, start, vals, right)

    def cf_limit(self, g, U, sign):
        h = g if sign > 0 else self.invert(g)
        if h.m == 0:
            return None
        if h.m > 0:
            res = self._limit_forward(h.f, h.m, U)
        else:
            res = self._limit_forward(h.f.reflect(), -h.m, self._d(U.labels.reflect()))
            res = res.reflect() if res is not None else None
        return self._d(res) if res is not None else None

    def cf_nub(self, g):
        self.check(g)
        if not self.one_sided and g.m != 0:
            return self.whole()
        return self.trivial()

    def delta(self, i, a):
        return SElem(Piecewise.make(0, i, [a], 0), 0)

    def _finite_generators(self, k):
        gens = []
        for i in range(-k, k + 1):
            for a in range(1, self.F.order):
                gens.append(self.delta(i, a))
        return gens

    def cf_contraction(self, g, k):
        self.check(g)
        if g.m == 0:
            return SubgroupHandle((), k, self.trivial(), True, Certificate.exact(rule="finite order"), True)
        if self.one_sided:
            if g.m > 0:
                return SubgroupHandle(tuple(self._finite_generators(k)), k, self.whole(), True,
                                      Certificate.exact(rule="shift pushes support to +inf"), True)
            return SubgroupHandle((), k, self.trivial(), True,
                                  Certificate.exact(rule="support would have to reach -inf"), True)
        return SubgroupHandle(tuple(self._finite_generators(k)), k, self.whole(), False,
                              Certificate.exact(rule="eventually trivial on the repelling side"), False)

    def cf_contracts(self, g, x, k):
        self.check(g)
        self.check(x)
        if x.m != 0:
            return Verdict.false(("shift part", x.m), note="conjugates keep the shift part")
        if x == self.identity():
            return Verdict.true(Certificate.exact(rule="identity"))
        if g.m == 0:
            return Verdict.false(("finite order", self.format_element(g)))
        if self.one_sided:
            if g.m > 0:
                return Verdict.true(Certificate.exact(rule="support pushed past every level"))
            return Verdict.false(("coordinate", x.f.lo), note="support pushed towards -inf")
        tail = x.f.left if g.m > 0 else x.f.right
        if tail == 0:
            return Verdict.true(Certificate.exact(rule="trivial on the repelling side"))
        return Verdict.false(("nontrivial tail", "left" if g.m > 0 else "right"))

    def tidy_candidates(self, g):
        return [self.whole()] if not self.one_sided else []

    def invariant_closure(self, U, gens, words=None):
        gens = list(gens)
        if any(h.m != 0 for h in gens) and U.is_open:
            return self.whole(), Certificate.exact(rule="shifts spread an open window everywhere")
        cur = U
        for _ in range(64):
            nxt = cur
            for h in gens:
                nxt = self.join(nxt, self.conjugate(h, nxt))
                nxt = self.join(nxt, self.conjugate(self.invert(h), nxt))
            if nxt == cur:
                return cur, Certificate.exact(rule="join closure stabilized")
            cur = nxt
        return None

    def discrete_signature(self, x):
        return x.m

    def tits_outer(self, xs):
        if any(x.m != 0 for x in xs):
            return self.whole(), True
        return self.trivial(), True

    def is_compact_element(self, g):
        return g.m == 0

    # quotients
    def quotient(self, K):
        """Model of G/K for K = const N (N normal in F), two-sided only, or K trivial."""
        L = K.labels
        if L == Piecewise.const(0):
            return Shift(dict(self.spec)), (lambda x: x)
        if self.one_sided or L.vals or L.left != L.right:
            raise UnsupportedQuotient("only uniform normal subgroups of the two-sided shift")
        if not self.F.is_normal(L.left):
            raise NotNormal("label subgroup is not normal in F")
        Q, label = self.F.quotient(L.left)
        spec = dict(self.spec)
        spec["F"] = {"names": Q.names, "table": Q.mul}
        model = Shift(spec)

        def proj(x):
            return SElem(x.f.map(lambda a: label[a]), x.m)

        return model, proj

    # text
    def format_element(self, g):
        F = self.F
        parts = [f"{i}:{F.names[g.f(i)]}" for i in g.f.points()]
        if not parts and g.f.left != g.f.right:
            # a bare step: name its first coordinate so the position survives
            parts.append(f"{g.f.lo}:{F.names[g.f.right]}")
        if g.f.left != 0:
            parts.append(f"<:{F.names[g.f.left]}")
        if g.f.right != 0:
            parts.append(f">:{F.names[g.f.right]}")
        body = "{" + ", ".join(parts) + "}"
        return body if g.m == 0 else f"{body} * s^{g.m}"

    def format_descriptor(self, D):
        F = self.F

        def nm(i):
            H = F.sub(i)
            if i == F.full_id:
                return "F"
            if len(H) == 1:
                return "1"
            return "<" + ",".join(F.names[x] for x in sorted(H)) + ">"

        L = D.labels
        win = ", ".join(f"{i}:{nm(L(i))}" for i in L.points())
        return f"win[{nm(L.left)} | {L.lo} | {win} | {nm(L.right)}]"

    def parse_element(self, text):
        m = re.fullmatch(r"\s*\{(.*?)\}\s*(?:\*\s*s\s*\^\s*(-?\d+)|\*\s*s)?\s*", text)
        if not m:
            raise ParseError(f"bad Shift literal {text!r}")
        names = {n: i for i, n in enumerate(self.F.names)}
        values, left, right = {}, 0, 0
        body = m.group(1).strip()
        for item in filter(None, (s.strip() for s in body.split(","))):
            key, _, val = item.partition(":")
            key, val = key.strip(), val.strip()
            if val not in names:
                raise ParseError(f"unknown alphabet element {val!r}")
            if key == "<":
                left = names[val]
            elif key == ">":
                right = names[val]
            else:
                try:
                    values[int(key)] = names[val]
                except ValueError:
                    raise ParseError(f"bad coordinate {key!r}") from None
        shift = 0
        if m.group(2) is not None:
            shift = int(m.group(2))
        elif text.strip().endswith("s"):
            shift = 1
        if self.one_sided and left != 0:
            raise ParseError("one-sided elements are trivial far to the left")
        lo = min(values) if values else 0
        hi = max(values) + 1 if values else 0
        return SElem(Piecewise.make(left, lo, [values.get(i, 0) for i in range(lo, hi)], right), shift)
