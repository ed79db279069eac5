"""Q_p^n extended by monomial automorphisms (the toral family).

An element (v, perm, exps) is the affine map x -> v + Mx where M sends the
i-th coordinate to coordinate perm[i] and multiplies it by p**exps[perm[i]].
Compact subgroups in the family are products of p^c Z_p, with c = INF
meaning the zero subgroup and c = NEG_INF meaning all of Q_p.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

from ..core import (
    Certificate,
    EnumerationTooLarge,
    InfiniteIndex,
    InvalidParameter,
    NotNested,
    NotNormal,
    ParseError,
    SubgroupHandle,
    UnsupportedQuotient,
    Verdict,
)
from .base import GroupModel


@total_ordering
class _Infinite:
    __slots__ = ("sign",)

    def __init__(self, sign):
        self.sign = sign

    def __eq__(self, other):
        return isinstance(other, _Infinite) and other.sign == self.sign

    def __lt__(self, other):
        if isinstance(other, _Infinite):
            return self.sign < other.sign
        return self.sign < 0

    def __hash__(self):
        return hash(("inf", self.sign))

    def __add__(self, other):
        if isinstance(other, _Infinite) and other.sign != self.sign:
            raise ArithmeticError("inf - inf")
        return self

    __radd__ = __add__

    def __neg__(self):
        return INF if self.sign < 0 else NEG_INF

    def __repr__(self):
        return "inf" if self.sign > 0 else "-inf"


INF = _Infinite(1)
NEG_INF = _Infinite(-1)


def is_finite(c):
    return not isinstance(c, _Infinite)


def valuation(x, p):
    """p-adic valuation of a rational; INF for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def residue(x, p, k):
    """Canonical representative c/p^s of x modulo p^k Z_p."""
    x = Fraction(x)
    s = max(0, -valuation(x, p)) if x != 0 else 0
    den_unit = x.denominator // p**s
    mod = p ** (k + s)
    c = (x.numerator * pow(den_unit, -1, mod)) % mod
    return Fraction(c, p**s)


def is_prime(p):
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def cycles(perm):
    seen, out = set(), []
    for i in range(len(perm)):
        if i in seen:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = perm[j]
        out.append(cyc)
    return out


@dataclass(frozen=True)
class PElem:
    v: tuple
    perm: tuple
    exps: tuple

    @property
    def discrete_trivial(self):
        return all(a == 0 for a in self.exps) and all(i == j for i, j in enumerate(self.perm))


@dataclass(frozen=True)
class PDesc:
    exps: tuple
    kind = "exponent-vector"

    @property
    def is_compact(self):
        return NEG_INF not in self.exps

    @property
    def is_open(self):
        return INF not in self.exps


class PAdicToral(GroupModel):
    family = "PAdicToral"
    abelian = True

    def __init__(self, spec):
        super().__init__(spec)
        p = spec.get("p")
        if not isinstance(p, int) or not is_prime(p):
            raise InvalidParameter("p", f"{p!r} is not a prime")
        n = spec.get("n", 1)
        if not isinstance(n, int) or n < 1:
            raise InvalidParameter("n", "dimension must be a positive integer")
        self.p, self.n = p, n
        self.index_base = p
        self.actors = {}
        for name, act in (spec.get("actors") or {}).items():
            exps = tuple(int(a) for a in act.get("exps", [0] * n))
            perm = tuple(int(i) for i in act.get("perm", range(n)))
            if len(exps) != n or sorted(perm) != list(range(n)):
                raise InvalidParameter(f"actors.{name}", "bad exponent vector or permutation")
            self.actors[name] = PElem((Fraction(0),) * n, perm, exps)

    # elements
    def identity(self):
        return PElem((Fraction(0),) * self.n, tuple(range(self.n)), (0,) * self.n)

    def is_element(self, x):
        return isinstance(x, PElem) and len(x.v) == self.n

    def element(self, v=None, exps=None, perm=None):
        n = self.n
        v = tuple(Fraction(c) for c in (v if v is not None else [0] * n))
        exps = tuple(int(a) for a in (exps if exps is not None else [0] * n))
        perm = tuple(perm if perm is not None else range(n))
        return PElem(v, perm, exps)

    def _apply_linear(self, g, w):
        out = [Fraction(0)] * self.n
        for i, wi in enumerate(w):
            j = g.perm[i]
            out[j] = wi * Fraction(self.p) ** g.exps[j]
        return out

    def compose(self, g, h):
        self.check(g)
        self.check(h)
        mw = self._apply_linear(g, h.v)
        v = tuple(a + b for a, b in zip(g.v, mw))
        perm = tuple(g.perm[h.perm[i]] for i in range(self.n))
        inv_g = _inverse_perm(g.perm)
        exps = tuple(g.exps[j] + h.exps[inv_g[j]] for j in range(self.n))
        return PElem(v, perm, exps)

    def invert(self, g):
        self.check(g)
        perm = _inverse_perm(g.perm)
        exps = tuple(-g.exps[g.perm[i]] for i in range(self.n))
        lin = PElem((Fraction(0),) * self.n, perm, exps)
        v = tuple(-c for c in self._apply_linear(lin, g.v))
        return PElem(v, perm, exps)

    # descriptors
    def desc(self, exps):
        return PDesc(tuple(exps))

    def basis(self, k):
        return PDesc((k,) * self.n)

    def trivial(self):
        return PDesc((INF,) * self.n)

    def whole(self):
        return PDesc((NEG_INF,) * self.n)

    def conjugate(self, g, D):
        self.check(g)
        out = [None] * self.n
        for i, c in enumerate(D.exps):
            j = g.perm[i]
            out[j] = c + g.exps[j]
        return PDesc(tuple(out))

    def intersect(self, A, B):
        return PDesc(tuple(max(a, b) for a, b in zip(A.exps, B.exps)))

    def join(self, A, B):
        return PDesc(tuple(min(a, b) for a, b in zip(A.exps, B.exps)))

    def contains(self, sup, sub):
        return all(b >= a for a, b in zip(sup.exps, sub.exps))

    def index(self, sup, sub):
        if not self.contains(sup, sub):
            raise NotNested(f"{sub} is not contained in {sup}")
        total = 0
        for a, b in zip(sup.exps, sub.exps):
            if a == b:
                continue
            if not (is_finite(a) and is_finite(b)):
                raise InfiniteIndex(f"index of {sub} in {sup} is infinite")
            total += b - a
        return self.p**total

    def member(self, x, D):
        self.check(x)
        if not x.discrete_trivial:
            return False
        return all(valuation(c, self.p) >= e for c, e in zip(x.v, D.exps))

    # enumeration
    def coset_reps(self, D, k, limit):
        per = []
        count = 1
        for e in D.exps:
            if e == NEG_INF:
                raise EnumerationTooLarge("descriptor is not compact")
            if e == INF or e >= k:
                per.append([Fraction(0)])
                continue
            step = Fraction(self.p) ** e
            m = self.p ** (k - e)
            count *= m
            if count > limit:
                raise EnumerationTooLarge(f"more than {limit} cosets")
            per.append([step * r for r in range(m)])
        ident = self.identity()
        return [PElem(tuple(vs), ident.perm, ident.exps) for vs in itertools.product(*per)]

    def coset_key(self, x, k):
        return (x.perm, x.exps, tuple(residue(c, self.p, k) for c in x.v))

    def factor(self, u, A, B, k=None):
        if not u.discrete_trivial:
            return None
        a, b = [], []
        for c, ea, eb in zip(u.v, A.exps, B.exps):
            val = valuation(c, self.p)
            if val >= ea:
                a.append(c)
                b.append(Fraction(0))
            elif val >= eb:
                a.append(Fraction(0))
                b.append(c)
            elif k is not None and val >= k:
                a.append(Fraction(0))
                b.append(Fraction(0))
            else:
                return None
        return self.element(a), self.element(b)

    def product_equals(self, U, A, B):
        return all(min(a, b) == u for u, a, b in zip(U.exps, A.exps, B.exps))

    def sample(self, rng, D=None):
        p = self.p
        if D is None:
            vs = [Fraction(rng.randint(-40, 40), p ** rng.randint(0, 3)) for _ in range(self.n)]
            perm = list(range(self.n))
            rng.shuffle(perm)
            exps = [rng.randint(-2, 2) for _ in range(self.n)]
            return self.element(vs, exps, perm)
        vs = []
        for e in D.exps:
            if e == INF:
                vs.append(Fraction(0))
            elif e == NEG_INF:
                vs.append(Fraction(rng.randint(-30, 30)) * Fraction(p) ** rng.randint(-3, 3))
            else:
                vs.append(Fraction(p) ** (e + rng.randint(0, 3)) * rng.randint(0, p**5))
        return self.element(vs)

    # closed forms
    def _drifts(self, g):
        return [(cyc, sum(g.exps[j] for j in cyc)) for cyc in cycles(g.perm)]

    def cf_scale(self, g):
        self.check(g)
        return self.p ** sum(max(0, -drift) for _, drift in self._drifts(g))

    def cf_limit(self, g, U, sign):
        if sign < 0:
            g = self.invert(g)
        longest = max(len(c) for c in cycles(g.perm))
        seq = [U]
        for _ in range(longest - 1):
            seq.append(self.conjugate(g, seq[-1]))
        out = [None] * self.n
        for cyc, drift in self._drifts(g):
            for j in cyc:
                vals = [D.exps[j] for D in seq[: len(cyc)]]
                if drift > 0 and any(is_finite(c) for c in vals):
                    out[j] = INF
                else:
                    out[j] = max(vals)
        return PDesc(tuple(out))

    def cf_nub(self, g):
        return self.trivial()

    def contracting_coords(self, g):
        return sorted(j for cyc, drift in self._drifts(g) if drift > 0 for j in cyc)

    def cf_contraction(self, g, k):
        coords = self.contracting_coords(g)
        exps = tuple(NEG_INF if j in coords else INF for j in range(self.n))
        inner = []
        for j in coords:
            v = [0] * self.n
            v[j] = Fraction(1, self.p**k)
            inner.append(self.element(v))
        return SubgroupHandle(tuple(inner), k, PDesc(exps), True,
                              Certificate.exact(rule="cycle drift"), True)

    def cf_contracts(self, g, x, k):
        self.check(x)
        if not x.discrete_trivial:
            return Verdict.false(("discrete part", self.format_element(x)),
                                 note="conjugates keep a nontrivial discrete part")
        coords = self.contracting_coords(g)
        for j, c in enumerate(x.v):
            if c != 0 and j not in coords:
                return Verdict.false(("coordinate", j), note="valuation does not grow")
        return Verdict.true(Certificate.exact(rule="cycle drift"))

    def invariant_closure(self, U, gens, words=None):
        # coordinate-wise infimum over the H-orbit of U; a coordinate reached by
        # a word with identity permutation and nonzero exponent there is all of Q_p
        from ..words import words_upto

        gens = list(gens)
        if not gens:
            return U, Certificate.exact(rule="no generators")
        best = list(U.exps)
        unbounded = set()
        for w in words_upto(self, gens, words or 6):
            D = self.conjugate(w, U)
            best = [min(a, b) for a, b in zip(best, D.exps)]
            if all(w.perm[i] == i for i in range(self.n)):
                for j, a in enumerate(w.exps):
                    if a != 0:
                        unbounded.add(j)
        # orbit of coordinates under the permutation parts
        changed = True
        while changed:
            changed = False
            for g in gens:
                for j in list(unbounded):
                    for h in (g, self.invert(g)):
                        if h.perm[j] not in unbounded:
                            unbounded.add(h.perm[j])
                            changed = True
        out = tuple(NEG_INF if j in unbounded and best[j] != INF else best[j] for j in range(self.n))
        return PDesc(out), Certificate.stabilized(words or 6, rule="word orbit")

    def eigenfactor_candidates(self, U, U0):
        out = []
        for r in range(self.n + 1):
            for S in itertools.combinations(range(self.n), r):
                out.append(PDesc(tuple(U.exps[j] if j in S else U0.exps[j] for j in range(self.n))))
        return out

    def discrete_signature(self, x):
        return (x.perm, x.exps)

    def tits_outer(self, xs):
        coords = set()
        for x in xs:
            for cyc, drift in self._drifts(x):
                if drift != 0:
                    coords.update(cyc)
        return PDesc(tuple(NEG_INF if j in coords else INF for j in range(self.n))), True

    def is_compact_element(self, g):
        return g.discrete_trivial

    def quotient(self, K):
        """Model of G/K for K a product of coordinate subgroups {0} or Q_p."""
        if any(c not in (INF, NEG_INF) for c in K.exps):
            raise UnsupportedQuotient("only coordinate subgroups {0} or Q_p are supported")
        killed = {i for i, c in enumerate(K.exps) if c == NEG_INF}
        for act in self.actors.values():
            if {act.perm[i] for i in killed} != killed:
                raise NotNormal("K is not invariant under the declared actors")
        keep = [i for i in range(self.n) if i not in killed]
        if not keep:
            raise UnsupportedQuotient("quotient would be trivial")
        pos = {i: j for j, i in enumerate(keep)}
        spec = {"p": self.p, "n": len(keep), "actors": {
            name: {"exps": [act.exps[i] for i in keep], "perm": [pos[act.perm[i]] for i in keep]}
            for name, act in self.actors.items()}}
        model = PAdicToral(spec)

        def proj(x):
            return PElem(tuple(x.v[i] for i in keep), tuple(pos[x.perm[i]] for i in keep),
                         tuple(x.exps[i] for i in keep))

        return model, proj

    # text
    def format_element(self, g):
        vs = ", ".join(str(c) for c in g.v)
        es = ", ".join(str(a) for a in g.exps)
        if all(i == j for i, j in enumerate(g.perm)):
            return f"({vs}; {es})"
        return f"({vs}; {es}; {' '.join(str(i) for i in g.perm)})"

    def format_descriptor(self, D):
        return "exp(" + ", ".join(str(c) for c in D.exps) + ")"

    def parse_element(self, text):
        m = re.fullmatch(r"\s*\((.*)\)\s*", text)
        if not m:
            raise ParseError(f"bad PAdicToral literal {text!r}")
        parts = [s.strip() for s in m.group(1).split(";")]
        try:
            vs = [Fraction(s) for s in parts[0].split(",")] if parts[0] else [Fraction(0)] * self.n
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        if len(vs) != self.n:
            raise ParseError(f"expected {self.n} coordinates in {text!r}")
        lin = self.identity()
        if len(parts) > 1 and parts[1]:
            if re.search(r"[A-Za-z]", parts[1]):
                from ..words import parse_word

                lin = parse_word(self, parts[1], self.actors)
            else:
                exps = [int(s) for s in parts[1].split(",")]
                perm = [int(s) for s in parts[2].split()] if len(parts) > 2 and parts[2] else None
                if len(exps) != self.n or (perm and sorted(perm) != list(range(self.n))):
                    raise ParseError(f"bad exponent/permutation part in {text!r}")
                lin = self.element(None, exps, perm)
        return self.compose(self.element(vs), lin)

    def parse_descriptor(self, text):
        m = re.fullmatch(r"\s*exp\((.*)\)\s*", text)
        if not m:
            raise ParseError(f"bad descriptor {text!r}")
        out = []
        for s in m.group(1).split(","):
            s = s.strip()
            out.append(INF if s == "inf" else NEG_INF if s == "-inf" else int(s))
        if len(out) != self.n:
            raise ParseError(f"expected {self.n} exponents")
        return PDesc(tuple(out))


def _inverse_perm(perm):
    inv = [0] * len(perm)
    for i, j in enumerate(perm):
        inv[j] = i
    return tuple(inv)
