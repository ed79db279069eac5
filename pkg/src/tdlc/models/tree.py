"""Products of regular trees with a marked end, possibly with components swapped.

Each component is the group of automorphisms of the (q+1)-regular tree
fixing a marked end, realised by finite portraits composed with the spinal
translation tau.  A TreeProduct element is (perm, comps): it sends vertex v
of component i to comps[i](v) in component perm[i].

Descriptors are products of component subgroups (see tree_arith.CompD);
with swap=True every part is normal and the component permutations are
included.  Components are not enumerable, so tidy-above is decided by
the index criterion.
"""

from __future__ import annotations

import itertools

import re
from dataclasses import dataclass
from math import factorial

from ..core import (
    Certificate,
    InfiniteIndex,
    InvalidParameter,
    NotNested,
    NotRepresentable,
    ParseError,
    SubgroupHandle,
    UnsupportedQuotient,
    Verdict,
)
from . import tree_arith as ta
from .base import GroupModel
from .tree_arith import CElem, CompD, arith, height, make_fix, parent

ID = CElem((), 0)


@dataclass(frozen=True)
class TElem:
    perm: tuple
    comps: tuple


@dataclass(frozen=True)
class TDesc:
    parts: tuple
    swap: bool = False
    kind = "forest stabilizer"

    @property
    def is_compact(self):
        return all(p.is_compact for p in self.parts)

    @property
    def is_open(self):
        return all(p.is_open for p in self.parts)


def ball(A, c, r):
    seen = {c}
    frontier = [c]
    for _ in range(r):
        nxt = []
        for v in frontier:
            for w in A.children(v) + [parent(v)]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return seen


class TreeProduct(GroupModel):
    family = "TreeProduct"
    enumerable = False

    def __init__(self, spec):
        super().__init__(spec)
        q = spec.get("q", 2)
        if not isinstance(q, int) or not 2 <= q <= 9:
            raise InvalidParameter("q", "arity must be an integer in 2..9")
        r = spec.get("components", 1)
        if not isinstance(r, int) or r < 1:
            raise InvalidParameter("components", "need at least one component")
        self.q, self.r = q, r
        self.index_base = q
        self.allow_swap = bool(spec.get("swap", r > 1))
        self.A = arith(q)

    # elements
    def identity(self):
        return TElem(tuple(range(self.r)), (ID,) * self.r)

    def is_element(self, x):
        return isinstance(x, TElem) and len(x.comps) == self.r

    def element(self, comps, perm=None):
        perm = tuple(range(self.r)) if perm is None else tuple(perm)
        if sorted(perm) != list(range(self.r)):
            raise InvalidParameter("perm", "not a permutation of the components")
        if perm != tuple(range(self.r)) and not self.allow_swap:
            raise InvalidParameter("perm", "this model does not permute components")
        return TElem(perm, tuple(comps))

    def tau(self, i=0, m=1):
        comps = [ID] * self.r
        comps[i] = CElem((), m)
        return self.element(comps)

    def portrait(self, mapping, m=0, i=0):
        comps = [ID] * self.r
        comps[i] = CElem(self.A.canon({v: tuple(p) for v, p in mapping.items()}), m)
        return self.element(comps)

    def compose(self, g, h):
        self.check(g)
        self.check(h)
        perm = tuple(g.perm[h.perm[i]] for i in range(self.r))
        comps = tuple(self.A.compose(g.comps[h.perm[i]], h.comps[i]) for i in range(self.r))
        return TElem(perm, comps)

    def invert(self, g):
        self.check(g)
        comps = [None] * self.r
        perm = [0] * self.r
        for i in range(self.r):
            perm[g.perm[i]] = i
            comps[g.perm[i]] = self.A.invert(g.comps[i])
        return TElem(tuple(perm), tuple(comps))

    def act(self, g, i, v):
        return g.perm[i], self.A.eval(g.comps[i], v)

    def translation(self, g):
        return tuple(c.m for c in g.comps)

    def preserves_components(self, g):
        return g.perm == tuple(range(self.r))

    # descriptors
    def comp_trivial(self):
        return CompD(self.q, "trivial")

    def comp_elliptic(self):
        return CompD(self.q, "elliptic")

    def comp_whole(self):
        return CompD(self.q, "whole")

    def comp_ball(self, k):
        return make_fix(self.q, ball(self.A, (0, ()), k))

    def basis(self, k):
        return TDesc((self.comp_ball(k),) * self.r)

    def trivial(self):
        return TDesc((self.comp_trivial(),) * self.r)

    def whole(self):
        return TDesc((self.comp_whole(),) * self.r, self.allow_swap and self.r > 1)

    def elliptic(self):
        return TDesc((self.comp_elliptic(),) * self.r)

    def spine_fixator(self):
        """Fixator of the axis of tau in every component."""
        part = make_fix(self.q, (), CElem((), 1), {((0, ()), "all")})
        return TDesc((part,) * self.r)

    def fix(self, sets):
        """Descriptor fixing the given finite vertex set in each component."""
        return TDesc(tuple(make_fix(self.q, s) for s in sets))

    def _conj_part(self, c, P):
        if P.kind != "fix":
            return P
        A = self.A
        h = A.conj(c, P.h) if P.h is not None else None
        return make_fix(self.q, {A.eval(c, v) for v in P.F}, h,
                        {(A.eval(c, v), d) for v, d in P.pieces})

    def conjugate(self, g, D):
        self.check(g)
        parts = [None] * self.r
        for i in range(self.r):
            parts[g.perm[i]] = self._conj_part(g.comps[i], D.parts[i])
        if D.swap and any(p.kind == "fix" for p in parts):
            raise NotRepresentable("swap descriptors must have normal parts")
        return TDesc(tuple(parts), D.swap)

    def _meet(self, a, b):
        if a.kind == "trivial" or b.kind == "trivial":
            return self.comp_trivial()
        if a.kind == "whole":
            return b
        if b.kind == "whole":
            return a
        if a.kind == "elliptic":
            return b
        if b.kind == "elliptic":
            return a
        if a.h is not None and b.h is not None and a.h != b.h:
            # coaxial orbit sets: representable when one fixed set swallows the other
            self._same_orbits(a, b)
            if ta.set_contains(a, b):
                return a
            if ta.set_contains(b, a):
                return b
            raise NotRepresentable("intersection of orbit sets of different elements")
        h = a.h if a.h is not None else b.h
        return make_fix(self.q, a.F | b.F, h, a.pieces | b.pieces)

    def intersect(self, A, B):
        parts = tuple(self._meet(a, b) for a, b in zip(A.parts, B.parts))
        swap = A.swap and B.swap
        return TDesc(parts, swap)

    def _part_contains(self, sup, sub):
        order = {"trivial": 0, "fix": 1, "elliptic": 2, "whole": 3}
        if sub.kind == "trivial" or sup.kind == "whole":
            return True
        if sup.kind == "trivial":
            return False
        if sub.kind in ("elliptic", "whole"):
            return order[sup.kind] >= order[sub.kind]
        if sup.kind == "elliptic":
            return True
        self._same_orbits(sup, sub)
        return ta.set_contains(sub, sup)

    def _same_orbits(self, a, b):
        la, lb = ta.bounds(a)[3], ta.bounds(b)[3]
        if la is not None and lb is not None and a.h != b.h and not self._coaxial(a.h, b.h):
            raise NotRepresentable("comparison of orbit sets of different elements")

    def _coaxial(self, h, k):
        # commuting hyperbolic elements fixing the same end share their axis
        A = self.A
        return A.compose(h, k) == A.compose(k, h)

    def contains(self, sup, sub):
        if sub.swap and not sup.swap:
            return False
        return all(self._part_contains(a, b) for a, b in zip(sup.parts, sub.parts))

    def _part_index(self, sup, sub):
        if sup == sub:
            return 1
        if sub.kind == "trivial":
            if sup.kind == "trivial":
                return 1
            raise InfiniteIndex("infinite index over the trivial subgroup")
        if sup.kind in ("elliptic", "whole") and sub.kind == "fix":
            raise InfiniteIndex("compact subgroup of a non-compact one")
        if sup.kind == "whole" and sub.kind == "elliptic":
            raise InfiniteIndex("the translation length takes infinitely many values")
        self._same_orbits(sup, sub)
        n = ta.set_difference_index(sup, sub)
        if n is None:
            raise InfiniteIndex("fixed sets differ along an infinite ray")
        return n

    def index(self, sup, sub):
        if not self.contains(sup, sub):
            raise NotNested("descriptor is not contained in the other")
        n = factorial(self.r) if sup.swap and not sub.swap else 1
        for a, b in zip(sup.parts, sub.parts):
            n *= self._part_index(a, b)
        return n

    def _part_member(self, c, P):
        A = self.A
        if P.kind == "whole":
            return True
        if P.kind == "elliptic":
            return c.m == 0
        if P.kind == "trivial":
            return c == ID
        if c.m != 0:
            return False
        supp = A.support(c)
        if not supp:
            return True
        j0 = min(height(v) for v in supp) - 1
        top = max(v[0] for v in supp)
        return all(A.fixes(c, v) for j in range(j0, top + 1) for v in ta.level(P, j))

    def member(self, x, D):
        self.check(x)
        if x.perm != tuple(range(self.r)) and not D.swap:
            return False
        return all(self._part_member(c, P) for c, P in zip(x.comps, D.parts))

    def _join_part(self, a, b):
        if a.kind == "whole" or b.kind == "whole":
            return self.comp_whole()
        if a.kind == "trivial":
            return b
        if b.kind == "trivial":
            return a
        if a.kind == "elliptic" or b.kind == "elliptic":
            return self.comp_elliptic()
        if a.h is not None or b.h is not None:
            raise NotRepresentable("join of orbit fixators")
        lo = min(ta.bounds(a)[0], ta.bounds(b)[0])
        hi = max(ta.bounds(a)[1], ta.bounds(b)[1])
        pts = set()
        for j in range(lo, hi + 1):
            pts |= ta.level(a, j) & ta.level(b, j)
        return make_fix(self.q, pts)

    def join(self, A, B):
        return TDesc(tuple(self._join_part(a, b) for a, b in zip(A.parts, B.parts)), A.swap or B.swap)

    def normalizes(self, g, D):
        try:
            return self.conjugate(g, D) == D
        except NotRepresentable:
            return False

    # sampling
    def _free_labels(self, P, u, inside):
        return [a for a in range(1, self.q + 1) if ta.child(u, a) not in inside]

    def _sample_part(self, rng, P):
        A = self.A
        if P.kind == "trivial":
            return ID
        if P.kind in ("elliptic", "whole"):
            d = {}
            for _ in range(rng.randint(0, 3)):
                v = (rng.randint(-2, 2), tuple(rng.randint(2, self.q) for _ in range(rng.randint(0, 1))))
                d[v] = tuple(rng.sample(range(1, self.q + 1), self.q))
            m = rng.randint(-2, 2) if P.kind == "whole" else 0
            return CElem(A.canon(d), m)
        lo, hi, _, _ = ta.bounds(P)
        lo = max(lo, -6)
        hi = min(hi, 6)
        g = ID
        for _ in range(rng.randint(1, 4)):
            j = rng.randint(lo, hi)
            lev = sorted(ta.level(P, j))
            if not lev:
                continue
            u = rng.choice(lev)
            below = ta.level(P, j - 1)
            free = self._free_labels(P, u, below)
            if rng.random() < 0.5 and free:
                # step off the fixed set and permute freely there
                u = ta.child(u, rng.choice(free))
                perm = tuple(rng.sample(range(1, self.q + 1), self.q))
            else:
                images = free[:]
                rng.shuffle(images)
                mp = dict(zip(free, images))
                perm = tuple(mp.get(a, a) for a in range(1, self.q + 1))
            g = A.compose(g, CElem(A.canon({u: perm}), 0))
        return g

    def sample(self, rng, D=None):
        D = self.whole() if D is None else D
        comps = tuple(self._sample_part(rng, P) for P in D.parts)
        perm = tuple(range(self.r))
        if D.swap and self.r > 1 and rng.random() < 0.5:
            perm = tuple(rng.sample(range(self.r), self.r))
        return TElem(perm, comps)

    # closed forms
    def _component_form(self, g):
        """(h, n) with h = g^n component-preserving, n in {1, r!}."""
        if self.preserves_components(g):
            return g, 1
        n = factorial(self.r)
        return self.power(g, n), n

    def cf_scale(self, g):
        h, n = self._component_form(g)
        s = 1
        for c in h.comps:
            s *= self.q ** max(c.m, 0)
        if n == 1:
            return s
        root = round(s ** (1 / n))
        for cand in (root - 1, root, root + 1):
            if cand > 0 and cand ** n == s:
                return cand
        return None

    def axis_part(self, c):
        h = self.A.up_form(c)
        return make_fix(self.q, (), h, {((self.A.axis_top(h), ()), "all")})

    def cf_nub(self, g):
        h, _ = self._component_form(g)
        return TDesc(tuple(self.axis_part(c) if c.m else self.comp_trivial() for c in h.comps))

    def product_set(self, A, B):
        # components are direct factors; within one, only nested parts multiply to a group
        if A.swap or B.swap:
            return super().product_set(A, B)
        parts = []
        for P, Q in zip(A.parts, B.parts):
            if self._part_contains(P, Q):
                parts.append(P)
            elif self._part_contains(Q, P):
                parts.append(Q)
            else:
                return None
        return TDesc(tuple(parts))

    def eigenfactor_candidates(self, U, U0):
        if U.swap or U0.swap:
            return super().eigenfactor_candidates(U, U0)
        out = []
        for choice in itertools.product((0, 1), repeat=self.r):
            out.append(TDesc(tuple(U.parts[i] if c else U0.parts[i] for i, c in enumerate(choice))))
        return out

    def same_at_level(self, A, B, j):
        # Fix(X) U_j is read off the trace of X on the ball B(x_0, j)
        if A.swap != B.swap:
            return None
        verts = ball(self.A, (0, ()), j)

        def trace(P):
            if P.kind == "trivial":
                return frozenset(verts)
            if P.kind in ("elliptic", "whole"):
                return P.kind
            return frozenset(v for v in verts if ta.contains_vertex(P, v))

        return all(trace(P) == trace(Q) for P, Q in zip(A.parts, B.parts))

    def _orbit_union(self, c, F):
        A = self.A
        pts = set(F)
        cur = set(F)
        for _ in range(10000):
            cur = {A.eval(c, v) for v in cur}
            if cur <= pts:
                break
            pts |= cur
        return pts

    def cf_limit(self, g, U, sign):
        if not self.preserves_components(g) or U.swap:
            return None
        parts = []
        for c, P in zip(g.comps, U.parts):
            if P.kind != "fix" or P.h is not None:
                return None
            if c.m == 0:
                parts.append(make_fix(self.q, self._orbit_union(c, P.F)))
                continue
            forward = (c.m > 0) == (sign > 0)
            h = self.A.up_form(c)
            d = "up" if forward else "down"
            parts.append(make_fix(self.q, P.F, h, {(v, d) for v in P.F}))
        return TDesc(tuple(parts))

    def tidy_candidates(self, g):
        h, _ = self._component_form(g)
        parts = []
        for c in h.comps:
            if c.m:
                M = self.A.axis_top(self.A.up_form(c))
            else:
                M = max([v[0] for v in self.A.support(c)] + [0]) + 1
            parts.append(make_fix(self.q, [(M, ())]))
        return [TDesc(tuple(parts))]

    def _elementary(self, i, v, perm):
        comps = [ID] * self.r
        comps[i] = CElem(self.A.canon({v: perm}), 0)
        return self.element(comps)

    def _swap_perm(self):
        p = list(range(1, self.q + 1))
        p[0], p[1] = p[1], p[0]
        return tuple(p)

    def cf_contraction(self, g, k):
        h, _ = self._component_form(g)
        parts, inner = [], []
        exact = True
        for i, c in enumerate(h.comps):
            if c.m == 0:
                parts.append(self.comp_trivial())
            elif c.m > 0:
                ax = self.axis_part(c)
                parts.append(ax)
                exact = False
                # elementary elements hanging off the axis near the base point
                for j in range(-k, k + 1):
                    a = self.A.axis_vertex(ax.h, j)
                    for b in self.A.children(a):
                        if b not in ta.level(ax, j - 1):
                            inner.append(self._elementary(i, b, self._swap_perm()))
                            break
            else:
                parts.append(self.comp_elliptic())
                exact = False
                for j in range(0, k + 1):
                    inner.append(self._elementary(i, (j, ()), self._swap_perm()))
        cert = Certificate.exact(rule="closure of the contraction group") if exact \
            else Certificate.exact(rule="outer bound is the closure; the group itself is dense in it")
        return SubgroupHandle(tuple(inner), k, TDesc(tuple(parts)), exact, cert, closed=exact)

    def cf_contracts(self, g, x, k):
        h, n = self._component_form(g)
        if not self.preserves_components(x):
            return Verdict.false(("permutes components", x.perm))
        for i, (c, y) in enumerate(zip(h.comps, x.comps)):
            if y == ID:
                continue
            if c.m == 0 or y.m != 0:
                return Verdict.false(("component", i, "not contracted"))
            if c.m > 0:
                supp = self.A.support(y)
                j0 = min(height(v) for v in supp) - 1
                a = self.A.axis_vertex(self.A.up_form(c), j0)
                if not self.A.fixes(y, a):
                    return Verdict.false(("component", i, "moves the axis"))
        return Verdict.true(Certificate.exact(rule="finite support meets the translated balls finitely often"))

    def invariant_closure(self, U, gens):
        gens = list(gens)
        parts = []
        for i, P in enumerate(U.parts):
            hyper = any(self._component_form(g)[0].comps[i].m for g in gens)
            if P.kind in ("elliptic", "whole"):
                parts.append(P)
            elif hyper and P.kind != "trivial":
                parts.append(self.comp_elliptic())
            else:
                parts.append(P)
        D = TDesc(tuple(parts), U.swap)
        for _ in range(64):
            new = D
            for g in gens:
                for h in (g, self.invert(g)):
                    try:
                        new = self.join(new, self.conjugate(h, new))
                    except NotRepresentable:
                        return None
            if new == D:
                return D, Certificate.exact(rule="joined conjugates stabilized")
            D = new
        return None

    def discrete_signature(self, x):
        return (x.perm, tuple(c.m for c in x.comps))

    def tits_outer(self, xs):
        parts = [self.comp_trivial()] * self.r
        for x in xs:
            h, _ = self._component_form(x)
            for i, c in enumerate(h.comps):
                if c.m:
                    parts[i] = self.comp_elliptic()
        return TDesc(tuple(parts)), True

    def quotient(self, K):
        raise UnsupportedQuotient("tree products have no supported quotients")

    # text
    def _fmt_vertex(self, v):
        l, s = v
        return f"{l}" + ("." + "".join(str(a) for a in s) if s else "")

    def _fmt_comp(self, c):
        parts = []
        if c.port:
            body = ", ".join(f"{self._fmt_vertex(v)}:{''.join(str(a) for a in p)}" for v, p in c.port)
            parts.append("portrait{" + body + "}")
        if c.m:
            parts.append(f"tau^{c.m}")
        return " * ".join(parts) or "id"

    def format_element(self, g):
        cyc = self._cycles(g.perm)
        comps = "; ".join(f"C{i + 1}: {self._fmt_comp(c)}" for i, c in enumerate(g.comps))
        return f"(perm={cyc}; {comps})"

    def _cycles(self, perm):
        seen, out = set(), []
        for i in range(len(perm)):
            if i in seen or perm[i] == i:
                continue
            cyc, j = [], i
            while j not in seen:
                seen.add(j)
                cyc.append(str(j + 1))
                j = perm[j]
            out.append("(" + " ".join(cyc) + ")")
        return "".join(out) or "()"

    def format_descriptor(self, D):
        def part(P):
            if P.kind != "fix":
                return P.kind
            pts = ",".join(self._fmt_vertex(v) for v in sorted(P.F))
            if P.h is None:
                return f"fix[{pts}]"
            orb = ",".join(f"{self._fmt_vertex(v)}:{d}" for v, d in sorted(P.pieces))
            return f"fix[{pts} | orbits of {self._fmt_comp(P.h)}: {orb}]"
        body = " x ".join(part(P) for P in D.parts)
        return body + (" >| Sym" if D.swap else "")

    def _parse_vertex(self, text):
        m = re.fullmatch(r"\s*(-?\d+)(?:\.(\d+))?\s*", text)
        if not m:
            raise ParseError(f"bad vertex {text!r}")
        s = tuple(int(a) for a in (m.group(2) or ""))
        if any(not 1 <= a <= self.q for a in s):
            raise ParseError(f"branch label out of range in {text!r}")
        v = (int(m.group(1)), ())
        for a in s:
            v = ta.child(v, a)
        return v

    def _parse_comp(self, text):
        text = text.strip()
        if text in ("", "id", "1"):
            return ID
        g = ID
        for factor in re.split(r"\s*\*\s*", text):
            m = re.fullmatch(r"tau(?:\^(-?\d+))?", factor)
            if m:
                g = self.A.compose(g, CElem((), int(m.group(1) or 1)))
                continue
            m = re.fullmatch(r"portrait\{(.*)\}", factor)
            if not m:
                raise ParseError(f"bad component factor {factor!r}")
            d = {}
            for entry in filter(None, (e.strip() for e in m.group(1).split(","))):
                vtext, _, ptext = entry.partition(":")
                perm = tuple(int(a) for a in ptext.strip())
                if sorted(perm) != list(range(1, self.q + 1)):
                    raise ParseError(f"bad permutation {ptext!r}")
                d[self._parse_vertex(vtext)] = perm
            g = self.A.compose(g, CElem(self.A.canon(d), 0))
        return g

    def parse_element(self, text):
        body = text.strip()
        if body.startswith("(") and body.endswith(")"):
            body = body[1:-1]
        perm = tuple(range(self.r))
        comps = [ID] * self.r
        for field_ in filter(None, (f.strip() for f in body.split(";"))):
            head = re.match(r"(perm)\s*=|(C\d+)\s*:", field_)
            if head and head.group(1):
                perm = self._parse_cycles(field_[head.end():].strip())
            elif head:
                i = int(head.group(2)[1:]) - 1
                if not 0 <= i < self.r:
                    raise ParseError(f"no component {head.group(2)}")
                comps[i] = self._parse_comp(field_[head.end():])
            elif self.r == 1:
                comps[0] = self._parse_comp(field_)
            else:
                raise ParseError(f"bad field {field_!r}")
        try:
            return self.element(comps, perm)
        except InvalidParameter as e:
            raise ParseError(str(e)) from None

    def _parse_cycles(self, text):
        perm = list(range(self.r))
        for cyc in re.findall(r"\(([^)]*)\)", text):
            pts = [int(a) - 1 for a in cyc.split()]
            if any(not 0 <= p < self.r for p in pts):
                raise ParseError(f"bad cycle {cyc!r}")
            for a, b in zip(pts, pts[1:] + pts[:1]):
                perm[a] = b
        return tuple(perm)
