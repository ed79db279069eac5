"""Profinite F_p-vector groups seen through a finite level, with declared automorphisms.

G is a profinite F_p-vector space whose quotient by a hidden open "tail"
subspace is F_p^n.  The explicit finite part F_p^n is a complement of the
tail, so elements are honest elements (v, M) of F_p^n x| <actions>; the
actions fix the tail.  U_0 >= ... >= U_D are declared subspaces, each plus
the tail; beyond D the basis continues inside the tail unseen.

A descriptor is (subspace, open): open means "plus the tail".
Saturation rules encode automorphism families too large to list: a rule
names a subspace that every open subgroup invariant under the full
declared group must contain.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

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
from . import linalg as la
from .base import GroupModel
from .padic import is_prime


@dataclass(frozen=True)
class FElem:
    v: tuple
    mat: tuple


@dataclass(frozen=True)
class FDesc:
    rows: tuple
    open: bool
    kind = "level kernel"

    @property
    def is_compact(self):
        return True

    @property
    def is_open(self):
        return self.open


class FiniteLevel(GroupModel):
    family = "FiniteLevel"
    abelian = True

    def __init__(self, spec):
        super().__init__(spec)
        p = spec.get("p", 2)
        if not isinstance(p, int) or not is_prime(p):
            raise InvalidParameter("p", f"{p!r} is not a prime")
        self.p = p
        self.index_base = p
        n = spec.get("dim")
        if not isinstance(n, int) or n < 1:
            raise InvalidParameter("dim", "dimension must be a positive integer")
        self.n = n
        filt = spec.get("filtration")
        if not filt:
            raise InvalidParameter("filtration", "need at least U_0")
        self.levels = [la.rref(rows, p) if rows else () for rows in filt]
        for a, b in zip(self.levels, self.levels[1:]):
            if not la.contains(a, b, p):
                raise InvalidParameter("filtration", "levels must decrease")
        self.actions = {}
        for name, mat in (spec.get("actions") or {}).items():
            m = tuple(tuple(int(x) % p for x in row) for row in mat)
            if len(m) != n or any(len(r) != n for r in m):
                raise InvalidParameter(f"actions.{name}", "matrix has the wrong shape")
            try:
                la.inverse(m, p)
            except ValueError:
                raise InvalidParameter(f"actions.{name}", "matrix is singular") from None
            self.actions[name] = FElem((0,) * n, m)
        self.rules = [la.rref(rows, p) for rows in (spec.get("saturation") or [])]
        self.depth = len(self.levels) - 1

    @classmethod
    def badnub(cls, p=2, depth=4):
        """V = F_p[[t]] seen to depth t^depth, plus W = F_p, with H = Hom(V, W)."""
        n = depth + 1
        e = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
        filtration = [e[:]] + [e[k:depth] for k in range(1, depth + 1)]
        actions = {}
        for j in range(depth):
            m = [list(r) for r in la.identity(n)]
            m[depth][j] = 1
            actions[f"h{j}"] = m
        spec = {"p": p, "dim": n, "filtration": [[list(r) for r in U] for U in filtration],
                "actions": actions, "saturation": [[list(e[depth])]], "preset": "badnub"}
        return cls(spec)

    # elements
    def identity(self):
        return FElem((0,) * self.n, la.identity(self.n))

    def is_element(self, x):
        return isinstance(x, FElem) and len(x.v) == self.n

    def vector(self, v):
        return FElem(tuple(int(a) % self.p for a in v), la.identity(self.n))

    def compose(self, g, h):
        self.check(g)
        self.check(h)
        p = self.p
        mv = la.apply(g.mat, h.v, p)
        return FElem(tuple((a + b) % p for a, b in zip(g.v, mv)), la.matmul(g.mat, h.mat, p))

    def invert(self, g):
        self.check(g)
        inv = la.inverse(g.mat, self.p)
        v = la.apply(inv, g.v, self.p)
        return FElem(tuple((-a) % self.p for a in v), inv)

    # descriptors
    def desc(self, rows, open_=False):
        return FDesc(la.rref(rows, self.p) if rows else (), open_)

    def basis(self, k):
        if k <= self.depth:
            return FDesc(self.levels[k], True)
        return FDesc((), True)

    def trivial(self):
        return FDesc((), False)

    def whole(self):
        return FDesc(self.levels[0], True)

    def conjugate(self, g, D):
        self.check(g)
        return FDesc(la.image(g.mat, D.rows, self.p) if D.rows else (), D.open)

    def intersect(self, A, B):
        return FDesc(la.intersect(A.rows, B.rows, self.p, self.n), A.open and B.open)

    def join(self, A, B):
        return FDesc(la.span_sum(A.rows, B.rows, self.p), A.open or B.open)

    def contains(self, sup, sub):
        return la.contains(sup.rows, sub.rows, self.p) and (sup.open or not sub.open)

    def index(self, sup, sub):
        if not self.contains(sup, sub):
            raise NotNested(f"{sub} is not contained in {sup}")
        if sup.open and not sub.open:
            raise InfiniteIndex("an open subgroup has infinite index over a closed one")
        return self.p ** (len(sup.rows) - len(sub.rows))

    def member(self, x, D):
        self.check(x)
        if x.mat != la.identity(self.n):
            return False
        return la.in_span(x.v, D.rows, self.p)

    # enumeration
    def coset_reps(self, D, k, limit):
        C = self.intersect(D, self.basis(k))
        ext = list(C.rows)
        extra = []
        for row in D.rows:
            if not la.in_span(row, ext, self.p):
                ext = list(la.rref(ext + [row], self.p))
                extra.append(row)
        if self.p ** len(extra) > limit:
            raise EnumerationTooLarge(f"more than {limit} cosets")
        out = []
        for coefs in itertools.product(range(self.p), repeat=len(extra)):
            v = [0] * self.n
            for c, row in zip(coefs, extra):
                v = [(a + c * b) % self.p for a, b in zip(v, row)]
            out.append(self.vector(v))
        return out

    def coset_key(self, x, k):
        return (x.mat, la.reduce(x.v, self.basis(k).rows, self.p))

    def factor(self, u, A, B, k=None):
        if u.mat != la.identity(self.n):
            return None
        C = self.basis(k).rows if k is not None else ()
        res = la.solve_decomposition(u.v, A.rows, B.rows, C, self.p)
        if res is None:
            return None
        return self.vector(res[0]), self.vector(res[1])

    def product_equals(self, U, A, B):
        return self.join(A, B) == U

    def sample(self, rng, D=None):
        if D is None:
            v = [rng.randrange(self.p) for _ in range(self.n)]
            word = self.identity()
            names = sorted(self.actions)
            for _ in range(rng.randint(0, 3)):
                if names:
                    word = self.compose(word, self.actions[rng.choice(names)])
            return self.compose(self.vector(v), word)
        v = [0] * self.n
        for row in D.rows:
            c = rng.randrange(self.p)
            v = [(a + c * b) % self.p for a, b in zip(v, row)]
        return self.vector(v)

    # closed forms: every explicit action has finite order, G is compact
    def cf_scale(self, g):
        return 1

    def cf_nub(self, g):
        return self.trivial()

    def cf_contraction(self, g, k):
        return SubgroupHandle((), k, self.trivial(), True, Certificate.exact(rule="finite order on a compact group"), True)

    def cf_contracts(self, g, x, k):
        if x == self.identity():
            return Verdict.true(Certificate.exact(rule="identity"))
        return Verdict.false(("finite order", self.format_element(g)))

    def _full_family(self, gens):
        mats = {g.mat for g in gens}
        return bool(self.actions) and all(a.mat in mats for a in self.actions.values())

    def invariant_closure(self, U, gens, words=None):
        gens = list(gens)
        rows = U.rows
        while True:
            new = list(rows)
            for g in gens:
                for h in (g, self.invert(g)):
                    new += la.image(h.mat, rows, self.p) if rows else []
            if U.open and self._full_family(gens):
                for W in self.rules:
                    new += list(W)
            new = la.rref(new, self.p) if new else ()
            if new == rows:
                return FDesc(rows, U.open), Certificate.exact(rule="closure under actions and saturation")
            rows = new

    def cf_residual(self, gens, within=None):
        """Res over every level: the part forced into arbitrarily small invariant opens."""
        D, _ = self.invariant_closure(FDesc((), True), gens)
        rows = D.rows
        if within is not None:
            rows = la.intersect(rows, within.rows, self.p, self.n)
        return FDesc(rows, False), Certificate.exact(rule="saturation closure of the tail")

    def discrete_signature(self, x):
        return x.mat

    def tits_outer(self, xs):
        return self.trivial(), True

    def is_compact_element(self, g):
        return True

    # quotients
    def quotient(self, K):
        """Model of G/K for a closed subspace K invariant under every declared action."""
        if K.open:
            raise UnsupportedQuotient("quotient by an open subgroup is discrete")
        p = self.p
        for g in self.actions.values():
            if la.image(g.mat, K.rows, p) != K.rows and K.rows:
                raise NotNormal("K is not invariant under the declared actions")
        piv = set(la.pivots(K.rows))
        keep = [i for i in range(self.n) if i not in piv]

        def project(v):
            r = la.reduce(v, K.rows, p)
            return tuple(r[i] for i in keep)

        def lift(w):
            v = [0] * self.n
            for c, i in zip(w, keep):
                v[i] = c
            return tuple(v)

        m = len(keep)
        if m == 0:
            raise UnsupportedQuotient("quotient would be trivial")

        def proj_rows(rows):
            return [list(project(r)) for r in rows if any(project(r))]

        def proj_mat(mat):
            cols = [project(la.apply(mat, lift(e), p)) for e in la.identity(m)]
            return [[cols[j][i] for j in range(m)] for i in range(m)]

        spec = {"p": p, "dim": m,
                "filtration": [proj_rows(U) for U in self.levels],
                "actions": {name: proj_mat(g.mat) for name, g in self.actions.items()},
                "saturation": [r for r in (proj_rows(W) for W in self.rules) if r]}
        model = FiniteLevel(spec)

        def proj(x):
            return FElem(project(x.v), tuple(tuple(r) for r in proj_mat(x.mat)))

        return model, proj

    def project_descriptor(self, proj_model, D, K):
        """Image of D in the quotient by K."""
        p = self.p
        piv = set(la.pivots(K.rows))
        keep = [i for i in range(self.n) if i not in piv]
        rows = []
        for r in D.rows:
            red = la.reduce(r, K.rows, p)
            rows.append(tuple(red[i] for i in keep))
        rows = [r for r in rows if any(r)]
        return FDesc(la.rref(rows, p) if rows else (), D.open)

    # text
    def _word(self, mat):
        if mat == la.identity(self.n):
            return ""
        for name, g in sorted(self.actions.items()):
            if g.mat == mat:
                return name
        return "m(" + "/".join("".join(str(x) for x in row) for row in mat) + ")"

    def format_element(self, g):
        vec = " ".join(str(x) for x in g.v)
        word = self._word(g.mat)
        return f"[{vec}; {word}]" if word else f"[{vec}]"

    def format_descriptor(self, D):
        body = ",".join("".join(str(x) for x in r) for r in D.rows) or "0"
        return f"span({body}){'+tail' if D.open else ''}"

    def parse_element(self, text):
        m = re.fullmatch(r"\s*\[([^;\]]*)(?:;([^\]]*))?\]\s*", text)
        if not m:
            raise ParseError(f"bad FiniteLevel literal {text!r}")
        try:
            v = [int(x) for x in m.group(1).split()]
        except ValueError:
            raise ParseError(f"bad vector in {text!r}") from None
        if len(v) != self.n:
            raise ParseError(f"expected {self.n} coordinates")
        x = self.vector(v)
        word = (m.group(2) or "").strip()
        mat = re.fullmatch(r"m\(([01-9/]+)\)", word)
        if mat:
            rows = tuple(tuple(int(c) % self.p for c in row) for row in mat.group(1).split("/"))
            if len(rows) != self.n or any(len(r) != self.n for r in rows):
                raise ParseError(f"matrix in {text!r} is not {self.n} x {self.n}")
            x = FElem(x.v, rows)
            self.check(x)
        elif word:
            from ..words import parse_word

            x = self.compose(x, parse_word(self, word, self.actions))
        return x
