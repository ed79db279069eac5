"""Vertices, portraits and fixed-point sets on the (q+1)-regular tree with a marked end.

A vertex is (l, s): l is the level of its spine ancestor x_l and s a branch
string over 1..q.  Child 1 of the spine vertex x_l is x_{l-1}, so a
canonical branch string never starts with 1.  Going up (toward the marked
end) means taking parents; height(l, s) = l - len(s).

A component element is (portrait, m): a finitely supported map vertex ->
permutation of child labels, applied after the translation tau^m which
sends (l, s) to (l + m, s).  Every such element fixes the marked end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd


@dataclass(frozen=True)
class CElem:
    port: tuple  # sorted ((vertex, perm), ...) with perm a tuple of 1-based images
    m: int = 0


def height(v):
    return v[0] - len(v[1])


def child(v, a):
    l, s = v
    if not s and a == 1:
        return (l - 1, ())
    return (l, s + (a,))


def parent(v):
    l, s = v
    return (l + 1, ()) if not s else (l, s[:-1])


def anc(v, j):
    """Ancestor of v at height j >= height(v)."""
    l, s = v
    if j <= l:
        return (l, s[: l - j])
    return (j, ())


def is_below(v, u):
    """True when u is v or an ancestor of v."""
    return height(u) >= height(v) and anc(v, height(u)) == u


def shift(v, m):
    return (v[0] + m, v[1])


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


class Arith:
    """Element and vertex-set computations for one arity q."""

    def __init__(self, q):
        self.q = q
        self.ident = tuple(range(1, q + 1))

    def children(self, v):
        return [child(v, a) for a in range(1, self.q + 1)]

    # portraits ---------------------------------------------------------
    def top(self, port):
        return max((v[0] for v, _ in port), default=None)

    def eval_port(self, port, v):
        d = dict(port)
        t = self.top(port)
        if t is None:
            return v
        M = max(t, v[0])
        path = [1] * (M - v[0]) + list(v[1])
        src = cur = (M, ())
        for a in path:
            pi = d.get(src)
            cur = child(cur, pi[a - 1] if pi else a)
            src = child(src, a)
        return cur

    def eval(self, g, v):
        return self.eval_port(g.port, shift(v, g.m))

    def canon(self, d):
        return tuple(sorted((v, p) for v, p in d.items() if p != self.ident))

    def inv_perm(self, p):
        out = [0] * self.q
        for i, b in enumerate(p):
            out[b - 1] = i + 1
        return tuple(out)

    def invert_port(self, port):
        return self.canon({self.eval_port(port, v): self.inv_perm(p) for v, p in port})

    def shift_port(self, port, m):
        return tuple((shift(v, m), p) for v, p in port)

    def compose_port(self, P, Q):
        dP, dQ = dict(P), dict(Q)
        Qinv = self.invert_port(Q)
        cands = set(dQ) | {self.eval_port(Qinv, d) for d in dP}
        out = {}
        for c in cands:
            pq = dQ.get(c, self.ident)
            pp = dP.get(self.eval_port(Q, c), self.ident)
            out[c] = tuple(pp[pq[i] - 1] for i in range(self.q))
        return self.canon(out)

    def compose(self, g, h):
        return CElem(self.compose_port(g.port, self.shift_port(h.port, g.m)), g.m + h.m)

    def invert(self, g):
        return CElem(self.shift_port(self.invert_port(g.port), -g.m), -g.m)

    def power(self, g, n):
        if n < 0:
            g, n = self.invert(g), -n
        out, base = CElem((), 0), g
        while n:
            if n & 1:
                out = self.compose(out, base)
            base = self.compose(base, base)
            n >>= 1
        return out

    def conj(self, g, h):
        return self.compose(self.compose(g, h), self.invert(g))

    def support(self, g):
        return [v for v, _ in g.port]

    # axes --------------------------------------------------------------
    def up_form(self, h):
        """h or its inverse, whichever translates toward the marked end."""
        return h if h.m > 0 else self.invert(h)

    @lru_cache(maxsize=None)
    def axis_top(self, h):
        vals = [v[0] for v in self.support(h) + self.support(self.invert(h))]
        return max(vals, default=0) + 1

    @lru_cache(maxsize=None)
    def axis_vertex(self, h, j):
        """Vertex of the axis of the hyperbolic h (m > 0) at height j."""
        M = self.axis_top(h)
        if j >= M:
            return (j, ())
        hinv = self.invert(h)
        v = (M, ())
        while height(v) > j:
            v = self.eval(hinv, v)
        return anc(v, j)

    @lru_cache(maxsize=None)
    def axis_distance(self, h, v):
        t = 0
        while anc(v, height(v) + t) != self.axis_vertex(h, height(v) + t):
            t += 1
        return t

    @lru_cache(maxsize=None)
    def orbit_point(self, h, v, n):
        if n == 0:
            return v
        if n > 0:
            return self.eval(h, self.orbit_point(h, v, n - 1))
        return self.eval(self.invert(h), self.orbit_point(h, v, n + 1))

    def fixes(self, g, v):
        return self.eval(g, v) == v


# component descriptors -----------------------------------------------------

KINDS = ("trivial", "fix", "elliptic", "whole")


@dataclass(frozen=True, eq=False)
class CompD:
    """One component's closed subgroup.

    kind "fix" is the fixator of cl(hull(F u orbits)), where the orbit set
    is {h^n v : (v, dir) in pieces} with dir "up" (n >= 0), "down"
    (n <= 0) or "all", and h translates toward the marked end.
    "elliptic" is the kernel of the translation length, "trivial" and
    "whole" are what they say.
    """

    q: int
    kind: str
    F: frozenset = frozenset()
    h: CElem | None = None
    pieces: frozenset = frozenset()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def is_compact(self):
        return self.kind in ("trivial", "fix")

    @property
    def is_open(self):
        if self.kind in ("elliptic", "whole"):
            return True
        return self.kind == "fix" and self.h is None

    @property
    def key(self):
        if "key" not in self._cache:
            self._cache["key"] = canonical_key(self)
        return self._cache["key"]

    def __eq__(self, other):
        return isinstance(other, CompD) and self.q == other.q and self.key == other.key

    def __hash__(self):
        return hash((self.q, self.key))


@lru_cache(maxsize=None)
def arith(q):
    return Arith(q)


def make_fix(q, F=(), h=None, pieces=()):
    """Normalize orbit data so that h moves toward the marked end."""
    A = arith(q)
    pieces = frozenset(pieces)
    if h is not None and pieces:
        if h.m == 0:
            raise ValueError("orbit pieces need a hyperbolic element")
        if h.m < 0:
            flip = {"up": "down", "down": "up", "all": "all"}
            h = A.invert(h)
            pieces = frozenset((v, flip[d]) for v, d in pieces)
        if not h.port:
            # a full orbit of a pure translation: pick the point with level in [0, m)
            pieces = frozenset(((v[0] % h.m, v[1]), d) if d == "all" else (v, d) for v, d in pieces)
    else:
        h, pieces = None, frozenset()
    return CompD(q, "fix", frozenset(F), h, pieces)


def hull_level(D, j):
    c = D._cache.setdefault("hull", {})
    if j in c:
        return c[j]
    A = arith(D.q)
    S = {anc(f, j) for f in D.F if height(f) <= j}
    if D.h is not None:
        h, m = D.h, D.h.m
        for v, d in D.pieces:
            hv = height(v)
            nmax = (j - hv) // m
            hi = min(0, nmax) if d == "down" else nmax
            if d == "up" and hi < 0:
                continue
            # for n <= n0 the ancestor at height j is the axis vertex
            n0 = (j - hv - A.axis_distance(h, v)) // m
            if d == "up":
                if min(n0, hi) >= 0:
                    S.add(A.axis_vertex(h, j))
                start = max(0, n0 + 1)
            else:
                S.add(A.axis_vertex(h, j))
                start = n0 + 1
            for n in range(start, hi + 1):
                S.add(anc(A.orbit_point(h, v, n), j))
    out = frozenset(S)
    c[j] = out
    return out


def level(D, j):
    """Vertices of the closed fixed set at height j."""
    c = D._cache.setdefault("cl", {})
    if j in c:
        return c[j]
    A = arith(D.q)
    H = hull_level(D, j)
    out = set(H)
    for u in hull_level(D, j + 1):
        kids = A.children(u)
        inside = [k for k in kids if k in H]
        if len(inside) == D.q - 1:
            out.update(k for k in kids if k not in H)
    out = frozenset(out)
    c[j] = out
    return out


def contains_vertex(D, v):
    return v in level(D, height(v))


def bounds(D):
    """(lo, hi, up_period, lower) with lower = None or (T, step, R)."""
    if "bounds" in D._cache:
        return D._cache["bounds"]
    A = arith(D.q)
    pts = list(D.F)
    lower = None
    P0 = 1
    if D.h is not None:
        h = D.h
        m = h.m
        hinv = A.invert(h)
        supp = A.support(h) + A.support(hinv)
        pts += supp + [(A.axis_top(h), ())]
        top = A.top(h.port)
        top = top if top is not None else A.axis_top(h)
        R = 0
        for v, d in D.pieces:
            pts.append(v)
            R = max(R, A.axis_distance(h, v))
            if d in ("up", "all"):
                P0 = m
                n = 0
                w = v
                while w[0] <= top + 1:
                    n += 1
                    w = A.orbit_point(h, v, n)
                    pts.append(w)
            if d in ("down", "all"):
                lower = (hinv, m, R + 2)
        for v, d in D.pieces:
            if d in ("down", "all"):
                n, w = 0, v
                floor = min(height(x) for x in supp) if supp else height(v)
                while height(w) >= floor - 1 and n < 64:
                    n -= 1
                    w = A.orbit_point(h, v, n)
                    pts.append(w)
    if not pts:
        pts = [(0, ())]
    hi = max(v[0] for v in pts) + P0 + 2
    lo = min(height(v) for v in pts) - 2
    if lower is not None:
        lo -= lower[2] + lower[1] + 2
    res = (lo, hi, P0, lower)
    D._cache["bounds"] = res
    return res


def _shift_set(S, p):
    return frozenset(shift(v, p) for v in S)


def _rel_path(u, v):
    """Labels from u down to v (v below u)."""
    path = []
    while v != u:
        l, s = v
        path.append(1 if not s else s[-1])
        v = parent(v)
    return tuple(reversed(path))


def _axis_at(D, j):
    """The unique vertex at height j with descendants in the set at every lower level."""
    return arith(D.q).axis_vertex(D.h, j)


def canonical_key(D):
    if D.kind != "fix":
        return (D.kind,)
    lo, hi, P0, lower = bounds(D)
    floor = lo if lower is None else lo - lower[1] - lower[2] - 2
    # upper periodicity under tau^p, from the lowest onset c_hi
    up = None
    for p in divisors(P0):
        if all(level(D, j + p) == _shift_set(level(D, j), p) for j in range(hi, hi + P0)):
            c = hi
            while c - 1 >= floor and level(D, c - 1 + p) == _shift_set(level(D, c - 1), p):
                c -= 1
            up = (p, c)
            break
    if up is None:  # cannot happen for well-formed data
        up = (P0, hi)
    p, c_hi = up
    if lower is None:
        start = lo
        while start < c_hi and not level(D, start):
            start += 1
        return ("fix", up, ("empty", start), frozenset(v for j in range(start, c_hi + p) for v in level(D, j)))
    if c_hi <= floor:
        # tau^p-periodic at every height
        return ("fix", ("bi", p), frozenset(v for j in range(0, p) for v in level(D, j)))
    T, m, _ = lower
    # smallest R with every deep level inside the subtree R above the axis
    R = 0
    for j in range(lo - m, lo + 1):
        for v in level(D, j):
            while not is_below(v, _axis_at(D, j + R)):
                R += 1

    def sig(j):
        a = _axis_at(D, j + R)
        return (_rel_path(_axis_at(D, j + 1), _axis_at(D, j)),
                frozenset(_rel_path(a, v) for v in level(D, j)))

    pl = next((d for d in divisors(m)
               if all(sig(j) == sig(j - d) for j in range(lo - m + 1, lo + 1))), m)
    c = lo
    cap = c_hi + p
    while c + 1 <= cap and sig(c + 1) == sig(c + 1 - pl):
        c += 1
    window = range(min(c - pl + 1, c_hi), max(c_hi + p, c + 1))
    trace = frozenset(v for j in window for v in level(D, j))
    return ("fix", up, ("periodic", pl, c, R), trace)


def window_for(*Ds):
    lo = min(bounds(D)[0] for D in Ds)
    hi = max(bounds(D)[1] for D in Ds)
    L = 1
    step = 1
    R = 0
    for D in Ds:
        L = L * D_period(D) // gcd(L, D_period(D))
        low = bounds(D)[3]
        if low is not None:
            step = step * low[1] // gcd(step, low[1])
            R = max(R, low[2])
    has_lower = any(bounds(D)[3] is not None for D in Ds)
    bottom = lo - (step + R + 2 if has_lower else 0)
    return bottom, hi + L, has_lower


def D_period(D):
    return bounds(D)[2]


def set_contains(big, small):
    """small subset of big, as closed fixed sets."""
    bottom, top, _ = window_for(big, small)
    return all(level(small, j) <= level(big, j) for j in range(bottom, top + 1))


def set_difference_index(small, big):
    """|Fix(small) : Fix(big)| for closed sets small inside big; None when infinite."""
    A = arith(small.q)
    bottom, top, has_lower = window_for(small, big)
    L = D_period(small) * D_period(big) // gcd(D_period(small), D_period(big))
    diff = {j: level(big, j) - level(small, j) for j in range(bottom, top + 1)}
    if any(diff[j] for j in range(top - L + 1, top + 1)):
        return None
    if has_lower:
        steps = [bounds(D)[3][1] for D in (small, big) if bounds(D)[3] is not None]
        if any(diff[j] for j in range(bottom, bottom + max(steps) + 1)):
            return None
    index = 1
    for j in range(top, bottom - 1, -1):
        if not diff[j]:
            continue
        cur = set(level(small, j))
        for w in sorted(diff[j]):
            u = parent(w)
            free = sum(1 for k in A.children(u) if k not in cur)
            index *= free
            cur.add(w)
    return index
