"""Built-in fixtures: model specifications, queries, expected values and brute-force oracles.

Expected values come in three kinds (the `origin` of an Expect):
  oracle     - computed by the fixture's brute-force oracle before comparison
  reference  - a value stated for the example in the literature
  definition - immediate from the definitions
Oracles never call the main computation path; they enumerate cosets,
windows, vertex balls or subspace lattices directly and only translate
their answer into the model's notation at the end.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .core import OracleTooLarge, TdlcError
from .models import build_model
from .models import linalg as la
from .models import tree_arith as ta
from .queries import Context, default_names, descriptor, element, run_query

ORACLE_LIMIT = 1 << 16


@dataclass(frozen=True)
class Query:
    id: str
    op: str
    args: dict


@dataclass(frozen=True)
class Named:
    """A descriptor named as in scenario files ('whole', 'trivial', 'basis:k'), printed by the model."""

    text: str


@dataclass(frozen=True)
class Word:
    """An element given as a word in the model's default generator names, printed by the model."""

    text: str


@dataclass(frozen=True)
class Expect:
    query: str
    value: object = None
    field: str | None = None
    oracle: str | None = None
    origin: str = "oracle"


@dataclass
class Fixture:
    id: str
    model_spec: dict
    queries: list
    expected: list
    oracle: object = None
    description: str = ""
    oracle_note: str = ""

    def model(self):
        return build_model(self.model_spec)


# ---------------------------------------------------------------- oracles

def _residue_classes(p, x, y, reps):
    """Number of classes of p^x Z_p modulo p^y Z_p seen among reps multiples."""
    return len({(p**x * c) % p**y for c in range(reps)})


def _diag_index(p, exps, levels, sign=1):
    """|aU : aU cap U| for U = prod p^a_i Z_p and a = diag(p^e_i), by residue enumeration."""
    off = max(abs(e) for e in exps) + 1
    total = 1
    for a, e in zip(levels, exps):
        e *= sign
        x, y = a + e + off, max(a, a + e) + off
        total *= _residue_classes(p, x, y, p ** (y - x + 4))
    return total


def padic_scale_oracle(p, exps, depth=6):
    """Minimum of the displacement index over U = prod p^a_i Z_p, 0 <= a_i <= 3, plus the table."""
    n = len(exps)
    if p ** (depth * n) > ORACLE_LIMIT * 64:
        raise OracleTooLarge("coset enumeration too large")
    table = {}
    for levels in itertools.product(range(4), repeat=n):
        table[levels] = (_diag_index(p, exps, levels, 1), _diag_index(p, exps, levels, -1))
    return min(v[0] for v in table.values()), min(v[1] for v in table.values()), table


def _oracle_padic_t():
    s, s_inv, table = padic_scale_oracle(2, [1])
    return {"s": s, "s_inv": s_inv, "table_size": len(table)}


def _oracle_linear_diag():
    s, s_inv, _ = padic_scale_oracle(2, [-2, 2])
    return {"s": s, "s_inv": s_inv}


def _rank(rows):
    """Rank over Q by fraction elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def _oracle_rank2():
    # generators diag(2,1), diag(1,2): per-coordinate displacement vectors
    vecs = []
    for exps in ([1, 0], [0, 1]):
        vecs.append([(_diag_index(2, [e], [0], -1) - 1) for e in exps])
    return {"rank": _rank(vecs)}


def _oracle_wreath():
    # the commutator of (t,1) with the swap acts as diag(2, 1/2)
    exps = [1, -1]
    s, s_inv, _ = padic_scale_oracle(2, exps)
    off = 3
    combined = 1
    for e in exps:
        # |U + cU : U cap cU| per coordinate, U = Z_2
        lo, hi = min(0, e) + off, max(0, e) + off
        combined *= _residue_classes(2, lo, hi, 2 ** (hi - lo + 4))
    return {"s": s, "s_inv": s_inv, "combined": combined}


class CoordSet:
    """A subset of Z that is constant outside [-R, R]; flags give the two tails."""

    R = 40

    def __init__(self, cells, left=False, right=False):
        self.cells = frozenset(c for c in cells if -self.R <= c <= self.R)
        self.left, self.right = left, right

    def has(self, i):
        if i < -self.R:
            return self.left
        if i > self.R:
            return self.right
        return i in self.cells

    def shift(self, n):
        return CoordSet([i for i in range(-self.R, self.R + 1) if self.has(i - n)], self.left, self.right)

    def union(self, o):
        return CoordSet([i for i in range(-self.R, self.R + 1) if self.has(i) or o.has(i)],
                        self.left or o.left, self.right or o.right)

    def meet(self, o):
        return CoordSet([i for i in range(-self.R, self.R + 1) if self.has(i) and o.has(i)],
                        self.left and o.left, self.right and o.right)

    def __le__(self, o):
        return all(o.has(i) for i in range(-self.R - 1, self.R + 2) if self.has(i))

    def __eq__(self, o):
        return self <= o and o <= self

    __hash__ = None


def _tidy_window(Z, steps=24):
    """Tidiness of the subgroup vanishing on Z for the shift (conjugation moves Z to Z + 1)."""
    Zp, Zm = Z, Z
    for n in range(1, steps + 1):
        Zp = Zp.union(Z.shift(n))
        Zm = Zm.union(Z.shift(-n))
    above = Z == Zp.meet(Zm)
    Zpp = Zp
    for m in range(1, steps + 1):
        Zpp = Zpp.meet(Zp.shift(m))
    return above and Z <= Zpp


def shift_nub_oracle(one_sided, window=8, span=3):
    """nub(sigma) on a window: coordinates left free by every tidy window subgroup."""
    cands = []
    offsets = range(-window, window + 2)
    for a in offsets if one_sided else [None]:
        base = range(a, a + span) if one_sided else range(-span, span + 1)
        for r in range(len(base) + 1):
            for A in itertools.combinations(base, r):
                if one_sided:
                    Z = CoordSet(list(range(-CoordSet.R, a)) + list(A), left=True)
                else:
                    Z = CoordSet(A)
                cands.append(Z)
    tidy_sets = [Z for Z in cands if _tidy_window(Z)]
    fixed = CoordSet([])
    for Z in tidy_sets:
        fixed = fixed.union(Z)
    free = [i for i in range(-window, window + 1) if not fixed.has(i)]
    return free, len(tidy_sets)


def shift_scale_oracle(one_sided, n):
    """|sigma^n U sigma^-n : . cap U| for U = U_0, counted by coordinates entering the window."""
    U = CoordSet(range(-CoordSet.R, 0), left=True) if one_sided else CoordSet([])
    C = U.shift(n)
    # coordinates free in C but constrained in U (order 2 each)
    extra = [i for i in range(-20, 21) if U.has(i) and not C.has(i)]
    return 2 ** len(extra)


def _oracle_shift(one_sided, window=8):
    def run():
        free, count = shift_nub_oracle(one_sided, window)
        M = build_model({"family": "Shift", "params": {"F": "C2", "variant":
                                                        "one-sided-restricted" if one_sided else "two-sided-full"}})
        if len(free) == 2 * window + 1:
            nub = M.format_descriptor(M.whole())
        elif not free:
            nub = M.format_descriptor(M.trivial())
        else:
            nub = f"free on {free}"
        return {"s": shift_scale_oracle(one_sided, 1), "s_inv": shift_scale_oracle(one_sided, -1),
                "nub": nub, "nub_free": free, "tidy_found": count}
    return run


def tree_orbit_oracle(M, g, comp=0, radius=6):
    """|Fix(w) : Fix(w) cap Fix(x)| for w = g(x), x on the axis: the Fix(w)-orbit of x in a vertex ball.

    The stabilizer of w in the end-fixing group moves u onto x exactly when u and x have the same
    distance to w and the same height (horofunction), both read off the explicit ball.
    """
    A = M.A
    x = (0, ())
    _, w = M.act(g, comp, x)
    top = (radius + 2 + abs(w[0]), ())
    # breadth-first ball around w, grown by children and parents
    dist = {w: 0}
    queue = deque([w])
    while queue:
        v = queue.popleft()
        if dist[v] == radius:
            continue
        for u in [ta.child(v, a) for a in range(1, M.q + 1)] + [ta.parent(v)]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
        if len(dist) > ORACLE_LIMIT:
            raise OracleTooLarge("vertex ball too large")
    # horofunction: distance to a far spine vertex, found by walking parents
    def up_dist(v):
        d = 0
        while v != top and ta.height(v) < ta.height(top):
            v = ta.parent(v)
            d += 1
        return d if v == top else None
    hx = up_dist(x)
    orbit = [u for u in dist if dist[u] == dist.get(x) and up_dist(u) == hx]
    return len(orbit)


def _oracle_tree():
    M = build_model({"family": "TreeProduct", "params": {"q": 2}})
    t = M.tau(0)
    return {"s": tree_orbit_oracle(M, t), "s2": tree_orbit_oracle(M, M.power(t, 2)),
            "s_inv": tree_orbit_oracle(M, M.invert(t))}


def _ilog(n, base):
    e = 0
    while n > 1:
        if n % base:
            raise ValueError(f"{n} is not a power of {base}")
        n //= base
        e += 1
    return e


def _oracle_desk():
    M = build_model({"family": "TreeProduct", "params": {"q": 3, "components": 2}})
    vecs, out = [], {}
    for i in range(2):
        t = M.tau(i)
        row = []
        for j in range(2):
            s = tree_orbit_oracle(M, t, comp=j)
            row.append(s)
        out[f"s{i + 1}"] = row[0] * row[1]
        vecs.append([_ilog(v, M.q) for v in row])
    out["rank"] = _rank(vecs)
    return out


def _subspaces(n):
    """Every subspace of F_2^n, grown one vector at a time from {0}."""
    seen = {frozenset({0})}
    frontier = list(seen)
    while frontier:
        nxt = []
        for S in frontier:
            for v in range(1, 1 << n):
                if v in S:
                    continue
                T = S | {u ^ v for u in S}
                if T not in seen:
                    seen.add(T)
                    nxt.append(T)
        frontier = nxt
    return seen


def badnub_oracle(depths=(2, 3), cyclic_depths=2):
    """Invariant-subgroup lattices of V_d (+) W for the family of all functionals V_d -> W.

    Bit j (j < d) is the coordinate t^j of V, bit d is W.  An open subgroup at depth d
    is one containing the deepest coordinate t^(d-1); Res at depth d is the meet of the
    invariant open ones.  For a single functional the meet is the invariant
    closure of the deepest coordinate.  The answers at several depths are compared in the common
    coordinates (V levels, W).
    """
    def act(v, h, d):
        # v -> v + h(v) w with h the functional given by mask h on V
        hv = bin(v & h & ((1 << d) - 1)).count("1") % 2
        return v ^ (hv << d)

    def invariant(S, hs, d):
        return all(act(v, h, d) in S for v in S for h in hs)

    def res_at(d, hs, must):
        R = None
        for S in _subspaces(d + 1):
            if must in S and invariant(S, hs, d):
                R = S if R is None else R & S
        return R

    def common(S, d):
        # (V bits, W bit) in the common coordinates
        return frozenset((v & ((1 << d) - 1), v >> d) for v in S)

    full = None
    for d in depths:
        hs = range(1 << d)
        S = common(res_at(d, hs, 1 << (d - 1)), d)
        full = S if full is None else full & S
    # second stage: inside the residual, every subgroup is open (it is finite)
    second = None
    W_only = frozenset(x for x in full)
    for r in range(len(W_only) + 1):
        for sub in itertools.combinations(sorted(W_only), r):
            S = frozenset(sub) | {(0, 0)}
            closed = all(((a[0] ^ b[0]), a[1] ^ b[1]) in S for a in S for b in S)
            if closed:
                second = S if second is None else second & S
    def closure(v, hs, d):
        # smallest invariant subspace containing v: the meet of all of them
        S = frozenset({0, v})
        while True:
            T = S | {act(u, h, d) for u in S for h in hs}
            T = frozenset(a ^ b for a in T for b in T)
            if T == S:
                return S
            S = T

    cyclic = {}
    for j in range(4):
        R = None
        for d in range(j + 2, j + 2 + cyclic_depths):
            S = common(closure(1 << (d - 1), [1 << j], d), d)
            R = S if R is None else R & S
        cyclic[f"h{j}"] = R
    return full, second, cyclic


def _fdesc_text(S, depth=4):
    from .models.finite_level import FDesc

    n = depth + 1
    rows = []
    for vbits, wbit in S:
        v = [(vbits >> i) & 1 for i in range(depth)] + [wbit]
        rows.append(tuple(v))
    rows = la.rref([r for r in rows if any(r)], 2) if any(any(r) for r in rows) else ()
    return build_model({"family": "FiniteLevel", "params": {"preset": "badnub"}}).format_descriptor(
        FDesc(rows, False))


def _oracle_badnub():
    full, second, cyclic = badnub_oracle()
    whole = build_model({"family": "FiniteLevel", "params": {"preset": "badnub"}})
    return {"chain": [whole.format_descriptor(whole.whole()), _fdesc_text(full), _fdesc_text(second)],
            "res": _fdesc_text(full), "nub": _fdesc_text(full),
            **{f"nub_{j}": _fdesc_text(S) for j, S in cyclic.items()}}


# ---------------------------------------------------------------- fixtures

def _fixtures():
    PT = {"family": "PAdicToral", "params": {"p": 2, "n": 1, "actors": {"t": {"exps": [1]}}}}
    LIN = {"family": "PAdicToral", "params": {"p": 2, "n": 2, "actors": {"g": {"exps": [-2, 2]}}}}
    B = {"family": "PAdicToral", "params": {"p": 2, "n": 2,
                                            "actors": {"a": {"exps": [1, 0]}, "b": {"exps": [0, 1]}}}}
    WR = {"family": "PAdicToral", "params": {"p": 2, "n": 2,
                                             "actors": {"a": {"exps": [1, 0]}, "pi": {"perm": [1, 0]}}}}
    S1 = {"family": "Shift", "params": {"F": "C2", "variant": "one-sided-restricted"}}
    S2 = {"family": "Shift", "params": {"F": "C2", "variant": "two-sided-full"}}
    BN = {"family": "FiniteLevel", "params": {"preset": "badnub", "p": 2, "depth": 4}}
    DESK = {"family": "TreeProduct", "params": {"q": 3, "components": 2, "swap": True}}
    TREE = {"family": "TreeProduct", "params": {"q": 2}}
    Q = Query
    E = Expect
    hs = "h0,h1,h2,h3"
    return [
        Fixture("padic-t", PT, [
            Q("s", "scale", {"g": "t"}), Q("s_inv", "scale", {"g": "t^-1"}),
            Q("core", "tits_core", {"gens": "t"}), Q("res", "residual", {"gens": "t"}),
            Q("chain", "res_chain", {"gens": "t"}), Q("env", "envelope", {"gens": "t"}),
            Q("prox", "proximal", {"gens": "t", "K": "basis:0"}), Q("pset", "p_set", {"g": "t"}),
        ], [
            E("s", oracle="s"), E("s_inv", oracle="s_inv"),
            E("core", Named("whole"), origin="reference"), E("res", Named("whole"), origin="reference"),
            E("chain", [Named("whole")], origin="reference"),
            E("env", Named("whole"), field="E", origin="reference"),
            E("env", Named("trivial"), field="U_zero", origin="reference"),
            E("prox", Word("(1; 0)"), field="x", origin="reference"),
            E("prox", Named("trivial"), field="L", origin="reference"),
            E("pset", "false", origin="reference"),
        ], _oracle_padic_t, "Q_2 semidirect <t>, t acting by multiplication by 2",
            "residue classes of Z/2^k, k <= 6, over U = 2^a Z_2"),
        Fixture("padic-linear-diag", LIN, [
            Q("s", "scale", {"g": "g"}), Q("s_inv", "scale", {"g": "g^-1"}),
            Q("flat", "flat", {"gens": "g"}),
        ], [
            E("s", oracle="s"), E("s_inv", oracle="s_inv"), E("flat", True, field="flat", origin="definition"),
        ], _oracle_linear_diag, "Q_2^2 with the diagonal element of exponents (-2, 2)",
            "residue classes per coordinate"),
        Fixture("padic-rank2", B, [Q("flat", "flat", {"gens": "a,b"}), Q("res", "residual", {"gens": "a,b"})], [
            E("flat", True, field="flat", origin="definition"), E("flat", field="rank", oracle="rank"),
            E("res", Named("whole"), origin="reference"),
        ], _oracle_rank2, "B = <(t,1),(1,t)> on Q_2^2", "rank of per-coordinate displacement vectors"),
        Fixture("shift-onesided", S1, [
            Q("s", "scale", {"g": "s"}), Q("s_inv", "scale", {"g": "s^-1"}),
            Q("con", "contraction", {"g": "s"}), Q("nub", "nub", {"g": "s"}),
            Q("res", "residual", {"gens": "s"}), Q("prox", "proximal", {"gens": "s", "K": "basis:0"}),
            Q("dist", "distality", {"gens": "s", "K": "whole"}),
        ], [
            E("s", oracle="s"), E("s_inv", oracle="s_inv"),
            E("con", Named("whole"), field="con", origin="reference"),
            E("con", "true", field="closed", origin="reference"),
            E("nub", oracle="nub"), E("res", Named("whole"), origin="reference"),
            E("prox", Word("{0:a}"), field="x", origin="reference"), E("dist", "b", origin="reference"),
        ], _oracle_shift(True), "restricted one-sided shift S semidirect <sigma>, F = C_2",
            "tidy subgroups among window subgroups, coordinates |i| <= 8"),
        Fixture("shift-twosided", S2, [
            Q("s", "scale", {"g": "s"}), Q("nub", "nub", {"g": "s"}), Q("nub8", "nub", {"g": "s", "k": 8}),
            Q("con", "contraction", {"g": "s"}),
            Q("dec", "closure_decomposition", {"g": "s", "k": 3}), Q("res", "residual", {"gens": "s"}),
            Q("rnub", "rnub", {"gens": "s"}),
        ], [
            E("s", oracle="s"), E("nub", oracle="nub"), E("nub8", oracle="nub"),
            E("con", "false", field="closed", origin="reference"), E("dec", "true", origin="reference"),
            E("res", Named("whole"), origin="reference"), E("rnub", Named("whole"), origin="reference"),
        ], _oracle_shift(False), "full two-sided shift F^Z semidirect <sigma>", "window tidy enumeration"),
        Fixture("badnub-tower", BN, [
            Q("chain", "res_chain", {"gens": hs}), Q("res", "residual", {"gens": hs}),
            Q("nub", "nub_flat", {"gens": hs}),
            *[Q(f"nub_h{j}", "nub", {"g": f"h{j}"}) for j in range(4)],
            Q("dist", "distality", {"gens": hs}), Q("rnub", "rnub", {"gens": hs}),
        ], [
            E("chain", oracle="chain"), E("res", oracle="res"), E("nub", field="nub", oracle="nub"),
            *[E(f"nub_h{j}", oracle=f"nub_h{j}") for j in range(4)],
            E("dist", "a", origin="reference"), E("rnub", oracle="res"),
        ], _oracle_badnub, "V = F_2[[t]] (+) W with H = Hom(V, W), seen to depth 4",
            "invariant-subspace lattices at depths 2 and 3; cyclic nubs by invariant closure at two depths"),
        Fixture("virtually-flat-wreath", WR, [
            Q("flat", "flat", {"gens": "a,pi"}), Q("sub", "flat", {"gens": "a,pi*a*pi"}),
        ], [
            E("flat", False, field="flat", origin="reference"),
            E("flat", oracle="s", field="scale"), E("flat", oracle="s_inv", field="inverse_scale"),
            E("flat", oracle="combined", field="combined"),
            E("sub", True, field="flat", origin="reference"), E("sub", 2, field="rank", origin="reference"),
        ], _oracle_wreath, "<t> wreath C_2 acting on Q_2^2", "residue classes of the commutator"),
        Fixture("neretin-desk", DESK, [
            Q("flat", "flat", {"gens": "tau1,tau2"}),
            Q("nub", "nub_flat", {"gens": "tau1,tau2", "depth": 5}),
            Q("env", "envelope", {"gens": "tau1,tau2", "samples": 200}),
            Q("s1", "scale", {"g": "tau1"}), Q("s2", "scale", {"g": "tau2"}),
        ], [
            E("flat", True, field="flat", origin="reference"), E("flat", field="rank", oracle="rank"),
            E("nub", [Word("tau1"), Word("tau2")], field="factors", origin="reference"),
            E("env", "true", field="cocompact", origin="reference"),
            E("s1", oracle="s1"), E("s2", oracle="s2"),
        ], _oracle_desk, "two trees of degree 4 with marked ends, components swappable (q = 3, n = 1)",
            "explicit vertex balls of radius 6 around the image of a spine vertex"),
        Fixture("tree-hyperbolic", TREE, [
            Q("s", "scale", {"g": "tau"}), Q("s2", "scale", {"g": "tau^2"}), Q("s_inv", "scale", {"g": "tau^-1"}),
            Q("nub", "nub", {"g": "tau"}), Q("pset", "p_set", {"g": "tau"}),
            Q("core_ell", "tits_core", {"gens": ["(perm=(); C1: portrait{0:21})"]}),
        ], [
            E("s", oracle="s"), E("s2", oracle="s2"), E("s_inv", oracle="s_inv"),
            E("nub", Named("axis"), origin="reference"),
            E("pset", "false", origin="reference"),
            E("core_ell", Named("trivial"), origin="definition"),
        ], _oracle_tree, "degree-3 tree with a marked end and the translation tau of length 1",
            "explicit vertex balls of radius 6"),
    ]


def list_fixtures():
    return _fixtures()


def get_fixture(fid):
    for f in _fixtures():
        if f.id == fid:
            return f
    raise KeyError(fid)


def run_oracle(f: Fixture):
    if f.oracle is None:
        raise TdlcError(f"fixture {f.id} has no oracle")
    return f.oracle()


def _pick(value, fld):
    if fld is None:
        return value
    if isinstance(value, dict):
        return value.get(fld)
    return None


@dataclass
class Check:
    expect: Expect
    expected: object
    actual: object
    ok: bool


@dataclass
class FixtureRun:
    fixture: Fixture
    results: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    oracle: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.errors and all(c.ok for c in self.checks)


def _resolve(M, v):
    if isinstance(v, Named):
        return M.format_descriptor(descriptor(M, v.text))
    if isinstance(v, Word):
        return M.format_element(element(M, v.text, default_names(M)))
    if isinstance(v, list):
        return [_resolve(M, x) for x in v]
    return v


def run_fixture(f: Fixture, ctx: Context | None = None) -> FixtureRun:
    M = f.model()
    ctx = ctx or Context()
    if not ctx.names:
        ctx = Context(ctx.k, ctx.budget, ctx.seed, default_names(M))
    run = FixtureRun(f)
    if f.oracle is not None:
        run.oracle = run_oracle(f)
    for q in f.queries:
        try:
            run.results[q.id] = run_query(M, q.op, q.args, ctx)
        except TdlcError as exc:
            run.errors[q.id] = exc
    for e in f.expected:
        expected = run.oracle.get(e.oracle) if e.oracle else e.value
        expected = _resolve(M, expected)
        res = run.results.get(e.query)
        actual = None
        if res is not None:
            actual = _pick(res.value, e.field)
            if actual is None and isinstance(res.witness, dict):
                actual = res.witness.get(e.field)
        run.checks.append(Check(e, expected, actual, res is not None and actual == expected))
    return run
