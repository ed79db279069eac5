"""Property suites run by `tdlc verify`; each property walks catalog elements with a seeded RNG."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import contraction, flat, residuals, tidy
from .core import Grade, NotRepresentable, TdlcError
from .models import build_model
from .queries import default_names

SUITES = ("tidy", "contraction", "flat", "residual")


@dataclass
class PropertyResult:
    suite: str
    name: str
    ok: bool
    checked: int
    witness: dict = field(default_factory=dict)


def _m(spec):
    return build_model(spec)


_SPECS = {
    "padic-t": {"family": "PAdicToral", "params": {"p": 2, "n": 1, "actors": {"t": {"exps": [1]}}}},
    "padic-linear-diag": {"family": "PAdicToral", "params": {"p": 2, "n": 2, "actors": {"g": {"exps": [-2, 2]}}}},
    "padic-rank2": {"family": "PAdicToral", "params": {"p": 2, "n": 2, "actors": {
        "a": {"exps": [1, 0]}, "b": {"exps": [0, 1]}}}},
    "virtually-flat-wreath": {"family": "PAdicToral", "params": {"p": 2, "n": 2, "actors": {
        "a": {"exps": [1, 0]}, "pi": {"perm": [1, 0]}}}},
    "shift-onesided": {"family": "Shift", "params": {"F": "C2", "variant": "one-sided-restricted"}},
    "shift-twosided": {"family": "Shift", "params": {"F": "C2", "variant": "two-sided-full"}},
    "badnub-tower": {"family": "FiniteLevel", "params": {"preset": "badnub"}},
    "neretin-desk": {"family": "TreeProduct", "params": {"q": 3, "components": 2, "swap": True}},
    "tree-hyperbolic": {"family": "TreeProduct", "params": {"q": 2}},
}

# words per fixture; together these are the catalog elements the suites walk over
_WORDS = {
    "padic-t": ["t", "t^-1", "t^2"],
    "padic-linear-diag": ["g", "g^-1"],
    "padic-rank2": ["a", "b", "a*b", "a*b^-1", "a^2*b^-1"],
    "virtually-flat-wreath": ["a", "pi*a*pi", "a*pi*a^-1*pi", "a*pi"],
    "shift-onesided": ["s", "s^-1"],
    "shift-twosided": ["s", "s^-1"],
    "badnub-tower": ["h0", "h2"],
    "neretin-desk": ["tau1", "tau2", "tau1*tau2", "tau1*tau2^-1"],
    "tree-hyperbolic": ["tau", "tau^-1", "tau^2"],
}

# flat groups of the catalog (generator words)
FLAT_GROUPS = {
    "padic-t": ["t"],
    "padic-linear-diag": ["g"],
    "padic-rank2": ["a", "b"],
    "shift-onesided": ["s"],
    "shift-twosided": ["s"],
    "badnub-tower": ["h0", "h1", "h2", "h3"],
    "neretin-desk": ["tau1", "tau2"],
    "tree-hyperbolic": ["tau"],
}

# (fixture, group, finite-index subgroup)
COCOMPACT_PAIRS = [
    ("padic-t", ["t"], ["t^2"]),
    ("padic-rank2", ["a", "b"], ["a^2", "b"]),
    ("neretin-desk", ["tau1", "tau2"], ["tau1^2", "tau2"]),
]


def model(fid):
    return _m(_SPECS[fid])


def _parse(M, w):
    from .queries import element
    return element(M, w, default_names(M))


def catalog_elements():
    out = []
    for fid, words in _WORDS.items():
        M = model(fid)
        for w in words:
            out.append((fid, w, M, _parse(M, w)))
    return out


def _isotropic(M, g, k=4):
    return not contraction.is_anisotropic(M, g, k=k).is_true


def _tidy_U(M, g, k=4):
    return tidy.find_tidy(M, g, k=k).U


# ---------------------------------------------------------------- tidy suite

def prop_powers_law(rng, k=4):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        s = tidy.scale(M, g, k=k).value
        for p in (2, 3):
            n += 1
            sp = tidy.scale(M, M.power(g, p), k=k).value
            if sp != s**p:
                bad = {"element": f"{fid}:{w}", "n": p, "s": s, "s_n": sp}
    return PropertyResult("tidy", "powers law", not bad, n, bad)


def _scale_of(M, y, k, full):
    """The full multi-method scale when full is set, otherwise the closed form when there is one."""
    if not full:
        cf = M.cf_scale(y)
        if cf is not None:
            return cf
    return tidy.scale(M, y, k=k).value


def prop_conjugation_invariance(rng, k=4, samples=10, full=3):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        s = tidy.scale(M, g, k=k).value
        gens = list(default_names(M).values())
        for i in range(samples):
            h = M.identity()
            for _ in range(rng.randint(1, 3)):
                h = M.compose(h, rng.choice(gens + [M.sample(rng, M.basis(0))]))
            n += 1
            sh = _scale_of(M, M.conj_element(h, g), k, i < full)
            if sh != s:
                bad = {"element": f"{fid}:{w}", "conjugator": M.format_element(h), "scale": sh}
    return PropertyResult("tidy", "conjugation invariance", not bad, n, bad)


def prop_double_coset(rng, k=4, samples=50, full=5):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        U = _tidy_U(M, g, k)
        s = tidy.scale(M, g, k=k).value
        for i in range(samples):
            u, v = M.sample(rng, U), M.sample(rng, U)
            y = M.compose(M.compose(u, g), v)
            n += 1
            if tidy.displacement(M, y, U) != s or _scale_of(M, y, k, i < full) != s:
                bad = {"element": f"{fid}:{w}", "perturbed": M.format_element(y)}
                break
    return PropertyResult("tidy", "double-coset stability", not bad, n, bad)


def prop_tidy_criterion(rng, k=4):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        s = tidy.scale(M, g, k=k).value
        for j in range(k + 1):
            U = M.basis(j)
            rep = tidy.check_tidy(M, g, U, k)
            if rep.above.is_unknown or rep.below.is_unknown:
                continue
            n += 1
            if rep.tidy != (tidy.displacement(M, g, U) == s):
                bad = {"element": f"{fid}:{w}", "level": j, "tidy": rep.tidy,
                       "displacement": tidy.displacement(M, g, U), "scale": s}
    return PropertyResult("tidy", "tidy criterion", not bad, n, bad)


def prop_tidy_below_monotone(rng, k=4):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        for j in range(1, k + 1):
            U, V = M.basis(j), M.basis(j - 1)
            below = tidy.tidy_below_check(M, g, U, k=k)
            if not below.is_true:
                continue
            n += 1
            if tidy.tidy_below_check(M, g, V, k=k).is_false:
                bad = {"element": f"{fid}:{w}", "level": j}
    return PropertyResult("tidy", "tidy-below monotone", not bad, n, bad)


def prop_power_stability(rng, k=4):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        U = _tidy_U(M, g, k)
        for p in (-2, -1, 2):
            rep = tidy.check_tidy(M, M.power(g, p), U, k)
            n += 1
            if rep.above.is_false or rep.below.is_false:
                bad = {"element": f"{fid}:{w}", "power": p}
    return PropertyResult("tidy", "tidiness of powers", not bad, n, bad)


# ---------------------------------------------------------------- contraction suite

def prop_con_powers(rng, k=4):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        c = contraction.contraction_group(M, g, k)
        for p in (2, 3):
            n += 1
            cp = contraction.contraction_group(M, M.power(g, p), k)
            if not residuals.handles_equal(M, c, cp):
                bad = {"element": f"{fid}:{w}", "power": p}
    return PropertyResult("contraction", "con(g) = con(g^n)", not bad, n, bad)


def prop_nub_powers(rng, k=3):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        d = contraction.nub_element(M, g, k=k).descriptor
        for p in (-1, 2):
            n += 1
            if contraction.nub_element(M, M.power(g, p), k=k).descriptor != d:
                bad = {"element": f"{fid}:{w}", "power": p}
    return PropertyResult("contraction", "nub(g) = nub(g^n)", not bad, n, bad)


def prop_anisotropic_scale(rng, k=4):
    """s(g) = 1 iff the closure of con(g^-1) is compact."""
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        s = tidy.scale(M, g, k=k).value
        h = contraction.contraction_group(M, M.invert(g), k)
        if h.certificate.grade < Grade.STABILIZED:
            continue
        n += 1
        if (s == 1) != bool(h.outer.is_compact):
            bad = {"element": f"{fid}:{w}", "scale": s, "con_inv": M.format_descriptor(h.outer)}
    return PropertyResult("contraction", "scale 1 iff con(g^-1) relatively compact", not bad, n, bad)


def prop_closure_decomposition(rng, k=3):
    M = model("shift-twosided")
    v = contraction.closure_decomposition_check(M, M.sigma, k)
    return PropertyResult("contraction", "closure decomposition", v.is_true, 1, {"verdict": str(v)})


def prop_nub_ergodic(rng, k=4):
    """The only invariant open subgroup of nub(g) found at each level is nub(g) itself."""
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        N = contraction.nub_element(M, g, k=k).descriptor
        if M.is_trivial(N):
            continue
        for j in range(k + 1):
            try:
                B = M.intersect(N, M.basis(j))
                res = M.invariant_closure(B, [g])
            except NotRepresentable:
                continue
            if res is None:
                continue
            n += 1
            D = M.intersect(res[0], N)
            if not (M.contains(D, N) and M.contains(N, D)):
                bad = {"element": f"{fid}:{w}", "level": j, "closure": M.format_descriptor(D)}
    return PropertyResult("contraction", "nub has no proper invariant open subgroup", not bad, n, bad)


# ---------------------------------------------------------------- flat suite

def _group(fid, words):
    M = model(fid)
    return M, [_parse(M, w) for w in words]


def prop_flat_verdicts(rng, k=4):
    bad, n = {}, 0
    for fid, words in FLAT_GROUPS.items():
        M, gens = _group(fid, words)
        rep = flat.find_common_tidy(M, gens, k=k)
        n += 1
        if not rep.flat:
            bad = {"group": f"{fid}:{words}"}
    M, gens = _group("virtually-flat-wreath", ["a", "pi"])
    n += 1
    rep = flat.find_common_tidy(M, gens, k=k)
    if rep.flat:
        bad = {"group": "wreath should not be flat"}
    return PropertyResult("flat", "flatness verdicts", not bad, n, bad)


def prop_exchange(rng, k=4):
    """U cap V_0 = V cap U_0 for two common tidy subgroups of one flat group."""
    bad, n = {}, 0
    for fid, words in FLAT_GROUPS.items():
        M, gens = _group(fid, words)
        a = flat.find_common_tidy(M, gens, k=k)
        b = flat.find_common_tidy(M, gens, k=k, max_length=2, start=M.basis(2))
        if not (a.flat and b.flat):
            continue
        try:
            U0, V0 = flat.u_zero(M, a, k), flat.u_zero(M, b, k)
            left = M.intersect(a.common_tidy, V0)
            right = M.intersect(b.common_tidy, U0)
        except NotRepresentable:
            continue
        n += 1
        if not (M.contains(left, right) and M.contains(right, left)):
            bad = {"group": f"{fid}:{words}", "U cap V0": M.format_descriptor(left),
                   "V cap U0": M.format_descriptor(right)}
    return PropertyResult("flat", "exchange identity for U_0", not bad, n, bad)


def prop_subgroup_nub(rng, k=4):
    """nub(H') inside nub(H) for a subgroup H' of a flat H."""
    bad, n = {}, 0
    for fid, words, sub in (("badnub-tower", ["h0", "h1", "h2", "h3"], ["h0"]),
                            ("neretin-desk", ["tau1", "tau2"], ["tau1"]),
                            ("padic-rank2", ["a", "b"], ["a"])):
        M, gens = _group(fid, words)
        rep = flat.find_common_tidy(M, gens, k=k)
        big = flat.nub_flat(M, rep, k=k).nub_H
        M2, sgens = _group(fid, sub)
        srep = flat.find_common_tidy(M2, sgens, k=k)
        small = flat.nub_flat(M2, srep, k=k).nub_H
        n += 1
        if not M.contains(big, small):
            bad = {"group": f"{fid}:{words}", "sub": sub}
    return PropertyResult("flat", "nub of a subgroup lies in the nub", not bad, n, bad)


# ---------------------------------------------------------------- residual suite

def prop_residual_identity(rng, k=4):
    bad, n = {}, 0
    for fid, words in FLAT_GROUPS.items():
        M, gens = _group(fid, words)
        try:
            r = residuals.discrete_residual(M, gens, k)
        except TdlcError as exc:
            bad = {"group": f"{fid}:{words}", "error": str(exc)}
            continue
        v = r.identity_checks.get("Res = cl(G†) nub(H_u)")
        n += 1
        if v is None or v.is_false:
            bad = {"group": f"{fid}:{words}", "check": str(v)}
    return PropertyResult("residual", "Res = cl(G†) nub(H_u)", not bad, n, bad)


def prop_tits_double_coset(rng, k=4, samples=100):
    bad, n = {}, 0
    for fid, w, M, g in catalog_elements():
        if not _isotropic(M, g, k):
            continue
        base = residuals.tits_core(M, [g], k)
        U = _tidy_U(M, g, k)
        for _ in range(samples):
            u, v = M.sample(rng, U), M.sample(rng, U)
            p = rng.choice((1, 2))
            y = M.compose(M.compose(u, M.power(g, p)), v)
            n += 1
            if not residuals.handles_equal(M, base, residuals.tits_core(M, [y], k)):
                bad = {"element": f"{fid}:{w}", "perturbed": M.format_element(y)}
                break
    return PropertyResult("residual", "Tits core double-coset stability", not bad, n, bad)


def prop_cocompact_transfer(rng, k=4):
    bad, n = {}, 0
    for fid, big, small in COCOMPACT_PAIRS:
        M, H = _group(fid, big)
        K = [_parse(M, w) for w in small]
        n += 1
        if not residuals.handles_equal(M, residuals.tits_core(M, H, k), residuals.tits_core(M, K, k)):
            bad = {"pair": f"{fid}:{big} vs {small}"}
    return PropertyResult("residual", "Tits core of a finite-index subgroup", not bad, n, bad)


def prop_chain_descending(rng, k=4):
    bad, n = {}, 0
    for fid, words in FLAT_GROUPS.items():
        M, gens = _group(fid, words)
        r = residuals.res_infty(M, gens, k)
        n += 1
        chain = r.res_chain
        ok = all(M.contains(a.outer, b.outer) for a, b in zip(chain, chain[1:]))
        ok = ok and M.contains(r.res.outer, r.res_infty.outer)
        ok = ok and M.contains(r.res.outer, r.tits_core.outer)
        if not ok:
            bad = {"group": f"{fid}:{words}", "chain": [M.format_descriptor(h.outer) for h in chain]}
    return PropertyResult("residual", "Res chain descends and stays above the Tits core", not bad, n, bad)


def prop_res_infty_ergodic(rng, k=4):
    """A compact Res^inf has no proper invariant open subgroup at the tested levels."""
    bad, n = {}, 0
    for fid, words in FLAT_GROUPS.items():
        M, gens = _group(fid, words)
        R = residuals.res_infty(M, gens, k).res_infty.outer
        if not R.is_compact or M.is_trivial(R):
            continue
        for j in range(k + 1):
            try:
                B = M.intersect(R, M.basis(j))
                res = M.invariant_closure(B, gens)
            except NotRepresentable:
                continue
            if res is None:
                continue
            n += 1
            D = M.intersect(res[0], R)
            if not M.contains(D, R):
                bad = {"group": f"{fid}:{words}", "level": j}
    return PropertyResult("residual", "Res^inf has no proper invariant open subgroup", not bad, n, bad)


PROPERTIES = {
    "tidy": [prop_powers_law, prop_conjugation_invariance, prop_double_coset, prop_tidy_criterion,
             prop_tidy_below_monotone, prop_power_stability],
    "contraction": [prop_con_powers, prop_nub_powers, prop_anisotropic_scale, prop_closure_decomposition,
                    prop_nub_ergodic],
    "flat": [prop_flat_verdicts, prop_exchange, prop_subgroup_nub],
    "residual": [prop_residual_identity, prop_tits_double_coset, prop_cocompact_transfer,
                 prop_chain_descending, prop_res_infty_ergodic],
}


def run_suite(name, seed=0, k=4):
    suites = SUITES if name == "all" else (name,)
    out = []
    for s in suites:
        for fn in PROPERTIES[s]:
            rng = random.Random(f"{seed}:{fn.__name__}")
            try:
                out.append(fn(rng, k=k))
            except TdlcError as exc:
                out.append(PropertyResult(s, fn.__name__, False, 0, {"error": f"{type(exc).__name__}: {exc}"}))
    return out
