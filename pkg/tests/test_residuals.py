import pytest

from tdlc import residuals as R
from tdlc.core import CoreIsOpen, Outcome, PrerequisiteMissing
from tdlc.properties import _parse, model
from tdlc.queries import default_names, descriptor, elements


def group(fid, words):
    M = model(fid)
    return M, elements(M, words, default_names(M))


def fmt(M, h):
    return M.format_descriptor(h.outer)


def test_badnub_chain_and_residual():
    M, H = group("badnub-tower", "h0,h1,h2,h3")
    r = R.res_infty(M, H)
    assert [fmt(M, h) for h in r.res_chain] == ["span(10000,01000,00100,00010,00001)+tail",
                                               "span(00001)", "span(0)"]
    assert fmt(M, r.res) == "span(00001)"
    assert M.is_trivial(r.res_infty.outer)


def test_padic_residual_is_whole():
    M, H = group("padic-t", "t")
    r = R.discrete_residual(M, H)
    assert R.handles_equal(M, r.res, R.tits_core(M, H))
    assert fmt(M, r.res) == M.format_descriptor(M.whole())


def test_tits_core_of_elliptic_is_trivial():
    M = model("tree-hyperbolic")
    assert M.is_trivial(R.tits_core(M, [M.parse_element("(perm=(); C1: portrait{0:21})")]).outer)


def test_residual_identity_recorded_on_flat_groups():
    M, H = group("padic-rank2", "a,b")
    r = R.discrete_residual(M, H)
    assert all(v.outcome == Outcome.TRUE for v in r.identity_checks.values())


def test_proximal_pair_one_sided_shift():
    M, H = group("shift-onesided", "s")
    w = R.proximal_search(M, H, M.basis(0), budget=8)
    assert isinstance(w, R.ProximalWitness)
    assert M.format_element(w.x) == "{0:a}"
    assert M.is_trivial(w.L)
    assert len(w.trace) <= 8


def test_core_is_open_when_H_normalizes_K():
    M, H = group("badnub-tower", "h0,h1,h2,h3")
    with pytest.raises(CoreIsOpen):
        R.proximal_search(M, H, M.basis(0))


def test_proximal_needs_compact_K():
    M, H = group("padic-t", "t")
    with pytest.raises(PrerequisiteMissing):
        R.proximal_search(M, H, M.whole())


def test_distality_cases():
    M, H = group("shift-onesided", "s")
    assert R.distality_report(M, H, M.whole()).case == "b"
    M, H = group("badnub-tower", "h0,h1,h2,h3")
    rep = R.distality_report(M, H, M.whole())
    assert rep.case == "a" and rep.hypothesis_sin is False


def test_envelope_on_desk():
    M, H = group("neretin-desk", "tau1,tau2")
    r = R.reduced_envelope(M, H, samples=200)
    assert r.cocompactness.outcome == Outcome.TRUE
    assert r.cocompactness.witness["constant"] == 1
    # (members found, samples drawn) in both directions
    assert sorted(r.membership.values()) == [(200, 200), (200, 200)]


def test_p_set():
    M = model("tree-hyperbolic")
    assert R.p_set_membership(M, _parse(M, "tau")).outcome == Outcome.FALSE
