from tdlc import contraction as C
from tdlc.core import Grade, Outcome
from tdlc.properties import _parse, model


def el(fid, w):
    M = model(fid)
    return M, _parse(M, w)


def test_one_sided_shift_contraction_is_closed_and_whole():
    M, s = el("shift-onesided", "s")
    r = C.contraction_report(M, s)
    assert r.closed.outcome == Outcome.TRUE
    assert M.format_descriptor(r.con.outer) == M.format_descriptor(M.whole())
    assert M.is_trivial(C.nub_element(M, s).descriptor)


def test_two_sided_shift_con_not_closed_and_nub_whole():
    M, s = el("shift-twosided", "s")
    r = C.contraction_report(M, s)
    assert r.closed.outcome == Outcome.FALSE
    n = C.nub_element(M, s, k=8)
    assert M.contains(n.descriptor, M.basis(0)) and M.contains(M.basis(0), n.descriptor)
    assert C.closure_decomposition_check(M, s, k=3).outcome == Outcome.TRUE


def test_contracts_finitely_supported():
    M, s = el("shift-onesided", "s")
    assert C.contracts(M, s, M.parse_element("{0:a}")).outcome == Outcome.TRUE
    assert C.contracts(M, s, M.parse_element("{3:a, 5:a}")).outcome == Outcome.TRUE


def test_anisotropic():
    M, s = el("shift-onesided", "s")
    assert C.is_anisotropic(M, s).outcome == Outcome.FALSE
    P, t = el("padic-t", "t")
    assert C.is_anisotropic(P, t).outcome == Outcome.FALSE
    E, e = el("tree-hyperbolic", "tau")
    assert C.is_anisotropic(E, E.parse_element("(perm=(); C1: portrait{0:21})")).outcome == Outcome.TRUE


def test_tree_nub_is_axis_fixator():
    M, g = el("tree-hyperbolic", "tau")
    n = C.nub_element(M, g)
    ax = M.spine_fixator()
    assert M.contains(n.descriptor, ax) and M.contains(ax, n.descriptor)


def test_desk_single_component_nub():
    # tau1 acts trivially on the second tree, so the second factor of the nub is trivial
    M, g = el("neretin-desk", "tau1")
    n = C.nub_element(M, g)
    assert n.certificate.grade >= Grade.STABILIZED
    assert M.format_descriptor(n.descriptor).endswith("x trivial")


def test_nub_of_powers_badnub():
    M, h = el("badnub-tower", "h0")
    a = C.nub_element(M, h).descriptor
    assert C.nub_element(M, M.power(h, 2)).descriptor == a
