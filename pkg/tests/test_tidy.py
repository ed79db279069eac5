import pytest

from tdlc import catalog, tidy
from tdlc.core import Grade, Outcome
from tdlc.properties import _parse, model


def el(fid, w):
    M = model(fid)
    return M, _parse(M, w)


# frozen from the residue-class oracle (catalog.padic_scale_oracle)
@pytest.mark.parametrize("w,expected", [("t", 1), ("t^-1", 2), ("t^2", 1), ("t^-3", 8)])
def test_padic_scale(w, expected):
    M, g = el("padic-t", w)
    r = tidy.scale(M, g)
    assert r.value == expected
    assert r.certificate.grade == Grade.EXACT
    assert set(r.values.values()) == {expected}


def test_padic_oracle_agrees_with_frozen_values():
    s, s_inv, table = catalog.padic_scale_oracle(2, [1])
    assert (s, s_inv) == (1, 2)
    assert catalog.padic_scale_oracle(2, [-2, 2])[:2] == (4, 4)


def test_linear_diagonal_scale():
    M, g = el("padic-linear-diag", "g")
    assert tidy.scale(M, g).value == 4
    assert tidy.scale(M, M.invert(g)).value == 4


# frozen from the vertex-ball oracle (catalog.tree_orbit_oracle)
@pytest.mark.parametrize("w,expected", [("tau", 2), ("tau^2", 4), ("tau^-1", 1)])
def test_tree_scale(w, expected):
    M, g = el("tree-hyperbolic", w)
    assert tidy.scale(M, g).value == expected


def test_tree_oracle():
    M, g = el("tree-hyperbolic", "tau")
    assert catalog.tree_orbit_oracle(M, g) == 2
    assert catalog.tree_orbit_oracle(M, M.power(g, 2)) == 4


def test_asymptotic_method_alone():
    M, g = el("tree-hyperbolic", "tau")
    assert tidy.asymptotic_scale(M, g)[0] == 2


def test_found_tidy_subgroup_meets_criterion():
    M, g = el("padic-t", "t^-1")
    rep = tidy.find_tidy(M, g)
    assert rep.above.outcome == Outcome.TRUE and rep.below.outcome == Outcome.TRUE
    assert tidy.displacement(M, g, rep.U) == tidy.scale(M, g).value


def test_every_basis_level_tidy_for_padic_t():
    M, g = el("padic-t", "t")
    for j in range(5):
        assert tidy.check_tidy(M, g, M.basis(j)).tidy


def test_untidy_start_is_tidied():
    # U_1 x U_0 style product is not tidy for the diagonal element
    M, g = el("padic-linear-diag", "g")
    U = M.parse_descriptor("exp(0, 3)") if hasattr(M, "parse_descriptor") else None
    if U is None:
        pytest.skip("model has no descriptor parser")
    rep = tidy.tidy_from(M, g, U)
    assert rep is not None and rep.tidy
    assert tidy.displacement(M, g, rep.U) == 4


def test_shift_tidy_subgroup_realizes_scale():
    M, g = el("shift-onesided", "s")
    rep = tidy.find_tidy(M, g)
    assert rep.tidy
    assert tidy.displacement(M, g, rep.U) == tidy.scale(M, g).value
