import pytest

from tdlc import flat
from tdlc.core import Grade, TdlcError
from tdlc.properties import _parse, model


def group(fid, words):
    M = model(fid)
    return M, [_parse(M, w) for w in words]


def test_rank_two_flat_group():
    M, gens = group("padic-rank2", ["a", "b"])
    rep = flat.find_common_tidy(M, gens)
    assert rep.flat
    flat.eigenfactor_decomposition(M, rep)
    assert flat.flat_rank(M, rep) == 2


def test_wreath_not_flat_with_scale_four_commutator():
    M, gens = group("virtually-flat-wreath", ["a", "pi"])
    rep = flat.find_common_tidy(M, gens)
    assert not rep.flat
    w = rep.verdict.witness
    assert w["combined"] == 4


def test_wreath_finite_index_subgroup_is_flat():
    M, (a, pi) = group("virtually-flat-wreath", ["a", "pi"])
    rep = flat.find_common_tidy(M, [a, M.compose(pi, M.compose(a, pi))])
    assert rep.flat
    flat.eigenfactor_decomposition(M, rep)
    assert flat.flat_rank(M, rep) == 2


def test_element_scale_matches_tidy_scale():
    M, (g,) = group("padic-linear-diag", ["g"])
    assert flat.element_scale(M, g) == 4


def test_badnub_nub_is_W_with_trivial_cyclic_nubs():
    M, gens = group("badnub-tower", ["h0", "h1", "h2", "h3"])
    d = flat.nub_flat(M, flat.find_common_tidy(M, gens))
    assert M.format_descriptor(d.nub_H) == "span(00001)"
    assert [lab for lab, _ in d.factors] == ["nub(L)"]
    for g in gens:
        assert M.cf_nub(g) is None or M.is_trivial(M.cf_nub(g))


def test_desk_nub_factors_per_component():
    M, gens = group("neretin-desk", ["tau1", "tau2"])
    d = flat.nub_flat(M, flat.find_common_tidy(M, gens), k=5)
    assert [lab for lab, _ in d.factors] == [M.format_element(g) for g in gens]
    assert d.verified_at == 5 and d.certificate.grade >= Grade.STABILIZED


def test_partial_verification_for_one_component():
    M, gens = group("neretin-desk", ["tau1"])
    d = flat.nub_flat(M, flat.find_common_tidy(M, gens), k=3)
    assert 0 <= d.verified_at <= 3


def test_rank_needs_eigenfactors():
    M, gens = group("padic-rank2", ["a", "b"])
    rep = flat.find_common_tidy(M, gens)
    with pytest.raises(TdlcError):
        flat.flat_rank(M, rep)


def test_rnub_badnub_is_W():
    M, gens = group("badnub-tower", ["h0", "h1", "h2", "h3"])
    h = flat.rnub(M, flat.find_common_tidy(M, gens))
    assert M.format_descriptor(h.outer) == "span(00001)"
