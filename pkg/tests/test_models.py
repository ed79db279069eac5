"""Algebraic laws every model family has to satisfy, checked on random samples."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from tdlc.core import InvalidParameter, ParseError, UnsupportedFamily
from tdlc.models import build_model
from tdlc.properties import model

FAMILIES = ["padic-t", "padic-rank2", "virtually-flat-wreath", "shift-onesided", "shift-twosided",
            "badnub-tower", "neretin-desk", "tree-hyperbolic"]
_cache = {}


def M_(fid):
    if fid not in _cache:
        _cache[fid] = model(fid)
    return _cache[fid]


def same(M, A, B):
    return M.contains(A, B) and M.contains(B, A)


fids = st.sampled_from(FAMILIES)
seeds = st.integers(0, 10**6)
levels = st.integers(0, 3)
fast = settings(max_examples=25, deadline=None)


@fast
@given(fids, seeds, levels)
def test_conjugation_round_trip(fid, seed, j):
    M = M_(fid)
    g = M.sample(random.Random(seed))
    U = M.basis(j)
    V = M.conjugate(g, U)
    assert same(M, M.conjugate(M.invert(g), V), U)


@fast
@given(fids, seeds)
def test_group_laws(fid, seed):
    M = M_(fid)
    rng = random.Random(seed)
    g, h, x = M.sample(rng), M.sample(rng), M.sample(rng)
    assert M.equals(M.compose(M.compose(g, h), x), M.compose(g, M.compose(h, x)))
    assert M.equals(M.compose(g, M.invert(g)), M.identity())
    assert M.equals(M.power(g, 3), M.compose(g, M.compose(g, g)))
    assert M.equals(M.power(g, -2), M.invert(M.power(g, 2)))


@fast
@given(fids, seeds, levels, levels)
def test_intersect_laws(fid, seed, i, j):
    M = M_(fid)
    g = M.sample(random.Random(seed))
    A, B = M.basis(i), M.conjugate(g, M.basis(j))
    AB = M.intersect(A, B)
    assert same(M, AB, M.intersect(B, A))
    assert same(M, M.intersect(A, A), A)
    assert M.contains(A, AB) and M.contains(B, AB)
    assert same(M, M.intersect(AB, A), AB)


@fast
@given(fids, st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
def test_index_multiplicative(fid, a, b, c):
    M = M_(fid)
    i, j, k = sorted((a, a + b, a + b + c))
    U, V, W = M.basis(i), M.basis(j), M.basis(k)
    assert M.index(U, W) == M.index(U, V) * M.index(V, W)


@fast
@given(fids, seeds)
def test_element_text_round_trip(fid, seed):
    M = M_(fid)
    g = M.sample(random.Random(seed))
    assert M.equals(M.parse_element(M.format_element(g)), g)


@fast
@given(fids, seeds, levels)
def test_member_agrees_with_conjugation(fid, seed, j):
    # u in U_j  iff  gug^-1 in gU_jg^-1
    M = M_(fid)
    rng = random.Random(seed)
    g = M.sample(rng)
    u = M.sample(rng, M.basis(j))
    assert M.member(u, M.basis(j))
    assert M.member(M.conj_element(g, u), M.conjugate(g, M.basis(j)))


def test_basis_is_decreasing():
    for fid in FAMILIES:
        M = M_(fid)
        for j in range(3):
            assert M.contains(M.basis(j), M.basis(j + 1)), fid


def test_build_model_errors():
    with pytest.raises(UnsupportedFamily):
        build_model({"family": "Lie"})
    with pytest.raises(InvalidParameter):
        build_model({"params": {}})
    with pytest.raises(ParseError):
        M_("padic-t").parse_element("(1/2; t^")
