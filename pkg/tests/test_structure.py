from __future__ import annotations

from math import comb

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from hsaec.generators import gen_random_model
from hsaec.structure import (
    CompTuple,
    GSTAR,
    HSTAR,
    Model,
    ModelError,
    StalkPoint,
    atom_support,
    compatible_tuples,
    contains,
    eval_Q,
    gstar,
    hstar,
    induced_submodel,
    is_induced,
    make_model,
    torsor_act,
    torsor_diff,
    validate_model,
)


@given(st.integers(2, 4), st.integers(0, 7))
def test_counts(n, k):
    m = Model(tuple(f"x{i}" for i in range(k)), n)
    assert len(m.blocks) == comb(k, n)
    # each (n+1)-set gives n+1 tuples, one per choice of v
    assert len(compatible_tuples(m)) == comb(k, n + 1) * (n + 1)
    for t in m.tuples:
        assert len(t.others()) == n
        assert all(len(u) == n and u <= t.w and u != t.v for u in t.others())


def test_standard_q_on_zero_points(std3):
    zero = [gstar("ab"), gstar("ac")]
    assert eval_Q(std3, zero, hstar("bc", 0))
    assert not eval_Q(std3, zero, hstar("bc", 1))


def test_twisted_tuple_flips_parity():
    m = make_model("abc", 2, [("bc", "abc")])
    zero = [gstar("ab"), gstar("ac")]
    assert not eval_Q(m, zero, hstar("bc", 0))
    assert eval_Q(m, zero, hstar("bc", 1))
    # moving one G* point by a group element hitting {b,c} restores it
    shifted = [gstar("ab", ["bc"]), gstar("ac")]
    assert eval_Q(m, shifted, hstar("bc", 0))


def test_q_needs_a_compatible_tuple():
    m = Model(tuple("abcd"), 2)
    # blocks ab, cd, bc do not make up the 2-subsets of one 3-set
    assert not eval_Q(m, [gstar("ab"), gstar("cd")], hstar("bc", 0))
    assert not eval_Q(m, [gstar("ab"), gstar("ab")], hstar("bc", 0))


def test_validate_rejects_bad_tuples():
    with pytest.raises(ModelError):
        make_model("abc", 2, [("ab", "abcd")])
    with pytest.raises(ModelError):
        make_model("abc", 2, [("ad", "abd")])
    assert validate_model(Model(("a", "a"), 2))
    assert validate_model(Model(("a",), 1))


def test_torsor_laws():
    p = gstar("ab", ["ab", "bc"])
    g = frozenset({frozenset("ac")})
    assert torsor_act(torsor_act(p, g), g) == p
    assert torsor_act(p, torsor_diff(p, gstar("ab"))) == gstar("ab")
    h = hstar("ab", 1)
    assert torsor_act(h, 1) == hstar("ab", 0)
    with pytest.raises(ModelError):
        torsor_act(h, g)
    with pytest.raises(ModelError):
        torsor_diff(p, gstar("ac"))


def test_atom_support(std3):
    g = frozenset({frozenset("ab"), frozenset("bc")})
    assert atom_support(std3, g) == frozenset("abc")
    assert atom_support(std3, frozenset()) == frozenset()


@settings(max_examples=40)
@given(st.integers(2, 3), st.integers(0, 6), st.floats(0, 1), st.integers(0, 2**32 - 1), st.data())
def test_induced_submodel(n, k, density, seed, data):
    m = gen_random_model(n, k, density, seed)
    sub = data.draw(st.sets(st.sampled_from(m.atoms)) if m.atoms else st.just(set()))
    s = induced_submodel(m, sub)
    assert is_induced(s, m)
    assert list(s.atoms) == [a for a in m.atoms if a in sub]
    for t in m.tuples:
        if t.w <= s.atom_set:
            assert s.q(t.v, t.w) == m.q(t.v, t.w)


def test_is_induced_detects_twist_mismatch():
    m = make_model("abc", 2, [("ab", "abc")])
    assert not is_induced(Model(("a", "b", "c"), 2), m)
    assert is_induced(Model(("a", "b"), 2), m)


def test_contains(std3):
    assert contains(std3, gstar("ab", ["bc"]))
    assert not contains(std3, gstar("ab", ["bd"]))
    assert not contains(std3, StalkPoint(HSTAR, frozenset("ad"), 0))
    assert not contains(std3, StalkPoint(GSTAR, frozenset("ab"), 1))


def test_comptuple_others_order_free():
    t = CompTuple(frozenset("ab"), frozenset("abc"))
    assert set(t.others()) == {frozenset("ac"), frozenset("bc")}
