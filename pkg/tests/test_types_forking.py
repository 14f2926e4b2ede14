from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from hsaec.forking import ForkingQuery, nonforking_decide, nonforking_literal, splits_finite
from hsaec.galois import (
    FingerprintIncomplete,
    PairOracle,
    TypeInstance,
    all_elements,
    existential_fingerprint,
    galois_type_equal,
    in_base,
    is_basic_type,
    search_type_equal,
)
from hsaec.generators import gen_random_model, make_rng, random_extension
from hsaec.morphisms import Embedding, check_embedding, compose, inclusion, same_map
from hsaec.structure import Element, G_SORT, I_SORT, K_SORT, Model, ModelError, atom, gstar, hstar, induced_submodel

from conftest import all_group, q_preserved_by_brute_force


def automorphisms_over(m: Model, n: Model):
    """Every automorphism of n fixing m pointwise, by enumerating offsets and brute-force Q checks.

    Only meant for one fresh atom, so the atom map is the identity.
    """
    free = [u for u in n.blocks if not u <= m.atom_set]
    group = list(all_group(n))
    pi = {a: a for a in n.atoms}
    for ds in product(group, repeat=len(free)):
        for es in product((0, 1), repeat=len(free)):
            f = Embedding(n, n, pi, dict(zip(free, ds)), dict(zip(free, es)))
            if q_preserved_by_brute_force(f):
                yield f


@pytest.mark.parametrize("seed", range(4))
def test_orbits_lie_in_one_type(seed):
    rng = make_rng(seed)
    m = gen_random_model(2, 2, 0.5, rng, atoms=("a", "b"))
    n = random_extension(m, ["c"], 0.5, rng)
    elems = all_elements(n)
    auts = list(automorphisms_over(m, n))
    assert auts
    oracle = PairOracle(m, n, n)
    for f in auts:
        for x in elems:
            assert oracle.equal(x, f(x))
            t1, t2 = TypeInstance((x,), m, n), TypeInstance((f(x),), m, n)
            assert existential_fingerprint(t1) == existential_fingerprint(t2)


def test_fresh_atoms_in_different_ambients():
    m = Model(("a", "b"), 2)
    t1 = TypeInstance((atom("c"),), m, Model(("a", "b", "c"), 2))
    t2 = TypeInstance((atom("d"),), m, Model(("a", "b", "d"), 2))
    v = galois_type_equal(t1, t2, method="search", witness=True)
    assert v and v.route == "search"
    star, g1, g2 = v.witness
    assert check_embedding(g1) and check_embedding(g2)
    assert g1(atom("c")) == g2(atom("d"))
    assert same_map(compose(inclusion(m, t1.ambient), g1), compose(inclusion(m, t2.ambient), g2))


def test_reflexive_and_algebraic():
    m = Model(("a", "b"), 2)
    n = Model(("a", "b", "c"), 2)
    for x in all_elements(n)[:40]:
        assert galois_type_equal(TypeInstance((x,), m, n), TypeInstance((x,), m, n))
    assert not galois_type_equal(TypeInstance((atom("a"),), m, n), TypeInstance((atom("c"),), m, n))
    assert not galois_type_equal(TypeInstance((atom("a"),), m, n), TypeInstance((atom("b"),), m, n))


def test_fingerprint_sees_support_in_base():
    m = Model(("a", "b"), 2)
    n = Model(("a", "b", "c", "d"), 2)
    g1 = Element(G_SORT, frozenset({frozenset("ac")}))
    g2 = Element(G_SORT, frozenset({frozenset("cd")}))
    f1 = existential_fingerprint(TypeInstance((g1,), m, n))
    f2 = existential_fingerprint(TypeInstance((g2,), m, n))
    assert f1 != f2
    assert search_type_equal(TypeInstance((g1,), m, n), TypeInstance((g2,), m, n)) is None


def test_fingerprint_declines_off_catalog():
    m = Model((), 2)
    n = Model(tuple("abcdefgh"), 2)
    g = Element(G_SORT, frozenset(frozenset(p) for p in ("ab", "cd", "ef", "gh")))
    with pytest.raises(FingerprintIncomplete):
        existential_fingerprint(TypeInstance((g,), m, n))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fingerprint_matches_search(seed):
    rng = make_rng(seed)
    m = gen_random_model(2, int(rng.integers(1, 4)), 0.5, rng)
    n1 = random_extension(m, ["z"], float(rng.random()), rng)
    n2 = random_extension(m, ["z"], float(rng.random()), rng)
    e1, e2 = all_elements(n1), all_elements(n2)
    for _ in range(15):
        x = e1[int(rng.integers(0, len(e1)))]
        y = e2[int(rng.integers(0, len(e2)))]
        t1, t2 = TypeInstance((x,), m, n1), TypeInstance((y,), m, n2)
        fp = existential_fingerprint(t1) == existential_fingerprint(t2)
        assert fp == (search_type_equal(t1, t2) is not None)


def test_basic_types():
    m = Model(("a", "b"), 2)
    n = Model(("a", "b", "c"), 2)
    assert is_basic_type(TypeInstance((atom("c"),), m, n))
    assert not is_basic_type(TypeInstance((atom("a"),), m, n))
    assert not is_basic_type(TypeInstance((Element(G_SORT, frozenset()),), m, n))


def test_mismatched_bases_rejected():
    n = Model(("a", "b", "c"), 2)
    with pytest.raises(ModelError):
        galois_type_equal(TypeInstance((atom("c"),), Model(("a",), 2), n), TypeInstance((atom("c"),), Model(("b",), 2), n))


# -- nonforking -----------------------------------------------------------


def chain(m0_atoms, m_atoms, n_atoms, n=2):
    top = Model(tuple(n_atoms), n)
    return Model(tuple(m0_atoms), n), Model(tuple(m_atoms), n), top


def test_nonforking_examples():
    m0, m, top = chain("a", "ab", "abcd")
    assert nonforking_decide(ForkingQuery(m0, m, top, atom("c"))).holds
    g = Element(G_SORT, frozenset({frozenset("bc")}))
    v = nonforking_decide(ForkingQuery(m0, m, top, g))
    assert not v.holds and v.case == "2"
    g_ok = Element(G_SORT, frozenset({frozenset("ac"), frozenset("cd")}))
    assert nonforking_decide(ForkingQuery(m0, m, top, g_ok)).holds
    # point over a block of M that is not a block of M0
    m0, m, top = chain("a", "abc", "abcd")
    v = nonforking_decide(ForkingQuery(m0, m, top, gstar("bc", ["cd"])))
    assert not v.holds and v.case == "3b"
    v = nonforking_decide(ForkingQuery(m0, m, top, gstar("ad")))
    assert v.holds and v.case == "3a"


def test_query_validation():
    m0, m, top = chain("a", "ab", "abc")
    with pytest.raises(ModelError):
        ForkingQuery(m0, m, top, atom("a"))
    with pytest.raises(ModelError):
        ForkingQuery(m, m0, top, atom("c"))


def test_literal_table_breaks_uniqueness():
    # over M = {} both blocks look alike; over N = {x} one of them meets x
    m = Model((), 2)
    n = Model(("x",), 2)
    top = Model(("x", "f1", "f2", "g2"), 2)
    p, q = Element(K_SORT, frozenset({"x", "f1"})), Element(K_SORT, frozenset({"f2", "g2"}))
    same_over_m = search_type_equal(TypeInstance((p,), m, top), TypeInstance((q,), m, top)) is not None
    same_over_n = search_type_equal(TypeInstance((p,), n, top), TypeInstance((q,), n, top)) is not None
    assert same_over_m and not same_over_n
    lit = [nonforking_literal(ForkingQuery(m, n, top, x)).holds for x in (p, q)]
    assert all(lit)  # the literal table says neither forks, contradicting uniqueness
    dec = [nonforking_decide(ForkingQuery(m, n, top, x)).holds for x in (p, q)]
    assert dec == [False, True]


def test_hstar_support_matters():
    m = Model((), 2)
    n = Model(("x",), 2)
    top = Model(("x", "f1", "f2", "g2"), 2)
    p, q = hstar({"x", "f1"}, 0), hstar({"f2", "g2"}, 0)
    assert search_type_equal(TypeInstance((p,), m, top), TypeInstance((q,), m, top)) is not None
    assert search_type_equal(TypeInstance((p,), n, top), TypeInstance((q,), n, top)) is None
    assert not nonforking_decide(ForkingQuery(m, n, top, p))
    assert nonforking_decide(ForkingQuery(m, n, top, q))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gstar_verdict_ignores_base_shift(seed):
    # moving the point by an element of G(M0) never changes the verdict
    rng = make_rng(seed)
    top = gen_random_model(2, 5, 0.5, rng)
    m0 = induced_submodel(top, top.atoms[:2])
    m = induced_submodel(top, top.atoms[:3])
    for u in top.blocks:
        if u <= m.atom_set:
            continue
        off = frozenset(v for v in top.blocks if rng.random() < 0.3)
        x = gstar(u, off)
        shift = frozenset(v for v in m0.blocks if rng.random() < 0.5)
        y = gstar(u, off ^ shift)
        a, b = (nonforking_decide(ForkingQuery(m0, m, top, z)) for z in (x, y))
        assert (a.holds, a.case) == (b.holds, b.case)


def test_splitting_examples():
    m = Model(("a", "b", "c"), 2)
    top = Model(("a", "b", "c", "d"), 2)
    m0 = Model(("a",), 2)
    assert not splits_finite(m0, TypeInstance((atom("d"),), m, top))
    assert not splits_finite(m, TypeInstance((atom("d"),), m, top))
    g = Element(G_SORT, frozenset({frozenset("bd")}))
    assert splits_finite(m0, TypeInstance((g,), m, top))
    with pytest.raises(ValueError):
        big = Model(tuple("abcdef"), 2)
        splits_finite(m0, TypeInstance((atom("f"),), big, Model(tuple("abcdefg"), 2)))


def test_in_base():
    m = Model(("a", "b"), 2)
    assert in_base(m, gstar("ab", ["ab"]))
    assert not in_base(m, gstar("ab", ["ac"]))
    assert in_base(m, hstar("ab", 1))
    assert not in_base(m, Element(I_SORT, "c"))
