from __future__ import annotations

from itertools import product

import pytest

from hsaec.amalgamation import (
    Amalgam,
    amalgams_equivalent,
    disjoint_amalgam,
    mediator,
    mediator_bruteforce,
    mediator_from_solutions,
    mediator_linear,
    non_uniqueness_witness,
    uniqueness_check_one_point,
    unsat_mediator_config,
)
from hsaec.generators import gen_random_model, make_rng, random_embedding, random_extension
from hsaec.morphisms import EmbeddingError, check_embedding, compose, fixes, inclusion, same_map, transport
from hsaec.nf import build_nf_witness, chain_levels, nf_decide
from hsaec.structure import Model, ModelError, induced_submodel

from conftest import q_preserved_by_brute_force


def config(n: int, seed: int, base: int = 2):
    rng = make_rng(seed)
    m = gen_random_model(n, base, float(rng.random()), rng, atoms=tuple(f"m{i}" for i in range(base)))
    ma = random_extension(m, ["a"], 0.5, rng)
    mb = random_extension(m, ["b"], 0.5, rng)
    targets = [random_extension(mb, ["a"], 0.5, rng) for _ in range(2)]
    if seed % 2:
        targets[1] = targets[0]
    fs = [random_embedding(ma, t, {x: x for x in ma.atoms}, rng, fixed=m) for t in targets]
    return m, ma, mb, fs[0], fs[1]


@pytest.mark.parametrize("n,seed", [(n, s) for n in (2, 3) for s in range(12)])
def test_mediator_agrees_with_enumeration(n, seed):
    cfg = config(n, seed)
    star = mediator(*cfg)
    found = mediator_bruteforce(*cfg)
    route = mediator_from_solutions(*cfg)
    if n == 3:
        assert route
    if star:
        assert any(same_map(star, g) for g in found)
        assert q_preserved_by_brute_force(star)
        assert fixes(star, cfg[2]) and same_map(compose(cfg[3], star), cfg[4])
    else:
        assert n == 2
        assert star.certificate.verify()
        assert found == []


def test_explicit_unsat_configuration():
    cfg = unsat_mediator_config(2)
    res = mediator(*cfg)
    assert not res and res.certificate.verify()
    assert not mediator_from_solutions(*cfg) and not mediator_linear(*cfg)
    assert mediator_bruteforce(*cfg) == []
    with pytest.raises(ValueError):
        unsat_mediator_config(3)


def test_mediator_rejects_bad_configs():
    m, ma, mb, f1, f2 = unsat_mediator_config(2)
    with pytest.raises((ModelError, EmbeddingError)):
        mediator(m, ma, ma, f1, f2)
    shifted = transport(ma, {x: x for x in ma.atoms})
    with pytest.raises((ModelError, EmbeddingError)):
        mediator(m, ma, mb, shifted, f2)


def test_disjoint_amalgam_and_equivalence():
    rng = make_rng(2)
    m0 = gen_random_model(2, 2, 0.5, rng, atoms=("p", "q"))
    m1 = random_extension(m0, ["x"], 0.5, rng)
    m2 = random_extension(m0, ["x"], 0.5, rng)  # clashing name is renamed
    am = disjoint_amalgam(m0, m1, m2)
    assert len(am.result.atoms) == 4
    assert q_preserved_by_brute_force(am.f1) and q_preserved_by_brute_force(am.f2)
    assert amalgams_equivalent(am, am)
    # the same amalgam with the result relabelled is still equivalent
    ren = transport(am.result, {a: a + "_r" for a in am.result.atoms})
    other = Amalgam(m0, m1, m2, ren.target, compose(am.f1, ren), compose(am.f2, ren))
    assert amalgams_equivalent(am, other)


def test_identified_vs_disjoint_not_equivalent():
    m0 = Model((), 2)
    m1 = Model(("x", "y"), 2)
    m2 = Model(("x", "z"), 2)
    am = disjoint_amalgam(m0, m1, m2)
    glued_top = Model(("x", "y", "z"), 2)
    glued = Amalgam(m0, m1, m2, glued_top, inclusion(m1, glued_top), inclusion(m2, glued_top))
    assert not amalgams_equivalent(am, glued)


def test_uniqueness_dichotomy():
    m3 = Model(("p", "q", "r"), 3)
    rep = uniqueness_check_one_point("a", m3, Model(m3.atoms + ("a",), 3), 2)
    assert rep.verified
    m2 = Model(("p", "q"), 2)
    rep = uniqueness_check_one_point("a", m2, Model(m2.atoms + ("a",), 2), 2, trials=8)
    assert not rep.verified
    m1, am0, am1, unsat = rep.counterexample
    assert unsat.certificate.verify()
    assert not amalgams_equivalent(am0, am1)


@pytest.mark.parametrize("n", [2, 3])
def test_non_uniqueness_witness(n):
    w = non_uniqueness_witness(["x1", "x2"], ["y"], "a", n)
    assert not w.equivalent
    assert check_embedding(w.f0) and check_embedding(w.f1)
    with pytest.raises(ValueError):
        non_uniqueness_witness(["x"], [], "a", n)


# -- NF -------------------------------------------------------------------


def square(m3, pattern):
    pick = lambda keep: induced_submodel(m3, [a for a, p in zip(m3.atoms, pattern) if p in keep])
    return pick({0}), pick({0, 1, 3}), pick({0, 2, 3}), m3


def test_nf_exhaustive_small():
    m3 = gen_random_model(2, 4, 0.5, 11)
    for pattern in product(range(5), repeat=4):
        m0, m1, m2, _ = square(m3, pattern)
        disjoint = not (m1.atom_set & m2.atom_set) - m0.atom_set
        assert nf_decide(m0, m1, m2, m3) == disjoint
        if disjoint:
            ch = build_nf_witness(m0, m1, m2, m3)
            assert ch.validate()
            assert ch.m3_prime.atom_set == m1.atom_set | m2.atom_set
        else:
            assert not chain_levels(m0, m1, m2, m3).validate()
            with pytest.raises(ValueError):
                build_nf_witness(m0, m1, m2, m3)


def test_nf_chain_text():
    m3 = Model(tuple("abcd"), 2)
    m0, m1, m2, _ = square(m3, (0, 1, 2, 4))
    text = build_nf_witness(m0, m1, m2, m3).to_text()
    assert text.splitlines()[:3] == ["NFCHAIN 1", "ALPHA 1", "D b"]


def test_nf_requires_square():
    m3 = Model(tuple("abc"), 2)
    with pytest.raises(ModelError):
        nf_decide(Model(("a",), 2), Model(("b",), 2), Model(("a",), 2), m3)
