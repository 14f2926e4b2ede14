from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from hsaec.generators import gen_random_model, make_rng, random_embedding, random_extension
from hsaec.morphisms import (
    Embedding,
    EmbeddingError,
    check_embedding,
    compose,
    identity,
    inclusion,
    invert,
    same_map,
    transport,
)
from hsaec.oracles import exhaustive_extensions, greedy_solution
from hsaec.solutions import (
    Solution,
    SolutionError,
    amalgamate_solutions,
    blocks_over,
    check_solution,
    conjugate_solution,
    extend_solution,
    iso_from_solutions,
    solve_solution,
    standardize_pair,
    zero_solution,
)
from hsaec.structure import GSTAR, HSTAR, Model, StalkPoint, eval_Q, induced_submodel, make_model

from conftest import q_preserved_by_brute_force

models = st.builds(
    gen_random_model,
    st.integers(2, 3),
    st.integers(0, 5),
    st.floats(0, 1),
    st.integers(0, 2**32 - 1),
)


def q_holds_everywhere(h: Solution) -> bool:
    """The definition of a solution, checked with eval_Q on the chosen points."""
    m = h.model
    for t in m.tuples:
        if not (t.w <= {a for u in h.domain for a in u}) or any(u not in h.domain for u in t.others()):
            continue
        if t.v not in h.domain:
            continue
        xs = [StalkPoint(GSTAR, u, h.gamma[u]) for u in t.others()]
        if not eval_Q(m, xs, StalkPoint(HSTAR, t.v, h.ell[t.v])):
            return False
    return True


@settings(max_examples=60)
@given(models)
def test_full_solution_exists(m):
    h = solve_solution(m)
    assert h and q_holds_everywhere(h) and check_solution(h)
    assert q_holds_everywhere(greedy_solution(m))


def test_zero_solution_only_on_standard():
    std = Model(tuple("abc"), 2)
    assert check_solution(zero_solution(std))
    tw = make_model("abc", 2, [("ab", "abc")])
    assert not check_solution(zero_solution(tw))
    assert not q_holds_everywhere(zero_solution(tw))


@settings(max_examples=60)
@given(models, st.integers(0, 2**32 - 1))
def test_partial_solutions_extend(m, seed):
    rng = make_rng(seed)
    atoms = [a for a in m.atoms if rng.random() < 0.6]
    part = solve_solution(m, blocks_over(m, atoms), rng=rng)
    full = extend_solution(m, part, rng=rng)
    assert full and full.extends(part) and q_holds_everywhere(full)


def test_pins_outside_domain_rejected(std3):
    with pytest.raises(SolutionError):
        solve_solution(std3, blocks_over(std3, "ab"), gamma_pins={frozenset("bc"): frozenset()})


def conflict_family():
    # the n = 2, k = 2 conflict on ell_{b1 b2}
    m = Model(("a1", "a2", "b1", "b2"), 2)
    h1 = zero_solution(m, blocks_over(m, ["a1", "a2", "b1"]))
    g = dict(h1.gamma)
    g[frozenset({"a1", "b1"})] = frozenset({frozenset({"b1", "b2"})})
    h1 = Solution(m, h1.domain, g, h1.ell)
    h2 = zero_solution(m, blocks_over(m, ["a1", "a2", "b2"]))
    return m, {("b1",): h1, ("b2",): h2}


def test_two_amalgamation_conflict_n2():
    m, fam = conflict_family()
    assert all(q_holds_everywhere(h) for h in fam.values())
    res = amalgamate_solutions(m, ["a1", "a2"], ["b1", "b2"], fam)
    assert not res
    assert res.certificate.verify()
    # independent: no assignment of the free bits works
    gamma = {u: h.gamma[u] for h in fam.values() for u in h.domain}
    ell = {u: h.ell[u] for h in fam.values() for u in h.domain}
    assert exhaustive_extensions(m, m.block_set, gamma, ell) == []


def test_disagreeing_family_is_an_error():
    m3 = Model(("a", "c", "b1", "b2"), 2)
    bad1 = Solution(m3, blocks_over(m3, ["a", "c", "b1"]), {frozenset("ac"): frozenset({frozenset("ac")})})
    bad2 = zero_solution(m3, blocks_over(m3, ["a", "c", "b2"]))
    with pytest.raises(SolutionError):
        amalgamate_solutions(m3, ["a", "c"], ["b1", "b2"], {("b1",): bad1, ("b2",): bad2})


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_k_below_n_always_amalgamates(seed):
    rng = make_rng(seed)
    m = gen_random_model(3, 6, float(rng.random()), rng)
    A, bs = list(m.atoms[:3]), list(m.atoms[3:5])
    fam = {}
    base = solve_solution(m, blocks_over(m, A), rng=rng)
    for b in bs:
        fam[(b,)] = extend_solution(m, base, blocks_over(m, A + [b]), rng=rng)
    res = amalgamate_solutions(m, A, bs, fam)
    assert res and all(res.extends(h) for h in fam.values()) and q_holds_everywhere(res)


def test_identity_and_inclusion(std3):
    assert check_embedding(identity(std3))
    big = random_extension(std3, ["d"], 0.5, make_rng(1))
    f = inclusion(std3, big)
    assert check_embedding(f) and q_preserved_by_brute_force(f)


def test_bad_embedding_detected():
    src = Model(tuple("abc"), 2)
    tgt = make_model("abc", 2, [("ab", "abc")])
    f = Embedding(src, tgt, {x: x for x in "abc"})
    assert not check_embedding(f)
    assert not q_preserved_by_brute_force(f)
    g = Embedding(src, tgt, {x: x for x in "abc"}, eps={frozenset("ab"): 1})
    assert check_embedding(g) and q_preserved_by_brute_force(g)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_embeddings_preserve_q(seed):
    rng = make_rng(seed)
    src = gen_random_model(2, 3, float(rng.random()), rng)
    tgt = random_extension(gen_random_model(2, 3, float(rng.random()), rng, atoms=("x", "y", "z")), ["w"], 0.5, rng)
    perm = [tgt.atoms[j] for j in rng.permutation(4)[:3]]
    f = random_embedding(src, tgt, dict(zip(src.atoms, perm)), rng)
    assert f is not None
    assert check_embedding(f) and q_preserved_by_brute_force(f)


@settings(max_examples=40)
@given(models, st.integers(0, 2**32 - 1))
def test_solution_iso_round_trip(m, seed):
    rng = make_rng(seed)
    perm = rng.permutation(len(m.atoms))
    pi = {a: f"r{j}" for a, j in zip(m.atoms, perm)}
    image = Model(tuple(pi[a] for a in m.atoms), m.n)
    delta = {u: frozenset(v for v in image.blocks if rng.random() < 0.3) for u in m.blocks}
    eps = {u: int(rng.integers(0, 2)) for u in m.blocks}
    f = transport(m, pi, delta, eps)
    assert check_embedding(f) and f.is_bijective()
    h = solve_solution(m, rng=rng)
    hn = conjugate_solution(f, h)
    assert q_holds_everywhere(hn)
    assert iso_from_solutions(h, hn, pi) == f
    g = iso_from_solutions(h, solve_solution(f.target, rng=rng), pi)
    assert check_embedding(g)
    assert same_map(compose(g, invert(g)), identity(m))


def test_compose_and_invert(std3):
    f = transport(std3, {"a": "b", "b": "c", "c": "a"}, {frozenset("ab"): frozenset({frozenset("ab")})})
    g = invert(f)
    assert same_map(compose(f, g), identity(std3))
    assert same_map(compose(g, f), identity(f.target))
    with pytest.raises(EmbeddingError):
        compose(f, f)


def test_standardize_pair_commutes():
    rng = make_rng(5)
    n = gen_random_model(2, 5, 0.5, rng)
    m = induced_submodel(n, n.atoms[:3])
    fm, fn = standardize_pair(m, n)
    assert fm.target.is_standard() and fn.target.is_standard()
    assert same_map(compose(inclusion(m, n), fn), compose(fm, inclusion(fm.target, fn.target)))


def test_exhaustive_oracle_finds_extensions():
    m = gen_random_model(2, 4, 0.5, 9)
    part = solve_solution(m, blocks_over(m, m.atoms[:3]))
    found = exhaustive_extensions(m, m.block_set, part.gamma, part.ell, first_only=False)
    assert found and all(q_holds_everywhere(h) and h.extends(part) for h in found)
    for ws in combinations(m.atoms, 3):
        assert blocks_over(m, ws) <= m.block_set
