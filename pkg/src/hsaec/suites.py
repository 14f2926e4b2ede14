"""Named property batteries with seeded cases, witness files and replay.

A suite is a list of JSON-serialisable cases plus a ``check(seed, case)``
returning ``(ok, message)``.  Failures are written as small text witnesses
that :func:`replay` can re-run.
"""

from __future__ import annotations

import json
import tempfile
import time
from dataclasses import dataclass, field
from itertools import combinations, product
from pathlib import Path
from typing import Callable, Optional

from . import io as hio
from .amalgamation import (
    amalgams_equivalent,
    mediator,
    mediator_bruteforce,
    mediator_from_solutions,
    non_uniqueness_witness,
    uniqueness_check_one_point,
    unsat_mediator_config,
)
from .forking import ForkingQuery, nonforking_decide, splits_finite
from .galois import (
    PairOracle,
    TypeInstance,
    all_elements,
    existential_fingerprint,
    galois_type_equal,
    in_base,
    search_type_equal,
)
from .generators import gen_random_model, make_rng, random_embedding, random_extension
from .morphisms import check_embedding, compose, fixes, same_map, transport
from .nf import build_nf_witness, chain_levels, nf_decide
from .oracles import exhaustive_extensions, greedy_solution
from .solutions import (
    Solution,
    amalgamate_solutions,
    blocks_over,
    check_solution,
    conjugate_solution,
    extend_solution,
    iso_from_solutions,
    solve_solution,
    zero_solution,
)
from .structure import (
    GSTAR,
    G_SORT,
    HSTAR,
    I_SORT,
    K_SORT,
    Element,
    Model,
    StalkPoint,
    induced_submodel,
)


@dataclass
class SuiteReport:
    name: str
    seed: int
    trials: int
    passed: int = 0
    failed: int = 0
    witnesses: list = field(default_factory=list)
    duration: float = 0.0
    notes: list = field(default_factory=list)
    experiment: bool = False

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        kind = " (experiment)" if self.experiment else ""
        return (
            f"SUITE {self.name}{kind} {verdict} seed={self.seed} trials={self.trials} "
            f"passed={self.passed} failed={self.failed} time={self.duration:.2f}s"
        )


@dataclass(frozen=True)
class Suite:
    name: str
    cases: Callable
    check: Callable
    default_trials: int
    experiment: bool = False


def _rand_group(m: Model, rng, p: float = 0.3) -> frozenset:
    bits = rng.random(len(m.blocks))
    return frozenset(u for u, r in zip(m.blocks, bits) if r < p)


def randomize_free(h: Solution, rng) -> Solution:
    """Flip random coordinates that no equation over the full model can see.

    ``gamma_u(z)`` enters an equation only when ``|u ∪ z| = n + 1``; all other
    coordinates (including those at blocks outside the domain) are free.
    """
    m = h.model
    gamma = {}
    for u in h.domain:
        g = set(h.gamma[u])
        for z in m.blocks:
            if len(u | z) != m.n + 1 or z not in h.domain:
                if rng.random() < 0.5:
                    g ^= {z}
        gamma[u] = frozenset(g)
    out = Solution(m, h.domain, gamma, h.ell)
    assert check_solution(out)
    return out


def random_family(m: Model, A, bs, rng) -> dict:
    """Agreeing solutions over ``A ∪ w`` for every proper subset w of bs, built bottom-up."""
    k = len(bs)
    sols: dict = {}
    for r in range(k):
        for w in combinations(bs, r):
            s = frozenset(w)
            gamma: dict = {}
            ell: dict = {}
            for x in s:
                sub = sols[s - {x}]
                gamma.update(sub.gamma)
                ell.update(sub.ell)
            h = solve_solution(m, blocks_over(m, set(A) | s), gamma, ell, rng=rng)
            if not h:
                raise RuntimeError("could not build an agreeing family")
            # only coordinates outside the member's own covered equations are re-drawn
            fresh = randomize_free(h, rng)
            fresh = Solution(m, h.domain, {u: (fresh.gamma[u] if u not in gamma else gamma[u]) for u in h.domain},
                             h.ell)
            sols[s] = fresh
    return {w: sols[frozenset(w)] for w in combinations(bs, k - 1)}


# -- amalg-dichotomy ------------------------------------------------------


def _dichotomy_cases(seed, trials):
    cases = [["sat", n, i] for n in (2, 3) for i in range(trials)]
    return cases + [["unsat-explicit", 2, 0], ["unsat-search", 3, 0]]


def _explicit_unsat_family():
    m = Model(("a1", "a2", "b1", "b2"), 2)
    A, bs = ["a1", "a2"], ["b1", "b2"]
    z1 = zero_solution(m, blocks_over(m, A + ["b1"]))
    g = dict(z1.gamma)
    g[frozenset({"a1", "b1"})] = frozenset({frozenset({"b1", "b2"})})
    h1 = Solution(m, z1.domain, g, z1.ell)
    h2 = zero_solution(m, blocks_over(m, A + ["b2"]))
    return m, A, bs, {("b1",): h1, ("b2",): h2}


def _confirm_unsat(m, A, bs, family) -> tuple:
    res = amalgamate_solutions(m, A, bs, family)
    if res:
        return False, "expected UNSAT, got a solution"
    if not res.certificate.verify():
        return False, "certificate does not sum to 0 = 1"
    gamma, ell = {}, {}
    for h in family.values():
        gamma.update(h.gamma)
        ell.update(h.ell)
    found = exhaustive_extensions(m, blocks_over(m, set(A) | set(bs)), gamma, ell)
    if found is None:
        return False, "too many free bits for exhaustive confirmation"
    if found:
        return False, "exhaustive enumeration found an extension"
    return True, f"UNSAT with {len(res.certificate)}-equation certificate, confirmed exhaustively"


def _dichotomy_check(seed, case):
    kind, n, i = case
    if kind == "unsat-explicit":
        return _confirm_unsat(*_explicit_unsat_family())
    if kind == "unsat-search":
        for attempt in range(400):
            rng = make_rng(seed, 3, 1000 + attempt)
            size_a = 1 + int(rng.integers(0, 2))
            m = gen_random_model(n, size_a + n, 0.5, rng)
            A, bs = list(m.atoms[:size_a]), list(m.atoms[size_a:])
            fam = random_family(m, A, bs, rng)
            if not amalgamate_solutions(m, A, bs, fam):
                ok, msg = _confirm_unsat(m, A, bs, fam)
                return ok, f"attempt {attempt}: {msg}"
        return False, "no UNSAT family found in 400 attempts"
    rng = make_rng(seed, n, i)
    size = int(rng.integers(n + 1, 7))
    m = gen_random_model(n, size, float(rng.random()), rng)
    for k in range(1, n):
        order = list(rng.permutation(size))
        bs = [m.atoms[j] for j in order[:k]]
        rest = [m.atoms[j] for j in order[k:]]
        A = rest[: int(rng.integers(0, len(rest) + 1))]
        fam = random_family(m, A, bs, rng)
        res = amalgamate_solutions(m, A, bs, fam)
        if not res:
            return False, f"k={k}: UNSAT on |I|={size}"
        if not check_solution(res) or not all(res.extends(h) for h in fam.values()):
            return False, f"k={k}: result invalid or not extending the family"
    return True, ""


# -- sol-iso-roundtrip ----------------------------------------------------


def _random_iso(m: Model, rng, prefix: str = "r"):
    """A random isomorphism out of m onto a relabelled copy."""
    perm = list(rng.permutation(len(m.atoms)))
    pi = {a: f"{prefix}{j}" for a, j in zip(m.atoms, perm)}
    image = Model(tuple(pi[a] for a in m.atoms), m.n)
    delta = {u: _rand_group(image, rng, 0.4) for u in m.blocks}
    eps = {u: int(rng.integers(0, 2)) for u in m.blocks}
    return transport(m, pi, delta, eps)


def _roundtrip_check(seed, case):
    (i,) = case
    rng = make_rng(seed, i)
    n = 2 + int(rng.integers(0, 2))
    m = gen_random_model(n, int(rng.integers(n, 6)), float(rng.random()), rng)
    h_m = randomize_free(solve_solution(m, rng=rng), rng)
    f = _random_iso(m, rng)
    if not check_embedding(f):
        return False, "transported map is not an embedding"
    h_n = conjugate_solution(f, h_m)
    if not check_solution(h_n):
        return False, "conjugate is not a solution"
    if iso_from_solutions(h_m, h_n, f.pi) != f:
        return False, "iso_from_solutions(h, f h f^-1, pi_f) != f"
    other = randomize_free(solve_solution(f.target, rng=rng), rng)
    perm = list(rng.permutation(len(m.atoms)))
    h0 = {a: f.target.atoms[j] for a, j in zip(m.atoms, perm)}
    g = iso_from_solutions(h_m, other, h0)
    if not check_embedding(g) or conjugate_solution(g, h_m) != other:
        return False, "conjugating by iso_from_solutions does not give h^N"
    return True, ""


# -- solution-existence ---------------------------------------------------


def _existence_check(seed, case):
    (i,) = case
    rng = make_rng(seed, i)
    n = (2, 3, 4)[i % 3]
    m = gen_random_model(n, int(rng.integers(0, 7)), float(rng.random()), rng)
    if not check_solution(greedy_solution(m)):
        return False, "greedy oracle failed (model encoding broken)"
    h = solve_solution(m)
    if not h or not check_solution(h):
        return False, "no full solution"
    atoms = [a for a in m.atoms if rng.random() < 0.5]
    part = solve_solution(m, blocks_over(m, atoms), rng=rng)
    if not part:
        return False, "no solution over [A]^n"
    part = randomize_free(part, rng)
    ext = extend_solution(m, part)
    if not ext or not check_solution(ext) or not ext.extends(part):
        return False, f"partial solution over |A|={len(atoms)} did not extend"
    return True, ""


# -- type-oracle ----------------------------------------------------------


def _type_cases(seed, trials):
    out = []
    for k in range(4):
        ntuples = len(Model(tuple("pqr"[:k]), 2).tuples)
        out += [["twist", k, t] for t in range(2 ** ntuples)]
    for k in range(4):
        out += [["ambient", k, t] for t in range(2 ** len(_new_tuples(k)))]
    # four base atoms: 2^12 twists, so a seeded sample
    rng = make_rng(seed, 40)
    return out + [["twist", 4, int(t)] for t in rng.integers(0, 2 ** 12, size=trials)]


def _new_tuples(k: int) -> list:
    """Compatible tuples of the one-point extension by c of k standard atoms that involve c."""
    return [t for t in Model(tuple("pqrs"[:k]) + ("c",), 2).tuples if "c" in t.w]


def _ambient(m: Model, bits: int) -> Model:
    new = _new_tuples(len(m.atoms))
    return Model(m.atoms + ("c",), 2, m.twist | frozenset(t for j, t in enumerate(new) if bits >> j & 1))


def _compare_types(m: Model, a1: Model, a2: Model, rng, spot: int) -> tuple:
    """Fingerprint classes against the batched search over every pair of elements."""
    e1, e2 = all_elements(a1), all_elements(a2)
    oracle = PairOracle(m, a1, a2)
    sets = oracle.equal_sets(e1, e2)
    classes: dict = {}
    for j, y in enumerate(e2):
        fp = existential_fingerprint(TypeInstance((y,), m, a2))
        classes[fp] = classes.get(fp, 0) | (1 << j)
    for i, x in enumerate(e1):
        want = classes.get(existential_fingerprint(TypeInstance((x,), m, a1)), 0)
        if sets[i] != want:
            diff = sets[i] ^ want
            j = (diff & -diff).bit_length() - 1
            return False, f"fingerprint/search disagree on {x!r} vs {e2[j]!r}", 0
    basic = [i for i, x in enumerate(e1) if x.sort == I_SORT and not in_base(m, x)]
    basic2 = sum(1 << j for j, y in enumerate(e2) if y.sort == I_SORT and not in_base(m, y))
    if any(sets[i] & basic2 != basic2 for i in basic):
        return False, "two nonalgebraic atoms with different types", 0
    # the batched oracle against the plain per-pair search on a sample
    for _ in range(spot):
        i = int(rng.integers(0, len(e1)))
        j = int(rng.integers(0, len(e2)))
        t1, t2 = TypeInstance((e1[i],), m, a1), TypeInstance((e2[j],), m, a2)
        plain = search_type_equal(t1, t2) is not None
        auto = galois_type_equal(t1, t2)
        if plain != bool(sets[i] >> j & 1) or auto.equal != plain or auto.route != "fingerprint":
            return False, f"plain search disagrees on {e1[i]!r} vs {e2[j]!r}", 0
    return True, "", len(e1) * len(e2)


def _type_check(seed, case):
    kind, k, tw = case
    rng = make_rng(seed, 41, k, tw)
    if kind == "ambient":
        # standard base, every one-point extension: against itself and the standard one
        m = Model(tuple("pqrs"[:k]), 2)
        a = _ambient(m, tw)
        pairs = [(a, a), (a, _ambient(m, 0))]
        spot = 2
    else:
        skel = Model(tuple("pqrs"[:k]), 2)
        m = Model(skel.atoms, 2, frozenset(t for j, t in enumerate(skel.tuples) if tw >> j & 1))
        amb = [random_extension(m, ["c"], 0.0, rng), random_extension(m, ["c"], 0.5, rng)]
        pairs = [(amb[0], amb[0]), (amb[0], amb[1]), (amb[1], amb[1])]
        spot = 12
    compared = 0
    for a1, a2 in pairs:
        ok, msg, count = _compare_types(m, a1, a2, rng, spot)
        if not ok:
            return False, msg
        compared += count
    return True, f"{compared} pairs"


# -- nonfork-laws ---------------------------------------------------------


def _chain_iso(chain, rng):
    """A random isomorphism of the top model carrying each chain member onto an induced submodel.

    The offset at u is drawn from G of the smallest member containing u.
    """
    top = chain[-1]
    perm = list(rng.permutation(len(top.atoms)))
    pi = {a: f"s{j}" for a, j in zip(top.atoms, perm)}
    delta, eps = {}, {}
    for u in top.blocks:
        owner = next(c for c in chain if u <= c.atom_set)
        delta[u] = _rand_group(Model(tuple(pi[a] for a in owner.atoms), top.n), rng, 0.4)
        eps[u] = int(rng.integers(0, 2))
    return transport(top, pi, delta, eps)


def _image_chain(f, chain):
    return [induced_submodel(f.target, [f.pi[a] for a in c.atoms]) for c in chain]


def _laws_exhaustive(seed, size, tw_kind):
    rng = make_rng(seed, 50, size, tw_kind)
    top = gen_random_model(2, size, 0.0 if tw_kind == 0 else 0.5, rng, atoms=tuple("abcd"[:size]))
    violations = []
    checked = 0
    elems_top = all_elements(top)
    for pattern in product(range(4), repeat=size):
        # 0: in M0, 1: in M - M0, 2: in N - M, 3: outside N (the ambient)
        i0 = [a for a, p in zip(top.atoms, pattern) if p == 0]
        im = [a for a, p in zip(top.atoms, pattern) if p <= 1]
        i_n = [a for a, p in zip(top.atoms, pattern) if p <= 2]
        m0, m, n = (induced_submodel(top, s) for s in (i0, im, i_n))
        els = [x for x in all_elements(n) if not in_base(m, x)]
        iso = _chain_iso([m0, m, n], rng)
        im0, imm, imn = _image_chain(iso, [m0, m, n])
        mids = [induced_submodel(m, set(i0) | set(extra)) for r in range(len(im) - len(i0) + 1)
                for extra in combinations([a for a in im if a not in i0], r)]
        for x in els:
            v = nonforking_decide(ForkingQuery(m0, m, n, x))
            checked += 1
            if v:
                for mid in mids:
                    if not nonforking_decide(ForkingQuery(mid, m, n, x)):
                        violations.append(f"monotonicity: {x!r} over {mid.atoms}")
            w = nonforking_decide(ForkingQuery(im0, imm, imn, iso(x)))
            if (w.holds, w.case) != (v.holds, v.case):
                violations.append(f"invariance: {x!r}")
        if violations:
            return False, violations[0], checked
    # uniqueness: M <= N <= top, instances of elements of top outside N
    for pattern in product(range(3), repeat=size):
        im = [a for a, p in zip(top.atoms, pattern) if p == 0]
        i_n = [a for a, p in zip(top.atoms, pattern) if p <= 1]
        if len(i_n) == size:
            continue
        m, n = induced_submodel(top, im), induced_submodel(top, i_n)
        els = [x for x in elems_top if not in_base(n, x)]
        nf_mask = sum(1 << j for j, x in enumerate(els) if nonforking_decide(ForkingQuery(m, n, top, x)))
        over_m = PairOracle(m, top, top).equal_sets(els, els)
        over_n = PairOracle(n, top, top).equal_sets(els, els)
        for i in range(len(els)):
            if not nf_mask >> i & 1:
                continue
            bad = over_m[i] & nf_mask & ~over_n[i]
            checked += 1
            if bad:
                j = (bad & -bad).bit_length() - 1
                return False, f"uniqueness: {els[i]!r} vs {els[j]!r} over M={m.atoms}, N={n.atoms}", checked
    return True, "", checked


def _random_element(m: Model, rng):
    kinds = [I_SORT, K_SORT, G_SORT, GSTAR, HSTAR] if m.blocks else [I_SORT]
    kind = kinds[int(rng.integers(0, len(kinds)))]
    if kind == I_SORT:
        return Element(I_SORT, m.atoms[int(rng.integers(0, len(m.atoms)))])
    u = m.blocks[int(rng.integers(0, len(m.blocks)))]
    if kind == K_SORT:
        return Element(K_SORT, u)
    if kind == G_SORT:
        return Element(G_SORT, _rand_group(m, rng, 0.15))
    if kind == GSTAR:
        return StalkPoint(GSTAR, u, _rand_group(m, rng, 0.15))
    return StalkPoint(HSTAR, u, int(rng.integers(0, 2)))


def _laws_seeded(seed, i, samples: int = 12):
    rng = make_rng(seed, 51, i)
    size = int(rng.integers(3, 6))
    top = gen_random_model(3, size, float(rng.random()), rng)
    # at least two atoms in M and one outside N
    pattern = [int(rng.integers(0, 4)) for _ in range(size)]
    order = list(rng.permutation(size))
    pattern[order[0]] = 3
    pattern[order[1]] = min(pattern[order[1]], 1)
    pattern[order[2]] = min(pattern[order[2]], 1)
    i0 = [a for a, p in zip(top.atoms, pattern) if p == 0]
    im = [a for a, p in zip(top.atoms, pattern) if p <= 1]
    i_n = [a for a, p in zip(top.atoms, pattern) if p <= 2]
    m0, m, n = (induced_submodel(top, s) for s in (i0, im, i_n))
    rest = [a for a in im if a not in i0]
    mids = [induced_submodel(m, set(i0) | set(extra)) for r in range(len(rest) + 1)
            for extra in combinations(rest, r)]
    movable = [a for a in top.atoms if a not in m.atom_set]
    counts = {"mono": 0, "inv": 0, "uniq": 0}
    for _ in range(samples):
        x = _random_element(top, rng)
        if in_base(m, x):
            continue
        v = nonforking_decide(ForkingQuery(m0, m, top, x))
        if v:
            counts["mono"] += 1
            for mid in mids:
                if not nonforking_decide(ForkingQuery(mid, m, top, x)):
                    return False, f"monotonicity: {x!r} over {mid.atoms}"
        iso = _chain_iso([m0, m, top], rng)
        im0, imm, itop = _image_chain(iso, [m0, m, top])
        w = nonforking_decide(ForkingQuery(im0, imm, itop, iso(x)))
        counts["inv"] += 1
        if (w.holds, w.case) != (v.holds, v.case):
            return False, f"invariance: {x!r}"
        # uniqueness over N: x against a copy moved by a permutation of the atoms outside M
        if in_base(n, x):
            continue
        perm = list(rng.permutation(len(movable)))
        pi = {a: a for a in m.atoms}
        pi.update({a: movable[j] for a, j in zip(movable, perm)})
        y = _push_element(x, pi)
        if in_base(n, y):
            continue
        if not (nonforking_decide(ForkingQuery(m, n, top, x)) and nonforking_decide(ForkingQuery(m, n, top, y))):
            continue
        if search_type_equal(TypeInstance((x,), m, top), TypeInstance((y,), m, top)) is None:
            continue
        counts["uniq"] += 1
        if search_type_equal(TypeInstance((x,), n, top), TypeInstance((y,), n, top)) is None:
            return False, f"uniqueness: {x!r} vs {y!r}"
    return True, " ".join(f"{k}={v}" for k, v in counts.items())


def _push_element(x, pi):
    from .morphisms import push, push_block

    if isinstance(x, StalkPoint):
        off = push(pi, x.offset) if x.sort == GSTAR else x.offset
        return StalkPoint(x.sort, push_block(pi, x.block), off)
    if x.sort == I_SORT:
        return Element(I_SORT, pi[x.value])
    if x.sort == K_SORT:
        return Element(K_SORT, push_block(pi, x.value))
    if x.sort == G_SORT:
        return Element(G_SORT, push(pi, x.value))
    return x


def _nonfork_cases(seed, trials):
    cases = [["exhaustive", size, kind] for size in range(1, 5) for kind in (0, 1)]
    return cases + [["seeded", i, 0] for i in range(trials)]


def _nonfork_check(seed, case):
    kind, a, b = case
    if kind == "exhaustive":
        ok, msg, checked = _laws_exhaustive(seed, a, b)
        return ok, msg or f"{checked} checks"
    return _laws_seeded(seed, a)


# -- uniqueness -----------------------------------------------------------


def _mediator_config(seed, i, n):
    rng = make_rng(seed, 60, n, i)
    base = int(rng.integers(1, 5 if n == 3 else 4))
    names = tuple(f"m{j}" for j in range(base))
    m = gen_random_model(n, base, float(rng.random()), rng, atoms=names)
    ma = random_extension(m, ["a"], 0.5, rng)
    mb = random_extension(m, ["b"], 0.5, rng)
    targets = []
    for _ in range(2):
        skel = random_extension(mb, ["a"], 0.5, rng)
        mab = Model(tuple(list(m.atoms) + ["a", "b"]), n, skel.twist)
        targets.append(mab)
    same = bool(rng.integers(0, 2))
    if same:
        targets[1] = targets[0]
    pi = {x: x for x in ma.atoms}
    fs = [random_embedding(ma, t, pi, rng, fixed=m) for t in targets]
    return m, ma, mb, fs[0], fs[1]


def _uniq_cases(seed, trials):
    cases = [["mediator", 3, i] for i in range(trials)]
    cases += [["check", 3, 0], ["witness", 3, 0], ["witness", 2, 0]]
    cases += [["mediator-unsat", 2, 0], ["check", 2, 0]]
    cases += [["mediator-enum", 2, i] for i in range(20)]
    return cases


def _uniq_check(seed, case):
    kind, n, i = case
    if kind == "mediator":
        m, ma, mb, f1, f2 = _mediator_config(seed, i, n)
        star = mediator_from_solutions(m, ma, mb, f1, f2)
        if not star:
            return False, "2-amalgamation of solutions failed for n = 3"
        ok = check_embedding(star) and star.is_bijective() and fixes(star, mb) and same_map(compose(f1, star), f2)
        return ok, "" if ok else "mediator output does not verify"
    if kind == "check":
        m = Model(("p", "q", "r")[: n], n)
        top = Model(m.atoms + ("a",), n)
        rep = uniqueness_check_one_point("a", m, top, 2, seed=seed, trials=4 if n == 3 else 8)
        if n == 3:
            return rep.verified, str(rep)
        return (not rep.verified), str(rep)
    if kind == "witness":
        w = non_uniqueness_witness(["x1", "x2"], ["y"], "a", n)
        return (not w.equivalent), "amalgams not equivalent" if not w.equivalent else "equivalent?"
    if kind == "mediator-enum":
        # the complete decision against enumeration of every candidate map
        cfg = _mediator_config(seed, i, n)
        star = mediator(*cfg)
        found = mediator_bruteforce(*cfg)
        if star:
            ok = any(same_map(star, g) for g in found)
            return ok, "" if ok else "mediator not among the enumerated maps"
        ok = star.certificate.verify() and not found
        return ok, "" if ok else "UNSAT verdict contradicted by enumeration"
    if kind == "mediator-unsat":
        cfg = unsat_mediator_config(2)
        res = mediator(*cfg)
        if res:
            return False, "expected UNSAT"
        if not res.certificate.verify():
            return False, "certificate does not verify"
        if mediator_bruteforce(*cfg):
            return False, "brute force found a mediator"
        return True, "UNSAT confirmed by enumeration"
    return False, f"unknown case {case}"


# -- nf-dap ---------------------------------------------------------------


def _nf_cases(seed, trials):
    return [[size, kind] for size in range(0, 6) for kind in (0, 1)]


def _nf_check(seed, case):
    size, kind = case
    rng = make_rng(seed, 70, size, kind)
    m3 = gen_random_model(2, size, 0.0 if kind == 0 else 0.5, rng)
    count = 0
    for pattern in product(range(5), repeat=size):
        # 0: M0, 1: M1 only, 2: M2 only, 3: M1 and M2 but not M0, 4: M3 only
        sel = lambda keep: [a for a, p in zip(m3.atoms, pattern) if p in keep]
        m0 = induced_submodel(m3, sel({0}))
        m1 = induced_submodel(m3, sel({0, 1, 3}))
        m2 = induced_submodel(m3, sel({0, 2, 3}))
        disjoint = 3 not in pattern
        verdict = nf_decide(m0, m1, m2, m3)
        if verdict != disjoint:
            return False, f"nf_decide wrong on pattern {pattern}"
        if disjoint:
            chain = build_nf_witness(m0, m1, m2, m3)
            if not chain.validate() or chain.alpha != len(m1.atoms) - len(m0.atoms):
                return False, f"witness chain invalid on pattern {pattern}"
        else:
            if chain_levels(m0, m1, m2, m3).validate():
                return False, f"chain validates on the false side, pattern {pattern}"
            try:
                build_nf_witness(m0, m1, m2, m3)
                return False, f"build_nf_witness accepted pattern {pattern}"
            except ValueError:
                pass
        count += 1
    return True, f"{count} configurations"


# -- serialization --------------------------------------------------------


def _ser_check(seed, case):
    (i,) = case
    rng = make_rng(seed, 80, i)
    n = 2 + int(rng.integers(0, 3))
    m = gen_random_model(n, int(rng.integers(0, 7)), float(rng.random()), rng)
    text = hio.serialize_model(m)
    back = hio.parse_model(text)
    if back != m or hio.serialize_model(back) != text:
        return False, "model round trip changed the text"
    h = randomize_free(solve_solution(m, rng=rng), rng)
    stext = hio.serialize_solution(h)
    if hio.parse_solution(stext, m) != h or hio.serialize_solution(hio.parse_solution(stext, m)) != stext:
        return False, "solution round trip changed the text"
    f = _random_iso(m, rng)
    etext = hio.serialize_embedding(f)
    g = hio.parse_embedding(etext, m, f.target)
    if g != f or hio.serialize_embedding(g) != etext:
        return False, "embedding round trip changed the text"
    return True, ""


# -- split-vs-nonfork (experiment) ---------------------------------------


def _split_check(seed, case):
    (i,) = case
    rng = make_rng(seed, 90, i)
    size = int(rng.integers(2, 5))
    top = gen_random_model(2, size + 1, float(rng.random()), rng)
    m = induced_submodel(top, top.atoms[:size])
    m0 = induced_submodel(top, top.atoms[: int(rng.integers(0, size + 1))])
    x = None
    for _ in range(50):
        cand = _random_element(top, rng)
        if not in_base(m, cand):
            x = cand
            break
    if x is None:
        return True, "skip"
    nf = nonforking_decide(ForkingQuery(m0, m, top, x)).holds
    sp = splits_finite(m0, TypeInstance((x,), m, top), budget=2, seed=i)
    return True, "agree" if nf != sp else f"differ nonfork={nf} splits={sp} on {x!r}"


SUITES = {
    "amalg-dichotomy": Suite("amalg-dichotomy", _dichotomy_cases, _dichotomy_check, 100),
    "sol-iso-roundtrip": Suite("sol-iso-roundtrip", lambda s, t: [[i] for i in range(t)], _roundtrip_check, 200),
    "solution-existence": Suite("solution-existence", lambda s, t: [[i] for i in range(t)], _existence_check, 500),
    "type-oracle": Suite("type-oracle", _type_cases, _type_check, 4),
    "nonfork-laws": Suite("nonfork-laws", _nonfork_cases, _nonfork_check, 500),
    "uniqueness": Suite("uniqueness", _uniq_cases, _uniq_check, 100),
    "nf-dap": Suite("nf-dap", _nf_cases, _nf_check, 0),
    "serialization": Suite("serialization", lambda s, t: [[i] for i in range(t)], _ser_check, 100),
    "split-vs-nonfork": Suite("split-vs-nonfork", lambda s, t: [[i] for i in range(t)], _split_check, 200, True),
}


def _write_witness(out: Path, suite: str, seed: int, case, message: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    tag = "-".join(str(c) for c in case)
    path = out / f"witness-{suite}-{seed}-{tag}.txt"
    path.write_text(
        "HSWITNESS 1\n"
        f"SUITE {suite}\n"
        f"SEED {seed}\n"
        f"CASE {json.dumps(case)}\n"
        "VERDICT fail\n"
        f"MESSAGE {message}\n"
    )
    return path


def run_property_suite(
    name: str,
    seed: int = 0,
    trials: Optional[int] = None,
    out: Optional[Path] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    suite = SUITES[name]
    t = suite.default_trials if trials is None else trials
    report = SuiteReport(name, seed, t, experiment=suite.experiment)
    start = time.perf_counter()
    cases = suite.cases(seed, t)
    for idx, case in enumerate(cases):
        try:
            ok, msg = suite.check(seed, case)
        except Exception as exc:  # a crash is a failure with a witness
            ok, msg = False, f"{type(exc).__name__}: {exc}"
        if ok:
            report.passed += 1
            if suite.experiment and msg:
                report.notes.append(f"{json.dumps(case)} {msg}")
        else:
            report.failed += 1
            report.notes.append(f"{json.dumps(case)} {msg}")
            target = Path(out) if out is not None else Path(tempfile.mkdtemp(prefix="hsaec-witness-"))
            report.witnesses.append(str(_write_witness(target, name, seed, case, msg)))
        if progress is not None:
            progress(idx + 1, len(cases))
    report.duration = time.perf_counter() - start
    return report


def replay(path) -> bool:
    """Re-run a witness; True when the failure reproduces."""
    fields = {}
    for line in Path(path).read_text().splitlines():
        if " " in line:
            key, value = line.split(" ", 1)
            fields[key] = value
    suite = SUITES[fields["SUITE"]]
    ok, _ = suite.check(int(fields["SEED"]), json.loads(fields["CASE"]))
    return (not ok) == (fields.get("VERDICT") == "fail")
