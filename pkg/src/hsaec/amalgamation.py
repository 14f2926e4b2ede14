"""Amalgams, their equivalence, the one-point mediator and uniqueness checks.

An amalgam of M1 and M2 over M0 is ``(N, f1, f2)`` with ``f1∘incl = f2∘incl``
on M0.  Equivalence asks for ``g_A, g_B`` into a common N* with
``g_A∘f1_A = g_B∘f1_B`` and ``g_A∘f2_A = g_B∘f2_B``; the atom maps on the
images are forced, the other atoms are identified or kept apart, and the
offsets are solved for.

The mediator aligns two embeddings ``f1, f2: Ma -> Mab`` that fix M and send
the new atom a to itself, by an isomorphism ``f*`` fixing Mb.  It is built
from solutions: ``h`` on M, ``h_a`` on Ma and ``h_b`` on Mb, with
``f_l(h_a)`` and ``h_b`` 2-amalgamated inside each target.  When that
2-amalgamation fails (only possible for n = 2) the failure says nothing about
other solution choices, so existence is then decided by a direct linear
system in the free offsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence

from .gf2 import Certificate, GF2System
from .morphisms import (
    Embedding,
    EmbeddingError,
    check_embedding,
    compose,
    fixes,
    inclusion,
    invert,
    same_map,
)
from .search import MediatingSystem, SearchBudgetExceeded, fresh_name, star_maps
from .solutions import (
    Solution,
    amalgamate_solutions,
    iso_from_solutions,
    push_solution,
    solve_solution,
)
from .structure import ZERO, CompTuple, Model, ModelError, induced_submodel, is_induced
from .generators import make_rng, random_embedding, random_extension


@dataclass(frozen=True, eq=False)
class Amalgam:
    base: Model
    side1: Model
    side2: Model
    result: Model
    f1: Embedding
    f2: Embedding

    def __post_init__(self):
        for side in (self.side1, self.side2):
            if not is_induced(self.base, side):
                raise ModelError("the base is not an induced submodel of a side")
        if self.f1.source != self.side1 or self.f2.source != self.side2:
            raise EmbeddingError("embedding sources do not match the sides")
        if self.f1.target != self.result or self.f2.target != self.result:
            raise EmbeddingError("embedding targets do not match the result")
        if not (check_embedding(self.f1) and check_embedding(self.f2)):
            raise EmbeddingError("an amalgam map is not an embedding")
        r1 = compose(inclusion(self.base, self.side1), self.f1)
        r2 = compose(inclusion(self.base, self.side2), self.f2)
        if not same_map(r1, r2):
            raise EmbeddingError("the two maps disagree on the base")


def disjoint_amalgam(m0: Model, m1: Model, m2: Model) -> Amalgam:
    """Glue M1 and M2 along M0; new atoms of M2 are renamed away from M1."""
    if not (is_induced(m0, m1) and is_induced(m0, m2)):
        raise ModelError("M0 must be an induced submodel of both sides")
    taken = set(m1.atoms) | set(m2.atoms)
    rename = {a: a for a in m0.atoms}
    for a in m2.atoms:
        if a in rename:
            continue
        if a in m1.atom_set:
            name = fresh_name(a, taken)
            taken.add(name)
            rename[a] = name
        else:
            rename[a] = a
    atoms = tuple(m1.atoms) + tuple(rename[a] for a in m2.atoms if a not in m0.atom_set)
    twist = set(m1.twist)
    for t in m2.twist:
        twist.add(CompTuple(frozenset(rename[a] for a in t.v), frozenset(rename[a] for a in t.w)))
    n = Model(atoms, m0.n, frozenset(twist))
    f1 = inclusion(m1, n)
    f2 = Embedding(m2, n, rename)
    return Amalgam(m0, m1, m2, n, f1, f2)


@dataclass(frozen=True)
class Equivalence:
    equivalent: bool
    mediators: Optional[tuple] = field(default=None, compare=False)
    tried: int = 0

    def __bool__(self) -> bool:
        return self.equivalent


def _forced_map(a: Amalgam, b: Amalgam) -> Optional[dict]:
    """Atoms of N_B whose image is forced by commutation, or None on a clash."""
    out: dict = {}
    for fa, fb in ((a.f1, b.f1), (a.f2, b.f2)):
        for x, y in fb.pi.items():
            target = fa.pi[x]
            if out.setdefault(y, target) != target:
                return None
    if len(set(out.values())) != len(out):
        return None
    return out


def amalgams_equivalent(
    a: Amalgam,
    b: Amalgam,
    budget: Optional[int] = None,
    progress: Optional[Callable[[int], None]] = None,
) -> Equivalence:
    """Bounded search for ``(N*, g_A, g_B)``; exhaustive over span-generated N*."""
    if a.base != b.base or a.side1 != b.side1 or a.side2 != b.side2:
        raise ModelError("amalgams over different base or sides")
    forced = _forced_map(a, b)
    if forced is None:
        return Equivalence(False, None, 0)
    left_used = set(forced.values())
    left_free = [x for x in a.result.atoms if x not in left_used]
    right_free = [y for y in b.result.atoms if y not in forced]
    tried = 0
    for lm, rm in star_maps(forced, a.result, b.result, right_free, left_free):
        tried += 1
        if budget is not None and tried > budget:
            raise SearchBudgetExceeded(f"more than {budget} identifications")
        if progress is not None:
            progress(tried)
        ms = MediatingSystem([a.result, b.result], [lm, rm])
        ms.preserve_q(0)
        ms.preserve_q(1)
        ms.commute(0, a.f1, 1, b.f1)
        ms.commute(0, a.f2, 1, b.f2)
        found = ms.solve()
        if found is not None:
            star, (ga, gb) = found
            return Equivalence(True, (star, ga, gb), tried)
    return Equivalence(False, None, tried)


# -- mediator -------------------------------------------------------------


@dataclass(frozen=True)
class MediatorUnsat:
    """2-amalgamation of solutions failed inside the target of ``f_side``."""

    side: int
    certificate: Certificate

    def __bool__(self) -> bool:
        return False


def _single_new(small: Model, big: Model, what: str):
    extra = [x for x in big.atoms if x not in small.atom_set]
    if len(extra) != 1 or not is_induced(small, big):
        raise ModelError(f"{what} must be a one-point induced extension of M")
    return extra[0]


def _check_config(m: Model, ma: Model, mb: Model, f1: Embedding, f2: Embedding) -> tuple:
    a = _single_new(m, ma, "Ma")
    b = _single_new(m, mb, "Mb")
    if a == b:
        raise ModelError("the new atoms of Ma and Mb must differ")
    want = m.atom_set | {a, b}
    for f in (f1, f2):
        if f.source != ma or not check_embedding(f):
            raise EmbeddingError("f1 and f2 must be embeddings of Ma")
        if f.target.atom_set != want or not is_induced(mb, f.target):
            raise ModelError("targets must live on I(M) + {a, b} and induce Mb")
        if f.pi.get(a) != a or not fixes(f, m):
            raise EmbeddingError("f1 and f2 must fix M and send a to a")
    return a, b


def mediator_from_solutions(m: Model, ma: Model, mb: Model, f1: Embedding, f2: Embedding):
    """``f*: f1.target -> f2.target`` fixing Mb with ``f*∘f1 = f2``, built by 2-amalgamating solutions.

    Returns :class:`MediatorUnsat` when the 2-amalgamation for the chosen
    solutions fails.  That certifies the failure of this family only; see
    :func:`mediator` for a complete decision.  The two targets may be
    different models on the same atoms, both inducing Mb.
    """
    a, b = _check_config(m, ma, mb, f1, f2)
    h = solve_solution(m)
    h_a = solve_solution(ma, None, h.gamma, h.ell)
    h_b = solve_solution(mb, None, h.gamma, h.ell)
    full = []
    for side, f in ((1, f1), (2, f2)):
        h_la = push_solution(f, h_a)
        h_lb = Solution(f.target, h_b.domain, h_b.gamma, h_b.ell)
        hab = amalgamate_solutions(f.target, m.atoms, [a, b], {(a,): h_la, (b,): h_lb})
        if not hab:
            return MediatorUnsat(side, hab.certificate)
        full.append(hab)
    star = iso_from_solutions(full[0], full[1], {x: x for x in f1.target.atoms})
    _verify_mediator(star, mb, f1, f2)
    return star


def _verify_mediator(star: Embedding, mb: Model, f1: Embedding, f2: Embedding) -> None:
    if not check_embedding(star) or not fixes(star, mb):
        raise RuntimeError("mediator failed verification: not an isomorphism fixing Mb")
    if not same_map(compose(f1, star), f2):
        raise RuntimeError("mediator failed verification: f*∘f1 != f2")


def _forced_offsets(ma: Model, mb: Model, f1: Embedding, f2: Embedding) -> tuple:
    """Offsets of any mediator on K(Ma) and K(Mb); the rest are free."""
    delta = {u: f1.d(u) ^ f2.d(u) for u in ma.blocks}
    eps = {u: f1.e(u) ^ f2.e(u) for u in ma.blocks}
    for u in mb.blocks:
        delta[u] = ZERO
        eps[u] = 0
    return delta, eps


def mediator_linear(m: Model, ma: Model, mb: Model, f1: Embedding, f2: Embedding):
    """Decide mediator existence directly as a GF(2) system in the free offsets.

    An UNSAT certificate here proves that no mediator exists.
    """
    a, b = _check_config(m, ma, mb, f1, f2)
    t1, t2 = f1.target, f2.target
    delta, eps = _forced_offsets(ma, mb, f1, f2)
    sys_ = GF2System()
    for t in t1.tuples:
        const = t1.q(t.v, t.w) ^ t2.q(t.v, t.w)
        terms = []
        for u in t.others():
            if u in delta:
                const ^= 1 if t.v in delta[u] else 0
            else:
                terms.append(("d", u, t.v))
        if t.v in eps:
            const ^= eps[t.v]
        else:
            terms.append(("e", t.v))
        sys_.add(terms, const, label=t)
    values = sys_.solve()
    if values is None:
        return MediatorUnsat(0, sys_.certificate())
    free: dict = {}
    for key, bit in values.items():
        if key[0] == "d":
            bits = free.setdefault(key[1], set())
            if bit:
                bits.add(key[2])
        elif bit:
            eps[key[1]] = 1
    delta.update({u: frozenset(g) for u, g in free.items()})
    star = Embedding(t1, t2, {x: x for x in t1.atoms}, delta, eps)
    _verify_mediator(star, mb, f1, f2)
    return star


def mediator(m: Model, ma: Model, mb: Model, f1: Embedding, f2: Embedding):
    """A mediator, or :class:`MediatorUnsat` proving that none exists.

    The solution route is tried first; if its 2-amalgamation fails the
    decision falls back to :func:`mediator_linear`, which is complete.
    """
    star = mediator_from_solutions(m, ma, mb, f1, f2)
    if star:
        return star
    return mediator_linear(m, ma, mb, f1, f2)


def mediator_bruteforce(m: Model, ma: Model, mb: Model, f1: Embedding, f2: Embedding, max_bits: int = 22):
    """All mediators by enumeration; returns the list (possibly empty).

    The offsets of ``f*`` are forced on K(Ma) and K(Mb); only blocks holding
    both a and b are free, and every assignment of those is tried.
    """
    a, b = _check_config(m, ma, mb, f1, f2)
    t1, t2 = f1.target, f2.target
    forced_d, forced_e = _forced_offsets(ma, mb, f1, f2)
    free = [u for u in t1.blocks if a in u and b in u]
    nbits = len(free) * (len(t2.blocks) + 1)
    if nbits > max_bits:
        raise SearchBudgetExceeded(f"{nbits} free bits exceed the enumeration cap {max_bits}")
    pi = {x: x for x in t1.atoms}
    out = []
    for bits in product((0, 1), repeat=nbits):
        delta = dict(forced_d)
        eps = dict(forced_e)
        it = iter(bits)
        for u in free:
            delta[u] = frozenset(z for z in t2.blocks if next(it))
            eps[u] = next(it)
        cand = Embedding(t1, t2, pi, delta, eps)
        if check_embedding(cand) and same_map(compose(f1, cand), f2):
            out.append(cand)
    return out


# -- uniqueness of one-point amalgams ------------------------------------


@dataclass(frozen=True, eq=False)
class UniquenessReport:
    verified: bool
    budget: int
    configurations: int
    counterexample: Optional[tuple] = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.verified

    def __str__(self) -> str:
        if self.verified:
            return f"verified up to s={self.budget} ({self.configurations} configurations)"
        return f"counterexample after {self.configurations} configurations: {self.note}"


def pullback(target: Model, atoms, delta, eps) -> Embedding:
    """The submodel of ``target`` on ``atoms`` whose stalks are shifted by ``delta, eps``.

    Returns the embedding ``e: P -> target`` (identity on atoms); P carries
    the twist that makes ``e`` preserve Q.
    """
    keep = frozenset(atoms)
    skeleton = Model(tuple(x for x in target.atoms if x in keep), target.n)
    twist = set()
    for t in skeleton.tuples:
        parity = target.q(t.v, t.w) ^ eps.get(t.v, 0)
        for u in t.others():
            if t.v in delta.get(u, ZERO):
                parity ^= 1
        if parity:
            twist.add(t)
    p = Model(skeleton.atoms, skeleton.n, frozenset(twist))
    return Embedding(p, target, {x: x for x in p.atoms}, {u: delta[u] for u in p.blocks if u in delta},
                     {u: eps[u] for u in p.blocks if u in eps})


def chain_mediators(a: str, m: Model, n: Model, m1: Model, f_1: Embedding, f_2: Embedding):
    """Align two one-point amalgams one new atom of M1 at a time.

    ``f_l: N -> M^-_l`` fix M and send a to a; both targets induce M1.  Level
    j uses the submodel P^l_j of M^-_l on I(M) + {b_0..b_{j-1}} + {a} that
    contains f_l[N] (a pullback, so f_l factors through a zero-offset
    inclusion) and each step is one :func:`mediator` call.  Returns
    ``F: M^-_1 -> M^-_2`` fixing M1 with ``F∘f_1 = f_2``, or
    ``(step, MediatorUnsat)``.
    """
    order = [x for x in m1.atoms if x not in m.atom_set]
    es = []
    for f in (f_1, f_2):
        es.append((f.target, dict(f.delta), dict(f.eps)))
    base_atoms = list(m.atoms)
    levels = [pullback(t, base_atoms + [a], d, e) for t, d, e in es]
    star = Embedding(levels[0].source, levels[1].source, {x: x for x in n.atoms})
    for j, b in enumerate(order):
        nj = induced_submodel(m1, base_atoms)
        nj1 = induced_submodel(m1, base_atoms + [b])
        nxt_levels = [pullback(t, base_atoms + [a, b], d, e) for t, d, e in es]
        lo1, lo2 = levels[0].source, levels[1].source
        hi1, hi2 = nxt_levels[0].source, nxt_levels[1].source
        g1 = inclusion(lo1, hi1)
        g2 = compose(star, inclusion(lo2, hi2))
        nxt = mediator(nj, lo1, nj1, g1, g2)
        if not nxt:
            return j, nxt
        star, levels = nxt, nxt_levels
        base_atoms.append(b)
    full = compose(compose(invert(levels[0]), star), levels[1])
    if not (check_embedding(full) and full.is_bijective() and fixes(full, m1)):
        raise RuntimeError("chained mediator is not an isomorphism fixing M1")
    if not same_map(compose(f_1, full), f_2):
        raise RuntimeError("chained mediator does not carry f_1 to f_2")
    return full


def uniqueness_check_one_point(
    a: str,
    m: Model,
    n: Model,
    budget: int,
    seed: int = 0,
    trials: int = 4,
    density: float = 0.5,
    progress: Optional[Callable[[int], None]] = None,
) -> UniquenessReport:
    """Test the amalgams of N with extensions M1 of M by up to ``budget`` atoms.

    For each size ``t <= budget`` and each trial a seeded M1, two seeded
    one-point extensions of M1 by a, and random embeddings ``f_l`` of N fixing
    M are drawn; the mediator chain must align them.  A failed chain is only
    reported after :func:`amalgams_equivalent` confirms the two amalgams are
    not equivalent.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if _single_new(m, n, "N") != a:
        raise ModelError("I(N) must be I(M) + {a}")
    taken = set(n.atoms)
    count = 0
    for t in range(1, budget + 1):
        for trial in range(trials):
            rng = make_rng(seed, t, trial)
            new = []
            for i in range(t):
                name = fresh_name(f"b{i}", taken | set(new))
                new.append(name)
            m1 = random_extension(m, new, density, rng)
            targets = [random_extension(m1, [a], density, rng) for _ in range(2)]
            pi = {x: x for x in n.atoms}
            fs = [random_embedding(n, tg, pi, rng, fixed=m) for tg in targets]
            if any(f is None for f in fs):
                raise RuntimeError("no embedding of N into a one-point extension")
            count += 1
            if progress is not None:
                progress(count)
            got = chain_mediators(a, m, n, m1, fs[0], fs[1])
            if isinstance(got, Embedding):
                continue
            amal = [
                Amalgam(m, n, m1, f.target, f, inclusion(m1, f.target)) for f in fs
            ]
            eq = amalgams_equivalent(amal[0], amal[1])
            if eq:
                continue
            note = f"t={t} trial={trial}: mediator UNSAT at step {got[0]}, amalgams not equivalent"
            return UniquenessReport(False, budget, count, (m1, amal[0], amal[1], got[1]), note)
    return UniquenessReport(True, budget, count)


# -- the explicit non-uniqueness configuration ---------------------------


@dataclass(frozen=True, eq=False)
class NonUniquenessWitness:
    m: Model
    m_plus: Model
    n: Model
    n0: Model
    n1: Model
    f0: Embedding
    f1: Embedding
    amalgam0: Amalgam
    amalgam1: Amalgam
    equivalent: bool


def copy_name(x: str, ell: int) -> str:
    return f"{x}_{ell}"


def non_uniqueness_witness(X: Sequence[str], Xplus: Sequence[str], a: str, n: int) -> NonUniquenessWitness:
    """Standard models on X, X + X+ + {a}, X + 2×X+ (+ {a}) and the two maps of M+."""
    X, Xplus = list(X), list(Xplus)
    if not Xplus:
        raise ValueError("X+ must be nonempty")
    if len(set(X) | set(Xplus) | {a}) != len(X) + len(Xplus) + 1:
        raise ValueError("X, X+ and a must be pairwise disjoint")
    copies = [copy_name(x, ell) for ell in (0, 1) for x in Xplus]
    if set(copies) & (set(X) | {a}):
        raise ValueError("copy names collide with X or a")
    m = Model(tuple(X), n)
    m_plus = Model(tuple(X) + tuple(Xplus) + (a,), n)
    big = Model(tuple(X) + tuple(copies), n)
    n0 = Model(big.atoms + (a,), n)
    n1 = Model(big.atoms + (a,), n)
    fs = []
    for ell, tgt in ((0, n0), (1, n1)):
        pi = {x: x for x in X}
        pi[a] = a
        pi.update({x: copy_name(x, ell) for x in Xplus})
        fs.append(Embedding(m_plus, tgt, pi))
    am = [Amalgam(m, m_plus, big, tgt, f, inclusion(big, tgt)) for f, tgt in zip(fs, (n0, n1))]
    eq = amalgams_equivalent(am[0], am[1])
    return NonUniquenessWitness(m, m_plus, big, n0, n1, fs[0], fs[1], am[0], am[1], eq.equivalent)


def unsat_mediator_config(n: int = 2) -> tuple:
    """A standard configuration where no mediator exists (n = 2 only).

    M on {a1, a2}; f1 is the inclusion and f2 the inclusion shifted by
    ``{{a, b}}`` on the block {a1, a}.  Q on the tuples with v = {a, b} then
    forces ``eps*_{ab} = 1`` (through a1) and ``= 0`` (through a2).
    """
    if n != 2:
        raise ValueError("the explicit configuration is for n = 2")
    m = Model(("a1", "a2"), 2)
    ma = Model(("a1", "a2", "a"), 2)
    mb = Model(("a1", "a2", "b"), 2)
    mab = Model(("a1", "a2", "a", "b"), 2)
    f1 = inclusion(ma, mab)
    f2 = Embedding(ma, mab, {x: x for x in ma.atoms}, {frozenset({"a1", "a"}): frozenset({frozenset({"a", "b"})})})
    return m, ma, mb, f1, f2
