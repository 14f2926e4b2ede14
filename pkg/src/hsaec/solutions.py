"""Solutions, their extension and amalgamation, and the solution/isomorphism dictionary.

A solution over a block set W picks one G* point ``(u, gamma_u)`` and one H*
point ``(v, ell_v)`` per block so that Q holds on every compatible tuple whose
blocks all lie in W.  With the offset encoding this is the GF(2) system

    sum_{u in [w]^n - {v}} gamma_u(v) + ell_v = q(v, w)    for covered (v, w).

``gamma_u`` is a full element of G(model): coordinates outside the covered
tuples still matter once the solution is extended or amalgamated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .gf2 import Certificate, GF2System
from .morphisms import Embedding, EmbeddingError, check_embedding, push, push_block
from .structure import ZERO, Atom, Block, Model, ModelError, induced_submodel


class SolutionError(ValueError):
    """Malformed solution input (distinct from an unsatisfiable problem)."""


@dataclass(frozen=True, eq=False)
class Solution:
    model: Model
    domain: frozenset
    gamma: Mapping = field(default_factory=dict)
    ell: Mapping = field(default_factory=dict)

    def __post_init__(self):
        dom = frozenset(self.domain)
        gamma = {u: frozenset(g) for u, g in self.gamma.items()}
        ell = {u: int(b) & 1 for u, b in self.ell.items()}
        for u in dom:
            gamma.setdefault(u, ZERO)
            ell.setdefault(u, 0)
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "ell", ell)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Solution):
            return NotImplemented
        return (
            self.model == other.model
            and self.domain == other.domain
            and self.gamma == other.gamma
            and self.ell == other.ell
        )

    __hash__ = None  # type: ignore[assignment]

    def restrict(self, domain: Iterable[Block]) -> "Solution":
        d = frozenset(domain)
        if not d <= self.domain:
            raise SolutionError("restriction domain is not contained in the solution domain")
        return Solution(self.model, d, {u: self.gamma[u] for u in d}, {u: self.ell[u] for u in d})

    def extends(self, other: "Solution") -> bool:
        return other.domain <= self.domain and all(
            self.gamma[u] == other.gamma[u] and self.ell[u] == other.ell[u] for u in other.domain
        )

    def __repr__(self) -> str:
        nz = sum(1 for g in self.gamma.values() if g)
        return f"Solution(|W|={len(self.domain)}, nonzero gamma={nz}, ell ones={sum(self.ell.values())})"


@dataclass(frozen=True)
class Unsat:
    """An unsatisfiable solution problem together with its certificate."""

    certificate: Certificate

    def __bool__(self) -> bool:
        return False


def blocks_over(m: Model, atoms: Iterable[Atom]) -> frozenset:
    """[A]^n as blocks of ``m``."""
    a = frozenset(atoms)
    return frozenset(u for u in m.blocks if u <= a)


def covered_tuples(m: Model, domain: frozenset) -> list:
    return [t for t in m.tuples if t.v in domain and all(u in domain for u in t.others())]


def solution_violations(h: Solution) -> list:
    m = h.model
    out = []
    if not h.domain <= m.block_set:
        return ["domain is not a set of blocks of the model"]
    if set(h.gamma) != h.domain or set(h.ell) != h.domain:
        return ["gamma/ell are not defined exactly on the domain"]
    for u, g in h.gamma.items():
        if not m.in_group(g):
            out.append(f"gamma at {sorted(u)} is not an element of G")
    for t in covered_tuples(m, h.domain):
        parity = h.ell[t.v]
        for u in t.others():
            if t.v in h.gamma[u]:
                parity ^= 1
        if parity != m.q(t.v, t.w):
            out.append(f"Q fails on {sorted(t.v)}|{sorted(t.w)}")
    return out


def check_solution(h: Solution) -> bool:
    m = h.model
    if not h.domain <= m.block_set:
        raise SolutionError("domain is not a set of blocks of the model")
    if set(h.gamma) != h.domain or set(h.ell) != h.domain:
        raise SolutionError("gamma/ell are not defined exactly on the domain")
    return not solution_violations(h)


def _system(m: Model, domain: frozenset, gamma_pins: Mapping, ell_pins: Mapping) -> GF2System:
    sys_ = GF2System()
    for t in covered_tuples(m, domain):
        terms = []
        const = m.q(t.v, t.w)
        for u in sorted(t.others(), key=m.key):
            if u in gamma_pins:
                const ^= 1 if t.v in gamma_pins[u] else 0
            else:
                terms.append(("gamma", u, t.v))
        if t.v in ell_pins:
            const ^= ell_pins[t.v]
        else:
            terms.append(("ell", t.v))
        sys_.add(terms, const, label=t)
    return sys_


def solve_solution(
    m: Model,
    domain: Optional[Iterable[Block]] = None,
    gamma_pins: Optional[Mapping] = None,
    ell_pins: Optional[Mapping] = None,
    rng=None,
):
    """A solution over ``domain`` (default: all of K) extending the pins, or :class:`Unsat`.

    Unpinned coordinates not forced by elimination are 0, or random bits when
    ``rng`` (a numpy Generator) is given.
    """
    dom = m.block_set if domain is None else frozenset(domain)
    gamma_pins = dict(gamma_pins or {})
    ell_pins = {u: int(b) & 1 for u, b in (ell_pins or {}).items()}
    if not dom <= m.block_set:
        raise SolutionError("domain contains blocks outside the model")
    stray = (set(gamma_pins) | set(ell_pins)) - dom
    if stray:
        raise SolutionError(f"pins reference {len(stray)} block(s) outside the domain")
    for u, g in gamma_pins.items():
        if not m.in_group(g):
            raise SolutionError(f"pinned gamma at {sorted(u)} is not an element of G")
    sys_ = _system(m, dom, gamma_pins, ell_pins)
    values = sys_.solve(rng)
    if values is None:
        return Unsat(sys_.certificate())
    gamma = {u: set() for u in dom if u not in gamma_pins}
    ell = {u: 0 for u in dom if u not in ell_pins}
    for key, bit in values.items():
        if not bit:
            continue
        if key[0] == "gamma":
            gamma[key[1]].add(key[2])
        else:
            ell[key[1]] = 1
    gamma = {u: frozenset(s) for u, s in gamma.items()}
    gamma.update(gamma_pins)
    ell.update(ell_pins)
    return Solution(m, dom, gamma, ell)


def extend_solution(m: Model, h: Solution, domain: Optional[Iterable[Block]] = None, rng=None):
    """Extend ``h`` to ``domain`` (default: all of K) or return :class:`Unsat`."""
    if h.model != m:
        raise SolutionError("solution belongs to a different model")
    if not check_solution(h):
        raise SolutionError("cannot extend an invalid solution")
    dom = m.block_set if domain is None else frozenset(domain)
    if not h.domain <= dom:
        raise SolutionError("target domain must contain the solution domain")
    return solve_solution(m, dom, h.gamma, h.ell, rng=rng)


def amalgamate_solutions(
    m: Model,
    base: Iterable[Atom],
    bs: Sequence[Atom],
    hws: Mapping,
    rng=None,
):
    """k-amalgamation: merge solutions over ``A ∪ w`` for every (k-1)-subset w of ``bs``.

    ``hws`` maps each (k-1)-subset (any iterable of atoms) to its solution.
    Disagreement between the family members is a precondition violation and
    raises SolutionError; an unsatisfiable merge returns :class:`Unsat`.
    """
    a = frozenset(base)
    b = list(bs)
    k = len(b)
    if k < 1 or len(set(b)) != k or a & set(b):
        raise SolutionError("bs must be k >= 1 distinct atoms outside A")
    if not (a | set(b)) <= m.atom_set:
        raise SolutionError("atoms outside the model")
    family = {frozenset(w): h for w, h in hws.items()}
    wanted = {frozenset(w) for w in combinations(b, k - 1)}
    if set(family) != wanted:
        raise SolutionError(f"expected one solution per {k - 1}-subset of bs")
    gamma: dict = {}
    ell: dict = {}
    for w in sorted(family, key=m.key):
        h = family[w]
        if h.model != m:
            raise SolutionError("family member belongs to a different model")
        if h.domain != blocks_over(m, a | w):
            raise SolutionError(f"member for {sorted(w)} is not a solution over A ∪ w")
        if not check_solution(h):
            raise SolutionError(f"member for {sorted(w)} is not a valid solution")
        for u in h.domain:
            if u in gamma and (gamma[u] != h.gamma[u] or ell[u] != h.ell[u]):
                raise SolutionError(f"family members disagree on block {sorted(u)}")
            gamma[u] = h.gamma[u]
            ell[u] = h.ell[u]
    return solve_solution(m, blocks_over(m, a | set(b)), gamma, ell, rng=rng)


def push_solution(f: Embedding, h: Solution) -> Solution:
    """Image of ``h`` under an embedding: gamma' = pi_* gamma + delta, ell' = ell + eps."""
    if h.model != f.source:
        raise SolutionError("solution does not belong to the embedding's source")
    gamma = {}
    ell = {}
    for u in h.domain:
        fu = f.block(u)
        gamma[fu] = f.push(h.gamma[u]) ^ f.d(u)
        ell[fu] = h.ell[u] ^ f.e(u)
    return Solution(f.target, frozenset(gamma), gamma, ell)


def conjugate_solution(f: Embedding, h: Solution) -> Solution:
    """The solution ``f ∘ h ∘ f^{-1}`` of the target of an isomorphism."""
    if not f.is_bijective():
        raise EmbeddingError("conjugation needs a bijective embedding")
    return push_solution(f, h)


def iso_from_solutions(h_m: Solution, h_n: Solution, h0: Mapping) -> Embedding:
    """The unique isomorphism extending ``h0`` that conjugates ``h_m`` to ``h_n``."""
    m, n = h_m.model, h_n.model
    if h_m.domain != m.block_set or h_n.domain != n.block_set:
        raise SolutionError("both solutions must be defined on all blocks")
    if not check_solution(h_m) or not check_solution(h_n):
        raise SolutionError("invalid solution")
    if set(h0) != m.atom_set or set(h0.values()) != n.atom_set or len(set(h0.values())) != len(h0):
        raise SolutionError("h0 must be a bijection I(M) -> I(N)")
    if m.n != n.n:
        raise SolutionError("models of different arity")
    delta = {}
    eps = {}
    for u in m.blocks:
        fu = push_block(h0, u)
        delta[u] = h_n.gamma[fu] ^ push(h0, h_m.gamma[u])
        eps[u] = h_n.ell[fu] ^ h_m.ell[u]
    return Embedding(m, n, h0, delta, eps)


def zero_solution(m: Model, domain: Optional[Iterable[Block]] = None) -> Solution:
    """The all-zero assignment (a solution exactly when m is standard on the domain)."""
    dom = m.block_set if domain is None else frozenset(domain)
    return Solution(m, dom)


def standard_of(m: Model) -> Model:
    return Model(m.atoms, m.n, frozenset())


def standardize_pair(m: Model, n: Model) -> tuple:
    """Isomorphisms ``M -> M*`` and ``N -> N*`` onto standard models, commuting with inclusion.

    ``M`` must be the induced submodel of ``N`` on ``I(M)``.
    """
    if induced_submodel(n, m.atoms) != m:
        raise ModelError("M must be the induced submodel of N on I(M)")
    h_m = solve_solution(m)
    if not h_m:
        raise RuntimeError("finite model without a solution")
    lifted = {u: h_m.gamma[u] for u in m.blocks}
    h_n = solve_solution(n, None, lifted, h_m.ell)
    if not h_n:
        raise RuntimeError("solution of M does not extend to N")
    m_std, n_std = standard_of(m), standard_of(n)
    f_m = iso_from_solutions(h_m, zero_solution(m_std), {a: a for a in m.atoms})
    f_n = iso_from_solutions(h_n, zero_solution(n_std), {a: a for a in n.atoms})
    assert check_embedding(f_m) and check_embedding(f_n)
    return f_m, f_n
