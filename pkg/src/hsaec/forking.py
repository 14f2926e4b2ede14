"""Explicit nonforking for M0 <= M <= N and a finite splitting analog.

Every rule is a support condition: the atoms of ``a`` that lie in I(M) must
already lie in I(M0).  What counts as "the atoms of a" depends on the sort:

* I: nothing beyond ``a`` itself, so nonforking always holds (case 1);
* K: the block (case 1);
* G: the atom support (case 2);
* G* over a block not in K(M): the block (case 3a); over K(M) - K(M0): never
  (case 3b); over K(M0): the support of ``a - a0`` for the zero point
  ``a0 = (u, 0)`` (case 3c);
* H*: the block (case 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Union

import numpy as np

from .galois import TypeInstance, galois_type_equal, in_base
from .morphisms import check_embedding, transport
from .search import fresh_name
from .solutions import iso_from_solutions, solve_solution
from .structure import (
    GSTAR,
    G_SORT,
    HSTAR,
    I_SORT,
    K_SORT,
    Element,
    Model,
    ModelError,
    StalkPoint,
    atom_support_raw,
    contains,
    induced_submodel,
    is_induced,
)


@dataclass(frozen=True)
class ForkingQuery:
    m0: Model
    m: Model
    n: Model
    a: Union[Element, StalkPoint]

    def __post_init__(self):
        if not (is_induced(self.m0, self.m) and is_induced(self.m, self.n)):
            raise ModelError("M0 <= M <= N is not a chain of induced submodels")
        if not contains(self.n, self.a):
            raise ModelError(f"{self.a!r} is not an element of N")
        if in_base(self.m, self.a):
            raise ModelError(f"{self.a!r} lies in M (algebraic type)")


@dataclass(frozen=True)
class Nonforking:
    holds: bool
    case: str

    def __bool__(self) -> bool:
        return self.holds

    def __str__(self) -> str:
        return f"NONFORK {'true' if self.holds else 'false'} CASE {self.case}"


def _within(atoms: frozenset, qy: ForkingQuery) -> bool:
    return atoms & qy.m.atom_set <= qy.m0.atom_set


def nonforking_decide(qy: ForkingQuery) -> Nonforking:
    a = qy.a
    if isinstance(a, Element):
        if a.sort == I_SORT:
            return Nonforking(True, "1")
        if a.sort == K_SORT:
            return Nonforking(_within(a.value, qy), "1")
        if a.sort == G_SORT:
            return Nonforking(_within(atom_support_raw(a.value), qy), "2")
        raise ModelError("H-sort elements always lie in M")
    u = a.block
    if a.sort == HSTAR:
        return Nonforking(_within(u, qy), "4")
    if not u <= qy.m.atom_set:
        return Nonforking(_within(u, qy), "3a")
    if not u <= qy.m0.atom_set:
        return Nonforking(False, "3b")
    # a - a0 with a0 = (u, 0) is the offset itself
    return Nonforking(_within(atom_support_raw(a.offset), qy), "3c")


def nonforking_literal(qy: ForkingQuery) -> Nonforking:
    """The case table read without support conditions on blocks.

    Kept for comparison: it violates the uniqueness law (see the tests).
    """
    a = qy.a
    if isinstance(a, Element):
        if a.sort in (I_SORT, K_SORT):
            return Nonforking(True, "1")
        return Nonforking(_within(atom_support_raw(a.value), qy), "2")
    if a.sort == HSTAR:
        return Nonforking(True, "4")
    u = a.block
    if not u <= qy.m.atom_set:
        return Nonforking(True, "3a")
    if not u <= qy.m0.atom_set:
        return Nonforking(False, "3b")
    return Nonforking(_within(atom_support_raw(a.offset), qy), "3c")


SPLIT_MAX_ATOMS = 5


def _move_type(p: TypeInstance, h, n2: Model) -> TypeInstance:
    """Transport ``p`` (restricted to h.source) along an extension of ``h``."""
    amb = p.ambient
    pi = dict(h.pi)
    taken = set(amb.atoms) | set(n2.atoms)
    for x in amb.atoms:
        if x not in pi:
            name = fresh_name(x, taken)
            taken.add(name)
            pi[x] = name
    ext = transport(amb, pi, dict(h.delta), dict(h.eps))
    return TypeInstance(tuple(ext(x) for x in p.elements), n2, ext.target)


def splits_finite(m0: Model, p: TypeInstance, budget: int = 16, seed: int = 0) -> bool:
    """Exploratory: does some M0-isomorphism between submodels of M move ``p``?

    Ranges over all induced N1, N2 with M0 <= Ni <= M, all atom bijections
    fixing I(M0), the canonical isomorphism per bijection, and ``budget``
    further isomorphisms generated from random solutions.
    """
    m = p.base
    if not is_induced(m0, m):
        raise ModelError("M0 is not an induced submodel of the base")
    if len(m.atoms) > SPLIT_MAX_ATOMS:
        raise ValueError(f"scale exceeded: |I(M)| > {SPLIT_MAX_ATOMS}")
    rng = np.random.Generator(np.random.Philox(seed))
    h0 = solve_solution(m0)
    rest = [x for x in m.atoms if x not in m0.atom_set]
    subs = [frozenset(c) for r in range(len(rest) + 1) for c in combinations(rest, r)]
    for s1 in subs:
        n1 = induced_submodel(m, m0.atom_set | s1)
        p1 = TypeInstance(p.elements, n1, p.ambient)
        g1 = solve_solution(n1, None, h0.gamma, h0.ell)
        for s2 in subs:
            if len(s2) != len(s1):
                continue
            n2 = induced_submodel(m, m0.atom_set | s2)
            p2 = TypeInstance(p.elements, n2, p.ambient)
            for image in permutations(sorted(s2, key=m.index.get)):
                pi = {x: x for x in m0.atoms}
                pi.update(zip(sorted(s1, key=m.index.get), image))
                for trial in range(budget + 1):
                    g2 = solve_solution(n2, None, h0.gamma, h0.ell, rng=rng if trial else None)
                    h = iso_from_solutions(g1, g2, pi)
                    assert check_embedding(h)
                    if not galois_type_equal(_move_type(p1, h, n2), p2):
                        return True
    return False

