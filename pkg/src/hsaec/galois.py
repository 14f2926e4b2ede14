"""Galois types over a finite base: bounded amalgam search and existential fingerprints.

Two instances ``(tuple_i, M, N_i)`` have the same type when some N* admits
embeddings ``g_i: N_i -> N*`` agreeing over M with ``g_1(tuple_1) = g_2(tuple_2)``.
The search enumerates how the fresh atoms of N_2 are identified with fresh
atoms of N_1 and solves the remaining linear problem (see :mod:`hsaec.search`).

The fingerprint is the fast path.  It records, up to renaming the fresh atoms
involved, every element's sort and atoms; G* points over old blocks keep their
offset (after shifting by the canonical solution of M), H* points over old
blocks keep their bit, and a single point over a new block keeps only its
block.  Tuples with two or more points over new blocks are outside the
catalog and fall back to search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Optional, Sequence, Union

from .gf2 import Echelon
from .morphisms import Embedding, inclusion, push, push_block
from .search import MediatingSystem, SearchBudgetExceeded, star_maps
from .solutions import solve_solution
from .structure import (
    GSTAR,
    G_SORT,
    H_SORT,
    HSTAR,
    I_SORT,
    K_SORT,
    Element,
    Model,
    ModelError,
    StalkPoint,
    atom_support_raw,
    contains,
    element_atoms,
    is_induced,
)

Elem = Union[Element, StalkPoint]
FINGERPRINT_MAX_FRESH = 6


class FingerprintIncomplete(Exception):
    """The configuration is outside the fingerprint catalog; use search."""


@dataclass(frozen=True)
class TypeInstance:
    elements: tuple
    base: Model
    ambient: Model

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not is_induced(self.base, self.ambient):
            raise ModelError("base is not an induced submodel of the ambient model")
        for x in self.elements:
            if not contains(self.ambient, x):
                raise ModelError(f"{x!r} is not an element of the ambient model")

    def fresh_atoms(self) -> list:
        return [a for a in self.ambient.atoms if a not in self.base.atom_set]


def in_base(m: Model, x: Elem) -> bool:
    """Whether ``x`` (an element of an ambient model) already lies in ``m``."""
    if isinstance(x, StalkPoint):
        if not x.block <= m.atom_set:
            return False
        return x.sort == HSTAR or atom_support_raw(x.offset) <= m.atom_set
    return element_atoms(x) <= m.atom_set


@dataclass(frozen=True)
class TypeVerdict:
    equal: bool
    route: str
    witness: Optional[tuple] = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.equal


def _image(pi: dict, x: Elem):
    """Image of a non-affine element, or the image block of a stalk point."""
    if isinstance(x, StalkPoint):
        return (x.sort, push_block(pi, x.block))
    if x.sort == I_SORT:
        return (I_SORT, pi[x.value])
    if x.sort == K_SORT:
        return (K_SORT, push_block(pi, x.value))
    if x.sort == G_SORT:
        return (G_SORT, push(pi, x.value))
    return (H_SORT, x.value)


def _base_system(m: Model, n1: Model, n2: Model, lm: dict, rm: dict) -> MediatingSystem:
    ms = MediatingSystem([n1, n2], [lm, rm])
    ms.preserve_q(0)
    ms.preserve_q(1)
    ms.commute(0, inclusion(m, n1), 1, inclusion(m, n2))
    return ms


def _identifications(t1: TypeInstance, t2: TypeInstance):
    shared = {a: a for a in t1.base.atoms}
    return star_maps(shared, t1.ambient, t2.ambient, t2.fresh_atoms(), t1.fresh_atoms())


def search_type_equal(t1: TypeInstance, t2: TypeInstance, budget: Optional[int] = None) -> Optional[tuple]:
    """Brute-force amalgam search; returns ``(N*, g1, g2)`` or None.

    ``budget`` caps the number of atom identifications tried.
    """
    if len(t1.elements) != len(t2.elements):
        return None
    tried = 0
    for lm, rm in _identifications(t1, t2):
        tried += 1
        if budget is not None and tried > budget:
            raise SearchBudgetExceeded(f"more than {budget} identifications")
        if any(
            x.sort != y.sort or _image(lm, x) != _image(rm, y)
            for x, y in zip(t1.elements, t2.elements)
        ):
            continue
        ms = _base_system(t1.base, t1.ambient, t2.ambient, lm, rm)
        for x, y in zip(t1.elements, t2.elements):
            if x.sort == GSTAR:
                ms.equal_offsets(0, x.block, push(lm, x.offset), 1, y.block, push(rm, y.offset))
            elif x.sort == HSTAR:
                ms.equal_bits(0, x.block, x.offset, 1, y.block, y.offset)
        found = ms.solve()
        if found is not None:
            star, (g1, g2) = found
            return star, g1, g2
    return None


# -- fingerprints ---------------------------------------------------------


@lru_cache(maxsize=256)
def _canonical_solution(m: Model):
    return solve_solution(m)


def _is_new_stalk(m: Model, x: Elem) -> bool:
    return isinstance(x, StalkPoint) and not x.block <= m.atom_set


def existential_fingerprint(t: TypeInstance) -> tuple:
    """Canonical invariant of the type; raises :class:`FingerprintIncomplete` off-catalog."""
    m = t.base
    if not t.elements:
        raise FingerprintIncomplete("empty tuple")
    if sum(_is_new_stalk(m, x) for x in t.elements) > 1:
        raise FingerprintIncomplete("more than one stalk point over a new block")
    h = _canonical_solution(m)
    involved: list = []
    seen: set = set()
    for x in t.elements:
        atoms = element_atoms(x) if not _is_new_stalk(m, x) else x.block
        for a in t.ambient.sorted_atoms(atoms):
            if a not in m.atom_set and a not in seen:
                seen.add(a)
                involved.append(a)
    if len(involved) > FINGERPRINT_MAX_FRESH:
        raise FingerprintIncomplete(f"{len(involved)} fresh atoms involved")

    def encode(lab: dict) -> tuple:
        def blk(u):
            return tuple(sorted(lab[a] for a in u))

        def grp(g):
            return tuple(sorted(blk(u) for u in g))

        out = []
        for x in t.elements:
            if isinstance(x, StalkPoint):
                if not x.block <= m.atom_set:
                    out.append((x.sort + "-new", blk(x.block)))
                elif x.sort == GSTAR:
                    out.append((GSTAR, blk(x.block), grp(x.offset ^ h.gamma[x.block])))
                else:
                    out.append((HSTAR, blk(x.block), x.offset))
            elif x.sort == I_SORT:
                out.append((I_SORT, lab[x.value]))
            elif x.sort == K_SORT:
                out.append((K_SORT, blk(x.value)))
            elif x.sort == G_SORT:
                out.append((G_SORT, grp(x.value)))
            else:
                out.append((H_SORT, x.value))
        return tuple(out)

    base_lab = {a: (0, i) for i, a in enumerate(m.atoms)}
    best = None
    for perm in permutations(range(len(involved))):
        lab = dict(base_lab)
        lab.update({a: (1, perm[i]) for i, a in enumerate(involved)})
        enc = encode(lab)
        if best is None or enc < best:
            best = enc
    return (m.n, len(t.elements), best)


def galois_type_equal(
    t1: TypeInstance,
    t2: TypeInstance,
    method: str = "auto",
    budget: Optional[int] = None,
    witness: bool = False,
) -> TypeVerdict:
    """Decide equality of Galois types over a common base.

    ``method`` is ``"auto"`` (fingerprint when both are in the catalog, else
    search), ``"search"`` or ``"fingerprint"``.  With ``witness=True`` a true
    verdict carries ``(N*, g1, g2)``.
    """
    if t1.base != t2.base:
        raise ModelError("type instances over different bases")
    if method not in ("auto", "search", "fingerprint"):
        raise ValueError(f"unknown method {method!r}")
    if method != "search":
        try:
            equal = existential_fingerprint(t1) == existential_fingerprint(t2)
        except FingerprintIncomplete:
            if method == "fingerprint":
                raise
        else:
            wit = search_type_equal(t1, t2, budget) if (equal and witness) else None
            return TypeVerdict(equal, "fingerprint", wit)
    wit = search_type_equal(t1, t2, budget)
    return TypeVerdict(wit is not None, "search", wit if witness else None)


def is_basic_type(t: TypeInstance) -> bool:
    """Length one, sort I, and not an atom of the base."""
    if len(t.elements) != 1:
        return False
    x = t.elements[0]
    return isinstance(x, Element) and x.sort == I_SORT and x.value not in t.base.atom_set


# -- batched oracle -------------------------------------------------------


class PairOracle:
    """The amalgam search for all length-one pairs between two ambients at once.

    For each atom identification the base system is eliminated once.  For a
    pair of stalk points the extra requirement is a family of rows whose
    left-hand sides depend only on the two blocks, so its solvability is a
    parity condition on the constant vector; that condition is computed once
    per block pair.  Answers are exactly those of :func:`search_type_equal`.
    """

    def __init__(self, base: Model, n1: Model, n2: Model):
        self.base, self.n1, self.n2 = base, n1, n2
        t1 = TypeInstance((), base, n1)
        t2 = TypeInstance((), base, n2)
        self._levels = []
        for lm, rm in _identifications(t1, t2):
            ms = _base_system(base, n1, n2, lm, rm)
            if not ms.consistent:
                continue
            inv = ({v: k for k, v in lm.items()}, {v: k for k, v in rm.items()})
            self._levels.append((lm, rm, ms, {}, inv))

    @property
    def levels(self) -> int:
        return len(self._levels)

    def _kernel(self, level, key):
        ms, cache = level[2], level[3]
        if key in cache:
            return cache[key]
        sort, u1, u2 = key
        sys_, ech = ms.sys, ms.sys.echelon()
        if sort == GSTAR:
            rows = []
            for z in ms.star.blocks:
                mask = (1 << sys_.var(("d", 0, u1, z))) ^ (1 << sys_.var(("d", 1, u2, z)))
                rows.append(mask)
        else:
            rows = [(1 << sys_.var(("e", 0, u1))) ^ (1 << sys_.var(("e", 1, u2)))]
        # base rows carry an empty combo so only the new rows are tracked
        trial = Echelon(track=False)
        trial.pivots = {low: (r[0], r[1], 0) for low, r in ech.pivots.items()}
        conds = []
        for idx, mask in enumerate(rows):
            r, k, combo = mask, 0, 1 << idx
            while r:
                low = r & -r
                row = trial.pivots.get(low)
                if row is None:
                    trial.pivots[low] = (r, k, combo)
                    break
                r ^= row[0]
                k ^= row[1]
                combo ^= row[2]
            else:
                conds.append((combo, k))
        cache[key] = conds
        return conds

    def _vector(self, ms, pi: dict, x: StalkPoint) -> int:
        if x.sort == HSTAR:
            return x.offset
        idx = ms.star.block_index
        out = 0
        for z in push(pi, x.offset):
            out |= 1 << idx[z]
        return out

    def _key(self, level, x: Elem, side: int):
        """Hash key of ``x`` at one identification; equal keys across sides = equal types."""
        pi = level[side]
        img = _image(pi, x)
        if not isinstance(x, StalkPoint):
            return img
        other = level[4][1 - side]
        if not img[1] <= other.keys():
            return None
        mate = frozenset(other[z] for z in img[1])
        pair = (x.sort, x.block, mate) if side == 0 else (x.sort, mate, x.block)
        conds = self._kernel(level, pair)
        c = self._vector(level[2], pi, x)
        syn = tuple((((c & combo).bit_count() & 1) ^ (k if side else 0)) for combo, k in conds)
        return img, syn

    def equal(self, x: Elem, y: Elem) -> bool:
        if x.sort != y.sort:
            return False
        for level in self._levels:
            kx = self._key(level, x, 0)
            if kx is not None and kx == self._key(level, y, 1):
                return True
        return False

    def equal_sets(self, xs: Sequence, ys: Sequence) -> list:
        """For each x, the bitmask of indices j with ``ys[j]`` of the same type."""
        out = [0] * len(xs)
        for level in self._levels:
            buckets: dict = {}
            for j, y in enumerate(ys):
                key = self._key(level, y, 1)
                if key is not None:
                    buckets[key] = buckets.get(key, 0) | (1 << j)
            for i, x in enumerate(xs):
                key = self._key(level, x, 0)
                if key is not None:
                    out[i] |= buckets.get(key, 0)
        return out


def all_elements(m: Model, include_affine: bool = True) -> list:
    """Every element of a small model in a canonical order."""
    from itertools import combinations

    out: list = [Element(I_SORT, a) for a in m.atoms]
    out += [Element(K_SORT, u) for u in m.blocks]
    blocks = m.blocks
    groups = []
    for r in range(len(blocks) + 1):
        for combo in combinations(blocks, r):
            groups.append(frozenset(combo))
    out += [Element(G_SORT, g) for g in groups]
    out += [Element(H_SORT, 0), Element(H_SORT, 1)]
    if include_affine:
        out += [StalkPoint(GSTAR, u, g) for u in blocks for g in groups]
        out += [StalkPoint(HSTAR, u, b) for u in blocks for b in (0, 1)]
    return out


def witness_embeddings(w: tuple) -> Sequence[Embedding]:
    return w[1], w[2]
