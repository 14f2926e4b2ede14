"""Search for a mediating model N* with embeddings from several sides.

Once the atom maps into N* are fixed, everything that remains unknown (the
twist of N* on tuples covered by some side, and the offsets of every
embedding) enters the requirements linearly over GF(2).  Restricting any
mediating model to the span of the images loses nothing, so enumerating atom
identifications and solving one system per identification is a complete
search.
"""

from __future__ import annotations

from itertools import combinations, permutations
from typing import Iterator, Mapping, Optional, Sequence

from .gf2 import GF2System
from .morphisms import Embedding, push, push_block
from .structure import ZERO, CompTuple, GroupElem, Model


class SearchBudgetExceeded(RuntimeError):
    pass


def fresh_name(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


def partial_injections(src: Sequence, dst: Sequence) -> Iterator[dict]:
    """All partial injections ``src -> dst``, largest first, in a fixed order."""
    for k in range(min(len(src), len(dst)), -1, -1):
        for chosen in combinations(src, k):
            for image in permutations(dst, k):
                yield dict(zip(chosen, image))


class MediatingSystem:
    """Unknown offsets of embeddings ``g_i: side_i -> N*`` for fixed atom maps."""

    def __init__(self, sides: Sequence[Model], atom_maps: Sequence[Mapping]):
        self.sides = list(sides)
        self.maps = [dict(p) for p in atom_maps]
        n = self.sides[0].n
        order: list = []
        seen: set = set()
        for side, p in zip(self.sides, self.maps):
            for a in side.atoms:
                b = p[a]
                if b not in seen:
                    seen.add(b)
                    order.append(b)
        self.star = Model(tuple(order), n)
        self.sys = GF2System()
        self._star_blocks = self.star.blocks
        for i, side in enumerate(self.sides):
            for t in side.tuples:
                self.sys.var(("q", self._image_tuple(i, t)))

    def _image_tuple(self, i: int, t: CompTuple) -> CompTuple:
        p = self.maps[i]
        return CompTuple(push_block(p, t.v), push_block(p, t.w))

    def preserve_q(self, i: int) -> None:
        side = self.sides[i]
        p = self.maps[i]
        for t in side.tuples:
            pv = push_block(p, t.v)
            terms = [("q", self._image_tuple(i, t)), ("e", i, t.v)]
            terms += [("d", i, u, pv) for u in t.others()]
            self.sys.add(terms, side.q(t.v, t.w), label=("Q", i, t))

    def equal_offsets(self, i: int, u: frozenset, ci: GroupElem, j: int, v: frozenset, cj: GroupElem) -> None:
        """``ci + delta^i_u = cj + delta^j_v`` coordinatewise in G(N*)."""
        for z in self._star_blocks:
            const = (z in ci) ^ (z in cj)
            self.sys.add([("d", i, u, z), ("d", j, v, z)], const, label=("offset", i, u, j, v, z))

    def set_offset(self, i: int, u: frozenset, value: GroupElem) -> None:
        for z in self._star_blocks:
            self.sys.add([("d", i, u, z)], z in value, label=("fix", i, u, z))

    def equal_bits(self, i: int, u: frozenset, ci: int, j: int, v: frozenset, cj: int) -> None:
        self.sys.add([("e", i, u), ("e", j, v)], ci ^ cj, label=("bit", i, u, j, v))

    def set_bit(self, i: int, u: frozenset, value: int) -> None:
        self.sys.add([("e", i, u)], value, label=("fixbit", i, u))

    def commute(self, i: int, f: Embedding, j: int, g: Embedding) -> bool:
        """Require ``g_i ∘ f = g_j ∘ g`` for embeddings ``f, g`` from a common source.

        Returns False when the atom maps already disagree.
        """
        pi, pj = self.maps[i], self.maps[j]
        for a in f.source.atoms:
            if pi[f.pi[a]] != pj[g.pi[a]]:
                return False
        for u in f.source.blocks:
            fu, gu = f.block(u), g.block(u)
            self.equal_offsets(i, fu, push(pi, f.d(u)), j, gu, push(pj, g.d(u)))
            self.equal_bits(i, fu, f.e(u), j, gu, g.e(u))
        return True

    @property
    def consistent(self) -> bool:
        return self.sys.consistent

    def solve(self) -> Optional[tuple]:
        """``(N*, [g_i])`` or None."""
        values = self.sys.solve()
        if values is None:
            return None
        twist = frozenset(k[1] for k, bit in values.items() if bit and k[0] == "q")
        star = Model(self.star.atoms, self.star.n, twist)
        embs = []
        for i, side in enumerate(self.sides):
            delta: dict = {u: set() for u in side.blocks}
            eps: dict = {}
            for k, bit in values.items():
                if not bit or k[1] != i:
                    continue
                if k[0] == "d":
                    delta[k[2]].add(k[3])
                elif k[0] == "e":
                    eps[k[2]] = 1
            embs.append(Embedding(side, star, self.maps[i], {u: frozenset(s) for u, s in delta.items()}, eps))
        return star, embs


def star_maps(shared: Mapping, left: Model, right: Model, right_free: Sequence, left_free: Sequence):
    """Atom maps for a two-sided search.

    ``shared`` sends right atoms whose image is forced to left atoms; each
    ``right_free`` atom is either identified with an unused ``left_free`` atom
    or given a fresh name.
    """
    taken = set(left.atoms)
    for ident in partial_injections(list(right_free), list(left_free)):
        if set(ident.values()) & set(shared.values()):
            continue
        left_map = {a: a for a in left.atoms}
        right_map = dict(shared)
        used = set(taken)
        for a in right.atoms:
            if a in right_map:
                continue
            if a in ident:
                right_map[a] = ident[a]
            else:
                name = fresh_name(a, used)
                used.add(name)
                right_map[a] = name
        if len(set(right_map.values())) != len(right_map):
            continue
        yield left_map, right_map


ZERO_GROUP = ZERO
