"""Strong embeddings between finite models.

An embedding is ``(pi, delta, eps)``: an injection on atoms, a group element
per source block and a bit per source block.  Everything outside the affine
sorts is forced by ``pi``; on the stalks

    (u, γ) -> (pi u, pi_* γ + delta_u)        (v, b) -> (pi v, b + eps_v)

and Q is preserved exactly when, for every compatible tuple (v, w) of the
source,

    q_target(pi v, pi w) = q_source(v, w) + sum_{u in [w]^n - {v}} delta_u(pi v) + eps_v.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .structure import (
    GSTAR,
    G_SORT,
    H_SORT,
    HSTAR,
    I_SORT,
    K_SORT,
    ZERO,
    Atom,
    Block,
    CompTuple,
    Element,
    GroupElem,
    Model,
    ModelError,
    StalkPoint,
    contains,
)


class EmbeddingError(ValueError):
    pass


def push(pi: Mapping, g: GroupElem) -> GroupElem:
    """Push a group element forward along an atom map."""
    return frozenset(frozenset(pi[a] for a in u) for u in g)


def push_block(pi: Mapping, u: Block) -> Block:
    return frozenset(pi[a] for a in u)


@dataclass(frozen=True, eq=False)
class Embedding:
    source: Model
    target: Model
    pi: Mapping = field(default_factory=dict)
    delta: Mapping = field(default_factory=dict)
    eps: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pi", dict(self.pi))
        object.__setattr__(self, "delta", {u: g for u, g in self.delta.items() if g})
        object.__setattr__(self, "eps", {u: 1 for u, b in self.eps.items() if b & 1})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.pi == other.pi
            and self.delta == other.delta
            and self.eps == other.eps
        )

    __hash__ = None  # type: ignore[assignment]

    def d(self, u: Block) -> GroupElem:
        return self.delta.get(u, ZERO)

    def e(self, u: Block) -> int:
        return self.eps.get(u, 0)

    def atom(self, a: Atom) -> Atom:
        return self.pi[a]

    def block(self, u: Block) -> Block:
        return push_block(self.pi, u)

    def push(self, g: GroupElem) -> GroupElem:
        return push(self.pi, g)

    def __call__(self, x: Union[Element, StalkPoint]):
        if not contains(self.source, x):
            raise EmbeddingError(f"{x!r} is not an element of the source")
        if isinstance(x, StalkPoint):
            if x.sort == GSTAR:
                return StalkPoint(GSTAR, self.block(x.block), self.push(x.offset) ^ self.d(x.block))
            return StalkPoint(HSTAR, self.block(x.block), x.offset ^ self.e(x.block))
        if x.sort == I_SORT:
            return Element(I_SORT, self.pi[x.value])
        if x.sort == K_SORT:
            return Element(K_SORT, self.block(x.value))
        if x.sort == G_SORT:
            return Element(G_SORT, self.push(x.value))
        return x

    def is_bijective(self) -> bool:
        return len(set(self.pi.values())) == len(self.pi) == len(self.target.atoms)

    def __repr__(self) -> str:
        moved = {a: b for a, b in self.pi.items() if a != b}
        return f"Embedding(pi={moved or 'id'}, |delta|={len(self.delta)}, |eps|={len(self.eps)})"


def identity(m: Model) -> Embedding:
    return Embedding(m, m, {a: a for a in m.atoms})


def inclusion(sub: Model, sup: Model) -> Embedding:
    """The zero-offset inclusion of an induced submodel."""
    if not sub.atom_set <= sup.atom_set:
        raise EmbeddingError("submodel atoms are not contained in the ambient model")
    return Embedding(sub, sup, {a: a for a in sub.atoms})


def embedding_violations(f: Embedding) -> list:
    """Every reason ``f`` fails to be a strong embedding."""
    out = []
    src, tgt = f.source, f.target
    if set(f.pi) != src.atom_set:
        out.append("pi is not defined exactly on the source atoms")
        return out
    if not set(f.pi.values()) <= tgt.atom_set:
        out.append("pi does not map into the target atoms")
        return out
    if len(set(f.pi.values())) != len(f.pi):
        out.append("pi is not injective")
        return out
    if src.n != tgt.n:
        out.append("source and target arities differ")
        return out
    for u, g in f.delta.items():
        if u not in src.block_set:
            out.append(f"delta defined off the source blocks at {sorted(u)}")
        elif not tgt.in_group(g):
            out.append(f"delta at {sorted(u)} is not an element of G(target)")
    for u in f.eps:
        if u not in src.block_set:
            out.append(f"eps defined off the source blocks at {sorted(u)}")
    if out:
        return out
    for t in src.tuples:
        pv = f.block(t.v)
        parity = src.q(t.v, t.w) ^ f.e(t.v)
        for u in t.others():
            if pv in f.d(u):
                parity ^= 1
        if parity != tgt.q(pv, f.block(t.w)):
            out.append(f"Q not preserved on tuple {sorted(t.v)}|{sorted(t.w)}")
    return out


def check_embedding(f: Embedding) -> bool:
    return not embedding_violations(f)


def compose(f: Embedding, g: Embedding) -> Embedding:
    """``g ∘ f`` (apply ``f`` first)."""
    if f.target != g.source:
        raise EmbeddingError("f.target must equal g.source")
    pi = {a: g.pi[b] for a, b in f.pi.items()}
    delta = {}
    eps = {}
    for u in f.source.blocks:
        fu = f.block(u)
        delta[u] = g.push(f.d(u)) ^ g.d(fu)
        eps[u] = f.e(u) ^ g.e(fu)
    return Embedding(f.source, g.target, pi, delta, eps)


def invert(f: Embedding) -> Embedding:
    if not f.is_bijective():
        raise EmbeddingError("only bijective embeddings can be inverted")
    inv = {b: a for a, b in f.pi.items()}
    delta = {}
    eps = {}
    for u in f.source.blocks:
        fu = f.block(u)
        delta[fu] = push(inv, f.d(u))
        eps[fu] = f.e(u)
    return Embedding(f.target, f.source, inv, delta, eps)


def transport(
    m: Model,
    pi: Mapping,
    delta: Optional[Mapping] = None,
    eps: Optional[Mapping] = None,
) -> Embedding:
    """Build the model ``m'`` making ``(pi, delta, eps)`` an isomorphism ``m -> m'``.

    The atoms of ``m'`` are ``pi`` of the atoms of ``m`` in the same order; the
    group elements in ``delta`` must be written over those image atoms.
    """
    delta = delta or {}
    eps = eps or {}
    atoms = tuple(pi[a] for a in m.atoms)
    if len(set(atoms)) != len(atoms):
        raise EmbeddingError("pi is not injective")
    twist = set()
    for t in m.tuples:
        pv = push_block(pi, t.v)
        parity = m.q(t.v, t.w) ^ (eps.get(t.v, 0) & 1)
        for u in t.others():
            if pv in delta.get(u, ZERO):
                parity ^= 1
        if parity:
            twist.add(CompTuple(pv, push_block(pi, t.w)))
    target = Model(atoms, m.n, frozenset(twist))
    return Embedding(m, target, pi, delta, eps)


class ForcedMap:
    """The images forced by an atom injection on the sorts I, K, G and H."""

    def __init__(self, source: Model, target: Model, pi: Mapping):
        if set(pi) != source.atom_set:
            raise EmbeddingError("pi must be defined on every source atom")
        if len(set(pi.values())) != len(pi):
            raise EmbeddingError("pi is not injective")
        if not set(pi.values()) <= target.atom_set:
            raise EmbeddingError("pi does not map into the target")
        self.source = source
        self.target = target
        self.pi = dict(pi)

    @property
    def blocks(self) -> dict:
        return {u: push_block(self.pi, u) for u in self.source.blocks}

    def __call__(self, x: Element) -> Element:
        if isinstance(x, StalkPoint):
            raise EmbeddingError("images of G* and H* points are not determined by the atom map")
        if not contains(self.source, x):
            raise ModelError(f"{x!r} is not an element of the source")
        if x.sort == I_SORT:
            return Element(I_SORT, self.pi[x.value])
        if x.sort == K_SORT:
            return Element(K_SORT, push_block(self.pi, x.value))
        if x.sort == G_SORT:
            return Element(G_SORT, push(self.pi, x.value))
        if x.sort == H_SORT:
            return x
        raise EmbeddingError(f"unknown sort {x.sort}")


def extend_index_map(source: Model, target: Model, pi: Mapping) -> ForcedMap:
    return ForcedMap(source, target, pi)


def restrict(f: Embedding, sub: Model) -> Embedding:
    """Restrict ``f`` to an induced submodel of its source."""
    if not sub.atom_set <= f.source.atom_set:
        raise EmbeddingError("not a submodel of the source")
    return Embedding(
        sub,
        f.target,
        {a: f.pi[a] for a in sub.atoms},
        {u: f.d(u) for u in sub.blocks},
        {u: f.e(u) for u in sub.blocks},
    )


def fixes(f: Embedding, sub: Model) -> bool:
    """Whether ``f`` restricted to ``sub`` is the zero-offset inclusion into f.target."""
    return all(f.pi[a] == a for a in sub.atoms) and all(
        not f.d(u) and not f.e(u) for u in sub.blocks
    )


def same_map(f: Embedding, g: Embedding) -> bool:
    """Equality as maps (ignores a difference in the stored target model)."""
    return f.source == g.source and f.pi == g.pi and f.delta == g.delta and f.eps == g.eps


def blocks_of(pi: Mapping, blocks: Iterable[Block]) -> list:
    return [push_block(pi, u) for u in blocks]
