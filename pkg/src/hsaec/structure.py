"""Finite Hart-Shelah models.

A model of K^n over a finite index set I is stored as ``(atoms, n, twist)``.
Blocks are n-subsets of I, the group G is the set of finite sets of blocks
(addition is symmetric difference), and the affine stalks are encoded by
offsets from a canonical zero point: a G* point over a block u is ``(u, γ)``
with γ in G, an H* point over v is ``(v, b)`` with b a bit.  The relation Q
is then fixed by one parity bit per compatible tuple, the *twist* q:

    Q((u_1, γ_1), ..., (u_n, γ_n), (v, b))  iff  the blocks are compatible
    with union w and  γ_1(v) + ... + γ_n(v) + b = q(v, w)  (mod 2).

The standard model is the twist-free one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence, Union

Atom = str
Block = frozenset  # frozenset[Atom] with exactly n atoms
GroupElem = frozenset  # frozenset[Block]; the blocks evaluated to 1

ZERO: GroupElem = frozenset()

I_SORT = "I"
K_SORT = "K"
G_SORT = "G"
H_SORT = "H"
GSTAR = "Gstar"
HSTAR = "Hstar"
SORTS = (I_SORT, K_SORT, G_SORT, H_SORT, GSTAR, HSTAR)

ATOM_RE = re.compile(r"^[^\s{},|=>#]+$")


class ModelError(ValueError):
    """Raised when a model or an element of a model is malformed."""


class CompTuple(NamedTuple):
    """A compatible tuple, keyed by its H*-block ``v`` and the (n+1)-set ``w``."""

    v: Block
    w: frozenset

    def others(self) -> list[Block]:
        """The n blocks ``[w]^n \\ {v}`` carrying the G* arguments."""
        return [self.w - {x} for x in self.w if self.w - {x} != self.v]


@dataclass(frozen=True)
class Element:
    """An element of a non-affine sort.

    ``value`` is an atom (I), a block (K), a group element (G) or a bit (H).
    """

    sort: str
    value: object

    def __repr__(self) -> str:
        return f"{self.sort}:{_fmt(self.value)}"


@dataclass(frozen=True)
class StalkPoint:
    """A point of G* (offset in G) or H* (offset a bit) over ``block``."""

    sort: str
    block: Block
    offset: Union[GroupElem, int]

    def __repr__(self) -> str:
        return f"{self.sort}:{_fmt(self.block)}+{_fmt(self.offset)}"


def _fmt(value: object) -> str:
    if isinstance(value, frozenset):
        items = sorted(_fmt(x) for x in value)
        return "{" + ",".join(items) + "}"
    return str(value)


def atom(a: Atom) -> Element:
    return Element(I_SORT, a)


def block(atoms: Iterable[Atom]) -> Block:
    return frozenset(atoms)


def group(blocks: Iterable[Iterable[Atom]]) -> GroupElem:
    return frozenset(frozenset(u) for u in blocks)


def gstar(u: Iterable[Atom], offset: Iterable[Iterable[Atom]] = ()) -> StalkPoint:
    return StalkPoint(GSTAR, frozenset(u), group(offset))


def hstar(v: Iterable[Atom], bit: int = 0) -> StalkPoint:
    return StalkPoint(HSTAR, frozenset(v), int(bit) & 1)


@dataclass(frozen=True)
class Model:
    """A finite K^n model: ordered index set, arity, and the set of twisted tuples."""

    atoms: tuple
    n: int
    twist: frozenset = field(default_factory=frozenset)

    @cached_property
    def index(self) -> dict:
        return {a: i for i, a in enumerate(self.atoms)}

    @cached_property
    def atom_set(self) -> frozenset:
        return frozenset(self.atoms)

    def key(self, atoms: Iterable[Atom]) -> tuple:
        """Sort key of an atom set in declaration order."""
        return tuple(sorted(self.index[a] for a in atoms))

    def sorted_atoms(self, atoms: Iterable[Atom]) -> list:
        return sorted(atoms, key=self.index.__getitem__)

    @cached_property
    def blocks(self) -> tuple:
        """K = [I]^n in lexicographic order."""
        return tuple(frozenset(c) for c in combinations(self.atoms, self.n))

    @cached_property
    def block_set(self) -> frozenset:
        return frozenset(self.blocks)

    @cached_property
    def block_index(self) -> dict:
        return {u: i for i, u in enumerate(self.blocks)}

    @cached_property
    def tuples(self) -> tuple:
        """All compatible tuples, ordered by w then v."""
        out = []
        for w in combinations(self.atoms, self.n + 1):
            ws = frozenset(w)
            for v in combinations(w, self.n):
                out.append(CompTuple(frozenset(v), ws))
        return tuple(out)

    @cached_property
    def tuples_at(self) -> dict:
        """Compatible tuples grouped by their H*-block v."""
        out: dict = {u: [] for u in self.blocks}
        for t in self.tuples:
            out[t.v].append(t)
        return out

    def q(self, v: Block, w: frozenset) -> int:
        return 1 if CompTuple(v, w) in self.twist else 0

    def is_standard(self) -> bool:
        return not self.twist

    def has_block(self, u: Block) -> bool:
        return u in self.block_set

    def in_group(self, g: GroupElem) -> bool:
        return all(u in self.block_set for u in g)

    def sort_blocks(self, blocks: Iterable[Block]) -> list:
        return sorted(blocks, key=self.key)

    def __repr__(self) -> str:
        return f"Model(n={self.n}, atoms={list(self.atoms)}, twists={len(self.twist)})"


def make_model(atoms: Sequence[Atom], n: int, twist: Iterable = ()) -> Model:
    """Build a model and raise ModelError listing every violation."""
    m = Model(tuple(atoms), n, frozenset(CompTuple(frozenset(v), frozenset(w)) for v, w in twist))
    problems = validate_model(m)
    if problems:
        raise ModelError("; ".join(problems))
    return m


def make_standard_model(atoms: Sequence[Atom], n: int) -> Model:
    return make_model(atoms, n)


def validate_model(m: Model) -> list[str]:
    """Return every violation found in ``m`` (empty when the model is well formed)."""
    problems = []
    if not isinstance(m.n, int) or m.n < 2:
        problems.append(f"arity n={m.n!r} must be an integer >= 2")
    seen = set()
    for a in m.atoms:
        if not isinstance(a, str) or not ATOM_RE.match(a):
            problems.append(f"invalid atom token {a!r}")
        if a in seen:
            problems.append(f"duplicate atom {a!r}")
        seen.add(a)
    if problems:
        return problems
    for t in sorted(m.twist, key=lambda t: (m.key(t.w) if t.w <= m.atom_set else (), str(t))):
        if not (
            len(t.w) == m.n + 1
            and len(t.v) == m.n
            and t.v < t.w
            and t.w <= m.atom_set
        ):
            problems.append(f"invalid compatible tuple {_fmt(t.v)}|{_fmt(t.w)}")
    return problems


def compatible_tuples(m: Model) -> list[CompTuple]:
    return list(m.tuples)


def atom_support(m: Model, g: GroupElem) -> frozenset:
    """Atoms occurring in some block where ``g`` evaluates to 1."""
    out: set = set()
    for u in g:
        out |= u
    return frozenset(out)


def _check_point(m: Model, p: StalkPoint) -> None:
    if not m.has_block(p.block):
        raise ModelError(f"block {_fmt(p.block)} is not in the model")
    if p.sort == GSTAR:
        if not isinstance(p.offset, frozenset) or not m.in_group(p.offset):
            raise ModelError(f"offset {_fmt(p.offset)} is not an element of G")
    elif p.sort == HSTAR:
        if p.offset not in (0, 1):
            raise ModelError(f"H* offset must be a bit, got {p.offset!r}")
    else:
        raise ModelError(f"{p.sort} is not an affine sort")


def eval_Q(m: Model, xs: Sequence[StalkPoint], y: StalkPoint) -> bool:
    """Evaluate Q(x_1, ..., x_n, y) in ``m``."""
    if len(xs) != m.n:
        raise ModelError(f"Q takes {m.n} G* arguments, got {len(xs)}")
    for p in xs:
        if p.sort != GSTAR:
            raise ModelError("the first n arguments of Q must be G* points")
        _check_point(m, p)
    if y.sort != HSTAR:
        raise ModelError("the last argument of Q must be an H* point")
    _check_point(m, y)
    blocks = [p.block for p in xs] + [y.block]
    if len(set(blocks)) != len(blocks):
        return False
    w = frozenset().union(*blocks)
    if len(w) != m.n + 1:
        return False
    parity = sum(1 for p in xs if y.block in p.offset) + y.offset
    return parity % 2 == m.q(y.block, w)


def torsor_act(p: StalkPoint, shift: Union[GroupElem, int]) -> StalkPoint:
    """Act on a stalk point by a group element (G*) or a bit (H*)."""
    if p.sort == GSTAR:
        if not isinstance(shift, frozenset):
            raise ModelError("G* points are moved by elements of G")
        return StalkPoint(GSTAR, p.block, p.offset ^ shift)
    if p.sort == HSTAR:
        if isinstance(shift, frozenset) or shift not in (0, 1):
            raise ModelError("H* points are moved by bits")
        return StalkPoint(HSTAR, p.block, p.offset ^ shift)
    raise ModelError(f"{p.sort} is not an affine sort")


def torsor_diff(p: StalkPoint, p2: StalkPoint) -> Union[GroupElem, int]:
    """The unique shift sending ``p`` to ``p2``."""
    if p.sort != p2.sort:
        raise ModelError("points of different sorts")
    if p.block != p2.block:
        raise ModelError("points lie on different stalks")
    if p.sort not in (GSTAR, HSTAR):
        raise ModelError(f"{p.sort} is not an affine sort")
    return p.offset ^ p2.offset


def induced_submodel(m: Model, sub_atoms: Iterable[Atom]) -> Model:
    """The full submodel on ``sub_atoms`` with zero coset offsets.

    Declaration order is inherited from ``m``.
    """
    s = frozenset(sub_atoms)
    if not s <= m.atom_set:
        raise ModelError(f"atoms {_fmt(s - m.atom_set)} are not in the model")
    atoms = tuple(a for a in m.atoms if a in s)
    return Model(atoms, m.n, frozenset(t for t in m.twist if t.w <= s))


def is_induced(sub: Model, sup: Model) -> bool:
    """Whether ``sub`` is the zero-offset induced submodel of ``sup`` on its atoms."""
    if sub.n != sup.n or not sub.atom_set <= sup.atom_set:
        return False
    return frozenset(t for t in sup.twist if t.w <= sub.atom_set) == sub.twist


def contains(m: Model, x: Union[Element, StalkPoint]) -> bool:
    """Whether ``x`` is an element of ``m``."""
    if isinstance(x, StalkPoint):
        if not m.has_block(x.block):
            return False
        if x.sort == GSTAR:
            return isinstance(x.offset, frozenset) and m.in_group(x.offset)
        return x.offset in (0, 1)
    if x.sort == I_SORT:
        return x.value in m.atom_set
    if x.sort == K_SORT:
        return x.value in m.block_set
    if x.sort == G_SORT:
        return isinstance(x.value, frozenset) and m.in_group(x.value)
    if x.sort == H_SORT:
        return x.value in (0, 1)
    return False


def element_atoms(x: Union[Element, StalkPoint]) -> frozenset:
    """Atoms an element depends on (its definable-closure support)."""
    if isinstance(x, StalkPoint):
        if x.sort == GSTAR:
            return x.block | atom_support_raw(x.offset)
        return x.block
    if x.sort == I_SORT:
        return frozenset([x.value])
    if x.sort == K_SORT:
        return x.value
    if x.sort == G_SORT:
        return atom_support_raw(x.value)
    return frozenset()


def atom_support_raw(g: GroupElem) -> frozenset:
    out: set = set()
    for u in g:
        out |= u
    return frozenset(out)


def fmt(value: object) -> str:
    return _fmt(value)
