"""Seeded random instances.

All randomness flows from numpy's counter-based Philox generator keyed by a
``SeedSequence``; ``make_rng(seed, *path)`` gives independent reproducible
streams for each trial of a suite.
"""

from __future__ import annotations

import string
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .gf2 import GF2System
from .morphisms import Embedding
from .structure import Model


def make_rng(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def default_atoms(count: int, prefix: str = "") -> tuple:
    if count <= 26 and not prefix:
        return tuple(string.ascii_lowercase[:count])
    return tuple(f"{prefix or 'x'}{i}" for i in range(count))


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(0 if seed_or_rng is None else seed_or_rng)


def gen_random_model(
    n: int,
    atom_count: int,
    density: float = 0.5,
    seed=None,
    atoms: Optional[Sequence[str]] = None,
) -> Model:
    """Each compatible tuple is twisted independently with probability ``density``."""
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = _as_rng(seed)
    names = tuple(atoms) if atoms is not None else default_atoms(atom_count)
    skeleton = Model(names, n)
    draws = rng.random(len(skeleton.tuples))
    twist = frozenset(t for t, r in zip(skeleton.tuples, draws) if r < density)
    return Model(names, n, twist)


def random_extension(m: Model, new_atoms: Iterable[str], density: float, rng) -> Model:
    """A model on ``I(m) + new_atoms`` inducing ``m``; new tuples twisted at random."""
    rng = _as_rng(rng)
    new_atoms = tuple(new_atoms)
    if set(new_atoms) & m.atom_set or len(set(new_atoms)) != len(new_atoms):
        raise ValueError("new atoms must be distinct and outside the model")
    skeleton = Model(tuple(m.atoms) + new_atoms, m.n)
    twist = set(m.twist)
    for t in skeleton.tuples:
        if not t.w <= m.atom_set and rng.random() < density:
            twist.add(t)
    return Model(skeleton.atoms, m.n, frozenset(twist))


def random_embedding(
    src: Model,
    tgt: Model,
    pi: Mapping,
    rng,
    fixed: Optional[Model] = None,
) -> Optional[Embedding]:
    """A uniformly random embedding with atom map ``pi``, or None if none exists.

    Blocks of ``fixed`` (an induced submodel of ``src``) get zero offsets.
    """
    rng = _as_rng(rng)
    fixed_blocks = fixed.block_set if fixed is not None else frozenset()
    sys_ = GF2System()
    free = [u for u in src.blocks if u not in fixed_blocks]
    for u in free:
        for z in tgt.blocks:
            sys_.var(("d", u, z))
        sys_.var(("e", u))
    for t in src.tuples:
        pv = frozenset(pi[a] for a in t.v)
        pw = frozenset(pi[a] for a in t.w)
        terms = [("d", u, pv) for u in t.others() if u not in fixed_blocks]
        if t.v not in fixed_blocks:
            terms.append(("e", t.v))
        sys_.add(terms, src.q(t.v, t.w) ^ tgt.q(pv, pw), label=t)
    values = sys_.solve(rng)
    if values is None:
        return None
    delta: dict = {}
    eps: dict = {}
    for key, bit in values.items():
        if not bit:
            continue
        if key[0] == "d":
            delta.setdefault(key[1], set()).add(key[2])
        else:
            eps[key[1]] = 1
    return Embedding(src, tgt, pi, {u: frozenset(s) for u, s in delta.items()}, eps)


def random_model_pair(n: int, base_count: int, extra: int, density: float, rng) -> tuple:
    """``(M, N)`` with M induced in N and ``extra`` new atoms."""
    rng = _as_rng(rng)
    names = default_atoms(base_count + extra)
    m = gen_random_model(n, base_count, density, rng, atoms=names[:base_count])
    return m, random_extension(m, names[base_count:], density, rng)
