from __future__ import annotations

from itertools import product

import pytest

from hsaec.structure import GSTAR, HSTAR, Model, StalkPoint, eval_Q


def all_group(m: Model):
    """Every element of G(m) as a frozenset of blocks."""
    blocks = m.blocks
    for bits in product((0, 1), repeat=len(blocks)):
        yield frozenset(u for u, b in zip(blocks, bits) if b)


def q_preserved_by_brute_force(f) -> bool:
    """Check that f preserves Q in both directions on every compatible tuple.

    Points are enumerated directly (all G* offsets on the n other blocks and
    both H* bits), and Q is evaluated in each model with ``eval_Q``; nothing
    here goes through the embedding equations.
    """
    src, tgt = f.source, f.target
    group = list(all_group(src))
    for t in src.tuples:
        others = sorted(t.others(), key=src.key)
        for offs in product(group, repeat=len(others)):
            xs = [StalkPoint(GSTAR, u, g) for u, g in zip(others, offs)]
            for b in (0, 1):
                y = StalkPoint(HSTAR, t.v, b)
                if eval_Q(src, xs, y) != eval_Q(tgt, [f(x) for x in xs], f(y)):
                    return False
    return True


@pytest.fixture
def std3():
    return Model(("a", "b", "c"), 2)
