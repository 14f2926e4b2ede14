"""Independent brute-force checks used by the suites and the tests.

None of these go through the elimination solver: they enumerate assignments
or build objects by hand and then evaluate the defining identities directly.
"""

from __future__ import annotations

from itertools import product
from typing import Mapping, Optional

from .solutions import Solution, covered_tuples, solution_violations
from .structure import Model


def greedy_solution(m: Model) -> Solution:
    """A full solution built tuple by tuple.

    For fixed (v, w) the coordinate ``gamma_u(v)`` with ``u = first other
    block`` occurs in no other equation, since ``w = u ∪ v``.
    """
    gamma: dict = {u: set() for u in m.blocks}
    for t in m.tuples:
        if m.q(t.v, t.w):
            u = min(t.others(), key=m.key)
            gamma[u].add(t.v)
    return Solution(m, m.block_set, {u: frozenset(s) for u, s in gamma.items()}, {})


def extension_variables(m: Model, domain: frozenset, pinned: frozenset) -> list:
    """Unpinned coordinates that occur in some covered equation."""
    out = []
    seen = set()
    for t in covered_tuples(m, domain):
        for u in t.others():
            if u not in pinned and (u, t.v) not in seen:
                seen.add((u, t.v))
                out.append(("gamma", u, t.v))
        if t.v not in pinned and ("ell", t.v) not in seen:
            seen.add(("ell", t.v))
            out.append(("ell", t.v))
    return out


def exhaustive_extensions(
    m: Model,
    domain: frozenset,
    gamma_pins: Mapping,
    ell_pins: Mapping,
    max_bits: int = 20,
    first_only: bool = True,
) -> Optional[list]:
    """Enumerate every assignment of the relevant free coordinates.

    Returns the satisfying solutions found (just the first one when
    ``first_only``), an empty list if there is none, or None when the number
    of free bits exceeds ``max_bits``.  Coordinates that occur in no equation
    are left at 0; they cannot affect satisfiability.
    """
    pinned = frozenset(gamma_pins)
    if frozenset(ell_pins) != pinned:
        raise ValueError("gamma and ell pins must cover the same blocks")
    variables = extension_variables(m, domain, pinned)
    if len(variables) > max_bits:
        return None
    found = []
    for bits in product((0, 1), repeat=len(variables)):
        gamma = {u: set(gamma_pins.get(u, ())) for u in domain}
        ell = {u: ell_pins.get(u, 0) for u in domain}
        for var, bit in zip(variables, bits):
            if not bit:
                continue
            if var[0] == "gamma":
                gamma[var[1]] ^= {var[2]}
            else:
                ell[var[1]] = 1
        h = Solution(m, domain, {u: frozenset(s) for u, s in gamma.items()}, ell)
        if not solution_violations(h):
            found.append(h)
            if first_only:
                break
    return found
