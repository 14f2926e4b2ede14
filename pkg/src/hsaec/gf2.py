"""Exact GF(2) elimination with named variables and UNSAT certificates.

Rows are Python ints used as bitsets.  Variables are numbered in creation
order and the pivot of a row is its lowest set bit, so the solver output is a
deterministic function of the order in which callers introduce variables.
Free variables are set to 0 unless a random generator is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Optional


@dataclass(frozen=True)
class Equation:
    label: object
    variables: frozenset
    constant: int

    def __str__(self) -> str:
        lhs = " + ".join(sorted(map(str, self.variables))) or "0"
        return f"[{self.label}] {lhs} = {self.constant}"


@dataclass(frozen=True)
class Certificate:
    """A set of equations whose GF(2) sum is the contradiction 0 = 1."""

    equations: tuple

    def verify(self) -> bool:
        acc: set = set()
        const = 0
        for eq in self.equations:
            acc ^= set(eq.variables)
            const ^= eq.constant
        return not acc and const == 1

    def __len__(self) -> int:
        return len(self.equations)


class Conflict(Exception):
    """Raised by :meth:`Echelon.add` when an inserted row is inconsistent."""

    def __init__(self, combo: int):
        super().__init__("inconsistent system")
        self.combo = combo


class Echelon:
    """Incremental row echelon form keyed by lowest-bit pivots."""

    __slots__ = ("pivots", "track")

    def __init__(self, track: bool = True):
        self.pivots: dict = {}
        self.track = track

    def copy(self) -> "Echelon":
        e = Echelon(self.track)
        e.pivots = dict(self.pivots)
        return e

    def reduce(self, mask: int, const: int, combo: int = 0) -> tuple:
        pivots = self.pivots
        while mask:
            low = mask & -mask
            row = pivots.get(low)
            if row is None:
                break
            mask ^= row[0]
            const ^= row[1]
            combo ^= row[2]
        return mask, const, combo

    def add(self, mask: int, const: int, combo: int = 0) -> bool:
        """Insert a row; return False if redundant, raise Conflict if inconsistent."""
        pivots = self.pivots
        while mask:
            low = mask & -mask
            row = pivots.get(low)
            if row is None:
                pivots[low] = (mask, const, combo)
                return True
            mask ^= row[0]
            const ^= row[1]
            combo ^= row[2]
        if const:
            raise Conflict(combo)
        return False

    def consistent_with(self, rows: Iterable[tuple]) -> bool:
        """Whether adding ``rows`` (mask, const) keeps the system consistent."""
        trial = self.copy()
        try:
            for mask, const in rows:
                trial.add(mask, const)
        except Conflict:
            return False
        return True

    def assignment(self, nvars: int, rng=None) -> list:
        """Back-substitute; free variables are 0 or drawn from ``rng``."""
        values = [0] * nvars
        ones = 0
        if rng is not None:
            for i in range(nvars):
                if (1 << i) not in self.pivots and rng.integers(0, 2):
                    values[i] = 1
                    ones |= 1 << i
        for low in sorted(self.pivots, reverse=True):
            mask, const, _ = self.pivots[low]
            bit = (const ^ ((mask ^ low) & ones).bit_count()) & 1
            if bit:
                values[low.bit_length() - 1] = 1
                ones |= low
        return values


class GF2System:
    """A linear system over GF(2) with hashable variable keys."""

    def __init__(self):
        self.index: dict = {}
        self.keys: list = []
        self.equations: list = []
        self._echelon = Echelon()
        self._conflict: Optional[int] = None

    def var(self, key: Hashable) -> int:
        i = self.index.get(key)
        if i is None:
            i = len(self.keys)
            self.index[key] = i
            self.keys.append(key)
        return i

    def add(self, terms: Iterable[Hashable], constant: int, label: object = None) -> None:
        """Add ``sum(terms) = constant``; repeated terms cancel."""
        mask = 0
        for t in terms:
            mask ^= 1 << self.var(t)
        eq_id = len(self.equations)
        self.equations.append((label, mask, constant & 1))
        if self._conflict is None:
            try:
                self._echelon.add(mask, constant & 1, 1 << eq_id)
            except Conflict as c:
                self._conflict = c.combo

    @property
    def consistent(self) -> bool:
        return self._conflict is None

    def echelon(self) -> Echelon:
        return self._echelon

    def solve(self, rng=None) -> Optional[dict]:
        """A satisfying assignment as ``{key: bit}``, or None if inconsistent."""
        if self._conflict is not None:
            return None
        values = self._echelon.assignment(len(self.keys), rng)
        return {k: values[i] for i, k in enumerate(self.keys)}

    def _equation(self, eq_id: int) -> Equation:
        label, mask, const = self.equations[eq_id]
        names = frozenset(self.keys[i] for i in range(mask.bit_length()) if mask >> i & 1)
        return Equation(label, names, const)

    def certificate(self, minimize: bool = True) -> Optional[Certificate]:
        """A conflicting equation subset, minimal under deletion when requested."""
        if self._conflict is None:
            return None
        ids = [i for i in range(self._conflict.bit_length()) if self._conflict >> i & 1]
        if minimize:
            ids = self._minimize(ids)
        return Certificate(tuple(self._equation(i) for i in ids))

    def _inconsistent(self, ids: list) -> bool:
        e = Echelon(track=False)
        try:
            for i in ids:
                _, mask, const = self.equations[i]
                e.add(mask, const)
        except Conflict:
            return True
        return False

    def _minimize(self, ids: list) -> list:
        keep = list(ids)
        for i in list(ids):
            trial = [j for j in keep if j != i]
            if self._inconsistent(trial):
                keep = trial
        return keep
