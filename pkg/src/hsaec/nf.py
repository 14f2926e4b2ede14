"""NF as disjoint amalgamation, with explicit witness chains.

For ``M0 <= M1, M2 <= M3`` the chain enumerates ``I(M1) - I(M0)`` as
``d_0, d_1, ...`` in declaration order and grows both sides one atom at a
time inside M1 and M3.  The last right-hand level ``N_{2,alpha}`` spans
``I(M1) + I(M2)``; it sits inside M3, which is where monotonicity takes over.
"""

from __future__ import annotations

from dataclasses import dataclass

from .forking import ForkingQuery, nonforking_decide
from .structure import Element, I_SORT, Model, ModelError, induced_submodel, is_induced


def _check_square(m0: Model, m1: Model, m2: Model, m3: Model) -> None:
    for small, big in ((m0, m1), (m0, m2), (m1, m3), (m2, m3)):
        if not is_induced(small, big):
            raise ModelError("expected M0 <= M1, M2 <= M3 as induced submodels")


def nf_decide(m0: Model, m1: Model, m2: Model, m3: Model) -> bool:
    _check_square(m0, m1, m2, m3)
    return m1.atom_set & m2.atom_set == m0.atom_set


@dataclass(frozen=True, eq=False)
class NFChain:
    m0: Model
    m1: Model
    m2: Model
    m3: Model
    d: tuple
    n1: tuple
    n2: tuple

    @property
    def alpha(self) -> int:
        return len(self.d)

    @property
    def m3_prime(self) -> Model:
        return self.n2[-1]

    def violations(self) -> list:
        out = []
        k = self.alpha
        if len(self.n1) != k + 1 or len(self.n2) != k + 1:
            return ["level count does not match alpha"]
        if self.n1[0] != self.m0 or self.n1[k] != self.m1:
            out.append("left chain does not run from M0 to M1")
        if self.n2[0] != self.m2:
            out.append("right chain does not start at M2")
        if not is_induced(self.n2[k], self.m3):
            out.append("last right level is not inside M3")
        for i in range(k + 1):
            if not is_induced(self.n1[i], self.n2[i]):
                out.append(f"level {i}: N1 is not inside N2")
        for i, di in enumerate(self.d):
            lo, hi = self.n1[i], self.n1[i + 1]
            if not (is_induced(lo, hi) and hi.atom_set == lo.atom_set | {di} and di not in lo.atom_set):
                out.append(f"step {i}: not a one-point extension by {di}")
                continue
            if not is_induced(self.n2[i], self.n2[i + 1]):
                out.append(f"step {i}: right levels are not increasing")
                continue
            try:
                q = ForkingQuery(lo, self.n2[i], self.n2[i + 1], Element(I_SORT, di))
            except ModelError as exc:
                out.append(f"step {i}: {exc}")
                continue
            if not nonforking_decide(q):
                out.append(f"step {i}: type of {di} forks")
        return out

    def validate(self) -> bool:
        return not self.violations()

    def to_text(self) -> str:
        lines = ["NFCHAIN 1", f"ALPHA {self.alpha}", "D" + "".join(" " + x for x in self.d)]
        for i in range(self.alpha + 1):
            lines.append(f"N1 {i}" + "".join(" " + x for x in self.n1[i].atoms))
        for i in range(self.alpha + 1):
            lines.append(f"N2 {i}" + "".join(" " + x for x in self.n2[i].atoms))
        return "\n".join(lines) + "\n"


def chain_levels(m0: Model, m1: Model, m2: Model, m3: Model) -> NFChain:
    """Build the chain without checking anything (see :meth:`NFChain.violations`)."""
    d = tuple(x for x in m1.atoms if x not in m0.atom_set)
    n1, n2 = [], []
    for i in range(len(d) + 1):
        extra = set(d[:i])
        n1.append(induced_submodel(m1, m0.atom_set | extra))
        n2.append(induced_submodel(m3, m2.atom_set | extra))
    return NFChain(m0, m1, m2, m3, d, tuple(n1), tuple(n2))


def build_nf_witness(m0: Model, m1: Model, m2: Model, m3: Model) -> NFChain:
    if not nf_decide(m0, m1, m2, m3):
        raise ValueError("NF fails: I(M1) and I(M2) meet outside I(M0)")
    chain = chain_levels(m0, m1, m2, m3)
    problems = chain.violations()
    if problems:
        raise RuntimeError("constructed chain does not validate: " + "; ".join(problems))
    return chain
