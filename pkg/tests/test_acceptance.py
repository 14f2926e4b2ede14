"""Acceptance criteria 1-8, each run at its stated scale and time limit.

Every test prints one ``ACCEPTANCE <n> PASS|FAIL`` line, even when it fails.
"""

from __future__ import annotations

import time

import pytest

from hsaec.suites import run_property_suite

CRITERIA = [
    # (number, suites, time limit in seconds, description)
    (1, ["amalg-dichotomy"], 60, "amalgamation dichotomy, n in {2,3}"),
    (2, ["sol-iso-roundtrip"], 10, "solution/isomorphism round trips"),
    (3, ["solution-existence"], 30, "existence and extension of solutions"),
    (4, ["type-oracle"], 120, "type equality: fingerprint vs search"),
    (5, ["nonfork-laws"], 180, "nonforking laws at micro scale"),
    (6, ["uniqueness"], 300, "uniqueness-triple dichotomy"),
    (7, ["nf-dap"], 120, "NF = disjoint amalgamation"),
    (8, ["serialization"], 5, "canonical serialization round trip"),
]


@pytest.mark.parametrize("number,names,limit,what", CRITERIA, ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(number, names, limit, what, capsys, tmp_path):
    start = time.perf_counter()
    reports = [run_property_suite(name, seed=0, out=tmp_path) for name in names]
    elapsed = time.perf_counter() - start
    passed = sum(r.passed for r in reports)
    failed = sum(r.failed for r in reports)
    ok = failed == 0 and elapsed < limit
    with capsys.disabled():
        print(
            f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'} {what}: "
            f"{passed} passed, {failed} failed, {elapsed:.1f}s (limit {limit}s)"
        )
    notes = [n for r in reports for n in r.notes]
    assert failed == 0, notes[:5]
    assert elapsed < limit
