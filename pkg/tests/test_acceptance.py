"""The acceptance suite: one test and one printed pass/fail line per criterion.

The criterion logic lives in conewalks.acceptance so that `conewalks selftest`
runs exactly the same checks.  The pinned parameters below are the contract;
changing one of them means changing the criterion.
"""
from fractions import Fraction

import pytest

from conewalks import acceptance as acc

CRITERION_IDS = [cid for cid, _, _ in acc.CRITERIA]
RESULTS = {}


def test_criteria_listed():
    assert CRITERION_IDS == ["1", "2", "3", "4", "5", "6", "7", "8", "9a", "9b", "10", "11"]
    assert acc.SLOW == {"9b"}


def test_pinned_budgets():
    assert acc.BUDGET == {"1": 5, "2": 30, "3": 60, "4": 120, "5": 300, "6": 120, "7": 120, "8": 60,
                          "9a": 1, "9b": 1200, "10": 600, "11": 120}


def test_pinned_parameters():
    assert acc.ENDPOINT_PREFIX == (1, 2, 17, 80, 536) and acc.ENDPOINT_ORDER == 60
    assert acc.QUADRANT_ORDER == 20
    assert acc.FUNCTIONAL_ORDER == 15
    assert acc.ORBIT_ORDER == 12
    assert acc.REFLECTION_STARTS == ((0, 0), (-1, 0), (-2, 0), (0, -3))
    assert acc.REFLECTION_BOX == 12 and acc.REFLECTION_ORDER == 24
    assert acc.KERNEL_MIN_CERTIFIED == 16 and acc.KERNEL_ORDER >= acc.KERNEL_MIN_CERTIFIED
    # S(zeta) = -t^2 - 11 t^4 - 30 t^5 + ...
    assert acc.S_ZETA_PREFIX == (0, 0, -1, 0, -11, -30)
    assert acc.CLOSED_ORDER == 30
    assert acc.STILDE_ORDER == 25 and acc.STILDE_POINT == 2
    assert acc.GUESS_TERMS == 1200 and acc.GUESS_DEGREES == (24, 36) and acc.GUESS_N_TERMS == 323
    assert acc.GUESS_USE + acc.GUESS_MARGIN <= acc.GUESS_TERMS
    assert acc.GUESS_MARGIN >= Fraction(acc.GUESS_USE, 5)
    assert acc.GUESS_USE >= (acc.GUESS_DEGREES[0] + 1) * (acc.GUESS_DEGREES[1] + 1)
    assert acc.ASYMPTOTIC_ORDER == 1000
    assert acc.TOL_TOTAL == 0.01 and acc.TOL_ORIGIN == 0.03
    assert acc.ROOT_DIGITS == 30
    assert acc.MUTATION_TRIALS == 20


def test_over_budget_is_a_failure(monkeypatch):
    monkeypatch.setitem(acc.BUDGET, "1", 0)
    r = acc._timed("1", "budget probe", lambda: (True, "ok"))
    assert not r.passed and "over budget" in r.detail


def test_crash_is_a_failure():
    def boom():
        raise RuntimeError("broken")
    r = acc._timed("1", "crash probe", boom)
    assert not r.passed and r.line.startswith("[FAIL] criterion 1:")


PARAMS = [pytest.param(cid, marks=pytest.mark.slow) if cid in acc.SLOW else cid for cid in CRITERION_IDS]


@pytest.mark.parametrize("cid", PARAMS)
def test_criterion(cid, capsys):
    r = acc.run_criterion(cid)
    RESULTS[cid] = r
    with capsys.disabled():
        print("\n" + r.line)
    assert r.passed, r.line
