from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bruteforce import walks
from conewalks.enumeration import (EXACT, FLOAT, TOTAL, AxisNegativeX, BadPrime, EvalAt, PointSeries,
                                   QuadrantPart, Region, SignMode, StartDistribution, TotalSum,
                                   WalkTable, a_start, count_modular, count_sequence,
                                   count_sequence_crt, crt_reconstruct, evolve, modular, parse_start,
                                   prime_schedule, series_slice, tables, validate_primes, walk_tables)
from conewalks.errors import EndpointOutsideRegion, InsufficientModulus, StartOutsideC
from conewalks.model import build_group, builtin

# frozen brute-force values (tests/bruteforce.py)
KING_C_TOTAL = [1, 7, 50, 369, 2772, 21020, 160736]
KING_Q_TOTAL = [1, 3, 18, 105, 684, 4550, 31340]
KING_ALLOW_TOTAL = [1, 7, 52, 385, 2914, 22160, 169924]
KING_C_END = {
    (0, 0): [1, 0, 7, 18, 154, 776, 5375],
    (-1, 0): [0, 1, 2, 17, 80, 536, 3234],
    (-2, 0): [0, 0, 2, 6, 58, 308, 2235],
    (1, 1): [0, 1, 2, 26, 120, 935, 5730],
    (-3, 2): [0, 0, 0, 3, 24, 231, 1758],
}
OTHER_C_TOTAL = {
    "simple": [1, 4, 14, 54, 200, 776, 2940, 11466, 43980],
    "diagonal": [1, 3, 12, 41, 164, 590, 2360, 8715, 34860],
    "tandem": [1, 3, 8, 22, 65, 184, 527, 1558, 4500],
    "gouyou-beauchamps": [1, 4, 15, 57, 220, 844, 3293, 12728, 49947],
    "kreweras": [1, 3, 7, 19, 55, 149, 423, 1235, 3479],
}
OTHER_Q_TOTAL = {
    "simple": [1, 2, 6, 18, 60, 200, 700, 2450, 8820],
    "tandem": [1, 1, 2, 4, 9, 21, 51, 127, 323],
    "kreweras": [1, 1, 3, 7, 17, 47, 125, 333, 939],
}
KING_START_TOTAL = {(-1, 0): [1, 5, 36, 256, 1899, 14227], (-2, 0): [1, 5, 34, 237, 1728, 12785],
                    (0, -3): [1, 5, 34, 233, 1686, 12361]}


def king():
    return builtin("king")


# ---------------------------------------------------------------------------
# regions

def test_region_membership():
    assert Region.THREE_QUADRANT.contains(-5, 0) and not Region.THREE_QUADRANT.contains(-1, -1)
    assert Region.QUADRANT.contains(0, 0) and not Region.QUADRANT.contains(-1, 3)


# ---------------------------------------------------------------------------
# exact DP against brute force

def test_king_cone_n1():
    t = tables(king(), "three-quadrant", (0, 0), 1)[1]
    cells = list(t.nonzero_cells())
    assert len(cells) == 7 and t.total() == 7 and t.get(-1, -1) == 0


def test_king_totals():
    C = tables(king(), "three-quadrant", (0, 0), 6)
    Q = tables(king(), "quadrant", (0, 0), 6)
    assert [t.total() for t in C] == KING_C_TOTAL
    assert [t.total() for t in Q] == KING_Q_TOTAL


def test_king_allow_totals():
    C = tables(builtin("king", "allow"), "three-quadrant", (0, 0), 6)
    assert [t.total() for t in C] == KING_ALLOW_TOTAL


@pytest.mark.parametrize("end", sorted(KING_C_END))
def test_king_endpoints(end):
    assert count_sequence(king(), "three-quadrant", (0, 0), end, 6) == KING_C_END[end]


def test_endpoint_examples():
    assert count_sequence(king(), "three-quadrant", (0, 0), (-1, 0), 5) == [0, 1, 2, 17, 80, 536]
    assert count_sequence(king(), "three-quadrant", (0, 0), (0, 0), 2) == [1, 0, 7]
    assert count_sequence(king(), "three-quadrant", (0, 0), (-2, 0), 2) == [0, 0, 2]


@pytest.mark.parametrize("name", sorted(OTHER_C_TOTAL))
def test_other_models(name):
    seq = OTHER_C_TOTAL[name]
    assert count_sequence(builtin(name), "three-quadrant", (0, 0), TOTAL, len(seq) - 1) == seq
    if name in OTHER_Q_TOTAL:
        q = OTHER_Q_TOTAL[name]
        assert count_sequence(builtin(name), "quadrant", (0, 0), TOTAL, len(q) - 1) == q


@pytest.mark.parametrize("start", sorted(KING_START_TOTAL))
def test_other_starts(start):
    seq = KING_START_TOTAL[start]
    assert count_sequence(king(), "three-quadrant", start, TOTAL, len(seq) - 1) == seq


def test_full_cell_table_n3():
    t = tables(king(), "three-quadrant", (0, 0), 3)[3]
    assert {(i, j): v for i, j, v in t.nonzero_cells()} == dict(walks("king", 3))


def test_live_brute_force_small():
    for name in ("tandem", "gouyou-beauchamps"):
        for rule in ("forbid", "allow"):
            C = tables(builtin(name, rule), "three-quadrant", (0, 0), 5)
            for n in range(6):
                assert {(i, j): v for i, j, v in C[n].nonzero_cells()} == dict(walks(name, n, rule=rule))


def test_endpoint_outside_region():
    with pytest.raises(EndpointOutsideRegion):
        count_sequence(king(), "three-quadrant", (0, 0), (-1, -1), 3)


def test_start_outside_region():
    with pytest.raises(Exception):
        tables(king(), "quadrant", (-1, 0), 2)


# ---------------------------------------------------------------------------
# invariants

@pytest.mark.parametrize("name", ["king", "tandem", "gouyou-beauchamps"])
def test_full_plane_conservation(name):
    m = builtin(name)
    for t in tables(m, "full-plane", (0, 0), 6):
        assert t.total() == len(m) ** t.n


@pytest.mark.parametrize("name", ["king", "simple", "diabolo", "tandem"])
def test_region_nesting(name):
    m = builtin(name)
    Q = tables(m, "quadrant", (0, 0), 7)
    C = tables(m, "three-quadrant", (0, 0), 7)
    F = tables(m, "full-plane", (0, 0), 7)
    for q, c, f in zip(Q, C, F):
        for i, j, v in q.nonzero_cells():
            assert v <= c.get(i, j) <= f.get(i, j)


@pytest.mark.parametrize("name", ["king", "simple", "diagonal"])
def test_xy_symmetry(name):
    for t in tables(builtin(name), "three-quadrant", (0, 0), 7):
        for i, j, v in t.nonzero_cells():
            assert t.get(j, i) == v


def test_diabolo_is_not_xy_symmetric():
    # no vertical steps: one step reaches (1, 0) but not (0, 1)
    t = tables(builtin("diabolo"), "three-quadrant", (0, 0), 1)[1]
    assert t.get(1, 0) == 1 and t.get(0, 1) == 0


def test_edge_rule_monotone():
    A = tables(builtin("king", "allow"), "three-quadrant", (0, 0), 7)
    F = tables(builtin("king", "forbid"), "three-quadrant", (0, 0), 7)
    for a, f in zip(A, F):
        for i, j, v in f.nonzero_cells():
            assert a.get(i, j) >= v


def test_evolve_matches_stream():
    m = king()
    t = tables(m, "three-quadrant", (0, 0), 0)[0]
    ref = tables(m, "three-quadrant", (0, 0), 6)
    for n in range(1, 7):
        t = evolve(t, m, "three-quadrant")
        assert t.to_laurent() == ref[n].to_laurent()


def test_focus_keeps_target_cell():
    m = king()
    full = tables(m, "three-quadrant", (0, 0), 12)
    foc = list(walk_tables(m, "three-quadrant", StartDistribution.single((0, 0)), 12, focus=(-1, 0)))
    assert [t.get(-1, 0) for t in foc] == [t.get(-1, 0) for t in full]


# ---------------------------------------------------------------------------
# weighted starts

def test_a_start_king():
    s = a_start(build_group(king()))
    assert s.scale == 3
    assert sorted(s.scaled()) == [((-2, 0), 1), ((0, -2), 1), ((0, 0), 2)]


def test_parse_start():
    s = parse_start("0,0:2/3 -2,0:1/3")
    assert s.scale == 3 and sorted(s.scaled()) == [((-2, 0), 1), ((0, 0), 2)]


def test_a_start_endpoint_series():
    s = a_start(build_group(king()))
    seq = count_sequence(king(), "three-quadrant", s, (-1, 0), 5)
    assert seq == [0, 3, 6, 51, 240, 1608]


def test_series_slices():
    C = tables(king(), "three-quadrant", (0, 0), 4)
    assert series_slice(C, TotalSum()).coeffs == KING_C_TOTAL[:5]
    assert series_slice(C, PointSeries(-1, 0)).coeffs == [0, 1, 2, 17, 80]
    Q = tables(king(), "quadrant", (0, 0), 2)
    assert series_slice(Q, EvalAt(Fraction(1), Fraction(1))).coeffs == [1, 3, 18]
    assert series_slice(Q, QuadrantPart()).coeffs[2] == Q[2].to_laurent()
    neg = series_slice(C, AxisNegativeX()).coeffs[2]
    assert neg.coeff(-1) == 2 and neg.coeff(-2) == 2


# ---------------------------------------------------------------------------
# modular runs and CRT

def test_crt_examples():
    assert crt_reconstruct([2, 3], [3, 5]) == 8
    assert crt_reconstruct([536 % 101, 536 % 103], [101, 103]) == 536
    assert crt_reconstruct([42], [97]) == 42
    assert crt_reconstruct([96], [97], SignMode.BALANCED) == -1
    with pytest.raises(InsufficientModulus):
        crt_reconstruct([1], [97], bound=1000)


def test_bad_primes():
    with pytest.raises(BadPrime):
        validate_primes([91])
    with pytest.raises(BadPrime):
        validate_primes([3], scale=3)
    with pytest.raises(BadPrime):
        validate_primes([97, 97])


def test_modular_matches_exact():
    m = king()
    exact = tables(m, "three-quadrant", (0, 0), 12)
    for p in (97, 101, prime_schedule(1)[0]):
        for t, e in zip(walk_tables(m, "three-quadrant", StartDistribution.single((0, 0)), 12, modular(p)),
                        exact):
            for i, j, v in e.nonzero_cells():
                assert t.get(i, j) == v % p
    streams = count_modular(m, "three-quadrant", (0, 0), 3, [97])
    assert [t.total() for t in streams[97]][3] == 369 % 97


def test_crt_sequence():
    m = king()
    s = a_start(build_group(m))
    exact = count_sequence(m, "three-quadrant", s, (0, 0), 30)
    assert count_sequence_crt(m, "three-quadrant", s, (0, 0), 30) == exact
    assert count_sequence_crt(m, "three-quadrant", (0, 0), TOTAL, 20, threads=3) == \
        count_sequence(m, "three-quadrant", (0, 0), TOTAL, 20)


def test_prime_schedule():
    ps = prime_schedule(3)
    assert ps == sorted(ps, reverse=True) and all(p < 2 ** 62 for p in ps)


def test_float_mode_normalized():
    t = list(walk_tables(king(), "three-quadrant", StartDistribution.single((0, 0)), 6, FLOAT))
    assert abs(t[6].total() - KING_C_TOTAL[6] / 8 ** 6) < 1e-12


def test_checkpoint_round_trip():
    p = 101
    t = list(walk_tables(king(), "three-quadrant", StartDistribution.single((0, 0)), 5, modular(p)))[5]
    back = WalkTable.from_bytes(t.to_bytes())
    assert back.n == 5 and back.to_laurent() == t.to_laurent()


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 30), st.integers(min_value=1, max_value=3))
def test_crt_round_trip(x, k):
    ps = prime_schedule(k)
    M = 1
    for p in ps:
        M *= p
    x %= M
    assert crt_reconstruct([x % p for p in ps], ps) == x
