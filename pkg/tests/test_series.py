import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewalks.errors import (BranchNotSeparated, DivisionByNonUnit, NonSquareConstantTerm,
                              ValuationTooLow, ZeroSubstitutionIntoNegativePower)
from conewalks.laurent import LaurentX, Mod, ZetaNumber
from conewalks.series import (INTEGERS, LAURENT_X, AlgebraicSeriesDef, ResidueRing,
                              TruncatedSeries, eval_series_at, extract_nonneg_cubic, newton_solve,
                              part_extract, series_from_json, series_to_json, sqrt_series, t_series)

N = 12
t = t_series(N)


def rat(*cs, order=N):
    return TruncatedSeries(list(cs), order)


# ---------------------------------------------------------------------------
# arithmetic

def test_product():
    assert ((1 + t) * (1 - t)).coeffs == (1 - t * t).coeffs


def test_geometric():
    assert (1 / (1 - 8 * t)).coeffs == [8 ** n for n in range(N + 1)]


def test_long_division():
    assert (t * (1 + t) / (1 - 8 * t)).coeffs[:4] == [0, 1, 9, 72]


def test_division_by_non_unit():
    with pytest.raises(DivisionByNonUnit):
        1 / t


def test_orders_truncate_to_minimum():
    a = TruncatedSeries([1, 1, 1], 2)
    b = TruncatedSeries([1] * 6, 5)
    assert (a * b).order == 2


def test_floats_rejected():
    with pytest.raises(TypeError):
        TruncatedSeries([0.5, 1], 1)


# ---------------------------------------------------------------------------
# square roots and Newton

def test_sqrt_binomial():
    s = sqrt_series(1 + 2 * t)
    assert s.coeffs[:4] == [1, 1, Fraction(-1, 2), Fraction(1, 2)]


def test_sqrt_non_square():
    with pytest.raises(NonSquareConstantTerm):
        sqrt_series(2 + t)


def test_sqrt_delta_laurent():
    x = LaurentX.monomial(1)
    xx = TruncatedSeries.constant(x + LaurentX.monomial(-1), N, LAURENT_X)
    tl = t_series(N, LAURENT_X)
    delta = (1 - tl * (3 * xx + 2)) * (1 + tl * (xx + 2))
    assert delta.coeffs[0] == LaurentX.constant(1)
    r = sqrt_series(delta)
    assert r * r == delta


def u_coefficients(order):
    """(1-3u)^3 (1+u) t^2 + (1 + 18u^2 - 27u^4) t - u as a polynomial in u."""
    tt = t_series(order)
    t2 = tt * tt
    # (1-3u)^3 (1+u) = 1 - 8u + 18u^2 - 27u^4
    c0 = t2 + tt
    c1 = -8 * t2 - 1
    c2 = 18 * t2 + 18 * tt
    c3 = 0 * tt
    c4 = -27 * t2 - 27 * tt
    return [c0, c1, c2, c3, c4]


def test_newton_u():
    u = newton_solve(AlgebraicSeriesDef(u_coefficients, [0, 1], name="u"), 20)
    assert u.coeffs[:3] == [0, 1, 1]
    cs = u_coefficients(20)
    res = cs[4]
    for c in reversed(cs[:4]):
        res = res * u + c
    assert res.is_zero()


def test_newton_idempotent():
    def coeffs(order):
        one = TruncatedSeries.constant(1, order)
        return [0 * one, -1 * one, one]           # F^2 - F
    assert newton_solve(AlgebraicSeriesDef(coeffs, [1, 0]), 10).coeffs == [1] + [0] * 10


def test_newton_bad_seed():
    def coeffs(order):
        one = TruncatedSeries.constant(1, order)
        return [0 * one, -1 * one, one]
    with pytest.raises(BranchNotSeparated):
        newton_solve(AlgebraicSeriesDef(coeffs, [2, 0]), 10)


# ---------------------------------------------------------------------------
# parts and evaluation

def test_part_extract_examples():
    f = TruncatedSeries([LaurentX({1: 1, -1: 1})], 0, LAURENT_X)
    assert part_extract(f, "Pos").coeffs[0] == LaurentX.monomial(1)
    assert part_extract(f, "Neg").coeffs[0] == LaurentX.monomial(-1)
    # 1/(1+x) expanded in x has no negative part
    g = TruncatedSeries([LaurentX({k: (-1) ** k for k in range(10)})], 0, LAURENT_X)
    assert part_extract(g, "Neg").coeffs[0].is_zero()


def test_eval_at_one_and_zero():
    f = TruncatedSeries([LaurentX({-1: 2, 0: 1, 3: 5}), LaurentX({2: 1})], 1, LAURENT_X)
    assert eval_series_at(f, 1).coeffs == [8, 1]
    with pytest.raises(ZeroSubstitutionIntoNegativePower):
        eval_series_at(f, 0)


def test_eval_at_zeta():
    z = ZetaNumber(0, 1)
    assert z * z == ZetaNumber(-1, -1)
    f = TruncatedSeries([LaurentX({1: 1, 2: 1})], 0, LAURENT_X)    # zeta + zeta^2 = -1
    assert eval_series_at(f, z).coeffs[0] == ZetaNumber(-1, 0)
    assert ZetaNumber(3, 4).real_imag() == (1, 2)


def _dense_oracle(F: TruncatedSeries, power: int, deg: int):
    """[x^>=] F(1/x) / (1+x+x^2)^power via the periodic expansion 1, -1, 0, ..."""
    L = deg + 40
    base = [(1, -1, 0)[k % 3] for k in range(L)]
    inv = base
    if power == 2:
        inv = [sum(base[a] * base[k - a] for a in range(k + 1)) for k in range(L)]
    out = []
    for c in F.coeffs:
        refl = c.reflect()
        col = {}
        for e, v in refl.items():
            for k in range(L):
                if 0 <= e + k <= deg:
                    col[e + k] = col.get(e + k, 0) + v * inv[k]
        out.append(LaurentX(col))
    return out


@pytest.mark.parametrize("power,F", [(1, {1: 1}), (1, {0: 1}), (1, {-1: 1}), (2, {-3: 2, 4: 1})])
def test_cubic_extraction_examples(power, F):
    f = TruncatedSeries([LaurentX(F)], 0, LAURENT_X)
    got = extract_nonneg_cubic(f, power).expand(12)
    assert got.coeffs == _dense_oracle(f, power, 12)


def test_cubic_extraction_valuation():
    f = TruncatedSeries([LaurentX({-2: 1})], 0, LAURENT_X)
    with pytest.raises(ValuationTooLow):
        extract_nonneg_cubic(f, 1)


poly_terms = st.dictionaries(st.integers(min_value=-1, max_value=15), st.integers(-5, 5), max_size=6)


@settings(max_examples=20, deadline=None)
@given(st.lists(poly_terms, min_size=1, max_size=4), st.sampled_from([1, 2]), st.integers(0, 1))
def test_cubic_extraction_random(cols, power, lower):
    low = -1 if power == 1 else -3
    cols = [{max(k - lower * 2, low): v for k, v in c.items()} for c in cols]
    f = TruncatedSeries([LaurentX(c) for c in cols], len(cols) - 1, LAURENT_X)
    assert extract_nonneg_cubic(f, power).expand(15).coeffs == _dense_oracle(f, power, 15)


# ---------------------------------------------------------------------------
# serialization

def test_json_round_trip():
    f = rat(1, Fraction(1, 3), -2, order=2)
    text = series_to_json(f)
    assert json.loads(text) == ["1", "1/3", "-2"]
    assert series_from_json(text) == f
    g = TruncatedSeries([LaurentX({-1: Fraction(1, 2)}), LaurentX()], 1, LAURENT_X)
    assert json.loads(series_to_json(g))[0] == [{"i": -1, "c": "1/2"}]
    assert series_from_json(series_to_json(g)) == g


# ---------------------------------------------------------------------------
# properties

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=100, deadline=None)
@given(st.lists(fracs, min_size=30, max_size=30))
def test_sqrt_squares_back(tail):
    f = TruncatedSeries([Fraction(1)] + tail, 30)
    s = sqrt_series(f)
    assert s * s == f


@settings(max_examples=40, deadline=None)
@given(st.lists(fracs, min_size=6, max_size=6), st.lists(fracs, min_size=6, max_size=6),
       st.lists(fracs, min_size=6, max_size=6))
def test_rational_ring_axioms(a, b, c):
    A, B, C = (TruncatedSeries(v, 5) for v in (a, b, c))
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    assert A * 1 == A and A + 0 == A


laurents = st.dictionaries(st.integers(-3, 3), st.integers(-4, 4), max_size=4).map(LaurentX)


@settings(max_examples=40, deadline=None)
@given(laurents, laurents, laurents)
def test_laurent_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * LaurentX.constant(1) == a


zetas = st.builds(ZetaNumber, fracs, fracs)


@settings(max_examples=40, deadline=None)
@given(zetas, zetas, zetas)
def test_zeta_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    if not a.is_zero():
        assert a * a.inverse() == ZetaNumber(1, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 96), st.integers(0, 96), st.integers(0, 96))
def test_residue_ring_axioms(a, b, c):
    p = 97
    A, B, C = Mod(a, p), Mod(b, p), Mod(c, p)
    assert (A * B) * C == A * (B * C)
    assert A * (B + C) == A * B + A * C
    if a:
        assert (A * A.inverse()).v == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(laurents, min_size=4, max_size=4))
def test_part_extract_properties(cols):
    f = TruncatedSeries(cols, 3, LAURENT_X)
    nn, neg, pos = part_extract(f, "NonNeg"), part_extract(f, "Neg"), part_extract(f, "Pos")
    assert nn + neg == f
    for p, q in zip(pos.coeffs, nn.coeffs):
        assert all(q.coeff(k) == v for k, v in p.items())
    assert part_extract(f, "Neg") == part_extract(f.reflect(), "Pos").reflect()


def test_integer_and_residue_rings():
    a = TruncatedSeries([1, 2, 3], 2, INTEGERS)
    assert (a * a).coeffs == [1, 4, 10]
    R = ResidueRing(7)
    b = TruncatedSeries([1, 6], 1, R)
    assert (b * b).coeffs[1] == Mod(5, 7)
