from fractions import Fraction

import pytest

from conewalks.closedform import (P_142, BivariateAt, Tower, closed_endpoint_series, closed_R0_R1_B1_B2,
                                  closed_Stilde_at, closed_variant_R0, expand_named,
                                  poly, w_branches_distinct)
from conewalks.enumeration import a_start, count_sequence
from conewalks.errors import SingularEvaluationPoint
from conewalks.kernel import Stilde_at, build_context
from conewalks.model import build_group, builtin
from conewalks.series import eval_series_at

N = 20


@pytest.fixture(scope="module")
def tower():
    return Tower(N)


@pytest.fixture(scope="module")
def ctx():
    return build_context(N)


def a_series(end, n=N, rule="forbid"):
    """Counts from the weighted A-start, divided back by the weight scale."""
    m = builtin("king", rule)
    s = a_start(build_group(builtin("king")))
    return [Fraction(c, s.scale) for c in count_sequence(m, "three-quadrant", s, end, n)]


def test_named_prefixes():
    assert expand_named("u", 5).coeffs[:3] == [0, 1, 1]
    assert expand_named("v", 5).coeffs[:3] == [0, 1, 3]
    assert expand_named("w", 5).coeffs[:3] == [1, 2, 4]
    assert expand_named("wtilde", 5).coeffs[0] == Fraction(1, 2)


def test_unknown_name():
    with pytest.raises(KeyError):
        expand_named("nope", 5)


def test_relations_vanish(tower):
    for name, r in tower.relation_residuals().items():
        assert r.is_zero(), name
    assert set(tower.relation_residuals()) == {"u", "v", "w", "u-rational", "v-rational", "wtilde"}


def test_R0_prefix_and_display(tower):
    R0, R1, B1, B2 = closed_R0_R1_B1_B2(N)
    assert R0.coeffs[:6] == [0, 0, 0, 1, 2, 17]
    assert B1.coeffs[:2] == [0, 0]
    t = tower.t
    display = t / 2 * (tower.w * poly(tower.v, [1, 2]) / poly(tower.v, P_142) - 1)
    assert display.truncate(N) == R0


def test_C_minus_one_zero():
    c = closed_endpoint_series("C-1,0", 10).coeffs
    assert c[:6] == [0, 1, 2, 17, 80, 536]
    assert [int(x) for x in c] == count_sequence(builtin("king"), "three-quadrant", (0, 0), (-1, 0), 10)


def test_scalars_match_enumeration(tower, ctx):
    assert tower.named("R0") == ctx.R0.truncate(N)
    assert tower.named("R1") == ctx.R1.truncate(N)


def test_M10_and_A00(tower):
    M10 = tower.named("M1,0").coeffs
    A00 = tower.named("A0,0").coeffs
    assert M10 == a_series((-2, 0))
    assert A00 == [2 * c for c in M10]
    assert A00 == a_series((0, 0))


def test_R_and_S_at_one(tower, ctx):
    assert tower.named("R(1)") == eval_series_at(ctx.R, 1).truncate(N)
    assert tower.named("S(1)") == eval_series_at(ctx.S, 1).truncate(N)
    assert tower.named("S(1)") + Fraction(1, 2) == (tower.w * tower.wtilde).truncate(N)


def test_A11_is_total(tower):
    s = a_start(build_group(builtin("king")))
    total = count_sequence(builtin("king"), "three-quadrant", s, "total", 12)
    assert tower.named("A(1,1)").coeffs[:13] == [Fraction(c, s.scale) for c in total]


@pytest.mark.parametrize("x0", [2, 3])
def test_Stilde_matches_enumeration(x0):
    order = 25
    closed = closed_Stilde_at(Fraction(x0), order)
    enum = Stilde_at(build_context(order), Fraction(x0))
    assert closed.truncate(order) == enum.truncate(order)


def test_U1_leading_term():
    U = BivariateAt(Fraction(2), 8).U1
    assert U.coeffs[:3] == [0, 0, 2]


def test_U0_route_agrees():
    a = closed_Stilde_at(Fraction(2), 14, route="U1")
    b = closed_Stilde_at(Fraction(2), 14, route="U0")
    assert a.truncate(14) == b.truncate(14)


@pytest.mark.parametrize("x0", [0, 1, -1])
def test_singular_points(x0):
    with pytest.raises(SingularEvaluationPoint):
        closed_Stilde_at(Fraction(x0), 6)


def test_variant_R0():
    v = closed_variant_R0(N).coeffs
    std = closed_R0_R1_B1_B2(N)[0].coeffs
    assert v[:3] == [0, 0, 0] and v[3] == 1
    assert v[:7] != std[:7]
    enum = a_series((-1, 0), N - 2, rule="allow")
    assert v[2:] == enum


def test_variant_literal_display_disagrees(tower):
    literal = tower.named("variant_R0_display").coeffs
    assert literal[0] != 0 or literal[1] != 0 or literal[2] != 0


def test_w_conjugates_distinct():
    assert w_branches_distinct()
