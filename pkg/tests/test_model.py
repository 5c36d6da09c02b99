import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewalks.errors import DegenerateModel, NonMonomialGroup
from conewalks.laurent import LaurentPoly2, LaurentX
from conewalks.model import (WEYL_MODELS, WEYL_ORDERS, ZERO_ORBIT_MODELS, EdgeRule, GroupKind,
                             ModelClass, StepSet, affine_orbit, all_step_sets, build_group, builtin,
                             classify_model, H_parts, mirror, orbit_sum, step_polynomial)


def images(G):
    """Set of exponent pairs ((i, j), (k, l)) of g(x, y) = (x^i y^j, x^k y^l)."""
    return {((X[1], X[2]), (Y[1], Y[2])) for X, Y in (g.image for g in G.elements)}


# ---------------------------------------------------------------------------
# step polynomial

def test_king_step_polynomial():
    x, y = LaurentPoly2.monomial(1, 0), LaurentPoly2.monomial(0, 1)
    xb, yb = LaurentPoly2.monomial(-1, 0), LaurentPoly2.monomial(0, -1)
    assert step_polynomial(builtin("king")) == (x + 1 + xb) * (y + 1 + yb) - 1


def test_single_step_polynomial():
    assert step_polynomial(StepSet(frozenset({(1, 0)}))) == LaurentPoly2.monomial(1, 0)


def test_simple_H_parts():
    hm, h0, hp = H_parts(builtin("simple"))
    assert hm == LaurentX.constant(1) and hp == LaurentX.constant(1)
    assert h0 == LaurentX({1: 1, -1: 1})


def test_step_validation():
    with pytest.raises(ValueError):
        StepSet(frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        StepSet(frozenset({(2, 0)}))
    with pytest.raises(ValueError):
        StepSet(frozenset())


def test_json_round_trip():
    m = builtin("king", "allow")
    back = StepSet.from_json(m.to_json())
    assert back.steps == m.steps and back.edge_rule is EdgeRule.ALLOW
    d = json.loads(m.to_json())
    assert set(d) == {"name", "steps", "edge_rule"}


# ---------------------------------------------------------------------------
# groups

def test_simple_group_images():
    G = build_group(builtin("simple"))
    assert G.order == 4
    assert images(G) == {((1, 0), (0, 1)), ((-1, 0), (0, 1)), ((-1, 0), (0, -1)), ((1, 0), (0, -1))}


def test_tandem_group_images():
    G = build_group(builtin("tandem"))
    assert G.order == 6
    expected = {((1, 0), (0, 1)), ((-1, 1), (0, 1)), ((-1, 1), (-1, 0)), ((0, -1), (-1, 0)),
                ((0, -1), (1, -1)), ((1, 0), (1, -1))}
    assert images(G) == expected


def test_gouyou_beauchamps_group_images():
    G = build_group(builtin("gouyou-beauchamps"))
    assert G.order == 8
    expected = {((1, 0), (0, 1)), ((-1, 1), (0, 1)), ((-1, 1), (-2, 1)), ((-1, 0), (-2, 1)),
                ((-1, 0), (0, -1)), ((1, -1), (0, -1)), ((1, -1), (2, -1)), ((1, 0), (2, -1))}
    assert images(G) == expected
    # the pair (xbar, x^2 ybar) is not an element
    assert ((-1, 0), (2, -1)) not in images(G)


@pytest.mark.parametrize("name", WEYL_MODELS)
def test_weyl_group_orders(name):
    assert build_group(builtin(name)).order == WEYL_ORDERS[name]
    assert [WEYL_ORDERS[m] for m in WEYL_MODELS] == [4, 4, 4, 4, 6, 6, 8]


@pytest.mark.parametrize("name", WEYL_MODELS + ZERO_ORBIT_MODELS)
def test_group_invariants(name):
    m = builtin(name)
    G = build_group(m)
    S = step_polynomial(m)
    phi, psi = G.element("φ"), G.element("ψ")
    assert G.compose(phi, phi) == G.identity and G.compose(psi, psi) == G.identity
    for g in G.elements:
        assert g.apply(S) == S
        assert g.sign == (-1) ** g.length
    assert len([g for g in G.elements if g.length == G.d]) == 1


def test_degenerate_model():
    with pytest.raises(DegenerateModel):
        build_group(StepSet(frozenset({(1, 0), (0, 1), (-1, 0)})))


def test_infinite_group_marker():
    # the model {N, SE, W, SW} has an infinite group
    G = build_group(StepSet(frozenset({(0, 1), (1, -1), (-1, 0), (-1, -1)})))
    assert G.kind is not GroupKind.FINITE
    with pytest.raises(NonMonomialGroup):
        orbit_sum(G)


# ---------------------------------------------------------------------------
# orbit sums and the affine action

def test_king_orbit_sum():
    G = build_group(builtin("king"))
    expect = LaurentPoly2({(1, 1): 1, (-1, 1): -1, (1, -1): -1, (-1, -1): 1})
    assert orbit_sum(G) == expect


@pytest.mark.parametrize("name", ZERO_ORBIT_MODELS)
def test_zero_orbit_sum(name):
    assert orbit_sum(build_group(builtin(name))).is_zero()


def test_orbit_sum_of_zero():
    assert orbit_sum(build_group(builtin("king")), F=LaurentPoly2()).is_zero()


def test_king_affine_orbit():
    G = build_group(builtin("king"))
    assert sorted(affine_orbit(G, (0, 0))) == sorted([((0, 0), 1), ((-2, 0), -1), ((0, -2), -1),
                                                      ((-2, -2), 1)])


def test_identity_affine():
    G = build_group(builtin("tandem"))
    assert G.identity.affine(3, 5) == (3, 5) and G.identity.sign == 1


@pytest.mark.parametrize("name", WEYL_MODELS)
def test_walls_contain_axes(name):
    G = build_group(builtin(name))
    for p in [(-1, 0), (-1, 7), (3, -1), (-1, -1)]:
        assert G.on_wall(p)


@pytest.mark.parametrize("name", WEYL_MODELS)
def test_affine_orbit_distinct(name):
    G = build_group(builtin(name))
    for a in range(4):
        for b in range(4):
            pts = [p for p, _ in affine_orbit(G, (a, b))]
            assert len(set(pts)) == len(pts) == G.order


@pytest.mark.parametrize("name", WEYL_MODELS)
def test_orbit_sum_alternating(name):
    """Pairing g with g o phi: the two terms of every pair cancel after sign."""
    G = build_group(builtin(name))
    phi = G.element("φ")
    F = LaurentPoly2.monomial(1, 1)
    pairs = LaurentPoly2()
    for g in G.elements:
        h = G.compose(g, phi)
        assert h.sign == -g.sign
        pairs = pairs + g.apply(F) * g.sign + h.apply(F) * h.sign
    # each element is counted twice, once as g and once as g o phi
    assert pairs == orbit_sum(G) * 2


# ---------------------------------------------------------------------------
# classification

def test_classification_examples():
    assert classify_model(StepSet(frozenset({(1, 0), (1, 1)}))) is ModelClass.TRIVIAL_RATIONAL
    assert classify_model(StepSet(frozenset({(1, 0), (-1, 1), (0, 1), (1, -1)}))) is ModelClass.SINGULAR
    assert classify_model(builtin("king")) is ModelClass.INTERESTING


def test_mirror_is_involution():
    m = builtin("tandem")
    assert mirror(mirror(m)).steps == m.steps
    assert mirror(m).steps != m.steps


def test_step_set_count():
    assert sum(1 for _ in all_step_sets()) == 255


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=255))
def test_group_preserves_step_polynomial(mask):
    dirs = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
    m = StepSet(frozenset(dirs[k] for k in range(8) if mask >> k & 1))
    try:
        G = build_group(m)
    except DegenerateModel:
        return
    if G.kind is not GroupKind.FINITE:
        return
    S = step_polynomial(m)
    for g in G.elements:
        assert g.apply(S) == S
