"""The algebraic series of the king model in the cone, as truncated series.

Everything is built from the tower Q(t) -> Q(t,u) -> Q(t,v) -> Q(t,w):

    (1-3u)^3 (1+u) t^2 + (1 + 18u^2 - 27u^4) t - u = 0,     u = t + t^2 + ...
    (1 + 3v - v^3) u - v (v^2 + v + 1) = 0,                  v = t + 3t^2 + ...
    w = sqrt(1 + 4v - 4v^3 - 4v^4),                           w = 1 + 2t + ...

plus the quadratic extension w~ (for S(1)) and the parametrizing series
U1(x0), U0(x0) of the bivariate series at a numeric point x0.

Closed forms are evaluated at a working order a few terms above the
requested one, because several of them divide by series of positive
valuation; the result is truncated back before being returned.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Dict, List, Sequence

import numpy as np

from .errors import SingularEvaluationPoint, WalksError
from .series import (RATIONALS, AlgebraicSeriesDef, TruncatedSeries, newton_solve, sqrt_series,
                     t_series)

Series = TruncatedSeries

SLACK = 6   # extra working orders absorbed by valuation shifts


def poly(x: Series, coeffs: Sequence) -> Series:
    """sum coeffs[k] x^k, coefficients ascending (numbers or series)."""
    acc = Series.constant(0, x.order) + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def divide(a: Series, b: Series) -> Series:
    """a / b where b may have positive valuation (a must be divisible)."""
    vb = b.valuation()
    if vb is None:
        raise ZeroDivisionError("division by the zero series")
    if vb == 0:
        return a / b
    return a.shift(-vb) / b.shift(-vb)


# the recurring polynomials in v (ascending coefficients)
P_W2 = [1, 4, 0, -4, -4]                  # w^2
P_8 = [1, 2, 6, 8, 1]                     # v^4+8v^3+6v^2+2v+1
P_142 = [1, 4, 0, -2]                     # 1+4v-2v^3
P_241 = [-1, -4, 0, 2]                    # 2v^3-4v-1
P_431 = [-1, 0, 3, 4]                     # 4v^3+3v^2-1
P_2361 = [1, 6, 3, 2]                     # 2v^3+3v^2+6v+1
P_141 = [1, 4, 1]                         # v^2+4v+1
P_111 = [1, 1, 1]                         # v^2+v+1
P_331 = [-1, -3, 0, 1]                    # v^3-3v-1


class Tower:
    """Expansions of u, v, w, w~ and the closed forms, to a fixed order."""

    def __init__(self, order: int):
        if order < 0:
            raise ValueError("order must be non-negative")
        self.N = order
        self.W = order + SLACK
        self.t = t_series(self.W)

    # -- named series ------------------------------------------------------
    @cached_property
    def u(self) -> Series:
        def coeffs(L):
            t = t_series(L)
            return [t * t + t, -8 * t * t - 1, 18 * t * t + 18 * t,
                    Series.constant(0, L), -27 * t * t - 27 * t]
        return newton_solve(AlgebraicSeriesDef(coeffs, [0, 1, 1], RATIONALS, "u"), self.W)

    @cached_property
    def v(self) -> Series:
        u = self.u

        def coeffs(L):
            uu = u.truncate(min(L, u.order))
            return [uu, 3 * uu - 1, Series.constant(-1, uu.order), -uu - 1]
        return newton_solve(AlgebraicSeriesDef(coeffs, [0, 1, 3], RATIONALS, "v"), self.W)

    @cached_property
    def w2(self) -> Series:
        return poly(self.v, P_W2)

    @cached_property
    def w(self) -> Series:
        return sqrt_series(self.w2)

    @cached_property
    def wtilde_coeffs(self):
        """(c0, c1) with w~^2 + c1 w~ + c0 = 0."""
        v, t, w2 = self.v, self.t, self.w2
        num = (2 * poly(v, P_431) * poly(v, [-7, -108, -682, -2300, -4495, -4756, -832, 4652,
                                             6896, 5136, 2336, 576, 64]) * t
               + poly(v, [1, 4, -45, -220, 559, 5096, 11309, 10500, 2088, -5476, -6808,
                          -4560, -2624, -1312, -608, -128]))
        den = (12 * w2 * (1 - 2 * t) * poly(v, P_2361) ** 2 * poly(v, P_241) ** 2
               * poly(v, P_431))
        c1 = poly(v, [1, 2]) / (3 * poly(v, P_241))
        return num / den, c1

    @cached_property
    def wtilde(self) -> Series:
        c0, c1 = self.wtilde_coeffs

        def coeffs(L):
            return [c0.truncate(min(L, c0.order)), c1.truncate(min(L, c1.order)),
                    Series.constant(1, min(L, c0.order))]
        return newton_solve(AlgebraicSeriesDef(coeffs, [Fraction(1, 2)], RATIONALS, "w~"), self.W)

    # -- the four series of the one-catalytic-variable equation ------------
    @cached_property
    def R0(self) -> Series:
        t, v, w = self.t, self.v, self.w
        return t / 2 * (w * poly(v, [1, 2]) / poly(v, P_142) - 1)

    @cached_property
    def R1(self) -> Series:
        t, v, w = self.t, self.v, self.w
        p16 = poly(v, [-1, -10, -30, -24, 7, 24, 16])
        frac = (1 - 2 * t) * poly(v, [1, 2]) * p16 / (w * poly(v, P_8) * poly(v, P_142))
        return (1 + 2 * t + frac) / 6

    @cached_property
    def B1(self) -> Series:
        t, v = self.t, self.v
        num = 3 * v * v * (1 - 8 * t) * poly(v, P_141) * poly(v, [-1, 0, 1]) * poly(v, [1, 2])
        den = 2 * poly(v, [1, 0, -3, -4]) ** 3 * poly(v, P_142)
        return num / den

    @cached_property
    def B2(self) -> Series:
        t, v, w = self.t, self.v, self.w
        # coefficient of v^k is a_k t + b_k
        a = [-2, -24, -126, -388, -738, -788, -286, 488, 960, 804, 352, 68, 4]
        b = [0, 2, 19, 68, 113, 66, -41, -80, -25, 24, 16, 0, 0]
        big = poly(v, a) * t + poly(v, b)
        pre = poly(v, [1, 2]) * (1 - 2 * t) / (2 * w * poly(v, P_8) ** 2 * poly(v, P_241))
        return pre * big

    # -- endpoint series ----------------------------------------------------
    @cached_property
    def M00(self) -> Series:
        """C_{-1,0} = M_{0,0}."""
        t, v, w = self.t, self.v, self.w
        return (w * poly(v, [1, 2]) / poly(v, P_142) - 1).shift(-1) / 2

    @cached_property
    def M10(self) -> Series:
        t, v, w = self.t, self.v, self.w
        p16 = poly(v, [-1, -10, -30, -24, 7, 24, 16])
        frac = (1 - 2 * t) * poly(v, [1, 2]) * p16 / (w * poly(v, P_8) * poly(v, P_142))
        return (1 + 2 * t + frac).shift(-2) / 6

    @cached_property
    def R_at_1(self) -> Series:
        t, v, w = self.t, self.v, self.w
        num = (v * poly(v, [1, 1]) * poly(v, [1, 5, 4, 2]) * poly(v, [2, 11, 12, -6, -8, 3, 4])
               + poly(v, [-1, -14, -87, -298, -553, -464, 3, 384, 446, 272, 96]) * t)
        den = 3 * w * poly(v, P_241) * poly(v, P_8) * poly(v, P_2361)
        return -t / 3 - num / den

    @cached_property
    def S_at_1(self) -> Series:
        return self.w * self.wtilde - Fraction(1, 2)

    @cached_property
    def A11(self) -> Series:
        t, v, w = self.t, self.v, self.w
        num = (2 * poly(v, [1, 4, 3, 4]) * poly(v, P_431) ** 2 * t
               + poly(v, [1, 1]) * poly(v, [1, 7, 24, 68, 61, 3, 86, 94, 72, 16]))
        den = 3 * (1 - 2 * t) * poly(v, P_431) ** 2 * poly(v, P_241) * poly(v, P_2361)
        # A(1,1) + 1/(3t) = -w num / (t den)
        return (-w * num / den - Fraction(1, 3)).shift(-1)

    @cached_property
    def A00(self) -> Series:
        return 2 * self.M10

    @cached_property
    def variant_R0_display(self) -> Series:
        """The R0 display for the variant allowing (-1,0) <-> (0,-1), taken literally."""
        t, v, w = self.t, self.v, self.w
        pre = v * (1 - 2 * t) / poly(v, P_8)
        return pre * (poly(v, [1, 2]) + poly(v, P_241) / (2 * w))

    @cached_property
    def variant_R0(self) -> Series:
        """Variant R0 = t^2 M_{0,0} = v(1-2t)/(2 P8) (1 + 2v + (2v^3-4v-1)/w)."""
        t, v, w = self.t, self.v, self.w
        pre = v * (1 - 2 * t) / (2 * poly(v, P_8))
        return pre * (poly(v, [1, 2]) + poly(v, P_241) / w)

    # -- relations used as checks --------------------------------------------
    def relation_residuals(self) -> Dict[str, Series]:
        t, u, v, w, wt = self.t, self.u, self.v, self.w, self.wtilde
        N = self.N
        out = {
            "u": (1 - 3 * u) ** 3 * (1 + u) * t * t + (1 + 18 * u * u - 27 * u ** 4) * t - u,
            "v": (1 + 3 * v - v ** 3) * u - v * (v * v + v + 1),
            "w": w * w - poly(v, P_W2),
            "u-rational": u * (1 - 8 * t) - t * (1 + t) * (1 + u) * (1 - 3 * u) ** 3,
            "v-rational": (v * poly(v, P_111) * poly(v, P_331) ** 3 * (1 - 8 * t)
                     - t * (1 + t) * poly(v, P_141) * poly(v, P_431) ** 3),
        }
        c0, c1 = self.wtilde_coeffs
        out["wtilde"] = wt * wt + c1 * wt + c0
        return {k: r.truncate(N) for k, r in out.items()}

    def named(self, name: str) -> Series:
        key = NAME_ALIASES.get(name, name)
        if key not in CLOSED_NAMES:
            raise KeyError(f"unknown closed form {name!r}; known: {sorted(CLOSED_NAMES)}")
        return getattr(self, key).truncate(self.N)


CLOSED_NAMES = ("u", "v", "w", "w2", "wtilde", "R0", "R1", "B1", "B2", "M00", "M10", "R_at_1",
                "S_at_1", "A11", "A00", "variant_R0", "variant_R0_display")
NAME_ALIASES = {"w~": "wtilde", "wt": "wtilde", "C-1,0": "M00", "M0,0": "M00",
                "M1,0": "M10", "R(1)": "R_at_1", "S(1)": "S_at_1", "A(1,1)": "A11", "A0,0": "A00",
                "variant-R0": "variant_R0"}


def expand_named(name: str, order: int, x0=None) -> Series:
    """Expansion of a named series; U0/U1 need a rational x0."""
    if name in ("U1", "U0", "Stilde"):
        if x0 is None:
            raise ValueError(f"{name} needs an evaluation point x0")
        bv = BivariateAt(x0, order)
        return {"U1": bv.U1, "U0": bv.U0, "Stilde": bv.Stilde}[name].truncate(order)
    return Tower(order).named(name)


def closed_R0_R1_B1_B2(order: int):
    T = Tower(order)
    return tuple(getattr(T, k).truncate(order) for k in ("R0", "R1", "B1", "B2"))


ENDPOINTS = {"C-1,0": "M00", "M1,0": "M10", "R(1)": "R_at_1", "S(1)": "S_at_1",
             "A(1,1)": "A11", "A0,0": "A00"}


def closed_endpoint_series(which: str, order: int) -> Series:
    if which not in ENDPOINTS:
        raise KeyError(f"unknown endpoint series {which!r}; known: {sorted(ENDPOINTS)}")
    return Tower(order).named(ENDPOINTS[which])


def closed_variant_R0(order: int) -> Series:
    return Tower(order).named("variant_R0")


# ---------------------------------------------------------------------------
# bivariate series at a numeric point

class BivariateAt:
    """U1(x0), U0(x0) and S~(x0) for a rational point x0."""

    def __init__(self, x0, order: int, tower: Tower | None = None):
        x0 = Fraction(x0)
        if x0 in (0, 1, -1) or x0 * x0 + x0 + 1 == 0:
            raise SingularEvaluationPoint(f"x0 = {x0} is not admissible")
        self.x0 = x0
        self.N = order
        self.T = tower if tower is not None and tower.N >= order + SLACK else Tower(order + SLACK)
        T = self.T
        v, w2, t = T.v, T.w2, T.t
        self.y = x0 + 1 + 1 / x0
        self.ytilde = t * self.y / (1 - 2 * t)
        self.kappa = poly(v, P_331) ** 2 * poly(v, P_111) * v * v / poly(v, P_8)
        self.r1 = -(v ** 3) * w2 * poly(v, P_111) * poly(v, P_331)
        self.c4 = v ** 4 * w2 * poly(v, [-1, 0, 1]) * poly(v, P_111)
        # c4 / r1 = -v (v^2-1)/(v^3-3v-1)
        self.e = -v * poly(v, [-1, 0, 1]) / poly(v, P_331)

    @cached_property
    def U1(self) -> Series:
        """ytilde U (r1 + v^2 w^2 U - (c4/r1) U^2) = kappa (U^2 + v^2 w^2 U - c4)."""
        T = self.T
        v2w2 = T.v * T.v * T.w2
        yt, k, r1, c4, e = self.ytilde, self.kappa, self.r1, self.c4, self.e
        cs = [k * c4, yt * r1 - k * v2w2, yt * v2w2 - k, -yt * e]

        def coeffs(L):
            return [c.truncate(min(L, c.order)) for c in cs]
        return newton_solve(AlgebraicSeriesDef(coeffs, [0, 0, self.x0], RATIONALS, "U1"),
                            self.T.W - 4)

    def _D(self, U: Series, r1_over_U: Series) -> Series:
        v, w2 = self.T.v, self.T.w2
        return (v + 1) * U + v * w2 * (v * v - 1) + (v - 1) * r1_over_U

    @cached_property
    def Stilde(self) -> Series:
        """S~(x0) from the U1 parametrization."""
        T = self.T
        v, w2 = T.v, T.w2
        U = self.U1
        rU = divide(self.r1.truncate(U.order), U)
        U = U.truncate(rU.order)
        num = -v * v * w2 * poly(v, [1, 2]) * poly(v, P_141) ** 2
        den = poly(v, P_241) * self._D(U, rU) * self._D(rU, U)
        return (divide(num.truncate(den.order), den) - Fraction(1, 3)).truncate(self.N)

    # -- the alternative U0 route ----------------------------------------------
    @cached_property
    def U0_from_U1(self) -> Series:
        T = self.T
        v, w2 = T.v, T.w2
        U = self.U1
        rU = divide(self.r1.truncate(U.order), U)
        U = U.truncate(rU.order)
        return (1 - v * v) / w2 * (U + v * v * w2 + rU)

    @cached_property
    def ztilde(self) -> Series:
        T = self.T
        t = T.t
        q = t * (1 + t) / (1 - 2 * t) ** 2
        return self.ytilde + divide(q, self.ytilde)

    def _U0_num_den(self):
        v, w2 = self.T.v, self.T.w2
        num = [-(v ** 3) * poly(v, [-1, 0, 1]) * poly(v, [3, 11, 8, 6, 1, 1]) * poly(v, [1, 2]) ** 2,
               -v * poly(v, [1, 2]) * poly(v, [-1, -11, -32, -22, 7, 19, 14, 4, 4]),
               v * w2 * poly(v, [2, 3, 0, 1]),
               w2]
        den = [-v * v * poly(v, [-1, 0, 1]) * poly(v, P_111) * poly(v, [1, 2]) ** 2,
               v * w2 * poly(v, [1, 2]),
               w2]
        return num, den

    @cached_property
    def U0(self) -> Series:
        """U0 = x0^{-1} t + ... solving the z~ parametrization directly."""
        num, den = self._U0_num_den()
        zt = self.ztilde
        p8 = poly(self.T.v, P_8)
        cs = [p8 * zt * (den[k] if k < 3 else 0) - num[k] for k in range(4)]
        cs = [c if isinstance(c, Series) else Series.constant(c, zt.order) for c in cs]
        order = min(c.order for c in cs)

        def coeffs(L):
            return [c.truncate(min(L, order)) for c in cs]
        return newton_solve(AlgebraicSeriesDef(coeffs, [0, 1 / self.x0], RATIONALS, "U0"), order - 4)

    @cached_property
    def Stilde_via_U0(self) -> Series:
        v, w2 = self.T.v, self.T.w2
        U = self.U0
        num = -v * v * poly(v, [-1, 0, 1]) * poly(v, [1, 2]) * poly(v, P_141) ** 2
        den = poly(v, P_241) * (w2 * U * U + v * v * poly(v, [-1, 0, 1]) * poly(v, [1, 2])
                                * poly(v, P_2361))
        return (divide(num.truncate(den.order), den) - Fraction(1, 3)).truncate(self.N)


def closed_Stilde_at(x0, order: int, route: str = "U1") -> Series:
    bv = BivariateAt(x0, order)
    if route == "U1":
        return bv.Stilde
    if route == "U0":
        return bv.Stilde_via_U0
    raise ValueError("route must be 'U1' or 'U0'")


# ---------------------------------------------------------------------------
# the 24 conjugates of w

def w_conjugates(t0: float) -> List[complex]:
    """All 4 x 3 x 2 values of w over the tower at the numeric point t = t0."""
    ucoef = [-27 * (t0 * t0 + t0), 0, 18 * (t0 * t0 + t0), -8 * t0 * t0 - 1, t0 * t0 + t0]
    out = []
    for u in np.roots(ucoef):
        for v in np.roots([-u - 1, -1, 3 * u - 1, u]):
            r = cmath.sqrt(1 + 4 * v - 4 * v ** 3 - 4 * v ** 4)
            out.extend([r, -r])
    return out


def w_branches_distinct(t0: float = 0.01, tol: float = 1e-9) -> bool:
    ws = w_conjugates(t0)
    return len(ws) == 24 and all(abs(a - b) > tol for a, b in combinations(ws, 2))
