"""The kernel-method pipeline for king walks, checked on enumeration data.

Nothing here is solved: the boundary series R(x) = t^2 M(x,0) and
S(x) = t x M(0,x) are read off the weighted-start (A) tables, and every
displayed identity of the pipeline is multiplied by the relevant
denominators so that both sides become power series in t with Laurent
polynomial coefficients in x.  A residual is then exactly zero or not.

Denominators cleared per identity (s = x + 1 + 1/x):

* the three-term equation in M(0,x), M(0,1/x), M(x,0): multiply by t^2 Y;
* its square-root form and the S-hat form: multiply by t x s (resp. 3 t s);
* the quadratic identity in S(x), S(1/x): multiply by t s;
* the cubic in S~ with z: multiply by (x - 1/x)^3 s^2.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .enumeration import WalkTable, a_start, tables as dp_tables
from .laurent import LaurentX, ZetaNumber
from .model import build_group, builtin
from .series import LAURENT_X, RATIONALS, ZETA, TruncatedSeries, eval_series_at, sqrt_series

Series = TruncatedSeries
X = LaurentX


def _q(n: int, scale: int):
    return n // scale if n % scale == 0 else Fraction(n, scale)


def _lx(order: int, coeffs: Sequence) -> Series:
    return TruncatedSeries._raw(list(coeffs) + [X()] * (order + 1 - len(coeffs)), LAURENT_X)


def _const(c, order: int) -> Series:
    """A series constant in t with Laurent coefficient c."""
    return _lx(order, [c if isinstance(c, X) else X.constant(c)])


def _tpoly(order: int, *cs) -> Series:
    """c0 + c1 t + c2 t^2 + ... with Laurent (or scalar) ci."""
    return _lx(order, [c if isinstance(c, X) else X.constant(c) for c in cs][:order + 1])


def div_by_s(p: X) -> X:
    """Exact quotient p / (x + 1 + 1/x); raises if s does not divide p."""
    if p.is_zero():
        return X()
    num = dict(p.shift(1).terms)            # p x / (x^2 + x + 1)
    lo, hi = min(num), max(num)
    q: Dict[int, object] = {}
    for k in range(lo, hi - 1):
        c = num.get(k, 0)
        if c:
            q[k] = c
            num[k + 1] = num.get(k + 1, 0) - c
            num[k + 2] = num.get(k + 2, 0) - c
    if any(num.get(k, 0) for k in (hi - 1, hi)):
        raise ArithmeticError("x + 1 + 1/x does not divide the polynomial")
    return X(q)


def scalar_series(s: Series) -> Series:
    """A Laurent series whose coefficients are all constants, as a rational series."""
    return s.map(lambda c: c.coeff(0), RATIONALS)


def lift(s: Series) -> Series:
    """A scalar series as a Laurent-coefficient series."""
    return s.map(lambda c: X.constant(c), LAURENT_X)


# ---------------------------------------------------------------------------
# reports

@dataclass
class IdentityReport:
    identity: str
    certified_order: int
    first_failure: Optional[Dict[str, object]] = None

    @property
    def ok(self) -> bool:
        return self.first_failure is None

    def to_json(self) -> str:
        d = asdict(self)
        if d["first_failure"]:
            d["first_failure"] = {k: str(v) for k, v in d["first_failure"].items()}
        return json.dumps(d)


def residual_report(name: str, residual: Series) -> IdentityReport:
    for n, c in enumerate(residual.coeffs):
        if isinstance(c, X):
            if not c.is_zero():
                k, delta = min(c.terms.items())
                return IdentityReport(name, residual.order, {"t_order": n, "x_exponent": k, "delta": delta})
        elif isinstance(c, ZetaNumber):
            if not c.is_zero():
                return IdentityReport(name, residual.order, {"t_order": n, "x_exponent": "zeta", "delta": c})
        elif c != 0:
            return IdentityReport(name, residual.order, {"t_order": n, "x_exponent": 0, "delta": c})
    return IdentityReport(name, residual.order)


# ---------------------------------------------------------------------------
# context

class KernelContext:
    """Series of the pipeline, built from A-tables of the king model up to order N."""

    def __init__(self, N: int, tables: Optional[List[WalkTable]] = None):
        if N < 6:
            raise ValueError("the kernel pipeline needs N >= 6")
        self.N = N
        if tables is None:
            king = builtin("king")
            tables = dp_tables(king, "three-quadrant", a_start(build_group(king)), N)
        self.tables = tables
        sc = tables[0].scale
        t = self.t = _tpoly(N, 0, 1)
        x, xb = X.monomial(1), X.monomial(-1)
        self.s_poly = x + 1 + xb

        # R(x) = t^2 M(x,0), S(x) = t x M(0,x), M_{k,j} = A_{-1-k,j}
        Rc, Sc = [X(), X()], [X()]
        for tab in tables[:N + 1]:
            R = tab.radius
            Rc.append(X({k: _q(tab.get(-1 - k, 0), sc) for k in range(0, R)}))
            Sc.append(X({j + 1: _q(tab.get(-1, j), sc) for j in range(0, R)}))
        self.R = _lx(N, Rc[:N + 1])
        self.S = _lx(N, Sc[:N + 1])
        self.Sbar = self.S.reflect()
        self.R0 = scalar_series(self.R.map(lambda c: X.constant(c.coeff(0))))
        self.R1 = scalar_series(self.R.map(lambda c: X.constant(c.coeff(1))))
        self.S1 = scalar_series(self.S.map(lambda c: X.constant(c.coeff(1))))
        self.S0 = scalar_series(self.S.map(lambda c: X.constant(c.coeff(0))))
        self.S2 = scalar_series(self.S.map(lambda c: X.constant(c.coeff(2))))
        # R0 / t  (= S1)
        self.R0_t = Series(self.R0.coeffs[1:] + [self.S1.coeffs[N]], N, RATIONALS)

        s = self.s = _const(self.s_poly, N)
        xx = _const(x + xb, N)
        self.Delta = (1 - t * (3 * xx + 2)) * (1 + t * (xx + 2))
        self.sqrtDelta = sqrt_series(self.Delta)
        numY = 1 - t * xx - self.sqrtDelta
        # Y = numY / (2 t s), exact on Laurent coefficients
        self.Y = _lx(N, [div_by_s(c) * Fraction(1, 2) for c in numY.coeffs[1:]] + [X()])
        # the last coefficient of Y needs numY at order N+1: recompute it from K(x, Y) = 0
        self.Y = self._complete_Y(self.Y)

        # S-hat scaled: 3 t s S-hat(x) = 3 t s S(x) - 3 R0 + t(2x + 1/x)
        R0l = lift(self.R0)
        self.Shat_num = 3 * t * s * self.S - 3 * R0l + t * _const(2 * x + xb, N)
        self.Shat_num_bar = self.Shat_num.reflect()

        # P0 = [x^0] Delta S(x) S(1/x)
        self.DSS = self.Delta * self.S * self.Sbar
        self.P0 = self.DSS.x_coeff(0)

        # B1, B2 from zeta S'(zeta) = a + b zeta
        zSp = eval_series_at(self.S.map(lambda c: c.derivative().shift(1)), ZetaNumber(0, 1))
        zSp = zSp * Series([1, 2, 1], N, ZETA)
        self.B1 = zSp.map(lambda c: c.real_imag()[0], RATIONALS)
        self.B2 = zSp.map(lambda c: c.real_imag()[1], RATIONALS)
        self.S_at_zeta = eval_series_at(self.S, ZetaNumber(0, 1))

    def _complete_Y(self, Y: Series) -> Series:
        # one fixed-point sweep of Y = t (s (1 + Y^2) + (x + 1/x) Y) fills in order N
        x, xb = X.monomial(1), X.monomial(-1)
        N = self.N
        rhs = self.t * (self.s * (1 + Y * Y) + _const(x + xb, N) * Y)
        return rhs

    # -- derived objects ---------------------------------------------------------
    def Rhat_cleared(self) -> Series:
        """t x s R-hat(x), from the right-hand side of the square-root equation."""
        t, s, N = self.t, self.s, self.N
        x, xb = X.monomial(1), X.monomial(-1)
        X1 = _const(x, N)
        R0l, R1l = lift(self.R0), lift(self.R1)
        return (3 * t * X1 * s * s * self.R + 3 * t * X1 * s * R1l
                + (1 - t * _const(x + xb, N)) * (X1 * R0l - t)
                - t * X1 * s * _const(x + xb, N) * R0l)

    def Rhat_display_cleared(self) -> Series:
        """t s R-hat(x) as displayed in the parametrization statement.

        3sR + 3R1 + (1 - t xbar (x + xbar)(x+1)^2)/(t s) (R0 - t xbar) + t(1 + xbar^2).
        """
        t, s, N = self.t, self.s, self.N
        x, xb = X.monomial(1), X.monomial(-1)
        R0l, R1l = lift(self.R0), lift(self.R1)
        coef = 1 - t * _const(xb * (x + xb) * (x + 1) ** 2, N)
        return (3 * t * s * s * self.R + 3 * t * s * R1l + coef * (R0l - t * _const(xb, N))
                + t * t * s * _const(1 + xb ** 2, N))

    def Stilde_num(self) -> Series:
        """T = (x - 1/x) S~(x) = s S(x) - R0/t + (2x + 1/x)/3."""
        x, xb = X.monomial(1), X.monomial(-1)
        return self.s * self.S - lift(self.R0_t) + _const((2 * x + xb) * Fraction(1, 3), self.N)


# ---------------------------------------------------------------------------
# verifications

def verify_kernel_root(ctx: KernelContext) -> List[IdentityReport]:
    t, s, Y, N = ctx.t, ctx.s, ctx.Y, ctx.N
    x, xb = X.monomial(1), X.monomial(-1)
    KY = Y - t * (s * (Y * Y + 1) + _const(x + xb, N) * Y)
    sym = Y - Y.reflect()
    root = (1 - t * _const(x + xb, N) - 2 * t * s * Y) - ctx.sqrtDelta
    return [residual_report("kernel-root", KY), residual_report("Y-symmetry", sym),
            residual_report("Y-sqrt-discriminant", root)]


def verify_3Ms(ctx: KernelContext) -> List[IdentityReport]:
    """The three-term equation, its square-root form, and the S-hat form."""
    t, s, Y, N = ctx.t, ctx.s, ctx.Y, ctx.N
    x, xb = X.monomial(1), X.monomial(-1)
    R0l, R1l = lift(ctx.R0), lift(ctx.R1)
    # t^2 Y times the equation
    res1 = (s * (Y * Y - 1) * t * (ctx.S - 2 * ctx.Sbar) + 3 * s * Y * ctx.R
            - 2 * t * _const(xb, N) * Y * Y + 3 * Y * R1l
            + Y * (2 * Y - _const(x + xb, N)) * R0l)
    # t x s times the square-root equation
    X1 = _const(x, N)
    lhs2 = ctx.sqrtDelta * (t * X1 * s * (ctx.S - 2 * ctx.Sbar) + X1 * R0l - t)
    res2 = lhs2 - ctx.Rhat_cleared()
    # 3 t s times the S-hat form: sqrt(Delta)(Sn(x) - 2 Sn(1/x)) = 3 t s R-hat = 3 (t x s R-hat)/x
    res3 = ctx.sqrtDelta * (ctx.Shat_num - 2 * ctx.Shat_num_bar) - 3 * ctx.Rhat_cleared().map(
        lambda c: c.shift(-1))
    # evaluation at zeta
    res4 = ctx.S_at_zeta * Series([1, 1], N, ZETA) + (ctx.R0 + 3 * ctx.R1).map(
        lambda c: ZetaNumber(c, 0), ZETA)
    return [residual_report("three-term", res1), residual_report("three-term-sqrt", res2),
            residual_report("shat-rhat", res3), residual_report("S-at-zeta", res4)]


def rhat_display_offset(ctx: KernelContext) -> Series:
    """(displayed R-hat) - (R-hat of the square-root equation), times t s."""
    xb = X.monomial(-1)
    return ctx.Rhat_display_cleared() - ctx.Rhat_cleared().map(lambda c: c.shift(-1))


def _rhs_2Ms_cleared(ctx: KernelContext) -> Series:
    """t s times the right-hand side of the quadratic identity."""
    t, s, N = ctx.t, ctx.s, ctx.N
    x, xb = X.monomial(1), X.monomial(-1)
    R0l, R1l, P0l = lift(ctx.R0), lift(ctx.R1), lift(ctx.P0)
    xx = _const(x + xb, N)
    a = (R0l + 3 * R1l) * ((2 * R0l + t) * (t * s * xx + 1 + t) - t * s * (1 + t))
    b = t * s * (-(1 + 4 * t) * xx * R0l + (t * t + t * R0l + R0l * R0l) * _const(x ** 2 + xb ** 2, N)
                 - P0l)
    return a + b


def verify_2Ms(ctx: KernelContext) -> List[IdentityReport]:
    t, s, N = ctx.t, ctx.s, ctx.N
    x, xb = X.monomial(1), X.monomial(-1)
    R0l = lift(ctx.R0)
    S, Sb = ctx.S, ctx.Sbar
    lhs = ctx.Delta * (t * s * (S * S + Sb * Sb - S * Sb) + S * (t * _const(x, N) - R0l)
                       + Sb * (t * _const(xb, N) - R0l))
    res = lhs - _rhs_2Ms_cleared(ctx)
    # S-hat form: x^4 Delta (Sn^2 - Sn Sn' + Sn'^2) is a polynomial of degree <= 8 in x
    Sn, Snb = ctx.Shat_num, ctx.Shat_num_bar
    lhs_hat = (ctx.Delta * (Sn * Sn - Sn * Snb + Snb * Snb)).map(lambda c: c.shift(4))
    c = 3 * lift(ctx.R0) - t * _const(2 * x + xb, N)     # = 3t * (3R0/t - 2x - 1/x)/3 ... scaled by t
    cb = c.reflect()
    rhs_hat = (9 * t * s * _rhs_2Ms_cleared(ctx) + ctx.Delta * (c * c - c * cb + cb * cb)).map(
        lambda c_: c_.shift(4))
    res_hat = lhs_hat - rhs_hat
    support = lhs_hat.map(lambda c_: c_.part("neg") + X({k: v for k, v in c_.terms.items() if k > 8}))
    sym = lhs.map(lambda c_: c_ - c_.reflect())
    p0 = (ctx.DSS.x_coeff(0) - ctx.P0)
    return [residual_report("quadratic", res), residual_report("quadratic-shat", res_hat),
            residual_report("quadratic-shat-support", support), residual_report("quadratic-symmetry", sym),
            residual_report("P0-definition", lift(p0))]


def cubic_residual(ctx: KernelContext, R0: Series, R1: Series, B1: Series, B2: Series,
                  x0=None) -> Series:
    """(x - 1/x)^3 s^2 times the cubic in S~, with the given univariate series.

    With x0 = None the check runs on Laurent coefficients; with a rational x0
    every coefficient is evaluated at x = x0 first.
    """
    t, s, N = ctx.t, ctx.s, ctx.N
    x, xb = X.monomial(1), X.monomial(-1)
    T = ctx.Stilde_num()
    d = _const(x - xb, N)
    Z = t * s * s + 1 + t                     # z s
    R0, R1, B1, B2 = (lift(r.truncate(N)) for r in (R0, R1, B1, B2))

    def zpoly(*cs):
        # s^2 * sum cs[k] z^k
        out = 0
        for k, c in enumerate(cs):
            term = c * (Z ** k)
            for _ in range(2 - k):
                term = term * s
            out = out + term
        return out

    t2 = t * t
    cubic = 27 * t2 * zpoly((2 * t + 1) * (10 * t + 1), (10 * t + 1) - 3 * (2 * t + 1), -3 + 0 * t)
    lin = (zpoly(216 * t2 + 54 * t, 0 * t, -27 + 0 * t) * R0 * R0
           + 27 * t * zpoly(6 * R1 * t + 6 * t2 + 2 * B2 + t, -6 * R1 + 2 * t + 1, -1 + 0 * t) * R0
           - 9 * t2 * zpoly(27 * R1 * R1 - 27 * R1 * t + 5 * t2 + 3 * B1 - 3 * B2 - 9 * R1 + 6 * t + 1,
                            9 * R1 - 2 * t - 2, 0 * t))
    const = (zpoly(72 * t2 + 18 * B1 + 18 * t, 0 * t, -9 + 0 * t) * R0 * R0
             + 9 * t * zpoly(6 * R1 * t + 6 * t2 + 2 * B1 + 2 * B2 + t, -6 * R1 + 2 * t + 1, -1 + 0 * t) * R0
             - t2 * zpoly(81 * R1 * R1 - 81 * R1 * t - 5 * t2 - 9 * B1 - 9 * B2 - 27 * R1 + 6 * t + 2,
                          27 * R1 - 10 * t - 4, 3 + 0 * t))
    res = cubic * T * T * T + lin * T * d * d + const * d * d * d
    if x0 is not None:
        return res.map(lambda c: c.evaluate(x0), RATIONALS)
    return res


def verify_catalytic_cubic(ctx: KernelContext, scalars: str = "enumeration", x_eval=None,
                           closed=None) -> IdentityReport:
    """The cubic in S~ with scalars from enumeration or from the closed forms."""
    if scalars == "enumeration":
        R0, R1, B1, B2 = ctx.R0, ctx.R1, ctx.B1, ctx.B2
    else:
        from .closedform import closed_R0_R1_B1_B2
        R0, R1, B1, B2 = closed if closed is not None else closed_R0_R1_B1_B2(ctx.N)
    res = cubic_residual(ctx, R0, R1, B1, B2, x_eval)
    where = "symbolic x" if x_eval is None else f"x={x_eval}"
    return residual_report(f"cubic ({scalars} scalars, {where})", res)


def verify_S2_relation(ctx: KernelContext) -> IdentityReport:
    """3 t^2 S2 = -3 t R0 - 3 t^2 - 2 B1."""
    t = Series([0, 1], ctx.N, RATIONALS)
    res = 3 * t * t * ctx.S2 + 3 * t * ctx.R0 + 3 * t * t + 2 * ctx.B1
    return residual_report("S2-relation", lift(res))


def verify_structure(ctx: KernelContext) -> List[IdentityReport]:
    """R0 = t S1 and S0 = 0."""
    t = Series([0, 1], ctx.N, RATIONALS)
    return [residual_report("R0=tS1", lift(ctx.R0 - t * ctx.S1)),
            residual_report("S0=0", lift(ctx.S0))]


def all_reports(ctx: KernelContext) -> List[IdentityReport]:
    out = verify_kernel_root(ctx) + verify_structure(ctx) + verify_3Ms(ctx) + verify_2Ms(ctx)
    out.append(verify_catalytic_cubic(ctx))
    out.append(verify_S2_relation(ctx))
    return out


def build_context(N: int, tables: Optional[List[WalkTable]] = None) -> KernelContext:
    return KernelContext(N, tables)


# ---------------------------------------------------------------------------
# change of variables, values at a point, mutation support

def z_times_s(ctx: KernelContext) -> Series:
    """z (x + 1 + 1/x) = t s^2 + 1 + t, with z = t s + (1 + t)/s."""
    return ctx.t * ctx.s * ctx.s + 1 + ctx.t


def ytilde_at(x0, order: int) -> Series:
    """y~ = t (x0 + 1 + 1/x0) / (1 - 2t) as a rational series."""
    s0 = Fraction(x0) + 1 + 1 / Fraction(x0)
    t = Series([0, 1], order, RATIONALS)
    return t * s0 / (1 - 2 * t)


def ztilde_at(x0, order: int) -> Series:
    """z~ = z / (1 - 2t) at x = x0."""
    s0 = Fraction(x0) + 1 + 1 / Fraction(x0)
    t = Series([0, 1], order, RATIONALS)
    return (t * s0 + (1 + t) / s0) / (1 - 2 * t)


def Stilde_at(ctx: KernelContext, x0) -> Series:
    """S~(x0) from enumeration data (x0 rational, x0 != 0, +-1)."""
    x0 = Fraction(x0)
    d = x0 - 1 / x0
    if d == 0:
        raise ZeroDivisionError("S~ has a pole at x = +-1")
    T = ctx.Stilde_num().map(lambda c: c.evaluate(x0), RATIONALS)
    return T / d


def Shat_roundtrip(ctx: KernelContext) -> IdentityReport:
    """(x - 1/x) S~ - s S-hat = 0, both cleared by 3t: a definitional consistency check."""
    x, xb = X.monomial(1), X.monomial(-1)
    lhs = 3 * ctx.t * ctx.Stilde_num()
    return residual_report("S-hat/S~ round trip", lhs - ctx.Shat_num)


def kernel_cells(N: int) -> List[tuple]:
    """(n, i, j) for every table cell the kernel pipeline reads.

    Table n enters R at t^(n+2) and S at t^(n+1).  R(x) only appears
    multiplied by t or Y, so its top coefficient is never tested.
    """
    out = []
    for n in range(N - 2):
        out += [(n, -1 - k, 0) for k in range(0, n + 2)]
    for n in range(N):
        out += [(n, -1, j) for j in range(1, n + 2)]
    return out


def perturbed_tables(tables: List[WalkTable], n: int, i: int, j: int, delta: int = 1) -> List[WalkTable]:
    """Copy of `tables` with one count changed by delta (in unscaled units)."""
    out = list(tables)
    tab = tables[n].copy()
    R = tab.radius
    tab.counts[i + R, j + R] = tab.counts[i + R, j + R] + delta * tab.scale
    out[n] = tab
    return out


def run_all(N: int, tables: Optional[List[WalkTable]] = None, closed_scalars: bool = False
            ) -> List[IdentityReport]:
    ctx = build_context(N, tables)
    out = all_reports(ctx)
    out.append(Shat_roundtrip(ctx))
    if closed_scalars:
        out.append(verify_catalytic_cubic(ctx, "closed-form"))
    return out
