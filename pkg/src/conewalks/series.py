"""Truncated power series in t over pluggable coefficient rings.

A TruncatedSeries knows its coefficients of t^0..t^N and nothing beyond.
Binary operations truncate to the smaller order, so precision loss is always
visible in the `order` attribute rather than hidden in garbage coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Sequence

from .errors import (BranchNotSeparated, DivisionByNonUnit, NoFormalSolution,
                     NonSquareConstantTerm, ValuationTooLow)
from .laurent import LaurentPoly2, LaurentX, Mod, ZetaNumber


# ---------------------------------------------------------------------------
# coefficient rings

class Ring:
    """Coefficient ring contract: coercion, zero test, units and square roots."""

    name = "ring"

    def coerce(self, c):
        return c

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def is_zero(self, c) -> bool:
        return c == 0

    def inverse(self, c):
        raise DivisionByNonUnit(f"{c!r} is not a unit in {self.name}")

    def sqrt(self, c):
        if c == 1:
            return self.one()
        raise NonSquareConstantTerm(f"no square root of {c!r} in {self.name}")

    def __repr__(self):
        return self.name


class IntegerRing(Ring):
    name = "ZZ"

    def coerce(self, c):
        if isinstance(c, Fraction):
            if c.denominator != 1:
                raise ValueError(f"{c} is not an integer")
            return c.numerator
        return int(c)

    def inverse(self, c):
        if c in (1, -1):
            return c
        raise DivisionByNonUnit(f"{c} is not a unit in ZZ")

    def sqrt(self, c):
        r = math.isqrt(c) if c >= 0 else -1
        if r * r != c:
            raise NonSquareConstantTerm(f"{c} is not a square")
        return r


class RationalRing(Ring):
    name = "QQ"

    def coerce(self, c):
        if isinstance(c, (int, Fraction)):
            return c
        if isinstance(c, float):
            raise TypeError("floats are not exact rationals")
        return Fraction(c)

    def inverse(self, c):
        if c == 0:
            raise DivisionByNonUnit("division by zero constant term")
        return Fraction(1) / c

    def sqrt(self, c):
        c = Fraction(c)
        if c < 0:
            raise NonSquareConstantTerm(f"{c} is negative")
        n, d = math.isqrt(c.numerator), math.isqrt(c.denominator)
        if n * n != c.numerator or d * d != c.denominator:
            raise NonSquareConstantTerm(f"{c} is not a rational square")
        return Fraction(n, d)


class RationalsAt(RationalRing):
    """Rationals, tagged with the numeric point x0 a series was evaluated at."""

    def __init__(self, x0):
        self.x0 = Fraction(x0)
        self.name = f"QQ[x={self.x0}]"


class ResidueRing(Ring):
    def __init__(self, p: int):
        self.p = p
        self.name = f"GF({p})"

    def coerce(self, c):
        if isinstance(c, Mod):
            return c
        if isinstance(c, Fraction):
            return Mod(c.numerator, self.p) / Mod(c.denominator, self.p)
        return Mod(int(c), self.p)

    def is_zero(self, c):
        return c.v == 0

    def inverse(self, c):
        if c.v == 0:
            raise DivisionByNonUnit("zero residue")
        return c.inverse()

    def sqrt(self, c):
        if c.v == 1:
            return self.one()
        raise NonSquareConstantTerm("only 1 has a designated square root here")


class LaurentRing(Ring):
    """Laurent polynomials in x.  Units are the nonzero monomials."""

    name = "Q[x,1/x]"

    def coerce(self, c):
        if isinstance(c, LaurentX):
            return c
        return LaurentX.constant(c)

    def is_zero(self, c):
        return not c.terms

    def inverse(self, c):
        if len(c.terms) != 1:
            raise DivisionByNonUnit(f"{c!r} is not a monomial")
        (k, a), = c.terms.items()
        return LaurentX({-k: Fraction(1) / a})

    def sqrt(self, c):
        if len(c.terms) == 1:
            (k, a), = c.terms.items()
            if k % 2 == 0:
                return LaurentX({k // 2: RATIONALS.sqrt(a)})
        raise NonSquareConstantTerm(f"{c!r} is not a monomial square")


class Laurent2Ring(Ring):
    name = "Q[x,1/x,y,1/y]"

    def coerce(self, c):
        if isinstance(c, LaurentPoly2):
            return c
        return LaurentPoly2.constant(c)

    def is_zero(self, c):
        return not c.terms


class ZetaRing(Ring):
    """Q(zeta) with zeta^2 = -1 - zeta."""

    name = "Q(zeta)"

    def coerce(self, c):
        if isinstance(c, ZetaNumber):
            return c
        return ZetaNumber(c, 0)

    def is_zero(self, c):
        return c.is_zero()

    def inverse(self, c):
        if c.is_zero():
            raise DivisionByNonUnit("zero in Q(zeta)")
        return c.inverse()


INTEGERS = IntegerRing()
RATIONALS = RationalRing()
LAURENT_X = LaurentRing()
LAURENT_XY = Laurent2Ring()
ZETA = ZetaRing()


# ---------------------------------------------------------------------------
# the series type

class TruncatedSeries:
    """Coefficients c_0..c_N of a power series in t."""

    __slots__ = ("coeffs", "order", "ring")

    def __init__(self, coeffs: Sequence = (), order: int | None = None, ring: Ring = RATIONALS):
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("a truncated series needs order >= 0")
        cs = [ring.coerce(c) for c in list(coeffs)[:order + 1]]
        z = ring.zero()
        cs.extend([z] * (order + 1 - len(cs)))
        self.coeffs = cs
        self.order = order
        self.ring = ring

    @classmethod
    def _raw(cls, coeffs: list, ring: Ring) -> "TruncatedSeries":
        obj = cls.__new__(cls)
        obj.coeffs = coeffs
        obj.order = len(coeffs) - 1
        obj.ring = ring
        return obj

    @classmethod
    def constant(cls, c, order: int, ring: Ring = RATIONALS) -> "TruncatedSeries":
        return cls([c], order, ring)

    @classmethod
    def t_power(cls, k: int, order: int, ring: Ring = RATIONALS, c=1) -> "TruncatedSeries":
        cs = [0] * (order + 1)
        if k <= order:
            cs[k] = c
        return cls(cs, order, ring)

    # basic access
    def __getitem__(self, n: int):
        return self.coeffs[n]

    def __len__(self):
        return self.order + 1

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        shown = ", ".join(repr(c) for c in self.coeffs[:8])
        more = ", ..." if self.order >= 8 else ""
        return f"TruncatedSeries([{shown}{more}], order={self.order}, ring={self.ring!r})"

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            n = min(self.order, other.order)
            return all(self.coeffs[i] == other.coeffs[i] for i in range(n + 1))
        return NotImplemented

    __hash__ = None

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, or None for the zero series."""
        for i, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                return i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return TruncatedSeries._raw(self.coeffs[:order + 1], self.ring)

    def pad(self, order: int) -> "TruncatedSeries":
        """Declare missing high coefficients as zero (only for genuinely finite series)."""
        if order <= self.order:
            return self.truncate(order)
        z = self.ring.zero()
        return TruncatedSeries._raw(self.coeffs + [z] * (order - self.order), self.ring)

    def map(self, fn: Callable, ring: Ring | None = None) -> "TruncatedSeries":
        ring = ring or self.ring
        return TruncatedSeries._raw([ring.coerce(fn(c)) for c in self.coeffs], ring)

    # arithmetic
    def _coerce_other(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries.constant(other, self.order, self.ring)

    def __neg__(self):
        return TruncatedSeries._raw([-c for c in self.coeffs], self.ring)

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            cs = list(self.coeffs)
            cs[0] = cs[0] + other
            return TruncatedSeries._raw(cs, self.ring)
        n = min(self.order, other.order)
        return TruncatedSeries._raw([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)],
                                    self.ring)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries._raw([c * other for c in self.coeffs], self.ring)
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        ring = self.ring
        out = [ring.zero()] * (n + 1)
        nz_b = [(j, b[j]) for j in range(n + 1) if not ring.is_zero(b[j])]
        for i in range(n + 1):
            ai = a[i]
            if ring.is_zero(ai):
                continue
            for j, bj in nz_b:
                if i + j > n:
                    break
                out[i + j] = out[i + j] + ai * bj
        return TruncatedSeries._raw(out, ring)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = TruncatedSeries.constant(1, self.order, self.ring)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inverse(self) -> "TruncatedSeries":
        ring = self.ring
        g0 = ring.inverse(self.coeffs[0])
        f = self.coeffs
        g = [g0]
        for n in range(1, self.order + 1):
            acc = ring.zero()
            for k in range(1, n + 1):
                if not ring.is_zero(f[k]):
                    acc = acc + f[k] * g[n - k]
            g.append(-(acc * g0))
        return TruncatedSeries._raw(g, ring)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.inverse()
        if isinstance(self.ring, IntegerRing):
            return TruncatedSeries._raw([self.ring.coerce(Fraction(c) / other) for c in self.coeffs],
                                        self.ring)
        return self * self.ring.inverse(self.ring.coerce(other))

    def __rtruediv__(self, other):
        return self.inverse() * other

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by t^k.  Negative k divides and costs |k| orders of precision."""
        if k >= 0:
            z = self.ring.zero()
            return TruncatedSeries._raw(([z] * k + self.coeffs)[:self.order + 1], self.ring)
        k = -k
        for i in range(min(k, self.order + 1)):
            if not self.ring.is_zero(self.coeffs[i]):
                raise DivisionByNonUnit(f"t^{k} does not divide the series (coefficient {i})")
        if k > self.order:
            raise ValueError("division by t^k leaves no known coefficients")
        return TruncatedSeries._raw(self.coeffs[k:], self.ring)

    def div_shift(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Quotient self/other after removing the common power of t from both."""
        v = other.valuation()
        if v is None:
            raise DivisionByNonUnit("division by the zero series")
        return self.shift(-v) / other.shift(-v)

    def derivative(self) -> "TruncatedSeries":
        """d/dt (the result has order one less)."""
        if self.order == 0:
            return TruncatedSeries.constant(0, 0, self.ring)
        return TruncatedSeries._raw([self.coeffs[n] * n for n in range(1, self.order + 1)], self.ring)

    # coefficient-level helpers for Laurent coefficients
    def reflect(self) -> "TruncatedSeries":
        """x -> 1/x on Laurent-polynomial coefficients."""
        return self.map(lambda c: c.reflect())

    def x_derivative(self) -> "TruncatedSeries":
        return self.map(lambda c: c.derivative())

    def x_coeff(self, k: int, ring: Ring = RATIONALS) -> "TruncatedSeries":
        return self.map(lambda c: c.coeff(k), ring)


def series(coeffs: Sequence, order: int | None = None, ring: Ring = RATIONALS) -> TruncatedSeries:
    return TruncatedSeries(coeffs, order, ring)


def t_series(order: int, ring: Ring = RATIONALS) -> TruncatedSeries:
    """The series t itself."""
    return TruncatedSeries.t_power(1, order, ring)


# ---------------------------------------------------------------------------
# square roots and Newton iteration

def sqrt_series(f: TruncatedSeries) -> TruncatedSeries:
    ring = f.ring
    g0 = ring.sqrt(f.coeffs[0])
    if isinstance(ring, IntegerRing):
        inv2g0 = Fraction(1, 2 * g0)
    else:
        inv2g0 = ring.inverse(ring.coerce(2) * g0)
    g = [g0]
    for n in range(1, f.order + 1):
        acc = f.coeffs[n]
        for k in range(1, n):
            acc = acc - g[k] * g[n - k]
        g.append(acc * inv2g0)
    return TruncatedSeries._raw([ring.coerce(c) for c in g], ring)


@dataclass
class AlgebraicSeriesDef:
    """Relation P(t, F) = sum_k c_k(t) F^k with a branch seed.

    `coefficients(order)` must return the list [c_0, ..., c_d] as series known
    at least to the requested order.  The seed lists the first coefficients
    of the wanted branch.
    """

    coefficients: Callable[[int], List[TruncatedSeries]]
    seed: Sequence
    ring: Ring = RATIONALS
    name: str = ""

    def evaluate(self, F: TruncatedSeries) -> TruncatedSeries:
        cs = self.coefficients(F.order)
        return horner(cs, F)


def horner(cs: Sequence[TruncatedSeries], F: TruncatedSeries) -> TruncatedSeries:
    acc = cs[-1]
    for c in reversed(cs[:-1]):
        acc = acc * F + c
    return acc


def _horner_with_derivative(cs, F):
    p = cs[-1]
    dp = TruncatedSeries.constant(0, F.order, F.ring)
    for c in reversed(cs[:-1]):
        dp = dp * F + p
        p = p * F + c
    return p, dp


def newton_solve(defn: AlgebraicSeriesDef, N: int) -> TruncatedSeries:
    """The branch of P(t, F) = 0 selected by the seed, to order N.

    The unknown is first rescaled by the t-valuation a of the seed and the
    relation by its own valuation v, which turns most "singular looking"
    branches into ones with an invertible derivative.  If the derivative still
    has valuation m > 0, the Newton step divides by t^m, which costs m orders;
    the seed then has to be long enough (more than m terms) to pin the branch.
    """
    ring = defn.ring
    seed = [ring.coerce(c) for c in defn.seed]
    if not seed:
        raise BranchNotSeparated("empty seed")
    k = len(seed)
    a = next((i for i, c in enumerate(seed) if not ring.is_zero(c)), 0)
    extra = 8
    while True:
        L = N + extra
        cs = defn.coefficients(L)
        cs = [c.truncate(L) if c.order >= L else c for c in cs]
        L = min(c.order for c in cs)
        # rescale: d_j = c_j t^{a j}, then divide by t^v
        ds = [c.shift(a * j) for j, c in enumerate(cs)]
        vals = [d.valuation() for d in ds]
        vals = [x for x in vals if x is not None]
        v = min(vals) if vals else 0
        ds = [d.shift(-v) for d in ds]
        W = L - v
        G = TruncatedSeries(seed[a:], W, ring)
        _, dQ = _horner_with_derivative(ds, G)
        m = dQ.valuation()
        if m is None:
            raise BranchNotSeparated(f"{defn.name}: derivative vanishes on the seed")
        if W - m >= N - a:
            break
        extra += m + v + 8
    if k - a <= m:
        raise BranchNotSeparated(
            f"{defn.name}: seed has {k - a} significant terms but the derivative has valuation {m}")
    target = W - m
    for it in range(64):
        Q, dQ = _horner_with_derivative(ds, G)
        if dQ.valuation() != m:
            raise NoFormalSolution(f"{defn.name}: derivative valuation changed during iteration")
        if Q.valuation() is None:
            break
        try:
            ring.inverse(dQ.coeffs[m])
        except DivisionByNonUnit as exc:
            raise NoFormalSolution(f"{defn.name}: Newton step needs a non-unit division") from exc
        if it == 0 and Q.valuation() < m + (k - a):
            raise BranchNotSeparated(f"{defn.name}: seed does not satisfy the relation")
        delta = Q.shift(-m) / dQ.shift(-m)
        if delta.is_zero():
            break
        G = (G.truncate(target) - delta).pad(W)
    else:
        raise NoFormalSolution(f"{defn.name}: Newton iteration did not converge")
    F = G.truncate(target)
    F = TruncatedSeries._raw([ring.zero()] * a + F.coeffs, ring).truncate(N)
    for i, c in enumerate(seed[:N + 1]):
        if F.coeffs[i] != c:
            raise BranchNotSeparated(f"{defn.name}: solution leaves the seed at t^{i}")
    return F


def solve_polynomial(coeffs: Callable[[int], List[TruncatedSeries]], seed, N: int,
                     ring: Ring = RATIONALS, name: str = "") -> TruncatedSeries:
    return newton_solve(AlgebraicSeriesDef(coeffs, seed, ring, name), N)


# ---------------------------------------------------------------------------
# positive / negative parts and evaluation in x

def part_extract(f: TruncatedSeries, mode: str, var: str = "x") -> TruncatedSeries:
    """[x^>=] ('nonneg'), [x^>] ('pos') or [x^<] ('neg') coefficientwise."""
    key = {"NonNeg": "nonneg", "Pos": "pos", "Neg": "neg"}.get(mode, mode)
    if f.ring is LAURENT_XY:
        if var == "x":
            return f.map(lambda c: c.part(xmode=key))
        return f.map(lambda c: c.part(ymode=key))
    return f.map(lambda c: c.part(key))


def eval_series_at(f: TruncatedSeries, x0) -> TruncatedSeries:
    """Substitute x = x0 (a rational or a ZetaNumber) into Laurent coefficients."""
    if isinstance(x0, ZetaNumber):
        return f.map(lambda c: c.evaluate(x0), ZETA)
    return f.map(lambda c: c.evaluate(x0), RationalsAt(x0))


class CubicPoleExtraction:
    """[x^>=] F(1/x)/(1+x+x^2)^p in closed form through F(zeta), F'(zeta)."""

    def __init__(self, F: TruncatedSeries, power: int):
        if power not in (1, 2):
            raise ValueError("power must be 1 or 2")
        low = -1 if power == 1 else -3
        for n, c in enumerate(F.coeffs):
            if c.terms and c.valuation() < low:
                raise ValuationTooLow(f"t^{n} coefficient has x-valuation {c.valuation()} < {low}")
        zeta = ZetaNumber(0, 1)
        self.power = power
        self.order = F.order
        self.F_zeta = eval_series_at(F, zeta)
        self.dF_zeta = eval_series_at(F.x_derivative(), zeta)
        self._inv = (ZetaNumber(1, 0) - zeta).inverse()     # 1/(1 - zeta) = (2 + zeta)/3

    def x_coefficient(self, n: int) -> TruncatedSeries:
        """Coefficient of x^n (n >= 0) as a rational series in t."""
        zn = ZetaNumber.zeta_power(n)
        inv = self._inv
        out = []
        for fz, dfz in zip(self.F_zeta.coeffs, self.dF_zeta.coeffs):
            simple = (fz * zn * inv).trace()
            if self.power == 1:
                out.append(simple)
                continue
            double = ((dfz * ZetaNumber(0, 1) + fz * (n + 1)) * zn * inv * inv).trace()
            out.append(Fraction(2, 3) * simple + double)
        return TruncatedSeries(out, self.order, RATIONALS)

    def expand(self, max_degree: int) -> TruncatedSeries:
        """The extraction as a series whose coefficients are polynomials of degree <= max_degree."""
        cols = [self.x_coefficient(n) for n in range(max_degree + 1)]
        coeffs = [LaurentX({n: cols[n].coeffs[i] for n in range(max_degree + 1)})
                  for i in range(self.order + 1)]
        return TruncatedSeries(coeffs, self.order, LAURENT_X)


def extract_nonneg_cubic(F: TruncatedSeries, power: int) -> CubicPoleExtraction:
    return CubicPoleExtraction(F, power)


# ---------------------------------------------------------------------------
# serialization

def _ratstr(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def series_to_json(f: TruncatedSeries) -> str:
    out = []
    for c in f.coeffs:
        if isinstance(c, LaurentX):
            out.append([{"i": k, "c": _ratstr(v)} for k, v in c.items()])
        elif isinstance(c, ZetaNumber):
            out.append({"a": _ratstr(c.a), "b": _ratstr(c.b)})
        elif isinstance(c, Mod):
            out.append(str(c.v))
        else:
            out.append(_ratstr(c))
    return json.dumps(out)


def series_from_json(text: str, ring: Ring = RATIONALS) -> TruncatedSeries:
    data = json.loads(text)
    coeffs = []
    for item in data:
        if isinstance(item, list):
            coeffs.append(LaurentX({d["i"]: Fraction(d["c"]) for d in item}))
            ring = LAURENT_X
        else:
            coeffs.append(Fraction(item))
    return TruncatedSeries(coeffs, len(coeffs) - 1, ring)
