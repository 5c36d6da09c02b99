"""Asymptotic constants for king walks in the three-quadrant cone.

The predictions come in two-term form

    c(n)     ~ kappa * 8^n n^alpha + kappa2 * 8^n n^alpha2

with the constants given by radicals in the real roots K and L of two integer
cubics and by Gamma(2/3).  Roots are isolated exactly on rationals; the
constants are then evaluated with mpmath at ``PRECISION`` decimal digits.

A second route assembles the same constants from the singular expansion of
A(1,1) and A_{0,0} at t = 1/8, which is parametrised by the real root v_c of
4v^3 + 3v^2 - 1.  ``cross_check`` compares the two.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from .enumeration import FLOAT, StartDistribution, walk_tables
from .errors import SequenceTooShort
from .model import builtin

PRECISION = 50          # working decimal digits
ROOT_WIDTH = Fraction(1, 10 ** 35)
MIN_FIT_TERMS = 200

# integer cubics, highest degree first
K_CUBIC = (101 ** 6, -601275603, 92811, -1)
L_CUBIC = (101 ** 18, -342130847546623941461342020714770,
           25258724190403343220341683641, -(5078 ** 6))
VC_CUBIC = (4, 3, 0, -1)


# ---------------------------------------------------------------------------
# exact root isolation

def _peval(coeffs: Sequence[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def cubic_discriminant(coeffs: Sequence[int]) -> int:
    a, b, c, d = coeffs
    return 18 * a * b * c * d - 4 * b ** 3 * d + b * b * c * c - 4 * a * c ** 3 - 27 * a * a * d * d


def real_root_count(coeffs: Sequence[int]) -> int:
    """Number of distinct real roots of a cubic, from the sign of its discriminant."""
    disc = cubic_discriminant(coeffs)
    if disc > 0:
        return 3
    if disc < 0:
        return 1
    raise ValueError("cubic has a repeated root")


@dataclass
class IsolatedRoot:
    lo: Fraction
    hi: Fraction
    steps: int
    widths: List[float] = field(repr=False, default_factory=list)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def value(self, dps: int = PRECISION):
        with mpmath.workdps(dps):
            return (mpmath.mpf(self.lo.numerator) / self.lo.denominator
                    + mpmath.mpf(self.hi.numerator) / self.hi.denominator) / 2


def isolate_unique_real_root(coeffs: Sequence[int], width: Fraction = ROOT_WIDTH) -> IsolatedRoot:
    """Bracket the single real root of a cubic to within `width`.

    Each step keeps a sign change across the bracket.  A Newton step from the
    midpoint is tried first and accepted when it lands strictly inside and
    shrinks the bracket by at least half; otherwise the step bisects.
    """
    if real_root_count(coeffs) != 1:
        raise ValueError("cubic does not have a unique real root")
    a = coeffs[0]
    bound = 1 + max(Fraction(abs(c), abs(a)) for c in coeffs[1:])   # Cauchy bound
    lo, hi = -bound, bound
    flo = _peval(coeffs, lo)
    deriv = [c * (len(coeffs) - 1 - k) for k, c in enumerate(coeffs[:-1])]
    widths = []
    steps = 0
    while hi - lo > width:
        mid = (lo + hi) / 2
        fm = _peval(coeffs, mid)
        if fm == 0:
            lo = hi = mid
            break
        dm = _peval(deriv, mid)
        cand = None
        if dm != 0:
            x = mid - fm / dm
            if lo < x < hi:
                # shrink to a small bracket around the Newton point
                h = (hi - lo) / 2 ** 20
                a1, b1 = max(lo, x - h), min(hi, x + h)
                fa, fb = _peval(coeffs, a1), _peval(coeffs, b1)
                if (fa == 0) or (fb == 0) or ((fa > 0) != (fb > 0)):
                    cand = (a1, b1, fa)
        if cand is not None:
            lo, hi, flo = cand
            if flo == 0:
                hi = lo
                break
        elif (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        # bracket invariant: a sign change across [lo, hi]
        assert (_peval(coeffs, lo) > 0) != (_peval(coeffs, hi) > 0) or lo == hi
        steps += 1
        widths.append(float(hi - lo))
    return IsolatedRoot(lo, hi, steps, widths)


_ROOT_CACHE: Dict[Tuple[int, ...], IsolatedRoot] = {}


def root(coeffs: Sequence[int]) -> IsolatedRoot:
    key = tuple(coeffs)
    if key not in _ROOT_CACHE:
        _ROOT_CACHE[key] = isolate_unique_real_root(key)
    return _ROOT_CACHE[key]


def gamma_two_thirds(dps: int = PRECISION):
    """Gamma(2/3), checked against the reflection formula."""
    with mpmath.workdps(dps + 10):
        g23 = mpmath.gamma(mpmath.mpf(2) / 3)
        g13 = mpmath.gamma(mpmath.mpf(1) / 3)
        ref = 2 * mpmath.pi / mpmath.sqrt(3)
        if abs(g23 * g13 - ref) > mpmath.mpf(10) ** (-dps):
            raise ArithmeticError("Gamma(2/3) failed the reflection check")
        return +g23


# ---------------------------------------------------------------------------
# predictions

@dataclass(frozen=True)
class AsymptoticPrediction:
    series: str
    growth: int
    exponent: Fraction
    constant: object                  # mpmath.mpf
    correction_exponent: Fraction
    correction_constant: object

    def leading(self, n: int) -> float:
        """Predicted c(n) / 8^n, leading term only."""
        return float(self.constant) * n ** float(self.exponent)

    def correction(self, n: int) -> float:
        """Second-order term divided by 8^n."""
        return float(self.correction_constant) * n ** float(self.correction_exponent)

    def two_term(self, n: int) -> float:
        return self.leading(n) + self.correction(n)

    def to_json(self) -> dict:
        return {"series": self.series, "growth": self.growth,
                "exponent": str(self.exponent), "constant": mpmath.nstr(self.constant, 30),
                "correction_exponent": str(self.correction_exponent),
                "correction_constant": mpmath.nstr(self.correction_constant, 30)}


def predicted(series: str = "total", dps: int = PRECISION) -> AsymptoticPrediction:
    """Two-term prediction for 'total' (all walks of length n) or 'origin' (ending at (0,0))."""
    with mpmath.workdps(dps):
        g = gamma_two_thirds(dps)
        if series == "total":
            K = root(K_CUBIC).value(dps)
            lead = (mpmath.mpf(2) ** 32 * K / 3 ** 7) ** (mpmath.mpf(1) / 6) / g
            corr = -8 / (9 * mpmath.pi)
            return AsymptoticPrediction("total", 8, Fraction(-1, 3), +lead,
                                        Fraction(-1), +corr)
        if series == "origin":
            K = root(K_CUBIC).value(dps)
            L = root(L_CUBIC).value(dps)
            lead = mpmath.cbrt(mpmath.mpf(2) ** 29 * K / 3 ** 7) * g / mpmath.pi
            corr = -(mpmath.mpf(2) ** 62 * L / mpmath.mpf(3) ** 31) ** (mpmath.mpf(1) / 6) / g
            return AsymptoticPrediction("origin", 8, Fraction(-5, 3), +lead,
                                        Fraction(-7, 3), +corr)
    raise ValueError(f"unknown series {series!r}; expected 'total' or 'origin'")


def singular_constants(dps: int = PRECISION) -> Dict[str, object]:
    """Constants of c(n) and c_{0,0}(n) assembled from the expansions at t = 1/8.

    A(1,1) has leading term a/(1-8t)^{2/3}; A_{0,0} has a2 (1-8t)^{2/3} + a4 (1-8t)^{4/3}.
    Transfer uses [t^n](1-8t)^beta ~ 8^n n^{-beta-1} / Gamma(-beta).
    """
    with mpmath.workdps(dps):
        vc = root(VC_CUBIC).value(dps)
        wc = mpmath.sqrt(3 * vc ** 2 + 12 * vc + 3) / 2
        c6 = mpmath.cbrt(6)
        a = -2 ** 5 * c6 * wc * (28 * vc ** 2 + 61 * vc - 86) / (3 ** 3 * 101)
        a2 = -2 ** 9 * c6 ** 2 * wc * (6716 * vc ** 2 + 2165 * vc - 1582) / (3 ** 4 * 101 ** 2)
        a4 = 2 ** 8 * c6 * wc * (344660 * vc ** 2 + 688535 * vc - 718546) / (3 ** 5 * 101 ** 3)
        third = mpmath.mpf(1) / 3
        return {"v_c": vc, "w_c": wc,
                "total": a / mpmath.gamma(2 * third),
                "origin": a2 / mpmath.gamma(-2 * third),
                "origin_correction": a4 / mpmath.gamma(-4 * third)}


def cross_check(digits: int = 20) -> Dict[str, bool]:
    """Compare both routes for each constant to `digits` significant digits."""
    sing = singular_constants()
    tot, org = predicted("total"), predicted("origin")
    tol = mpmath.mpf(10) ** (-digits)
    pairs = {"total": (tot.constant, sing["total"]),
             "origin": (org.constant, sing["origin"]),
             "origin_correction": (org.correction_constant, sing["origin_correction"])}
    return {k: abs(x - y) <= tol * abs(x) for k, (x, y) in pairs.items()}


# ---------------------------------------------------------------------------
# data

@functools.lru_cache(maxsize=4)
def normalized_sequences(N: int) -> Dict[str, Tuple[float, ...]]:
    """c(n)/8^n and c_{0,0}(n)/8^n for n = 0..N from a floating-point DP (cached)."""
    king = builtin("king")
    total, origin = [], []
    for tab in walk_tables(king, "three-quadrant", StartDistribution.single((0, 0)), N, FLOAT):
        total.append(float(tab.counts.sum()))
        origin.append(tab.get(0, 0))
    return {"total": tuple(total), "origin": tuple(origin)}


# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class FitResult:
    exponent: float            # Richardson estimate of alpha
    exponent_snapped: Fraction  # nearest grid value, used for the constant
    constant: float
    error: float               # spread of the last two Richardson iterates

    def to_json(self) -> dict:
        return {"exponent": self.exponent, "exponent_snapped": str(self.exponent_snapped),
                "constant": self.constant, "error": self.error}


def default_grid() -> List[Fraction]:
    return [Fraction(k, 6) for k in range(-24, 7)]


def empirical_fit(sequence: Sequence, growth: float = 8,
                  exponent_grid: Optional[Sequence[Fraction]] = None,
                  correction: Optional[Tuple[float, float]] = None,
                  normalized: bool = False) -> FitResult:
    """Fit a(n) ~ C growth^n n^alpha from a(0..N).

    `correction` = (constant, exponent) is a known next-order term, expressed
    relative to growth^n, which is subtracted before fitting.  With
    `normalized=True` the sequence is already divided by growth^n.
    """
    N = len(sequence) - 1
    if N + 1 < MIN_FIT_TERMS:
        raise SequenceTooShort(f"need at least {MIN_FIT_TERMS} terms, got {N + 1}")
    grid = list(exponent_grid) if exponent_grid is not None else default_grid()

    def a(n: int) -> float:
        v = sequence[n]
        if not normalized:
            v = math.exp(math.log(v) - n * math.log(growth)) if v > 0 else 0.0
        v = float(v)
        if correction is not None:
            v -= correction[0] * n ** correction[1]
        return v

    def alpha(n: int) -> float:
        return math.log(a(n) / a(n // 2)) / math.log(n / (n // 2))

    def alpha_r(n: int) -> float:
        return 2 * alpha(n) - alpha(n // 2)

    al = alpha_r(N)
    al_prev = alpha_r(N - 1 - (N % 2))
    snapped = min(grid, key=lambda g: abs(float(g) - al))
    s = float(snapped)

    def kappa(n: int) -> float:
        return a(n) / n ** s

    def kappa_r(n: int) -> float:
        return 2 * kappa(n) - kappa(n // 2)

    k_last = kappa_r(N)
    k_prev = kappa_r(N - 1 - (N % 2))
    err = max(abs(k_last - k_prev), abs(al - al_prev))
    return FitResult(al, snapped, k_last, err)


def fit_against_prediction(N: int = 1000,
                           data: Optional[Dict[str, Sequence[float]]] = None) -> Dict[str, dict]:
    """Empirical vs predicted leading constants, second-order term subtracted."""
    data = data or normalized_sequences(N)
    out = {}
    for series in ("total", "origin"):
        pred = predicted(series)
        corr = (float(pred.correction_constant), float(pred.correction_exponent))
        fit = empirical_fit(data[series][:N + 1], correction=corr, normalized=True)
        c = float(pred.constant)
        out[series] = {"predicted_exponent": pred.exponent, "predicted_constant": c,
                       "fit": fit, "relative_error": abs(fit.constant - c) / abs(c)}
    return out


def comparison_rows(N: int, data: Optional[Dict[str, Sequence[float]]] = None,
                    series: str = "total", every: int = 100) -> List[Tuple[int, float, float, float]]:
    """(n, c(n)/8^n, two-term prediction, relative deviation) at sampled n."""
    data = data or normalized_sequences(N)
    pred = predicted(series)
    rows = []
    for n in list(range(every, N + 1, every)) or [N]:
        v = data[series][n]
        p = pred.two_term(n)
        rows.append((n, v, p, (v - p) / p))
    return rows
