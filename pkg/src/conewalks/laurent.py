"""Sparse Laurent polynomials in one and two variables, plus two small scalar rings.

Coefficients are plain Python numbers (int or Fraction) or anything else that
supports +, -, * with ints.  Integer inputs stay integers, which keeps the hot
loops fast; Fractions only appear where a division actually happened.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Tuple


def _prune(terms: dict) -> dict:
    return {k: c for k, c in terms.items() if c != 0}


def _fmt_coeff(c) -> str:
    return str(c)


class LaurentX:
    """Laurent polynomial in a single variable x, stored as {exponent: coeff}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[int, object] | None = None):
        self.terms = _prune(dict(terms)) if terms else {}

    @classmethod
    def _raw(cls, terms: dict) -> "LaurentX":
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def monomial(cls, k: int, c=1) -> "LaurentX":
        return cls({k: c})

    @classmethod
    def constant(cls, c) -> "LaurentX":
        return cls({0: c}) if c != 0 else cls()

    # ring plumbing
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, LaurentX):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return self.terms == {0: other}

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __neg__(self):
        return LaurentX._raw({k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, LaurentX):
            if other == 0:
                return self
            other = LaurentX.constant(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s != 0:
                out[k] = s
            else:
                out.pop(k, None)
        return LaurentX._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentX):
            if other == 0:
                return LaurentX()
            if other == 1:
                return self
            return LaurentX._raw({k: c * other for k, c in self.terms.items()})
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        for j, cb in b.items():
            for i, ca in a.items():
                k = i + j
                out[k] = get(k, 0) + ca * cb
        return LaurentX._raw(_prune(out))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            if len(self.terms) != 1:
                raise ZeroDivisionError("only monomials are invertible")
            (k, c), = self.terms.items()
            return LaurentX({-k * (-e): Fraction(1) / c ** (-e)})
        out = LaurentX.constant(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, LaurentX):
            if len(other.terms) != 1:
                raise ZeroDivisionError("division by a non-monomial Laurent polynomial")
            (k, c), = other.terms.items()
            return LaurentX._raw({e - k: Fraction(v) / c for e, v in self.terms.items()})
        return LaurentX._raw({e: Fraction(v) / other for e, v in self.terms.items()})

    # structure
    def coeff(self, k: int):
        return self.terms.get(k, 0)

    def valuation(self) -> int:
        return min(self.terms) if self.terms else 0

    def degree(self) -> int:
        return max(self.terms) if self.terms else 0

    def reflect(self) -> "LaurentX":
        """Substitute x -> 1/x."""
        return LaurentX._raw({-k: c for k, c in self.terms.items()})

    def shift(self, k: int) -> "LaurentX":
        return LaurentX._raw({e + k: c for e, c in self.terms.items()})

    def derivative(self) -> "LaurentX":
        return LaurentX({k - 1: k * c for k, c in self.terms.items() if k != 0})

    def part(self, mode: str) -> "LaurentX":
        """Exponent filter: 'nonneg', 'pos', 'neg' (strictly negative), 'nonpos'."""
        test = {"nonneg": lambda k: k >= 0, "pos": lambda k: k > 0,
                "neg": lambda k: k < 0, "nonpos": lambda k: k <= 0}[mode]
        return LaurentX._raw({k: c for k, c in self.terms.items() if test(k)})

    def evaluate(self, x0):
        """Evaluate at a scalar or a ZetaNumber."""
        if isinstance(x0, ZetaNumber):
            out = ZetaNumber(0, 0)
            for k, c in self.terms.items():
                out = out + ZetaNumber.zeta_power(k) * c
            return out
        if x0 == 0 and any(k < 0 for k in self.terms):
            from .errors import ZeroSubstitutionIntoNegativePower
            raise ZeroSubstitutionIntoNegativePower("x=0 substituted into a negative power")
        total = 0
        for k, c in self.terms.items():
            total += c * (Fraction(x0) ** k if k < 0 else x0 ** k)
        return total

    def items(self) -> Iterator[Tuple[int, object]]:
        return iter(sorted(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items()):
            if k == 0:
                parts.append(_fmt_coeff(c))
            else:
                parts.append(f"{_fmt_coeff(c)}*x^{k}")
        return " + ".join(parts)


class LaurentPoly2:
    """Laurent polynomial in x and y, stored as {(i, j): coeff}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Tuple[int, int], object] | None = None):
        self.terms = _prune(dict(terms)) if terms else {}

    @classmethod
    def _raw(cls, terms: dict) -> "LaurentPoly2":
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "LaurentPoly2":
        return cls({(i, j): c})

    @classmethod
    def constant(cls, c) -> "LaurentPoly2":
        return cls({(0, 0): c}) if c != 0 else cls()

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, LaurentPoly2):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return self.terms == {(0, 0): other}

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __neg__(self):
        return LaurentPoly2._raw({k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, LaurentPoly2):
            if other == 0:
                return self
            other = LaurentPoly2.constant(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, 0) + c
            if s != 0:
                out[k] = s
            else:
                out.pop(k, None)
        return LaurentPoly2._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly2):
            if other == 0:
                return LaurentPoly2()
            if other == 1:
                return self
            return LaurentPoly2._raw({k: c * other for k, c in self.terms.items()})
        out: dict = {}
        get = out.get
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = get(k, 0) + c1 * c2
        return LaurentPoly2._raw(_prune(out))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = LaurentPoly2.constant(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def coeff(self, i: int, j: int):
        return self.terms.get((i, j), 0)

    def substitute_monomials(self, X: Tuple[int, int], Y: Tuple[int, int]) -> "LaurentPoly2":
        """Replace x by x^X[0] y^X[1] and y by x^Y[0] y^Y[1] (unit coefficients)."""
        out: dict = {}
        for (i, j), c in self.terms.items():
            k = (X[0] * i + Y[0] * j, X[1] * i + Y[1] * j)
            out[k] = out.get(k, 0) + c
        return LaurentPoly2(out)

    def swap(self) -> "LaurentPoly2":
        return LaurentPoly2._raw({(j, i): c for (i, j), c in self.terms.items()})

    def part(self, xmode: str | None = None, ymode: str | None = None) -> "LaurentPoly2":
        tests = {None: lambda k: True, "nonneg": lambda k: k >= 0, "pos": lambda k: k > 0,
                 "neg": lambda k: k < 0, "nonpos": lambda k: k <= 0}
        tx, ty = tests[xmode], tests[ymode]
        return LaurentPoly2._raw({k: c for k, c in self.terms.items() if tx(k[0]) and ty(k[1])})

    def x_slice(self, i: int) -> LaurentX:
        """Coefficient of x^i, as a Laurent polynomial in y (stored in a LaurentX)."""
        return LaurentX({j: c for (a, j), c in self.terms.items() if a == i})

    def y_slice(self, j: int) -> LaurentX:
        return LaurentX({i: c for (i, b), c in self.terms.items() if b == j})

    def evaluate(self, x0, y0):
        total = 0
        for (i, j), c in self.terms.items():
            total += c * Fraction(x0) ** i * Fraction(y0) ** j
        return total

    def support(self) -> Iterable[Tuple[int, int]]:
        return self.terms.keys()

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*x^{i}*y^{j}" for (i, j), c in sorted(self.terms.items()))


class ZetaNumber:
    """a + b*zeta with zeta^2 = -1 - zeta (a primitive cube root of unity)."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a
        self.b = b

    @staticmethod
    def zeta_power(k: int) -> "ZetaNumber":
        return (ZetaNumber(1, 0), ZetaNumber(0, 1), ZetaNumber(-1, -1))[k % 3]

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __eq__(self, other):
        if isinstance(other, ZetaNumber):
            return self.a == other.a and self.b == other.b
        return self.b == 0 and self.a == other

    def __hash__(self):
        return hash((self.a, self.b))

    def __neg__(self):
        return ZetaNumber(-self.a, -self.b)

    def __add__(self, other):
        if isinstance(other, ZetaNumber):
            return ZetaNumber(self.a + other.a, self.b + other.b)
        return ZetaNumber(self.a + other, self.b)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ZetaNumber):
            a, b, c, d = self.a, self.b, other.a, other.b
            bd = b * d
            return ZetaNumber(a * c - bd, a * d + b * c - bd)
        return ZetaNumber(self.a * other, self.b * other)

    __rmul__ = __mul__

    def conjugate(self) -> "ZetaNumber":
        # zeta-bar = zeta^2 = -1 - zeta
        return ZetaNumber(self.a - self.b, -self.b)

    def norm(self):
        return self.a * self.a - self.a * self.b + self.b * self.b

    def inverse(self) -> "ZetaNumber":
        n = Fraction(self.norm())
        if n == 0:
            raise ZeroDivisionError("zero in the zeta ring")
        c = self.conjugate()
        return ZetaNumber(c.a / n, c.b / n)

    def __truediv__(self, other):
        if isinstance(other, ZetaNumber):
            return self * other.inverse()
        return ZetaNumber(Fraction(self.a) / other, Fraction(self.b) / other)

    def trace(self):
        """self + conjugate(self), a rational."""
        return 2 * self.a - self.b

    def real_imag(self):
        """(re, im/sqrt3) for the complex number a + b*zeta."""
        return self.a - Fraction(self.b, 2), Fraction(self.b, 2)

    def __repr__(self):
        return f"({self.a} + {self.b}*zeta)"


class Mod:
    """Residue modulo a prime p."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.p = p
        self.v = v % p

    def _coerce(self, other) -> int:
        if isinstance(other, Mod):
            if other.p != self.p:
                raise ValueError("mixing residues of different moduli")
            return other.v
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return other

    def is_zero(self) -> bool:
        return self.v == 0

    def __eq__(self, other):
        if isinstance(other, Mod):
            return self.p == other.p and self.v == other.v
        return self.v == self._coerce(other) % self.p

    def __hash__(self):
        return hash((self.v, self.p))

    def __neg__(self):
        return Mod(-self.v, self.p)

    def __add__(self, other):
        return Mod(self.v + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return Mod(self.v - self._coerce(other), self.p)

    def __rsub__(self, other):
        return Mod(self._coerce(other) - self.v, self.p)

    def __mul__(self, other):
        return Mod(self.v * self._coerce(other), self.p)

    __rmul__ = __mul__

    def inverse(self) -> "Mod":
        if self.v == 0:
            raise ZeroDivisionError("zero residue")
        return Mod(pow(self.v, -1, self.p), self.p)

    def __truediv__(self, other):
        if not isinstance(other, Mod):
            other = Mod(self._coerce(other), self.p)
        return self * other.inverse()

    def __pow__(self, e: int):
        return Mod(pow(self.v, e, self.p), self.p)

    def __int__(self):
        return self.v

    def __repr__(self):
        return f"{self.v} (mod {self.p})"
