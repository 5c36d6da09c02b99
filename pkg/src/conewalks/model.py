"""Step sets, their group of birational transformations, orbit sums and the
affine action of the group on lattice points."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .errors import DegenerateModel, NonMonomialGroup
from .laurent import LaurentPoly2, LaurentX


class Step(NamedTuple):
    dx: int
    dy: int


class EdgeRule(Enum):
    FORBID = "forbid"    # no jump between (-1,0) and (0,-1)
    ALLOW = "allow"


@dataclass(frozen=True)
class StepSet:
    steps: FrozenSet[Step]
    name: str = ""
    edge_rule: EdgeRule = EdgeRule.FORBID

    def __post_init__(self):
        steps = frozenset(Step(*s) for s in self.steps)
        if not steps:
            raise ValueError("a model needs at least one step")
        for s in steps:
            if s.dx not in (-1, 0, 1) or s.dy not in (-1, 0, 1) or (s.dx, s.dy) == (0, 0):
                raise ValueError(f"{tuple(s)} is not a small nonzero step")
        object.__setattr__(self, "steps", steps)

    def __iter__(self):
        return iter(sorted(self.steps))

    def __len__(self):
        return len(self.steps)

    def __contains__(self, s):
        return Step(*s) in self.steps

    def with_edge_rule(self, rule: EdgeRule | str) -> "StepSet":
        return StepSet(self.steps, self.name, EdgeRule(rule))

    @property
    def has_diagonal_jump(self) -> bool:
        """True when the edge rule can matter, i.e. (1,-1) or (-1,1) is a step."""
        return (1, -1) in self or (-1, 1) in self

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "steps": [list(s) for s in self],
                           "edge_rule": self.edge_rule.value})

    @classmethod
    def from_json(cls, text: str) -> "StepSet":
        data = json.loads(text)
        steps = [Step(int(a), int(b)) for a, b in data["steps"]]
        return cls(frozenset(steps), data.get("name", ""), EdgeRule(data.get("edge_rule", "forbid")))


def mirror(model: StepSet) -> StepSet:
    """The x/y mirror image of a model (swap coordinates of every step)."""
    return StepSet(frozenset(Step(s.dy, s.dx) for s in model.steps),
                   (model.name + "-mirror") if model.name else "", model.edge_rule)


# ---------------------------------------------------------------------------
# step polynomial

def step_polynomial(model: StepSet) -> LaurentPoly2:
    return LaurentPoly2({(s.dx, s.dy): 1 for s in model.steps})


def kernel_polynomial_terms(model: StepSet) -> LaurentPoly2:
    """S(x,y); the kernel is 1 - t*S(x,y)."""
    return step_polynomial(model)


def H_parts(model: StepSet) -> Tuple[LaurentX, LaurentX, LaurentX]:
    """(H-, H0, H+) with S = ybar*H-(x) + H0(x) + y*H+(x)."""
    parts = {-1: {}, 0: {}, 1: {}}
    for s in model.steps:
        parts[s.dy][s.dx] = 1
    return LaurentX(parts[-1]), LaurentX(parts[0]), LaurentX(parts[1])


def V_parts(model: StepSet) -> Tuple[LaurentX, LaurentX, LaurentX]:
    """(V-, V0, V+) with S = xbar*V-(y) + V0(y) + x*V+(y)."""
    parts = {-1: {}, 0: {}, 1: {}}
    for s in model.steps:
        parts[s.dx][s.dy] = 1
    return LaurentX(parts[-1]), LaurentX(parts[0]), LaurentX(parts[1])


# ---------------------------------------------------------------------------
# the group

Monomial = Tuple[object, int, int]      # (coefficient, x-exponent, y-exponent)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] * b[0], a[1] + b[1], a[2] + b[2])


def _mono_pow(a: Monomial, e: int) -> Monomial:
    c = a[0] ** e if e >= 0 else Fraction(1) / a[0] ** (-e)
    return (c, a[1] * e, a[2] * e)


def _monomial_ratio(num: LaurentX, den: LaurentX) -> Optional[Tuple[object, int]]:
    """(alpha, e) with num = alpha * z^e * den, or None if the ratio is not a monomial."""
    if len(num.terms) != len(den.terms) or not num.terms:
        return None
    e = num.valuation() - den.valuation()
    alpha = Fraction(num.coeff(num.valuation())) / den.coeff(den.valuation())
    if alpha.denominator == 1:
        alpha = alpha.numerator
    for k, c in den.terms.items():
        if num.coeff(k + e) != alpha * c:
            return None
    return alpha, e


@dataclass(frozen=True)
class GroupElement:
    word: Tuple[str, ...]                 # letters 'phi'/'psi', rightmost applied first
    image: Tuple[Monomial, Monomial]      # g(x, y) = (X, Y)
    length: int

    @property
    def sign(self) -> int:
        return -1 if self.length % 2 else 1

    @property
    def matrix(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Exponent map: x^i y^j -> x^(m00 i + m01 j) y^(m10 i + m11 j)."""
        X, Y = self.image
        return ((X[1], Y[1]), (X[2], Y[2]))

    def apply_exponent(self, i: int, j: int) -> Tuple[int, int]:
        (a, b), (c, d) = self.matrix
        return (a * i + b * j, c * i + d * j)

    def coefficient(self, i: int, j: int):
        X, Y = self.image
        cx = X[0] ** i if i >= 0 else Fraction(1) / X[0] ** (-i)
        cy = Y[0] ** j if j >= 0 else Fraction(1) / Y[0] ** (-j)
        return cx * cy

    def apply(self, F: LaurentPoly2) -> LaurentPoly2:
        """g(F) = F(X, Y)."""
        out: dict = {}
        for (i, j), c in F.terms.items():
            k = self.apply_exponent(i, j)
            out[k] = out.get(k, 0) + c * self.coefficient(i, j)
        return LaurentPoly2(out)

    def affine(self, a: int, b: int) -> Tuple[int, int]:
        """g-dot(a,b) = (c,d) where x^c y^d = xbar ybar g(x^(a+1) y^(b+1))."""
        c, d = self.apply_exponent(a + 1, b + 1)
        return (c - 1, d - 1)

    def name(self) -> str:
        return "id" if not self.word else "".join("φ" if w == "phi" else "ψ" for w in self.word)

    def __repr__(self):
        def mono(m):
            c, i, j = m
            body = "*".join(p for p in (f"x^{i}" if i else "", f"y^{j}" if j else "") if p) or "1"
            return body if c == 1 else f"{c}*{body}"
        X, Y = self.image
        return f"GroupElement({self.name()}: ({mono(X)}, {mono(Y)}), sign={self.sign:+d})"


class GroupKind(Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    NON_MONOMIAL = "non-monomial"


@dataclass(frozen=True)
class Group:
    model: StepSet
    kind: GroupKind
    elements: Tuple[GroupElement, ...] = ()
    order: Optional[int] = None

    @property
    def d(self) -> int:
        return self.order // 2

    @property
    def identity(self) -> GroupElement:
        return self.elements[0]

    @property
    def omega(self) -> GroupElement:
        """The unique element of length d."""
        self._require_monomial()
        (w,) = [g for g in self.elements if g.length == self.d]
        return w

    def _require_monomial(self):
        if self.kind is not GroupKind.FINITE:
            raise NonMonomialGroup(f"group of {self.model.name or 'model'} is {self.kind.value}")

    def element(self, word: str) -> GroupElement:
        for g in self.elements:
            if g.name() == word:
                return g
        raise KeyError(word)

    def compose(self, g: GroupElement, h: GroupElement) -> GroupElement:
        """g o h."""
        target = self.compose_matrix(g.matrix, h.matrix)
        for e in self.elements:
            if e.matrix == target:
                return e
        raise ValueError("composition left the group")

    @staticmethod
    def compose_matrix(A, B):
        return tuple(tuple(sum(A[r][k] * B[k][c] for k in range(2)) for c in range(2)) for r in range(2))

    def inverse(self, g: GroupElement) -> GroupElement:
        ident = ((1, 0), (0, 1))
        for e in self.elements:
            if self.compose_matrix(g.matrix, e.matrix) == ident:
                return e
        raise ValueError("no inverse found")

    # walls and chambers
    def walls(self) -> List[Tuple[GroupElement, Tuple[int, int]]]:
        """For each odd element g, a normal vector n with W_g = {p : n.(p+1) = 0}."""
        self._require_monomial()
        out = []
        for g in self.elements:
            if g.sign == -1:
                (a, b), (c, d) = g.matrix
                rows = [(a - 1, b), (c, d - 1)]
                n = next(r for r in rows if r != (0, 0))
                out.append((g, n))
        return out

    def on_wall(self, point: Tuple[int, int]) -> bool:
        a, b = point
        return any(n[0] * (a + 1) + n[1] * (b + 1) == 0 for _, n in self.walls())

    def chamber_of(self, point: Tuple[int, int]) -> Optional[GroupElement]:
        """The element g with point in Q_g = g-dot(Q), or None when point is on a wall."""
        self._require_monomial()
        for g in self.elements:
            a, b = self.inverse(g).affine(*point)
            if a >= 0 and b >= 0:
                return g
        return None


def build_group(model: StepSet, cap: int = 20) -> Group:
    """Generate the group <phi, psi> by breadth-first search over words."""
    Hm, _, Hp = H_parts(model)
    Vm, _, Vp = V_parts(model)
    if not (Hm and Hp and Vm and Vp):
        raise DegenerateModel(f"{model.name or sorted(model.steps)}: some of H-, H+, V-, V+ vanish")
    rv = _monomial_ratio(Vm, Vp)       # V-(y)/V+(y) = alpha * y^e
    rh = _monomial_ratio(Hm, Hp)       # H-(x)/H+(x) = beta * x^f
    if rv is None or rh is None:
        order = _numeric_group_order(model, cap)
        kind = GroupKind.NON_MONOMIAL if order else GroupKind.INFINITE
        return Group(model, kind, (), order)
    alpha, e = rv
    beta, f = rh

    def phi(img):
        X, Y = img
        return (_mono_mul((alpha, 0, 0), _mono_mul(_mono_pow(X, -1), _mono_pow(Y, e))), Y)

    def psi(img):
        X, Y = img
        return (X, _mono_mul((beta, 0, 0), _mono_mul(_mono_pow(Y, -1), _mono_pow(X, f))))

    ident = ((1, 1, 0), (1, 0, 1))
    elements = [GroupElement((), ident, 0)]
    seen = {ident}
    frontier = [elements[0]]
    while frontier:
        nxt = []
        for g in frontier:
            for letter, fn in (("phi", phi), ("psi", psi)):
                if g.word and g.word[0] == letter:
                    continue
                img = fn(g.image)
                if img in seen:
                    continue
                if g.length + 1 > cap:
                    return Group(model, GroupKind.INFINITE, (), None)
                seen.add(img)
                el = GroupElement((letter,) + g.word, img, g.length + 1)
                elements.append(el)
                nxt.append(el)
        frontier = nxt
    return Group(model, GroupKind.FINITE, tuple(elements), len(elements))


def _numeric_group_order(model: StepSet, cap: int) -> Optional[int]:
    """Order of <phi, psi> for non-monomial models, from the orbit of exact rational points."""
    Hm, _, Hp = H_parts(model)
    Vm, _, Vp = V_parts(model)

    def theta(p):
        x, y = p
        y2 = Fraction(Hm.evaluate(x)) / (y * Hp.evaluate(x))
        x2 = Fraction(Vm.evaluate(y2)) / (x * Vp.evaluate(y2))
        return (x2, y2)

    orders = []
    for start in ((Fraction(2, 7), Fraction(5, 11)), (Fraction(13, 3), Fraction(3, 17))):
        p = start
        try:
            for k in range(1, cap // 2 + 1):
                p = theta(p)
                if p == start:
                    orders.append(2 * k)
                    break
            else:
                return None
        except ZeroDivisionError:
            return None
    return max(orders)


def orbit_sum(group: Group, a: int = 0, b: int = 0, F: LaurentPoly2 | None = None) -> LaurentPoly2:
    """OS(x^(a+1) y^(b+1)) = sum_g sign(g) g(x^(a+1) y^(b+1)), or OS(F) if F is given."""
    group._require_monomial()
    if F is None:
        F = LaurentPoly2.monomial(a + 1, b + 1)
    total = LaurentPoly2()
    for g in group.elements:
        total = total + g.apply(F) * g.sign
    return total


def affine_orbit(group: Group, point: Tuple[int, int]) -> List[Tuple[Tuple[int, int], int]]:
    group._require_monomial()
    return [(g.affine(*point), g.sign) for g in group.elements]


# ---------------------------------------------------------------------------
# classification

class ModelClass(Enum):
    TRIVIAL_RATIONAL = "Trivial-rational"
    HALF_PLANE = "Half-plane-equivalent"
    SINGULAR = "Singular"
    INTERESTING = "Interesting"


def classify_model(model: StepSet) -> ModelClass:
    """Sort a model into the cases that make the three-quadrant problem easy.

    Rational cases: every step stays in a closed half-plane i >= 0 (or j >= 0),
    so a walk never leaves the cone through that side.  Singular: every step
    weakly above the anti-diagonal.  Half-plane equivalent: all steps in
    i <= 0 (or j <= 0), or weakly on one side of the main diagonal, or weakly
    below the anti-diagonal.
    """
    S = list(model.steps)
    if all(s.dx >= 0 for s in S) or all(s.dy >= 0 for s in S):
        return ModelClass.TRIVIAL_RATIONAL
    if all(s.dx + s.dy >= 0 for s in S):
        return ModelClass.SINGULAR
    if (all(s.dx <= 0 for s in S) or all(s.dy <= 0 for s in S)
            or all(s.dy >= s.dx for s in S) or all(s.dy <= s.dx for s in S)
            or all(s.dx + s.dy <= 0 for s in S)):
        return ModelClass.HALF_PLANE
    return ModelClass.INTERESTING


# ---------------------------------------------------------------------------
# builtin registry

_E, _NE, _N, _NW, _W, _SW, _S, _SE = (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)

_BUILTIN_STEPS: Dict[str, Tuple[Tuple[int, int], ...]] = {
    "simple": (_E, _N, _W, _S),
    "diagonal": (_NE, _NW, _SW, _SE),
    "king": (_E, _NE, _N, _NW, _W, _SW, _S, _SE),
    "diabolo": (_E, _NE, _NW, _W, _SW, _SE),
    "tandem": (_E, _NW, _S),
    "double-tandem": (_E, _NW, _S, _W, _SE, _N),
    "gouyou-beauchamps": (_E, _W, _NW, _SE),
    "kreweras": (_W, _S, _NE),
    "reverse-kreweras": (_E, _N, _SW),
    "double-kreweras": (_W, _S, _NE, _E, _N, _SW),
    "gessel": (_E, _W, _NE, _SW),
}

WEYL_MODELS = ("simple", "diagonal", "king", "diabolo", "tandem", "double-tandem", "gouyou-beauchamps")
WEYL_ORDERS = {"simple": 4, "diagonal": 4, "king": 4, "diabolo": 4,
               "tandem": 6, "double-tandem": 6, "gouyou-beauchamps": 8}
ZERO_ORBIT_MODELS = ("kreweras", "reverse-kreweras", "double-kreweras", "gessel")
VH_SYMMETRIC = ("simple", "diagonal", "king", "diabolo")


def builtin(name: str, edge_rule: EdgeRule | str = EdgeRule.FORBID) -> StepSet:
    key = name.lower().replace("_", "-")
    if key not in _BUILTIN_STEPS:
        raise KeyError(f"unknown model {name!r}; known: {', '.join(sorted(_BUILTIN_STEPS))}")
    return StepSet(frozenset(Step(*s) for s in _BUILTIN_STEPS[key]), key, EdgeRule(edge_rule))


def builtin_names() -> List[str]:
    return sorted(_BUILTIN_STEPS)


def all_step_sets() -> Iterable[StepSet]:
    """All 255 nonempty small-step sets."""
    dirs = (_E, _NE, _N, _NW, _W, _SW, _S, _SE)
    for mask in range(1, 256):
        yield StepSet(frozenset(Step(*dirs[k]) for k in range(8) if mask >> k & 1))
