"""Dynamic-programming enumeration of walks with small steps.

Counts live in dense square numpy arrays.  Three arithmetic modes share one
evolution routine:

* exact: object arrays of Python ints,
* modular: uint64 arrays of residues modulo a prime p < 2^62,
* normalized float: float64 arrays holding count / |S|^n (for asymptotics).

Weighted starting points are always integer-scaled: a table built from a
StartDistribution with scale s holds s times the true (rational) counts.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BadPrime, EndpointOutsideRegion, InsufficientModulus
from .laurent import LaurentPoly2, LaurentX
from .model import EdgeRule, Group, StepSet, build_group
from .series import LAURENT_X, LAURENT_XY, RATIONALS, INTEGERS, TruncatedSeries

Point = Tuple[int, int]


class Region(Enum):
    QUADRANT = "quadrant"
    THREE_QUADRANT = "three-quadrant"
    UPPER_HALF_PLANE = "upper-half-plane"
    FULL_PLANE = "full-plane"

    def contains(self, i: int, j: int) -> bool:
        if self is Region.QUADRANT:
            return i >= 0 and j >= 0
        if self is Region.THREE_QUADRANT:
            return i >= 0 or j >= 0
        if self is Region.UPPER_HALF_PLANE:
            return j >= 0
        return True

    def mask(self, radius: int) -> np.ndarray:
        r = np.arange(-radius, radius + 1)
        I, J = np.meshgrid(r, r, indexing="ij")
        if self is Region.QUADRANT:
            return (I >= 0) & (J >= 0)
        if self is Region.THREE_QUADRANT:
            return (I >= 0) | (J >= 0)
        if self is Region.UPPER_HALF_PLANE:
            return J >= 0
        return np.ones_like(I, dtype=bool)


def region(name: Union[str, Region]) -> Region:
    if isinstance(name, Region):
        return name
    key = name.lower().replace("_", "-")
    aliases = {"q": "quadrant", "c": "three-quadrant", "cone": "three-quadrant",
               "half-plane": "upper-half-plane", "plane": "full-plane"}
    return Region(aliases.get(key, key))


# ---------------------------------------------------------------------------
# starting distributions

@dataclass(frozen=True)
class StartDistribution:
    entries: Tuple[Tuple[Point, Fraction], ...]

    def __post_init__(self):
        merged: Dict[Point, Fraction] = {}
        for p, w in self.entries:
            p = (int(p[0]), int(p[1]))
            merged[p] = merged.get(p, Fraction(0)) + Fraction(w)
        object.__setattr__(self, "entries", tuple(sorted((p, w) for p, w in merged.items() if w != 0)))

    @classmethod
    def single(cls, point: Point = (0, 0)) -> "StartDistribution":
        return cls(((tuple(point), Fraction(1)),))

    @classmethod
    def from_laurent(cls, F: LaurentPoly2) -> "StartDistribution":
        return cls(tuple(((i, j), Fraction(c)) for (i, j), c in F.terms.items()))

    def to_laurent(self) -> LaurentPoly2:
        return LaurentPoly2({p: w for p, w in self.entries})

    @property
    def scale(self) -> int:
        return reduce(lambda a, b: a * b // math.gcd(a, b), (w.denominator for _, w in self.entries), 1)

    @property
    def radius(self) -> int:
        return max((max(abs(p[0]), abs(p[1])) for p, _ in self.entries), default=0)

    def scaled(self) -> List[Tuple[Point, int]]:
        s = self.scale
        return [(p, int(w * s)) for p, w in self.entries]

    def check_region(self, reg: Region):
        for p, _ in self.entries:
            if not reg.contains(*p):
                raise EndpointOutsideRegion(f"start point {p} is outside {reg.value}")


def a_start(group: Group) -> StartDistribution:
    """Initial condition of the series A of a Weyl model.

    Weight (2d-2)/(2d-1) at the origin and -sign(h)/(2d-1) at h-dot(0,0) for
    every h other than the identity and the longest element.
    """
    d = group.d
    entries = [((0, 0), Fraction(2 * d - 2, 2 * d - 1))]
    omega = group.omega
    for h in group.elements:
        if h.length == 0 or h == omega:
            continue
        entries.append((h.affine(0, 0), Fraction(-h.sign, 2 * d - 1)))
    return StartDistribution(tuple(entries))


def parse_start(text: str) -> StartDistribution:
    """'a,b[:w]' items separated by ';' or whitespace; w may be 'p/q'."""
    entries = []
    for item in text.replace(";", " ").split():
        if ":" in item:
            pt, w = item.split(":", 1)
        else:
            pt, w = item, "1"
        a, b = (int(v) for v in pt.split(","))
        entries.append(((a, b), Fraction(w)))
    return StartDistribution(tuple(entries))


# ---------------------------------------------------------------------------
# arithmetic modes

class Mode(Enum):
    EXACT = "exact"
    MODULAR = "modular"
    FLOAT = "float"


@dataclass(frozen=True)
class Arith:
    mode: Mode
    p: int = 0

    @property
    def dtype(self):
        return {Mode.EXACT: object, Mode.MODULAR: np.uint64, Mode.FLOAT: np.float64}[self.mode]

    def zeros(self, shape):
        if self.mode is Mode.EXACT:
            a = np.empty(shape, dtype=object)
            a.fill(0)
            return a
        return np.zeros(shape, dtype=self.dtype)

    def encode(self, value: int):
        if self.mode is Mode.MODULAR:
            return np.uint64(value % self.p)
        if self.mode is Mode.FLOAT:
            return float(value)
        return int(value)


EXACT = Arith(Mode.EXACT)
FLOAT = Arith(Mode.FLOAT)


def modular(p: int) -> Arith:
    return Arith(Mode.MODULAR, p)


# ---------------------------------------------------------------------------
# tables

@dataclass
class WalkTable:
    """Counts after n steps on the window [-R..R]^2 (R = `radius`).

    counts[i + R, j + R] is the (scaled) number of walks ending at (i, j).
    """

    n: int
    radius: int
    counts: np.ndarray
    arith: Arith
    scale: int = 1

    def get(self, i: int, j: int):
        R = self.radius
        if abs(i) > R or abs(j) > R:
            return self.arith.encode(0)
        v = self.counts[i + R, j + R]
        return int(v) if self.arith.mode is not Mode.FLOAT else float(v)

    def total(self):
        if self.arith.mode is Mode.EXACT:
            return sum(self.counts.ravel().tolist())
        if self.arith.mode is Mode.MODULAR:
            return int(sum(int(v) for v in self.counts.ravel() if v)) % self.arith.p
        return float(self.counts.sum())

    def nonzero_cells(self) -> Iterator[Tuple[int, int, object]]:
        R = self.radius
        for a, b in zip(*np.nonzero(self.counts)):
            yield int(a) - R, int(b) - R, self.get(int(a) - R, int(b) - R)

    def to_laurent(self) -> LaurentPoly2:
        return LaurentPoly2({(i, j): v for i, j, v in self.nonzero_cells()})

    def copy(self) -> "WalkTable":
        return WalkTable(self.n, self.radius, self.counts.copy(), self.arith, self.scale)

    # binary checkpoints (modular tables only)
    MAGIC = 0x534B4C4157455243   # arbitrary tag

    def to_bytes(self) -> bytes:
        if self.arith.mode is not Mode.MODULAR:
            raise ValueError("only modular tables have a binary checkpoint format")
        header = struct.pack("<4Q", self.MAGIC, self.n, self.radius, self.arith.p)
        return header + self.counts.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "WalkTable":
        magic, n, radius, p = struct.unpack("<4Q", data[:32])
        if magic != cls.MAGIC:
            raise ValueError("not a walk-table checkpoint")
        side = 2 * radius + 1
        counts = np.frombuffer(data[32:], dtype="<u8").reshape(side, side).astype(np.uint64)
        return cls(n, radius, counts, modular(p))


def _initial_table(start: StartDistribution, radius: int, arith: Arith) -> WalkTable:
    side = 2 * radius + 1
    counts = arith.zeros((side, side))
    for (a, b), w in start.scaled():
        counts[a + radius, b + radius] = arith.encode(w)
    return WalkTable(0, radius, counts, arith, start.scale)


def _evolve_into(old: np.ndarray, radius: int, model: StepSet, reg: Region, mask: np.ndarray,
                 arith: Arith, box: Tuple[int, int, int, int]) -> np.ndarray:
    """New counts on `box` = (i_lo, i_hi, j_lo, j_hi) in lattice coordinates (inclusive)."""
    R = radius
    il, ih, jl, jh = box
    new = arith.zeros(old.shape)
    if il > ih or jl > jh:
        return new
    a0, a1, b0, b1 = il + R, ih + R + 1, jl + R, jh + R + 1
    steps = sorted(model.steps)
    if arith.mode is Mode.MODULAR:
        p = np.uint64(arith.p)
        acc = None
        pending = 0
        for dx, dy in steps:
            src = old[a0 - dx:a1 - dx, b0 - dy:b1 - dy]
            if acc is None:
                acc = src.copy()
                pending = 1
                continue
            if pending == 4:
                np.remainder(acc, p, out=acc)
                pending = 1
            acc += src
            pending += 1
        np.remainder(acc, p, out=acc)
        new[a0:a1, b0:b1] = acc
    else:
        acc = None
        for dx, dy in steps:
            src = old[a0 - dx:a1 - dx, b0 - dy:b1 - dy]
            acc = src.copy() if acc is None else acc + src
        if arith.mode is Mode.FLOAT:
            acc = acc / len(steps)
        new[a0:a1, b0:b1] = acc
    if reg is Region.THREE_QUADRANT and model.edge_rule is EdgeRule.FORBID:
        # undo the jumps (-1,0) -> (0,-1) and (0,-1) -> (-1,0)
        for (dx, dy), frm, to in (((1, -1), (-1, 0), (0, -1)), ((-1, 1), (0, -1), (-1, 0))):
            if (dx, dy) in model and il <= to[0] <= ih and jl <= to[1] <= jh:
                v = old[frm[0] + R, frm[1] + R]
                if arith.mode is Mode.FLOAT:
                    v = v / len(model)
                cur = new[to[0] + R, to[1] + R]
                if arith.mode is Mode.MODULAR:
                    new[to[0] + R, to[1] + R] = (cur + (p - v)) % p
                else:
                    new[to[0] + R, to[1] + R] = cur - v
    if reg is not Region.FULL_PLANE:
        sub = new[a0:a1, b0:b1]
        sub[~mask[a0:a1, b0:b1]] = 0
    return new


def walk_tables(model: StepSet, reg: Union[Region, str], start: StartDistribution, N: int,
                arith: Arith = EXACT, focus: Optional[Point] = None) -> Iterator[WalkTable]:
    """Yield the tables for n = 0..N.

    With `focus=(i, j)` only cells that can still reach (i, j) by step N are
    computed; the other cells of the yielded tables are left at zero.
    """
    reg = region(reg)
    start.check_region(reg)
    if arith.mode is Mode.MODULAR and start.scale % arith.p == 0:
        raise BadPrime(f"{arith.p} divides the start scale {start.scale}")
    r0 = start.radius
    R = N + r0 + 1
    mask = reg.mask(R)
    table = _initial_table(start, R, arith)
    yield table
    for n in range(1, N + 1):
        reach = n + r0
        box = [-reach, reach, -reach, reach]
        if focus is not None:
            slack = N - n
            box = [max(box[0], focus[0] - slack), min(box[1], focus[0] + slack),
                   max(box[2], focus[1] - slack), min(box[3], focus[1] + slack)]
        counts = _evolve_into(table.counts, R, model, reg, mask, arith, tuple(box))
        table = WalkTable(n, R, counts, arith, start.scale)
        yield table


def evolve(table: WalkTable, model: StepSet, reg: Union[Region, str]) -> WalkTable:
    """One DP step.  The window grows by one when the table is at capacity."""
    reg = region(reg)
    R = table.radius
    counts = table.counts
    reach = table.n + 1
    # widen so that reach + 1 fits
    need = max(reach + 1, R)
    nz = [max(abs(i), abs(j)) for i, j, _ in table.nonzero_cells()] or [0]
    reach = max(reach, max(nz) + 1)
    if reach + 1 > R:
        need = reach + 1
        side = 2 * need + 1
        big = table.arith.zeros((side, side))
        off = need - R
        big[off:off + 2 * R + 1, off:off + 2 * R + 1] = counts
        counts, R = big, need
    mask = reg.mask(R)
    new = _evolve_into(counts, R, model, reg, mask, table.arith, (-reach, reach, -reach, reach))
    return WalkTable(table.n + 1, R, new, table.arith, table.scale)


def tables(model: StepSet, reg: Union[Region, str], start: StartDistribution | Point | None, N: int,
           arith: Arith = EXACT) -> List[WalkTable]:
    if start is None:
        start = StartDistribution.single((0, 0))
    elif not isinstance(start, StartDistribution):
        start = StartDistribution.single(tuple(start))
    return list(walk_tables(model, reg, start, N, arith))


# ---------------------------------------------------------------------------
# sequences

TOTAL = "total"


def count_sequence(model: StepSet, reg: Union[Region, str], start: StartDistribution | Point,
                   end: Union[Point, str], N: int) -> List[int]:
    """Exact scaled counts for n = 0..N ending at `end` (a point or TOTAL)."""
    reg = region(reg)
    if not isinstance(start, StartDistribution):
        start = StartDistribution.single(tuple(start))
    if end != TOTAL and not reg.contains(*end):
        raise EndpointOutsideRegion(f"endpoint {end} is outside {reg.value}")
    focus = None if end == TOTAL else tuple(end)
    out = []
    for tab in walk_tables(model, reg, start, N, EXACT, focus=focus):
        out.append(tab.total() if end == TOTAL else tab.get(*end))
    return out


# ---------------------------------------------------------------------------
# primes and CRT

def _isprime(n: int) -> bool:
    from sympy import isprime
    return isprime(n)


@lru_cache(maxsize=None)
def _largest_primes(k: int, bits: int) -> Tuple[int, ...]:
    from sympy import prevprime
    out = []
    p = 1 << bits
    for _ in range(k):
        p = prevprime(p)
        out.append(p)
    return tuple(out)


def prime_schedule(k: int, bits: int = 62) -> List[int]:
    """The k largest primes below 2^bits, descending; WALKS_PRIME_SCHEDULE overrides."""
    env = os.environ.get("WALKS_PRIME_SCHEDULE")
    if env:
        primes = [int(s) for s in env.replace(" ", "").split(",") if s]
        if len(primes) < k:
            raise InsufficientModulus(f"WALKS_PRIME_SCHEDULE lists {len(primes)} primes, {k} needed")
        return primes[:k]
    return list(_largest_primes(k, bits))


def primes_needed(bound: int, bits: int = 62, balanced: bool = False) -> int:
    """How many schedule primes are needed to exceed `bound` (twice it if balanced)."""
    target = 2 * bound if balanced else bound
    k, prod = 0, 1
    for p in prime_schedule(64 if target.bit_length() < 64 * bits else target.bit_length() // (bits - 1) + 2, bits):
        if prod > target:
            break
        prod *= p
        k += 1
    if prod <= target:
        raise InsufficientModulus("prime schedule too short for the requested bound")
    return k


def validate_primes(primes: Sequence[int], scale: int = 1):
    if len(set(primes)) != len(primes):
        raise BadPrime("primes must be pairwise distinct")
    for p in primes:
        if p >= 1 << 62:
            raise BadPrime(f"{p} is too large for uint64 accumulation (need p < 2^62)")
        if not _isprime(p):
            raise BadPrime(f"{p} is not prime")
        if scale % p == 0:
            raise BadPrime(f"{p} divides the start scale {scale}")


def count_modular(model: StepSet, reg: Union[Region, str], start: StartDistribution | Point, N: int,
                  primes: Sequence[int], focus: Optional[Point] = None) -> Dict[int, Iterator[WalkTable]]:
    """One independent lazy stream of tables per prime."""
    if not isinstance(start, StartDistribution):
        start = StartDistribution.single(tuple(start))
    validate_primes(primes, start.scale)
    return {p: walk_tables(model, reg, start, N, modular(p), focus=focus) for p in primes}


class SignMode(Enum):
    NON_NEGATIVE = "nonnegative"
    BALANCED = "balanced"


def crt_reconstruct(residues: Sequence[int], primes: Sequence[int],
                    sign_mode: SignMode = SignMode.NON_NEGATIVE, bound: Optional[int] = None) -> int:
    M = 1
    for p in primes:
        M *= p
    if bound is not None:
        need = 2 * bound if sign_mode is SignMode.BALANCED else bound
        if need >= M:
            raise InsufficientModulus(f"product of primes ({M.bit_length()} bits) does not exceed the bound")
    x = 0
    for r, p in zip(residues, primes):
        Mp = M // p
        x += (int(r) % p) * Mp * pow(Mp, -1, p)
    x %= M
    if sign_mode is SignMode.BALANCED and x > M // 2:
        x -= M
    return x


def count_sequence_crt(model: StepSet, reg: Union[Region, str], start: StartDistribution | Point,
                       end: Union[Point, str], N: int, primes: Optional[Sequence[int]] = None,
                       threads: int = 1) -> List[int]:
    """count_sequence computed through modular runs and CRT.

    The per-prime runs share nothing; with threads > 1 they run in a thread pool.
    """
    reg = region(reg)
    if not isinstance(start, StartDistribution):
        start = StartDistribution.single(tuple(start))
    if end != TOTAL and not reg.contains(*end):
        raise EndpointOutsideRegion(f"endpoint {end} is outside {reg.value}")
    bound = 3 * len(model) ** N * max(1, sum(abs(w) for _, w in start.scaled()))
    if primes is None:
        primes = prime_schedule(primes_needed(bound, balanced=True))
    focus = None if end == TOTAL else tuple(end)
    streams = count_modular(model, reg, start, N, primes, focus=focus)

    def drain(p):
        return [(t.total() if end == TOTAL else t.get(*end)) for t in streams[p]]

    if threads > 1 and len(primes) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(threads) as pool:
            residues = dict(zip(primes, pool.map(drain, primes)))
    else:
        residues = {p: drain(p) for p in primes}
    return [crt_reconstruct([residues[p][n] for p in primes], primes, SignMode.BALANCED)
            for n in range(N + 1)]


# ---------------------------------------------------------------------------
# series slices

@dataclass(frozen=True)
class PointSeries:
    i: int
    j: int


@dataclass(frozen=True)
class TotalSum:
    pass


@dataclass(frozen=True)
class AxisNegativeX:
    """F_{-,0}(xbar) = sum_{i<0} F_{i,0} x^i, as a Laurent polynomial in x."""


@dataclass(frozen=True)
class AxisNegativeY:
    """F_{0,-}(ybar) = sum_{j<0} F_{0,j} y^j (stored in the x slot)."""


@dataclass(frozen=True)
class QuadrantPart:
    """P(x,y) = sum_{i,j>=0} F_{i,j} x^i y^j."""


@dataclass(frozen=True)
class LeftPart:
    """L(x,y) with xbar L(xbar, y) = sum_{i<0, j>=0} F_{i,j} x^i y^j."""


@dataclass(frozen=True)
class BottomPart:
    """B(x,y) with ybar B(x, ybar) = sum_{i>=0, j<0} F_{i,j} x^i y^j."""


@dataclass(frozen=True)
class EvalAt:
    x0: Fraction
    y0: Fraction


def _slice_value(tab: WalkTable, pattern):
    if isinstance(pattern, PointSeries):
        return tab.get(pattern.i, pattern.j)
    if isinstance(pattern, TotalSum):
        return tab.total()
    cells = list(tab.nonzero_cells())
    if isinstance(pattern, AxisNegativeX):
        return LaurentX({i: v for i, j, v in cells if j == 0 and i < 0})
    if isinstance(pattern, AxisNegativeY):
        return LaurentX({j: v for i, j, v in cells if i == 0 and j < 0})
    if isinstance(pattern, QuadrantPart):
        return LaurentPoly2({(i, j): v for i, j, v in cells if i >= 0 and j >= 0})
    if isinstance(pattern, LeftPart):
        return LaurentPoly2({(-1 - i, j): v for i, j, v in cells if i < 0 and j >= 0})
    if isinstance(pattern, BottomPart):
        return LaurentPoly2({(i, -1 - j): v for i, j, v in cells if i >= 0 and j < 0})
    if isinstance(pattern, EvalAt):
        return sum(v * Fraction(pattern.x0) ** i * Fraction(pattern.y0) ** j for i, j, v in cells)
    raise TypeError(f"unknown slice pattern {pattern!r}")


def series_slice(tabs: Sequence[WalkTable], pattern, unscaled: bool = False) -> TruncatedSeries:
    """Aggregate table n into the coefficient of t^n according to `pattern`."""
    vals = [_slice_value(t, pattern) for t in tabs]
    scale = tabs[0].scale if tabs else 1
    if isinstance(pattern, (AxisNegativeX, AxisNegativeY)):
        ring = LAURENT_X
    elif isinstance(pattern, (QuadrantPart, LeftPart, BottomPart)):
        ring = LAURENT_XY
    else:
        ring = RATIONALS
    if unscaled and scale != 1:
        vals = [v * Fraction(1, scale) for v in vals]
    return TruncatedSeries(vals, len(vals) - 1, ring)
