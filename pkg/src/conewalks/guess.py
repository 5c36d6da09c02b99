"""Guessing polynomial equations P(t, F) = 0 from coefficient sequences.

The unknowns are the coefficients c_{a,b} of t^a F^b (a <= dt, b <= dF).
Each known coefficient of F gives one linear equation, and a candidate is
a nullspace vector of that system.  Columns are ordered by (b, a), and
elimination stops at the first free column: the nullspace vector attached
to it has the smallest leading monomial, so the answer is deterministic.

Two arithmetic back ends:

* exact rationals (Fraction), for small systems;
* residues modulo a prime p < 2^62, in numpy uint64 arrays.  Products of
  two residues are reduced with a quotient estimated in extended precision
  (64-bit mantissa), then corrected, which keeps everything in 64 bits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .enumeration import crt_reconstruct, SignMode, prime_schedule, validate_primes
from .errors import BadPrime, NoCandidate, SequenceTooShort

Key = Tuple[int, int]          # (a, b): t^a F^b

LADDER_DF = (2, 4, 8, 12, 24)
LADDER_DT_RATIO = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5, 2))


def default_margin(use_terms: int) -> int:
    return max(10, math.ceil(0.2 * use_terms))


@dataclass
class GuessSpec:
    sequence: Sequence
    dF: int
    dt: int
    use_terms: Optional[int] = None
    margin_terms: Optional[int] = None
    prime: Optional[int] = None          # None: exact rationals

    def __post_init__(self):
        unknowns = (self.dF + 1) * (self.dt + 1)
        if self.use_terms is None:
            self.use_terms = unknowns + 5
        if self.margin_terms is None:
            self.margin_terms = default_margin(self.use_terms)
        if self.use_terms < unknowns:
            raise ValueError(f"use_terms={self.use_terms} is below the {unknowns} unknowns")
        if self.margin_terms < math.ceil(0.2 * self.use_terms):
            raise ValueError("margin_terms must be at least 20% of use_terms")
        if len(self.sequence) < self.use_terms + self.margin_terms:
            raise SequenceTooShort(
                f"need {self.use_terms + self.margin_terms} terms, got {len(self.sequence)}")
        if self.prime is not None:
            validate_primes([self.prime])


@dataclass
class CandidateEquation:
    coeffs: Dict[Key, object]
    dF: int
    dt: int
    prime: Optional[int] = None

    @property
    def n_terms(self) -> int:
        return sum(1 for c in self.coeffs.values() if c)

    @property
    def degree_F(self) -> int:
        return max(b for (a, b), c in self.coeffs.items() if c)

    @property
    def degree_t(self) -> int:
        return max(a for (a, b), c in self.coeffs.items() if c)

    def to_json(self) -> str:
        items = [[[a, b], str(c)] for (a, b), c in sorted(self.coeffs.items(), key=lambda kv: (kv[0][1], kv[0][0])) if c]
        return json.dumps({"dF": self.dF, "dt": self.dt, "prime": self.prime, "terms": items})

    @classmethod
    def from_json(cls, text: str) -> "CandidateEquation":
        d = json.loads(text)
        p = d["prime"]
        conv = int if p is not None else Fraction
        return cls({(a, b): conv(c) for (a, b), c in d["terms"]}, d["dF"], d["dt"], p)

    def substitute_square(self) -> "CandidateEquation":
        """P(t, G) with G = F^2, rewritten as a polynomial in F."""
        return CandidateEquation({(a, 2 * b): c for (a, b), c in self.coeffs.items()},
                                 2 * self.dF, self.dt, self.prime)


# ---------------------------------------------------------------------------
# arithmetic mod p

def mulmod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a * b) mod p elementwise for uint64 residues, p < 2^62."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    pl = np.longdouble(p)
    q = np.floor(a.astype(np.longdouble) * b.astype(np.longdouble) / pl).astype(np.uint64)
    with np.errstate(over="ignore"):
        r = (a * b - q * np.uint64(p)).view(np.int64)
    r = np.where(r < 0, r + np.int64(p), r)
    r = np.where(r >= p, r - np.int64(p), r)
    return r.astype(np.uint64)


def _to_residue(c, p: int) -> int:
    if isinstance(c, Fraction):
        return c.numerator % p * pow(c.denominator % p, -1, p) % p
    return int(c) % p


def series_mul_mod(f: Sequence[int], g: Sequence[int], L: int, p: int) -> List[int]:
    """Truncated product mod p, by Kronecker substitution into one big integer product."""
    bits = 2 * p.bit_length() + L.bit_length() + 1
    def pack(s):
        return int.from_bytes(b"".join(int(c).to_bytes((bits + 7) // 8, "little") for c in s[:L]), "little")
    width = (bits + 7) // 8
    prod = pack(f) * pack(g)
    raw = prod.to_bytes(width * (2 * L + 1), "little")
    return [int.from_bytes(raw[k * width:(k + 1) * width], "little") % p for k in range(L)]


def series_mul_exact(f: Sequence, g: Sequence, L: int) -> List:
    out = [0] * L
    for i, a in enumerate(f[:L]):
        if a:
            for j in range(min(L - i, len(g))):
                out[i + j] += a * g[j]
    return out


def _powers(F: Sequence, dF: int, L: int, p: Optional[int]) -> List[List]:
    if p is None:
        F = [Fraction(c) for c in F[:L]]
        pw = [[Fraction(1)] + [Fraction(0)] * (L - 1)]
        for _ in range(dF):
            pw.append(series_mul_exact(pw[-1], F, L))
        return pw
    F = [_to_residue(c, p) for c in F[:L]]
    pw = [[1] + [0] * (L - 1)]
    for _ in range(dF):
        pw.append(series_mul_mod(pw[-1], F, L, p))
    return pw


def _columns(dF: int, dt: int) -> List[Key]:
    return [(a, b) for b in range(dF + 1) for a in range(dt + 1)]


def build_matrix(F: Sequence, dF: int, dt: int, rows: int, p: Optional[int]):
    """rows x columns; entry (n, (a,b)) = [t^(n-a)] F^b."""
    cols = _columns(dF, dt)
    pw = _powers(F, dF, rows, p)
    if p is None:
        return [[(pw[b][n - a] if n >= a else 0) for (a, b) in cols] for n in range(rows)], cols
    M = np.zeros((rows, len(cols)), dtype=np.uint64)
    for k, (a, b) in enumerate(cols):
        if a < rows:
            M[a:, k] = np.array(pw[b][:rows - a], dtype=np.uint64)
    return M, cols


# ---------------------------------------------------------------------------
# elimination: first free column and its nullspace vector

def _first_null_exact(M: List[List], ncols: int) -> Optional[List[Fraction]]:
    A = [[Fraction(v) for v in row] for row in M]
    pivots: List[Tuple[int, List[Fraction]]] = []
    r0 = 0
    for c in range(ncols):
        r = next((k for k in range(r0, len(A)) if A[k][c] != 0), None)
        if r is None:
            return _back_substitute_exact(pivots, c, ncols)
        A[r0], A[r] = A[r], A[r0]
        inv = 1 / A[r0][c]
        piv = A[r0] = [v * inv for v in A[r0]]
        for k in range(r0 + 1, len(A)):
            f = A[k][c]
            if f:
                A[k] = [x - f * y for x, y in zip(A[k], piv)]
        pivots.append((c, piv))
        r0 += 1
    return None


def _back_substitute_exact(pivots, free: int, ncols: int) -> List[Fraction]:
    x = [Fraction(0)] * ncols
    x[free] = Fraction(1)
    for c, row in reversed(pivots):
        x[c] = -sum(row[k] * x[k] for k in range(c + 1, free + 1))
    return x


def _first_null_mod(M: np.ndarray, p: int) -> Optional[np.ndarray]:
    A = M.copy()
    nrows, ncols = A.shape
    pivot_rows: List[int] = []
    pivot_cols: List[int] = []
    r0 = 0
    for c in range(ncols):
        nz = np.nonzero(A[r0:, c])[0] if r0 < nrows else np.array([], dtype=int)
        if nz.size == 0:
            return _back_substitute_mod(A, pivot_rows, pivot_cols, c, p)
        r = r0 + int(nz[0])
        if r != r0:
            A[[r0, r]] = A[[r, r0]]
        inv = pow(int(A[r0, c]), -1, p)
        A[r0, c:] = mulmod(A[r0, c:], np.uint64(inv), p)
        below = A[r0 + 1:, c].copy()
        rows = np.nonzero(below)[0] + r0 + 1
        if rows.size:
            f = A[rows, c]
            sub = mulmod(f[:, None], A[r0, c:][None, :], p)
            A[rows, c:] = np.where(A[rows, c:] >= sub, A[rows, c:] - sub, A[rows, c:] + (np.uint64(p) - sub))
        pivot_rows.append(r0)
        pivot_cols.append(c)
        r0 += 1
    return None


def _back_substitute_mod(A: np.ndarray, prows, pcols, free: int, p: int) -> np.ndarray:
    x = [0] * A.shape[1]
    x[free] = 1
    for r, c in reversed(list(zip(prows, pcols))):
        s = 0
        for k in range(c + 1, free + 1):
            if x[k]:
                s += int(A[r, k]) * x[k]
        x[c] = (-s) % p
    return np.array(x, dtype=object)


# ---------------------------------------------------------------------------
# public API

def _normalize(coeffs: Dict[Key, object], p: Optional[int]) -> Dict[Key, object]:
    nz = {k: c for k, c in coeffs.items() if c}
    lead = max(nz, key=lambda k: (k[1], k[0]))
    if p is not None:
        inv = pow(int(nz[lead]), -1, p)
        return {k: int(c) * inv % p for k, c in nz.items()}
    den = 1
    for c in nz.values():
        den = den * Fraction(c).denominator // math.gcd(den, Fraction(c).denominator)
    ints = {k: int(Fraction(c) * den) for k, c in nz.items()}
    g = 0
    for v in ints.values():
        g = math.gcd(g, v)
    sign = 1 if ints[lead] > 0 else -1
    return {k: sign * v // g for k, v in ints.items()}


def evaluate_candidate(cand: CandidateEquation, F: Sequence, L: Optional[int] = None) -> List:
    """Coefficients of P(t, F(t)) up to t^(L-1)."""
    L = len(F) if L is None else L
    p = cand.prime
    pw = _powers(F, cand.degree_F, L, p)
    out = [0] * L
    for (a, b), c in cand.coeffs.items():
        if not c:
            continue
        for n in range(a, L):
            out[n] += c * pw[b][n - a]
    if p is not None:
        out = [v % p for v in out]
    return out


def verify_candidate(cand: CandidateEquation, sequence: Sequence) -> bool:
    """True iff P(t, F) vanishes on every supplied term."""
    return not any(evaluate_candidate(cand, sequence))


def guess_algebraic(spec: GuessSpec) -> CandidateEquation:
    """Lowest-degree P(t, F) with P(t, F) = O(t^use_terms), checked on the margin."""
    F = list(spec.sequence)
    p = spec.prime
    M, cols = build_matrix(F, spec.dF, spec.dt, spec.use_terms, p)
    if p is None:
        x = _first_null_exact(M, len(cols))
    else:
        x = _first_null_mod(M, p)
    if x is None:
        raise NoCandidate(f"no relation of degree ({spec.dF}, {spec.dt})")
    coeffs = {k: (int(v) if p is not None else v) for k, v in zip(cols, x) if v}
    cand = CandidateEquation(_normalize(coeffs, p), spec.dF, spec.dt, p)
    if not verify_candidate(cand, F[:spec.use_terms + spec.margin_terms]):
        raise NoCandidate("the candidate fails on the margin terms")
    return cand


def guess_square(spec: GuessSpec) -> CandidateEquation:
    """Guess an equation for F^2 and return it as an equation in F (even in F)."""
    L = len(spec.sequence)
    if spec.prime is None:
        sq = series_mul_exact([Fraction(c) for c in spec.sequence], [Fraction(c) for c in spec.sequence], L)
    else:
        r = [_to_residue(c, spec.prime) for c in spec.sequence]
        sq = series_mul_mod(r, r, L, spec.prime)
    sub = GuessSpec(sq, spec.dF, spec.dt, spec.use_terms, spec.margin_terms, spec.prime)
    return guess_algebraic(sub).substitute_square()


def guess_ladder(sequence: Sequence, prime: Optional[int] = None, dF_values=LADDER_DF,
                 dt_ratios=LADDER_DT_RATIO, try_square: bool = False) -> CandidateEquation:
    """Try increasing degree bounds until a candidate survives its margin."""
    n = len(sequence)
    for dF in dF_values:
        for ratio in dt_ratios:
            dt = max(1, int(dF * ratio))
            use = (dF + 1) * (dt + 1) + 5
            if use + default_margin(use) > n:
                continue
            attempts = [guess_algebraic]
            if try_square:
                attempts.insert(0, guess_square)
            for fn in attempts:
                try:
                    return fn(GuessSpec(sequence, dF, dt, use, None, prime))
                except NoCandidate:
                    pass
    raise NoCandidate("no candidate within the degree ladder")


def reconstruct_rational(candidates: Sequence[CandidateEquation]) -> CandidateEquation:
    """Combine the same candidate guessed modulo several primes into an integer polynomial."""
    primes = [c.prime for c in candidates]
    keys = set()
    for c in candidates:
        keys |= set(c.coeffs)
    for c in candidates[1:]:
        if set(c.coeffs) != set(candidates[0].coeffs):
            raise NoCandidate("candidates modulo different primes have different supports")
    M = math.prod(primes)
    out = {}
    for k in keys:
        res = [c.coeffs[k] for c in candidates]
        x = crt_reconstruct(res, primes, SignMode.NON_NEGATIVE, None)
        out[k] = rational_reconstruct(int(x), M)
    c0 = candidates[0]
    return CandidateEquation(_normalize(out, None), c0.dF, c0.dt, None)


def rational_reconstruct(a: int, m: int) -> Fraction:
    """The fraction r/s with |r|, s <= sqrt(m/2) and r = a s mod m."""
    bound = math.isqrt(m // 2)
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        raise NoCandidate("rational reconstruction failed")
    return Fraction(r1, s1)


def guess_multi_prime(sequence: Sequence[int], dF: int, dt: int, k: int = 2,
                      use_terms: Optional[int] = None) -> CandidateEquation:
    """Guess modulo k primes independently and reconstruct an integer equation."""
    cands = [guess_algebraic(GuessSpec(sequence, dF, dt, use_terms, None, p)) for p in prime_schedule(k)]
    cand = reconstruct_rational(cands)
    if not verify_candidate(cand, [Fraction(c) for c in sequence]):
        raise NoCandidate("the reconstructed equation fails over the rationals")
    return cand
