"""End-to-end acceptance checks, one function per criterion.

Each check returns a CriterionResult; ``run_suite`` runs them in order and
prints one pass/fail line per criterion.  The time budgets are part of the
criteria and are enforced here.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from .enumeration import (EXACT, Region, StartDistribution, a_start, count_sequence, modular,
                          prime_schedule, tables as dp_tables, walk_tables)
from .laurent import LaurentPoly2
from .model import (WEYL_MODELS, build_group, builtin, orbit_sum, step_polynomial)

# time budgets in seconds
BUDGET = {"1": 5, "2": 30, "3": 60, "4": 120, "5": 300, "6": 120, "7": 120, "8": 60,
          "9a": 1, "9b": 1200, "10": 600, "11": 120}

ENDPOINT_PREFIX = (1, 2, 17, 80, 536)
ENDPOINT_ORDER = 60
QUADRANT_ORDER = 20
FUNCTIONAL_ORDER = 15
ORBIT_ORDER = 12
REFLECTION_STARTS = ((0, 0), (-1, 0), (-2, 0), (0, -3))
REFLECTION_BOX = 12
REFLECTION_ORDER = 24
KERNEL_ORDER = 18
KERNEL_MIN_CERTIFIED = 16
S_ZETA_PREFIX = (0, 0, -1, 0, -11, -30)
CLOSED_ORDER = 30
STILDE_ORDER = 25
STILDE_POINT = 2
GUESS_TERMS = 1200
GUESS_USE, GUESS_MARGIN = 960, 240
GUESS_DEGREES = (24, 36)
GUESS_N_TERMS = 323
ASYMPTOTIC_ORDER = 1000
TOL_TOTAL, TOL_ORIGIN = 0.01, 0.03
ROOT_DIGITS = 30
MUTATION_TRIALS = 20
MUTATION_ORDER = 10
MUTATION_SEED = 20240601


@dataclass
class CriterionResult:
    id: str
    title: str
    passed: bool
    seconds: float
    detail: str = ""

    @property
    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.id}: {self.title} ({self.seconds:.1f}s) {self.detail}".rstrip()


def _timed(cid: str, title: str, fn: Callable[[], tuple]) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:          # a crash is a failure, reported with its message
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t0
    if ok and dt > BUDGET[cid]:
        ok, detail = False, f"over budget ({dt:.1f}s > {BUDGET[cid]}s); " + detail
    return CriterionResult(cid, title, ok, dt, detail)


# ---------------------------------------------------------------------------
# 1

def endpoint_series() -> tuple:
    from .closedform import closed_endpoint_series
    seq = count_sequence(builtin("king"), "three-quadrant", (0, 0), (-1, 0), ENDPOINT_ORDER)
    if tuple(seq[1:6]) != ENDPOINT_PREFIX:
        return False, f"prefix {seq[1:6]}"
    closed = closed_endpoint_series("C-1,0", ENDPOINT_ORDER).coeffs
    bad = [n for n in range(ENDPOINT_ORDER + 1) if closed[n] != seq[n]]
    return not bad, f"n<={ENDPOINT_ORDER}" + (f", first mismatch n={bad[0]}" if bad else "")


# ---------------------------------------------------------------------------
# 2

def quadrant_from_orbit_sum(model_name: str = "king", N: int = QUADRANT_ORDER) -> List[Dict]:
    """Q_{i,j}(n) as the coefficient of x^(i+1) y^(j+1) t^n in [x^> y^>] OS(xy)/K."""
    model = builtin(model_name)
    S = step_polynomial(model)
    F = orbit_sum(build_group(model))
    out = []
    for n in range(N + 1):
        pos = F.part("pos", "pos")
        out.append({(i - 1, j - 1): c for (i, j), c in pos.terms.items() if c})
        F = F * S
    return out


def quadrant_cross_check() -> tuple:
    king = builtin("king")
    Q = dp_tables(king, Region.QUADRANT, (0, 0), QUADRANT_ORDER)
    pred = quadrant_from_orbit_sum("king", QUADRANT_ORDER)
    for n, (tab, cells) in enumerate(zip(Q, pred)):
        dp = {(i, j): v for i, j, v in tab.nonzero_cells()}
        if dp != cells:
            return False, f"mismatch at n={n}"
    return True, f"n<={QUADRANT_ORDER}, all cells"


# ---------------------------------------------------------------------------
# 3 and 4

def functional_checks(N: int = FUNCTIONAL_ORDER, tables=None) -> list:
    from .verify import check_functional_equation
    return [check_functional_equation(k, "king", N, tables=tables) for k in ("C", "Q", "A", "M")]


def functional_equations() -> tuple:
    res = functional_checks()
    bad = [r.id for r in res if not r.passed]
    return not bad, f"king, order {FUNCTIONAL_ORDER}" + (f", failing {bad}" if bad else "")


def orbit_sum_checks(model: str, N: int = ORBIT_ORDER, tables=None) -> list:
    from .verify import check_orbit_sum
    return [check_orbit_sum(k, model, N, tables=tables) for k in ("C", "Q")]


def orbit_sums() -> tuple:
    bad = [f"{r.model}:{r.id}" for m in WEYL_MODELS for r in orbit_sum_checks(m) if not r.passed]
    return not bad, f"7 Weyl models, order {ORBIT_ORDER}" + (f", failing {bad}" if bad else "")


# ---------------------------------------------------------------------------
# 5

def edge_rules(model_name: str) -> List[str]:
    """Edge rules that give different counts: only models with a diagonal jump step."""
    steps = builtin(model_name).steps
    return ["forbid", "allow"] if ((1, -1) in steps or (-1, 1) in steps) else ["forbid"]


def reflection_identities() -> tuple:
    from .verify import check_reflection, reflection_terms
    bad, runs = [], 0
    for m in WEYL_MODELS:
        for rule in edge_rules(m):
            for st in REFLECTION_STARTS:
                chk = check_reflection(m, st, REFLECTION_ORDER, REFLECTION_BOX, rule)
                runs += 1
                if not chk.passed:
                    bad.append(f"{m}/{rule}@{st}")
    terms = reflection_terms("king", (0, 0), 2, (0, 0))
    desk = (terms.get("C(0, 0)"), -terms.get("C(-2, 0)", 0), -terms.get("C(0, -2)", 0),
            terms.get("Q(0, 0)"))
    if desk != (7, 2, 2, 3):
        bad.append(f"desk instance {desk}")
    return not bad, f"{runs} runs, 7 = 2 + 2 + 3" + (f", failing {bad}" if bad else "")


# ---------------------------------------------------------------------------
# 6

KERNEL_IDENTITIES = ("three-term-sqrt", "shat-rhat", "quadratic", "cubic (enumeration scalars, symbolic x)")


def kernel_reports(N: int = KERNEL_ORDER, tables=None) -> list:
    from .kernel import run_all
    return run_all(N, tables)


def kernel_pipeline() -> tuple:
    from .kernel import build_context, run_all
    ctx = build_context(KERNEL_ORDER)
    reps = {r.identity: r for r in run_all(KERNEL_ORDER, ctx.tables)}
    bad = [k for k in KERNEL_IDENTITIES
           if not reps[k].ok or reps[k].certified_order < KERNEL_MIN_CERTIFIED]
    bad += [r.identity for r in reps.values() if not r.ok and r.identity not in bad]
    sz = []
    for c in ctx.S_at_zeta.coeffs[:len(S_ZETA_PREFIX)]:
        re, im = c.real_imag()
        sz.append(re if im == 0 else None)
    if tuple(sz) != S_ZETA_PREFIX:
        bad.append(f"S(zeta) prefix {sz}")
    cert = min(reps[k].certified_order for k in KERNEL_IDENTITIES)
    return not bad, f"certified order {cert}" + (f", failing {bad}" if bad else "")


# ---------------------------------------------------------------------------
# 7

def enumeration_series(N: int = CLOSED_ORDER) -> Dict[str, list]:
    """The closed-form targets read off king enumeration data."""
    from .kernel import build_context
    ctx = build_context(N)
    tabs, sc = ctx.tables, ctx.tables[0].scale
    variant = dp_tables(builtin("king", "allow"), Region.THREE_QUADRANT, (0, 0), N)
    return {
        "R0": ctx.R0.coeffs, "R1": ctx.R1.coeffs, "B1": ctx.B1.coeffs, "B2": ctx.B2.coeffs,
        "M10": [Fraction(t.get(-2, 0), sc) for t in tabs],
        "R_at_1": [c.evaluate(1) for c in ctx.R.coeffs],
        "S_at_1": [c.evaluate(1) for c in ctx.S.coeffs],
        "A11": [Fraction(t.total(), sc) for t in tabs],
        "A00": [Fraction(t.get(0, 0), sc) for t in tabs],
        # variant R0 = t^2 C_{-1,0}
        "variant_R0": [0, 0] + [t.get(-1, 0) for t in variant],
    }


def closed_forms() -> tuple:
    from .closedform import Tower
    T = Tower(CLOSED_ORDER)
    bad = []
    for name, seq in enumeration_series().items():
        closed = T.named(name).coeffs
        if [Fraction(c) for c in seq[:CLOSED_ORDER + 1]] != [Fraction(c) for c in closed[:CLOSED_ORDER + 1]]:
            bad.append(name)
    return not bad, f"10 series to order {CLOSED_ORDER}" + (f", failing {bad}" if bad else "")


# ---------------------------------------------------------------------------
# 8

def stilde_spot_check() -> tuple:
    from .closedform import closed_Stilde_at
    from .kernel import Stilde_at, build_context
    ctx = build_context(STILDE_ORDER)
    enum = Stilde_at(ctx, Fraction(STILDE_POINT)).coeffs[:STILDE_ORDER + 1]
    closed = closed_Stilde_at(Fraction(STILDE_POINT), STILDE_ORDER).coeffs[:STILDE_ORDER + 1]
    ok = [Fraction(c) for c in enum] == [Fraction(c) for c in closed]
    return ok, f"x0={STILDE_POINT}, order {STILDE_ORDER}"


# ---------------------------------------------------------------------------
# 9

def catalan(n: int) -> List[int]:
    out, c = [], 1
    for k in range(n):
        out.append(c)
        c = c * 2 * (2 * k + 1) // (k + 2)
    return out


CATALAN_EQ = {(1, 2): 1, (0, 1): -1, (0, 0): 1}
U_EQ = {(2, 4): 27, (1, 4): 27, (2, 2): -18, (1, 2): -18, (2, 1): 8, (0, 1): 1, (2, 0): -1, (1, 0): -1}


def guessing_small() -> tuple:
    from .closedform import Tower
    from .guess import GuessSpec, guess_algebraic
    cat = guess_algebraic(GuessSpec(catalan(30), 2, 1))
    u = Tower(40).u.coeffs
    cu = guess_algebraic(GuessSpec([Fraction(c) for c in u[:40]], 4, 2))
    ok = _same_up_to_scale(cat.coeffs, CATALAN_EQ) and _same_up_to_scale(cu.coeffs, U_EQ)
    return ok, f"Catalan {cat.n_terms} terms, u {cu.n_terms} terms"


def _same_up_to_scale(a: Dict, b: Dict) -> bool:
    a = {k: Fraction(v) for k, v in a.items() if v}
    if set(a) != set(b):
        return False
    k0 = next(iter(b))
    r = a[k0] / b[k0]
    return all(a[k] == r * b[k] for k in b)


def r0_modular_sequence(L: int = GUESS_TERMS, p: Optional[int] = None) -> tuple:
    """R0 = t^2 A_{-1,0} modulo p, first L coefficients."""
    king = builtin("king")
    p = p or prime_schedule(1)[0]
    start = a_start(build_group(king))
    inv = pow(start.scale, -1, p)
    seq = [0, 0] + [t.get(-1, 0) * inv % p
                    for t in walk_tables(king, "three-quadrant", start, L - 3, modular(p), focus=(-1, 0))]
    return seq, p


def guessing_extended() -> tuple:
    from .guess import GuessSpec, guess_algebraic
    seq, p = r0_modular_sequence()
    cand = guess_algebraic(GuessSpec(seq, *GUESS_DEGREES, use_terms=GUESS_USE,
                                     margin_terms=GUESS_MARGIN, prime=p))
    shape = (cand.degree_F, cand.degree_t, cand.n_terms)
    return shape == (*GUESS_DEGREES, GUESS_N_TERMS), f"(dF, dt, terms) = {shape}"


# ---------------------------------------------------------------------------
# 10

def asymptotics_check(N: int = ASYMPTOTIC_ORDER) -> tuple:
    from . import asymptotics as asy
    roots_ok = all(float(asy.root(c).width) < 10.0 ** -ROOT_DIGITS for c in (asy.K_CUBIC, asy.L_CUBIC))
    cross = asy.cross_check(20)
    res = asy.fit_against_prediction(N)
    et, eo = res["total"]["relative_error"], res["origin"]["relative_error"]
    ok = roots_ok and all(cross.values()) and et < TOL_TOTAL and eo < TOL_ORIGIN
    return ok, f"total {et:.2e}, origin {eo:.2e}, roots {'ok' if roots_ok else 'WIDE'}, cross-check {cross}"


# ---------------------------------------------------------------------------
# 11

def _cone_cells(n: int) -> List[tuple]:
    return [(i, j) for i in range(-n, n + 1) for j in range(-n, n + 1) if i >= 0 or j >= 0]


def _quadrant_cells(n: int) -> List[tuple]:
    return [(i, j) for i in range(n + 1) for j in range(n + 1)]


def _orbit_visible(G, i: int, j: int) -> bool:
    """Whether a unit at (i, j) changes the orbit sum (cells on walls cancel)."""
    return not orbit_sum(G, i, j).is_zero()


def mutation_trials(trials: int = MUTATION_TRIALS, seed: int = MUTATION_SEED) -> Dict[str, List[bool]]:
    """For each of criteria 3-6: whether the perturbed data made the checks fail."""
    from .kernel import build_context, kernel_cells, perturbed_tables, run_all
    from .verify import TableSet, check_reflection
    rng = random.Random(seed)
    N = MUTATION_ORDER
    out: Dict[str, List[bool]] = {"3": [], "4": [], "5": [], "6": []}
    king = TableSet(builtin("king"), N)

    for _ in range(trials):
        kind = rng.choice(["C", "Q", "A"])
        n = rng.randint(1, N)
        i, j = rng.choice(_quadrant_cells(n) if kind == "Q" else _cone_cells(n))
        delta = rng.choice([-1, 1]) * (king.get(kind)[0].scale)
        mut = king.mutated(kind, n, i, j, delta)
        out["3"].append(not all(r.passed for r in functional_checks(N, mut)))

    for _ in range(trials):
        m = rng.choice(WEYL_MODELS)
        ts = TableSet(builtin(m), N)
        kind = rng.choice(["C", "Q"])
        n = rng.randint(1, N)
        G = ts.group
        cells = [c for c in (_quadrant_cells(n) if kind == "Q" else _cone_cells(n)) if _orbit_visible(G, *c)]
        i, j = rng.choice(cells)
        mut = ts.mutated(kind, n, i, j, rng.choice([-1, 1]))
        out["4"].append(not all(r.passed for r in orbit_sum_checks(m, N, mut)))

    for _ in range(trials):
        m = rng.choice(WEYL_MODELS)
        st = rng.choice(REFLECTION_STARTS)
        model = builtin(m)
        G = build_group(model)
        C = dp_tables(model, Region.THREE_QUADRANT, StartDistribution.single(st), N)
        n = rng.randint(1, N)
        tab = C[n].copy()
        R = tab.radius
        read = [g.affine(a, b) for g in G.elements if g != G.omega
                for a in range(REFLECTION_BOX + 1) for b in range(REFLECTION_BOX + 1)]
        i, j = rng.choice([(i, j) for i, j in read if abs(i) <= R and abs(j) <= R])
        tab.counts[i + R, j + R] += rng.choice([-1, 1])
        C = list(C)
        C[n] = tab
        out["5"].append(not check_reflection(model, st, N, REFLECTION_BOX, c_tables=C).passed)

    KN = 12
    base = build_context(KN).tables
    cells = kernel_cells(KN)
    for _ in range(trials):
        n, i, j = rng.choice(cells)
        reps = run_all(KN, perturbed_tables(base, n, i, j, rng.choice([-1, 1])))
        out["6"].append(not all(r.ok for r in reps))
    return out


def mutation_sensitivity() -> tuple:
    res = mutation_trials()
    caught = {k: sum(v) for k, v in res.items()}
    ok = all(c == MUTATION_TRIALS for c in caught.values())
    return ok, "caught " + ", ".join(f"c{k}: {v}/{MUTATION_TRIALS}" for k, v in caught.items())


# ---------------------------------------------------------------------------

CRITERIA = [
    ("1", "endpoint series C_{-1,0}", endpoint_series),
    ("2", "quadrant counts from the orbit sum", quadrant_cross_check),
    ("3", "functional equations (king)", functional_equations),
    ("4", "orbit sums (Weyl models)", orbit_sums),
    ("5", "reflection identities", reflection_identities),
    ("6", "kernel pipeline", kernel_pipeline),
    ("7", "closed forms vs enumeration", closed_forms),
    ("8", "S~(2) spot check", stilde_spot_check),
    ("9a", "guessing at tiny degree bounds", guessing_small),
    ("9b", "guessing R0 at (24, 36)", guessing_extended),
    ("10", "asymptotic constants", asymptotics_check),
    ("11", "mutation sensitivity", mutation_sensitivity),
]
SLOW = {"9b"}


def run_criterion(cid: str) -> CriterionResult:
    for c, title, fn in CRITERIA:
        if c == cid:
            return _timed(c, title, fn)
    raise KeyError(cid)


def run_suite(include_slow: bool = False, only: Optional[List[str]] = None,
              echo: Callable[[str], None] = print) -> List[CriterionResult]:
    out = []
    for cid, title, fn in CRITERIA:
        if only is not None and cid not in only:
            continue
        if cid in SLOW and not include_slow and only is None:
            echo(f"[SKIP] criterion {cid}: {title} (slow; pass --slow)")
            continue
        r = _timed(cid, title, fn)
        echo(r.line)
        out.append(r)
    return out
