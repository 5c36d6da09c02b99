"""Exact identity checks on enumeration tables.

Every check works cell by cell at each length n: a residual dictionary
{(i, j): value} is built from the tables and must be empty.  Series with
rational weights (A and M) are handled through their integer-scaled tables,
so each equation is multiplied by the common scale 2d - 1 and all arithmetic
stays in Python ints.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from .enumeration import Region, StartDistribution, WalkTable, a_start, tables as dp_tables
from .errors import NonMonomialGroup, StartOutsideC, WalksError
from .model import EdgeRule, Group, GroupElement, GroupKind, StepSet, build_group, builtin

Cells = Dict[Tuple[int, int], int]
Point = Tuple[int, int]

IDENTITIES = ("functional-C", "functional-Q", "functional-A", "functional-M", "orbit-sum-C",
              "orbit-sum-Q", "decomposition", "pm-relations", "reflection")


@dataclass
class IdentityCheck:
    id: str
    model: str
    region: str
    order: int
    window: int
    passed: bool = True
    first_failure: Optional[Dict[str, int]] = None
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> str:
        d = asdict(self)
        d["status"] = self.status
        del d["passed"]
        return json.dumps(d)


# ---------------------------------------------------------------------------
# cell dictionaries

def cells(tab: WalkTable) -> Cells:
    return {(i, j): v for i, j, v in tab.nonzero_cells()}


def _add(out: Cells, key: Point, v: int):
    if v:
        w = out.get(key, 0) + v
        if w:
            out[key] = w
        else:
            out.pop(key, None)


def _acc(out: Cells, src: Cells, coef: int = 1, shift: Point = (0, 0)):
    for (i, j), v in src.items():
        _add(out, (i + shift[0], j + shift[1]), coef * v)


def _times_steps(src: Cells, steps: Iterable[Point]) -> Cells:
    out: Cells = {}
    for s in steps:
        _acc(out, src, 1, s)
    return out


def _transform(src: Cells, g: GroupElement, pre: Point = (0, 0), post: Point = (0, 0)) -> Cells:
    """post-monomial * g(pre-monomial * F), on cells (coefficients of g must be integers)."""
    out: Cells = {}
    for (i, j), v in src.items():
        a, b = i + pre[0], j + pre[1]
        c = g.coefficient(a, b)
        if c != int(c):
            raise NonMonomialGroup("group image with a non-integer coefficient")
        k, l = g.apply_exponent(a, b)
        _add(out, (k + post[0], l + post[1]), int(c) * v)
    return out


def _first_failure(residual: Cells, n: int, W: int) -> Optional[Dict[str, int]]:
    bad = sorted(k for k in residual if abs(k[0]) <= W and abs(k[1]) <= W)
    if not bad:
        return None
    i, j = bad[0]
    return {"n": n, "i": i, "j": j, "delta": residual[(i, j)]}


# ---------------------------------------------------------------------------
# table sets (lazy, shareable, mutable for sensitivity tests)

class TableSet:
    """C, Q and A tables of one model up to length N, built on demand."""

    def __init__(self, model: StepSet, N: int):
        self.model = model
        self.N = N
        self._cache: Dict[str, List[WalkTable]] = {}

    @property
    def group(self) -> Group:
        return build_group(self.model)

    def get(self, kind: str) -> List[WalkTable]:
        if kind not in self._cache:
            if kind == "C":
                self._cache[kind] = dp_tables(self.model, Region.THREE_QUADRANT, (0, 0), self.N)
            elif kind == "Q":
                self._cache[kind] = dp_tables(self.model, Region.QUADRANT, (0, 0), self.N)
            elif kind == "A":
                self._cache[kind] = dp_tables(self.model, Region.THREE_QUADRANT, a_start(self.group), self.N)
            else:
                raise KeyError(kind)
        return self._cache[kind]

    def mutated(self, kind: str, n: int, i: int, j: int, delta: int = 1) -> "TableSet":
        """A copy in which one cell of one table is changed by delta (scaled units)."""
        other = TableSet(self.model, self.N)
        other._cache = {k: list(v) for k, v in self._cache.items()}
        tabs = list(self.get(kind))
        tab = tabs[n].copy()
        R = tab.radius
        tab.counts[i + R, j + R] = tab.counts[i + R, j + R] + delta
        tabs[n] = tab
        other._cache[kind] = tabs
        return other


def _tableset(model: Union[str, StepSet], N: int, ts: Optional[TableSet]) -> TableSet:
    if ts is not None:
        return ts
    if isinstance(model, str):
        model = builtin(model)
    return TableSet(model, N)


def _run(ident: str, ts: TableSet, region: str, N: int, W: Optional[int],
         residual_at: Callable[[int], Cells]) -> IdentityCheck:
    W = ts.N + 4 if W is None else W
    chk = IdentityCheck(ident, ts.model.name or "custom", region, N, W)
    for n in range(N + 1):
        fail = _first_failure(residual_at(n), n, W)
        if fail:
            chk.passed = False
            chk.first_failure = fail
            break
    return chk


# ---------------------------------------------------------------------------
# functional equations

def _kernel_residual(model: StepSet, cur: Cells, prev: Optional[Cells]) -> Cells:
    """F_n - S(x,y) F_{n-1}."""
    out = dict(cur)
    if prev:
        _acc(out, _times_steps(prev, model.steps), -1)
    return out


def _cone_rhs(model: StepSet, prev: Cells, out: Cells):
    """Add to `out` the negated right-hand side boundary terms for walks in C.

    Subtracting them from F_n - S F_{n-1} gives the residual.
    """
    steps = model.steps
    axis_x = {k: v for k, v in prev.items() if k[1] == 0 and k[0] < 0}
    axis_y = {k: v for k, v in prev.items() if k[0] == 0 and k[1] < 0}
    # + t ybar H-(x) F_{-,0}(xbar): steps with dy = -1 from the negative x-axis
    for (dx, dy) in steps:
        if dy == -1:
            _acc(out, axis_x, 1, (dx, dy))
        if dx == -1:
            _acc(out, axis_y, 1, (dx, dy))
    if (-1, -1) in steps and prev.get((0, 0)):
        _add(out, (-1, -1), prev[(0, 0)])
    if model.edge_rule is EdgeRule.ALLOW:
        if (1, -1) in steps and prev.get((-1, 0)):
            _add(out, (0, -1), -prev[(-1, 0)])
        if (-1, 1) in steps and prev.get((0, -1)):
            _add(out, (-1, 0), -prev[(0, -1)])


def check_functional_equation(target: str, model: Union[str, StepSet] = "king", N: int = 15,
                              W: Optional[int] = None, tables: Optional[TableSet] = None) -> IdentityCheck:
    """Residual of K F = (initial term) - (boundary corrections) for F in C, Q, A, M."""
    ts = _tableset(model, N, tables)
    m = ts.model
    target = target.upper()

    if target == "C":
        T = ts.get("C")

        def res(n):
            cur = cells(T[n])
            prev = cells(T[n - 1]) if n else None
            out = _kernel_residual(m, cur, prev)
            if n == 0:
                _add(out, (0, 0), -1)
            else:
                _cone_rhs(m, prev, out)
            return out
        return _run("functional-C", ts, "three-quadrant", N, W, res)

    if target == "Q":
        T = ts.get("Q")

        def res(n):
            cur = cells(T[n])
            prev = cells(T[n - 1]) if n else None
            out = _kernel_residual(m, cur, prev)
            if n == 0:
                _add(out, (0, 0), -1)
                return out
            row = {k: v for k, v in prev.items() if k[1] == 0}
            col = {k: v for k, v in prev.items() if k[0] == 0}
            for (dx, dy) in m.steps:
                if dy == -1:
                    _acc(out, row, 1, (dx, dy))
                if dx == -1:
                    _acc(out, col, 1, (dx, dy))
            if (-1, -1) in m.steps and prev.get((0, 0)):
                _add(out, (-1, -1), -prev[(0, 0)])
            return out
        return _run("functional-Q", ts, "quadrant", N, W, res)

    if target == "A":
        G = ts.group
        if G.kind is not GroupKind.FINITE:
            raise NonMonomialGroup("the A-equation needs a finite monomial group")
        T = ts.get("A")
        scale = T[0].scale
        d = G.d
        init: Cells = {(0, 0): scale}
        # - xbar ybar (OS(xy) - (-1)^d xbar ybar), scaled
        for h in G.elements:
            _add(init, h.affine(0, 0), -h.sign * scale // (2 * d - 1))
        _add(init, (-2, -2), (-1) ** d * scale // (2 * d - 1))

        def res(n):
            cur = cells(T[n])
            prev = cells(T[n - 1]) if n else None
            out = _kernel_residual(m, cur, prev)
            if n == 0:
                _acc(out, init, -1)
            else:
                _cone_rhs(m, prev, out)
            return out
        return _run("functional-A", ts, "three-quadrant", N, W, res)

    if target == "M":
        if set(m.steps) != set(builtin("king").steps) or m.edge_rule is not EdgeRule.FORBID:
            raise WalksError("the M-equation is stated for the king model")
        T = ts.get("A")
        return _run("functional-M", ts, "three-quadrant", N, W, lambda n: _m_residual(m, T, n))

    raise ValueError(f"unknown functional equation target {target!r}")


def m_cells(tab: WalkTable) -> Cells:
    """M_{k,j} = A_{-1-k,j} for k, j >= 0 (scaled)."""
    return {(-1 - i, j): v for (i, j), v in cells(tab).items() if i < 0 and j >= 0}


def _m_residual(model: StepSet, T: List[WalkTable], n: int) -> Cells:
    """3 times K(2M(x,y) - M(0,y)) minus 3 times the right-hand side, at length n."""
    def lhs_poly(k):
        M = m_cells(T[k])
        out = {key: 2 * v for key, v in M.items()}
        _acc(out, {key: v for key, v in M.items() if key[0] == 0}, -1)
        return out

    out = lhs_poly(n)
    if n == 0:
        _add(out, (1, 0), -2)            # 3 * 2x/3
        return out
    prev_lhs = lhs_poly(n - 1)
    _acc(out, _times_steps(prev_lhs, model.steps), -1)
    M = m_cells(T[n - 1])
    row = {k: v for k, v in M.items() if k[1] == 0}              # M(x,0)
    col = {k: v for k, v in M.items() if k[0] == 0}              # M(0,y)
    row_y = {(0, k[0]): v for k, v in row.items()}              # M(y,0)
    M00, M10 = M.get((0, 0), 0), M.get((1, 0), 0)
    sx = [(1, 0), (0, 0), (-1, 0)]
    sy = [(0, 1), (0, 0), (0, -1)]
    # - [ -2 ybar s(x) M(x,0) + ybar s(y) M(y,0) + (x - xbar) s(y) M(0,y)
    #     - (1 + ybar^2 - 2 xbar ybar) M00 - ybar M10 ]
    for s in sx:
        _acc(out, row, 2, (s[0], s[1] - 1))
    for s in sy:
        _acc(out, row_y, -1, (s[0], s[1] - 1))
        _acc(out, col, -1, (s[0] + 1, s[1]))
        _acc(out, col, 1, (s[0] - 1, s[1]))
    _add(out, (0, 0), M00)
    _add(out, (0, -2), M00)
    _add(out, (-1, -1), -2 * M00)
    _add(out, (0, -1), M10)
    return out


# ---------------------------------------------------------------------------
# orbit sums

def _orbit_image(G: Group, F: Cells, omit: Optional[GroupElement] = None) -> Cells:
    """sum_g sign(g) g(xy F), over the group (optionally without one element)."""
    out: Cells = {}
    for g in G.elements:
        if omit is not None and g == omit:
            continue
        _acc(out, _transform(F, g, pre=(1, 1)), g.sign)
    return out


def check_orbit_sum(target: str, model: Union[str, StepSet] = "king", N: int = 12,
                    W: Optional[int] = None, tables: Optional[TableSet] = None) -> IdentityCheck:
    """K(x,y) sum_g sign(g) g(xy F) = OS(xy) for F = C or Q.

    When OS(xy) vanishes the orbit sum of xy F itself must vanish; that is
    checked as well.
    """
    ts = _tableset(model, N, tables)
    G = ts.group
    if G.kind is not GroupKind.FINITE:
        raise NonMonomialGroup(f"{ts.model.name}: no finite monomial group")
    target = target.upper()
    T = ts.get(target)
    OS = _orbit_image(G, {(0, 0): 1})
    zero_orbit = not OS
    images = [None] * (N + 1)

    def image(k):
        if images[k] is None:
            images[k] = _orbit_image(G, cells(T[k]))
        return images[k]

    def res(n):
        if zero_orbit:
            return dict(image(n))
        out = _kernel_residual(ts.model, image(n), image(n - 1) if n else None)
        if n == 0:
            _acc(out, OS, -1)
        return out
    region = "three-quadrant" if target == "C" else "quadrant"
    return _run(f"orbit-sum-{target}", ts, region, N, W, res)


# ---------------------------------------------------------------------------
# C = A + Q-correction

def check_decomposition(model: Union[str, StepSet] = "king", N: int = 15, W: Optional[int] = None,
                        tables: Optional[TableSet] = None) -> IdentityCheck:
    """(2d-1) C = (2d-1) A + sum_{h != omega} sign(h) xbar ybar h(xy Q), plus the slice forms."""
    ts = _tableset(model, N, tables)
    G = ts.group
    if G.kind is not GroupKind.FINITE:
        raise NonMonomialGroup(f"{ts.model.name}: no finite monomial group")
    d = G.d
    C, Q, A = ts.get("C"), ts.get("Q"), ts.get("A")
    scale = A[0].scale
    if scale != 2 * d - 1:
        raise WalksError("unexpected scale of the A-table")

    def res(n):
        Cn, Qn, An = cells(C[n]), cells(Q[n]), cells(A[n])
        out = {k: scale * v for k, v in Cn.items()}
        _acc(out, An, -1)
        for h in G.elements:
            if h == G.omega:
                continue
            _acc(out, _transform(Qn, h, pre=(1, 1), post=(-1, -1)), -h.sign)
        # slice relations, evaluated independently of the full identity
        def q(i, j):
            return Qn.get((i, j), 0) if i >= 0 and j >= 0 else 0
        slices: Cells = {}
        for i in range(-n - 2, 0):
            rhs = An.get((i, 0), 0) + (-1) ** (d - 1) * (q(-i - d, 0) if d in (2, 4) else q(0, -i - d))
            _add(slices, (i, 0), scale * Cn.get((i, 0), 0) - rhs)
        m = 2 if d == 2 else 3
        for j in range(-n - 2, 0):
            rhs = An.get((0, j), 0) + (-1) ** (d + 1) * (q(0, -j - m) if d in (2, 4) else q(-j - 3, 0))
            _add(slices, (0, j), scale * Cn.get((0, j), 0) - rhs)
        _add(slices, (0, 0), scale * Cn.get((0, 0), 0) - An.get((0, 0), 0) - q(0, 0))
        _acc(out, {(k[0] + 10 ** 6, k[1]): v for k, v in slices.items()})   # kept apart from cells
        return out

    chk = _run("decomposition", ts, "three-quadrant", N, None, res)
    if chk.first_failure is None:
        # slice residuals were shifted out of the window; recheck them explicitly
        for n in range(N + 1):
            r = {k: v for k, v in res(n).items() if k[0] > 10 ** 5}
            if r:
                (i, j), v = sorted(r.items())[0]
                chk.passed = False
                chk.first_failure = {"n": n, "i": i - 10 ** 6, "j": j, "delta": v}
                chk.detail = "boundary slice relation"
                break
    return chk


# ---------------------------------------------------------------------------
# P-M relations and reflection identities

def chamber_slices(G: Group, F: Cells) -> Dict[GroupElement, Cells]:
    """P_g(x,y) = sum_{(i,j) in Q} F_{g-dot(i,j)} x^i y^j, for each g."""
    out: Dict[GroupElement, Cells] = {g: {} for g in G.elements}
    for g in G.elements:
        ginv = G.inverse(g)
        for (k, l), v in F.items():
            i, j = ginv.affine(k, l)
            if i >= 0 and j >= 0:
                out[g][(i, j)] = v
    return out


def signed_chamber_sum(G: Group, F: Cells) -> Cells:
    """sum_{g != omega} sign(g) P_g."""
    out: Cells = {}
    for g, P in chamber_slices(G, F).items():
        if g != G.omega:
            _acc(out, P, g.sign)
    return out


def check_PM_relations(model: Union[str, StepSet] = "king", N: int = 15, W: Optional[int] = None,
                       tables: Optional[TableSet] = None) -> IdentityCheck:
    """sum_{g != omega} sign(g) P_g = 0 on the A-table; for v&h-symmetric
    models also P(x,y) = xbar(L(x,y) - L(0,y)) + ybar(B(x,y) - B(x,0))."""
    ts = _tableset(model, N, tables)
    G = ts.group
    if G.kind is not GroupKind.FINITE:
        raise NonMonomialGroup(f"{ts.model.name}: no finite monomial group")
    A = ts.get("A")
    steps = set(ts.model.steps)
    vh = all((-a, b) in steps and (a, -b) in steps for a, b in steps)

    def res(n):
        An = cells(A[n])
        out = signed_chamber_sum(G, An)
        if vh:
            plb: Cells = {}
            for (i, j), v in An.items():
                if i >= 0 and j >= 0:
                    _add(plb, (i, j), v)
            for (i, j), v in An.items():
                if i <= -2 and j >= 0:            # L_{k,j} = A_{-1-k,j}; xbar(L - L(0,y)) at (k-1, j)
                    _add(plb, (-i - 2, j), -v)
                if j <= -2 and i >= 0:
                    _add(plb, (i, -j - 2), -v)
            _acc(out, {(k[0] + 10 ** 6, k[1]): v for k, v in plb.items()})
        return out

    W = ts.N + 4 if W is None else W
    chk = IdentityCheck("pm-relations", ts.model.name or "custom", "three-quadrant", N, W)
    for n in range(N + 1):
        r = res(n)
        if r:
            (i, j), v = sorted(r.items())[0]
            chk.passed = False
            if i > 10 ** 5:
                chk.first_failure = {"n": n, "i": i - 10 ** 6, "j": j, "delta": v}
                chk.detail = "P/L/B form"
            else:
                chk.first_failure = {"n": n, "i": i, "j": j, "delta": v}
            break
    return chk


def reflection_rhs_source(G: Group, start: Point) -> Optional[Tuple[GroupElement, Point]]:
    """(h, h-dot(a,b)) with h-dot(a,b) in Q, or None if the start is on a wall."""
    g = G.chamber_of(start)
    if g is None:
        return None
    h = G.inverse(g)
    return h, h.affine(*start)


def check_reflection(model: Union[str, StepSet] = "king", start: Point = (0, 0), N: int = 10,
                     box: Optional[int] = None, edge_rule: Union[str, EdgeRule, None] = None,
                     c_tables: Optional[List[WalkTable]] = None) -> IdentityCheck:
    """sum_{g != omega} sign(g) C^{a,b}_{g-dot(i,j)} = sign(h) Q^{h-dot(a,b)}_{i,j} (or 0).

    `c_tables` replaces the cone tables (used by the mutation tests).
    """
    if isinstance(model, str):
        model = builtin(model)
    if edge_rule is not None:
        model = model.with_edge_rule(edge_rule)
    a, b = start
    if a < 0 and b < 0:
        raise StartOutsideC(f"start {start} is not in the three-quadrant cone")
    G = build_group(model)
    if G.kind is not GroupKind.FINITE:
        raise NonMonomialGroup(f"{model.name}: no finite monomial group")
    B = N + 2 if box is None else box
    C = c_tables or dp_tables(model, Region.THREE_QUADRANT, StartDistribution.single(start), N)
    src = reflection_rhs_source(G, start)
    Q = None
    if src is not None:
        h, p = src
        Q = dp_tables(model, Region.QUADRANT, StartDistribution.single(p), N)
    others = [g for g in G.elements if g != G.omega]
    chk = IdentityCheck("reflection", f"{model.name}:{model.edge_rule.value}@{a},{b}", "three-quadrant",
                        N, B)
    for n in range(N + 1):
        tab = C[n]
        for i in range(B + 1):
            for j in range(B + 1):
                lhs = sum(g.sign * tab.get(*g.affine(i, j)) for g in others)
                rhs = src[0].sign * Q[n].get(i, j) if Q is not None else 0
                if lhs != rhs:
                    chk.passed = False
                    chk.first_failure = {"n": n, "i": i, "j": j, "delta": lhs - rhs}
                    return chk
    return chk


def reflection_terms(model: Union[str, StepSet], start: Point, n: int, end: Point) -> Dict[str, int]:
    """The individual terms of the reflection identity at one endpoint, for display."""
    if isinstance(model, str):
        model = builtin(model)
    G = build_group(model)
    C = dp_tables(model, Region.THREE_QUADRANT, StartDistribution.single(start), n)[n]
    out = {f"C{g.affine(*end)}": g.sign * C.get(*g.affine(*end)) for g in G.elements if g != G.omega}
    src = reflection_rhs_source(G, start)
    if src is not None:
        Q = dp_tables(model, Region.QUADRANT, StartDistribution.single(src[1]), n)[n]
        out[f"Q{src[1]}"] = src[0].sign * Q.get(*end)
    return out


def run_identity(identity: str, model: Union[str, StepSet] = "king", N: int = 10,
                 start: Point = (0, 0), edge_rule: Optional[str] = None) -> IdentityCheck:
    """Dispatch by identity name (as used on the command line)."""
    if isinstance(model, str):
        model = builtin(model, edge_rule or EdgeRule.FORBID)
    elif edge_rule is not None:
        model = model.with_edge_rule(edge_rule)
    key = identity.lower()
    if key.startswith("functional-"):
        return check_functional_equation(key.split("-", 1)[1], model, N)
    if key.startswith("orbit-sum-"):
        return check_orbit_sum(key.rsplit("-", 1)[1], model, N)
    if key == "decomposition":
        return check_decomposition(model, N)
    if key == "pm-relations":
        return check_PM_relations(model, N)
    if key == "reflection":
        return check_reflection(model, start, N)
    raise ValueError(f"unknown identity {identity!r}; choose from {', '.join(IDENTITIES)}")
