"""Exact rational linear programming.

Problems are in equality standard form: maximize ``c.x`` subject to
``A x = b`` and ``x >= 0``.  :func:`solve` runs a two-phase dense simplex with
Bland's rule on a fraction-free integer tableau, so every optimal answer comes
with an exact primal/dual pair that :func:`verify_certificate` re-checks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)


class LpError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise LpError("floating point data is not accepted; pass Fractions or ints")
    return Fraction(x)


@dataclass(frozen=True)
class LpProblem:
    """maximize c.x s.t. A x = b, x >= 0 over the rationals."""

    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    c: tuple[Fraction, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.c)
        if len(self.A) != len(self.b):
            raise LpError(f"A has {len(self.A)} rows but b has {len(self.b)} entries")
        for i, row in enumerate(self.A):
            if len(row) != n:
                raise LpError(f"row {i} has {len(row)} entries, expected {n}")
        if self.names and len(self.names) != n:
            raise LpError("one name per variable is required")

    @classmethod
    def make(cls, A: Iterable[Sequence], b: Sequence, c: Sequence, names: Sequence[str] = ()) -> "LpProblem":
        A_ = tuple(tuple(_frac(x) for x in row) for row in A)
        return cls(A_, tuple(_frac(x) for x in b), tuple(_frac(x) for x in c),
                   tuple(names) or tuple(f"x{j}" for j in range(len(c))))

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def n(self) -> int:
        return len(self.c)

    def sparse_float(self):
        from scipy.sparse import csr_matrix

        rows, cols, vals = [], [], []
        for i, row in enumerate(self.A):
            for j, a in enumerate(row):
                if a:
                    rows.append(i)
                    cols.append(j)
                    vals.append(float(a))
        A = csr_matrix((vals, (rows, cols)), shape=(self.m, self.n))
        return A, np.array([float(x) for x in self.b]), np.array([float(x) for x in self.c])


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None
    y: tuple[Fraction, ...] | None = None
    pivots: int = 0
    method: str = "simplex"
    basis: tuple[int, ...] = field(default=(), compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


# ---------------------------------------------------------------------------
# exact core

def _integer_rows(p: LpProblem):
    """Scale each row to integers with b >= 0; returns (A, b, row scale factors)."""
    A, b, scale = [], [], []
    for row, bi in zip(p.A, p.b):
        den = lcm(*(x.denominator for x in row), bi.denominator)
        s = den if bi >= 0 else -den
        A.append([int(x * s) for x in row])
        b.append(int(bi * s))
        scale.append(s)
    return A, b, scale


def _integer_costs(c: Sequence[Fraction]):
    den = lcm(*(x.denominator for x in c)) if c else 1
    return [int(x * den) for x in c], den


class _Tableau:
    """Fraction-free tableau: true entries are ``T[i][j] / d`` with d = |det B|."""

    def __init__(self, A: list[list[int]], b: list[int]):
        m, n = len(A), len(A[0]) if A else 0
        self.m, self.n = m, n
        self.rows = []
        for i in range(m):
            art = [0] * m
            art[i] = 1
            self.rows.append(list(A[i]) + art + [b[i]])
        self.basis = [n + i for i in range(m)]
        self.d = 1
        self.z: list[int] = []
        self.pivots = 0

    @property
    def rhs(self) -> int:
        return self.n + self.m

    def set_costs(self, cost: list[int]):
        """cost covers structural and artificial columns (length n + m)."""
        d = self.d
        width = self.n + self.m + 1
        z = [-(cost[j] * d) if j < width - 1 else 0 for j in range(width)]
        for i, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.rows[i]
                z = [zj + cb * rj for zj, rj in zip(z, row)]
        self.z = z
        self.cost = cost

    def pivot(self, r: int, c: int):
        prow = self.rows[r]
        p = prow[c]
        d = self.d
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f:
                self.rows[i] = [(x * p - f * y) // d for x, y in zip(row, prow)]
            elif p != d:
                self.rows[i] = [x * p // d for x in row]
        f = self.z[c]
        if f:
            self.z = [(x * p - f * y) // d for x, y in zip(self.z, prow)]
        elif p != d:
            self.z = [x * p // d for x in self.z]
        if p < 0:
            self.rows = [[-x for x in row] for row in self.rows]
            self.z = [-x for x in self.z]
            p = -p
        self.d = p
        self.basis[r] = c
        self.pivots += 1

    def entering(self, allowed: int) -> int | None:
        z = self.z
        for j in range(allowed):
            if z[j] < 0:
                return j
        return None

    def leaving(self, c: int) -> int | None:
        best = None
        rhs = self.rhs
        for i, row in enumerate(self.rows):
            a = row[c]
            if a > 0:
                if best is None:
                    best = i
                    continue
                brow = self.rows[best]
                lhs = row[rhs] * brow[c]
                rhs_ = brow[rhs] * a
                if lhs < rhs_ or (lhs == rhs_ and self.basis[i] < self.basis[best]):
                    best = i
        return best

    def run(self, allowed: int, max_pivots: int) -> str:
        while True:
            c = self.entering(allowed)
            if c is None:
                return OPTIMAL
            r = self.leaving(c)
            if r is None:
                return UNBOUNDED
            if self.pivots >= max_pivots:
                raise LpError(f"pivot limit {max_pivots} reached")
            self.pivot(r, c)


def solve(p: LpProblem, basis_hint: Sequence[int] | None = None, max_pivots: int = 1_000_000) -> LpSolution:
    """Exact optimum of ``p`` with primal and dual certificates.

    With ``basis_hint`` (candidate columns, most promising first) the hinted
    basis is completed and checked exactly first; the full two-phase Bland
    simplex runs whenever that check fails, so the hint only affects speed
    and, for problems with several optima, which optimal vertex is returned.
    """
    if basis_hint is not None:
        sol = _solve_from_hint(p, basis_hint)
        if sol is not None:
            return sol
    return _two_phase(p, max_pivots)


def _two_phase(p: LpProblem, max_pivots: int) -> LpSolution:
    m, n = p.m, p.n
    if n == 0:
        if all(x == 0 for x in p.b):
            return LpSolution(OPTIMAL, _ZERO, (), tuple(_ZERO for _ in range(m)), 0, "simplex")
        return LpSolution(INFEASIBLE, method="simplex")
    A, b, scale = _integer_rows(p)
    cint, cden = _integer_costs(p.c)
    T = _Tableau(A, b)
    # phase 1: maximize minus the sum of artificials
    T.set_costs([0] * n + [-1] * m)
    T.run(n, max_pivots)
    if T.z[T.rhs] != 0:
        return LpSolution(INFEASIBLE, pivots=T.pivots, method="simplex")
    for r in range(m):
        if T.basis[r] >= n:
            row = T.rows[r]
            c = next((j for j in range(n) if row[j] != 0), None)
            if c is not None:
                T.pivot(r, c)
            # else: redundant row, its artificial stays basic at zero
    T.set_costs(cint + [0] * m)
    status = T.run(n, max_pivots)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=T.pivots, method="simplex")
    return _extract(p, T, scale, cden, "simplex")


def _extract(p: LpProblem, T: _Tableau, scale, cden, method: str) -> LpSolution:
    n, m, d = T.n, T.m, T.d
    x = [_ZERO] * n
    for r, bv in enumerate(T.basis):
        if bv < n:
            x[bv] = Fraction(T.rows[r][T.rhs], d)
    # y for the integer-scaled rows, then undo row and cost scaling
    y = [Fraction(T.z[n + i], d) * scale[i] / cden for i in range(m)]
    value = sum((ci * xi for ci, xi in zip(p.c, x) if xi), _ZERO)
    return LpSolution(OPTIMAL, value, tuple(x), tuple(y), T.pivots, method, tuple(T.basis))


def _bareiss_solve(M: list[list[int]], rhs: list[int]):
    """Solve the square integer system M z = rhs exactly; None if singular."""
    k = len(M)
    W = [list(row) + [r] for row, r in zip(M, rhs)]
    d = 1
    for col in range(k):
        piv = next((i for i in range(col, k) if W[i][col] != 0), None)
        if piv is None:
            return None
        if piv != col:
            W[col], W[piv] = W[piv], W[col]
        prow = W[col]
        p = prow[col]
        for i in range(k):
            if i == col:
                continue
            row = W[i]
            f = row[col]
            if f:
                W[i] = [(x * p - f * y) // d for x, y in zip(row, prow)]
            elif p != d:
                W[i] = [x * p // d for x in row]
        if p < 0:
            W = [[-x for x in row] for row in W]
            p = -p
        d = p
    return [Fraction(W[i][k], d) for i in range(k)]


def _greedy_independent(vectors: np.ndarray, order: Sequence[int], limit: int, tol: float = 1e-9) -> list[int]:
    """Indices (from ``order``) of vectors kept by greedy Gram-Schmidt until ``limit`` are found."""
    basis: list[np.ndarray] = []
    chosen: list[int] = []
    for j in order:
        v = vectors[j].astype(float)
        norm = np.linalg.norm(v)
        if norm == 0:
            continue
        for q in basis:
            v = v - (q @ v) * q
        for q in basis:
            v = v - (q @ v) * q
        r = np.linalg.norm(v)
        if r > tol * norm:
            basis.append(v / r)
            chosen.append(j)
            if len(chosen) == limit:
                break
    return chosen


def _solve_from_hint(p: LpProblem, hint: Sequence[int]) -> LpSolution | None:
    m, n = p.m, p.n
    if m == 0 or n == 0:
        return None
    A, b, scale = _integer_rows(p)
    order = list(dict.fromkeys(j for j in hint if 0 <= j < n))
    dense = np.array(A, dtype=float)
    basis_cols = _greedy_independent(dense.T, order, m)
    if not basis_cols:
        return None
    sub = dense[:, basis_cols]
    used_rows = sorted(_greedy_independent(sub, range(m), len(basis_cols)))
    if len(used_rows) != len(basis_cols):
        return None
    B = [[A[i][j] for j in basis_cols] for i in used_rows]
    xb = _bareiss_solve(B, [b[i] for i in used_rows])
    if xb is None or any(v < 0 for v in xb):
        return None
    cint, cden = _integer_costs(p.c)
    Bt = [[A[i][j] for i in used_rows] for j in basis_cols]
    yr = _bareiss_solve(Bt, [cint[j] for j in basis_cols])
    if yr is None:
        return None
    x = [_ZERO] * n
    for j, v in zip(basis_cols, xb):
        x[j] = v
    y = [_ZERO] * m
    for i, v in zip(used_rows, yr):
        y[i] = v * scale[i] / cden
    value = sum((ci * xi for ci, xi in zip(p.c, x) if xi), _ZERO)
    sol = LpSolution(OPTIMAL, value, tuple(x), tuple(y), 0, "hinted-basis", tuple(basis_cols))
    if not verify_certificate(p, sol):
        return None
    return sol


def verify_certificate(p: LpProblem, s: LpSolution) -> bool:
    """Exact check of Ax = b, x >= 0, y^T A >= c and c.x = y.b = value."""
    if s.x is None or s.y is None or s.value is None:
        raise LpError("solution carries no certificate")
    if len(s.x) != p.n or len(s.y) != p.m:
        raise LpError(f"certificate dimensions ({len(s.x)}, {len(s.y)}) do not match problem ({p.n}, {p.m})")
    x, y = s.x, s.y
    if any(v < 0 for v in x):
        return False
    for row, bi in zip(p.A, p.b):
        if sum((a * v for a, v in zip(row, x) if a and v), _ZERO) != bi:
            return False
    for j in range(p.n):
        if sum((p.A[i][j] * y[i] for i in range(p.m) if y[i] and p.A[i][j]), _ZERO) < p.c[j]:
            return False
    primal = sum((cj * v for cj, v in zip(p.c, x) if v), _ZERO)
    dual = sum((yi * bi for yi, bi in zip(y, p.b) if yi), _ZERO)
    return primal == dual == s.value


# ---------------------------------------------------------------------------
# floating point helpers

@dataclass(frozen=True)
class FloatResult:
    status: str
    value: float | None
    x: np.ndarray | None = None
    reduced: np.ndarray | None = None

    def hint(self, tol: float = 1e-9) -> list[int]:
        """Columns ordered as basis candidates: support first, then by reduced cost."""
        if self.x is None:
            return []
        n = len(self.x)
        support = [j for j in np.argsort(-self.x, kind="stable") if self.x[j] > tol]
        rest = [j for j in np.argsort(np.abs(self.reduced), kind="stable") if self.x[j] <= tol]
        return [int(j) for j in support] + [int(j) for j in rest[: max(0, n)]]


def solve_float(A, b, c) -> FloatResult:
    """Floating point maximize c.x s.t. Ax = b, x >= 0 with HiGHS."""
    from scipy.optimize import linprog

    res = linprog(-np.asarray(c, dtype=float), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status == 2:
        return FloatResult(INFEASIBLE, None)
    if res.status == 3:
        return FloatResult(UNBOUNDED, None)
    if res.status != 0:
        raise LpError(f"HiGHS failed: {res.message}")
    y = -res.eqlin.marginals
    reduced = A.T @ y - np.asarray(c, dtype=float)
    return FloatResult(OPTIMAL, -float(res.fun), np.asarray(res.x), np.asarray(reduced))


@dataclass(frozen=True)
class FloatDecision:
    decided: bool
    value: float | None
    sides: tuple[str, ...] = ()


def decide(value: float | None, thresholds: Sequence, guard) -> FloatDecision:
    if value is None:
        return FloatDecision(False, None)
    g = float(guard)
    sides = []
    for t in thresholds:
        t = float(t)
        if value >= t + g:
            sides.append("above")
        elif value <= t - g:
            sides.append("below")
        else:
            return FloatDecision(False, value)
    return FloatDecision(True, value, tuple(sides))


def solve_float_presolve(p: LpProblem, guard, thresholds: Sequence = ()) -> FloatDecision:
    """Float optimum of ``p`` and its side of each threshold, decided only outside the guard band.

    The decision is a filter; callers re-solve exactly whenever it is undecided.
    """
    guard = Fraction(guard)
    if guard <= 0:
        raise LpError("guard must be positive")
    A, b, c = p.sparse_float()
    res = solve_float(A, b, c)
    if res.status != OPTIMAL:
        return FloatDecision(False, None)
    if thresholds:
        return decide(res.value, thresholds, guard)
    return FloatDecision(False, res.value)


# ---------------------------------------------------------------------------
# text dump

def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def dump_problem(p: LpProblem, comment: str = "") -> str:
    """Line-oriented text: ``maximize`` / ``names`` / ``c`` lines, then one ``row`` per constraint."""
    out = ["# vecdecomp lp v1", "# maximize c.x subject to A x = b, x >= 0"]
    for line in comment.splitlines():
        out.append(f"# {line}")
    out.append(f"dims {p.m} {p.n}")
    out.append("names " + " ".join(p.names))
    out.append("c " + " ".join(_fmt(x) for x in p.c))
    for row, bi in zip(p.A, p.b):
        out.append("row " + " ".join(_fmt(x) for x in row) + " = " + _fmt(bi))
    return "\n".join(out) + "\n"


def load_problem(text: str) -> LpProblem:
    names: list[str] = []
    c: list[Fraction] = []
    A, b = [], []
    dims = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "dims":
                dims = tuple(int(t) for t in rest.split())
            elif head == "names":
                names = rest.split()
            elif head == "c":
                c = [Fraction(t) for t in rest.split()]
            elif head == "row":
                lhs, _, rhs = rest.partition("=")
                A.append([Fraction(t) for t in lhs.split()])
                b.append(Fraction(rhs.strip()))
            else:
                raise LpError(f"line {lineno}: unknown record {head!r}")
        except (ValueError, ZeroDivisionError) as exc:
            raise LpError(f"line {lineno}: {exc}") from None
    p = LpProblem.make(A, b, c, names)
    if dims is not None and dims != (p.m, p.n):
        raise LpError(f"dims line says {dims}, data has {(p.m, p.n)}")
    return p
