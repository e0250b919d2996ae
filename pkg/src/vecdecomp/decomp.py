"""Fractional and integer K_k-decompositions of hosts and the LPs behind them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Mapping, Sequence

import numpy as np

from . import lp as lpmod
from .hosts import Host, delete_vertex
from .lp import LpProblem, LpSolution
from .patterns import (
    UNDIRECTED,
    Pattern,
    PatternCatalog,
    WeightVector,
    build_catalog,
    edge_count,
)

ONE = Fraction(1)
ZERO = Fraction(0)
INTOPT_MAX_N = 9


class DecompositionError(ValueError):
    pass


class InfeasibleHostError(DecompositionError):
    """The host has no fractional K_k-decomposition."""


def k_subsets(host: Host, k: int) -> list[tuple[int, ...]]:
    """k-subsets of the host whose pairs are all present, in lexicographic order."""
    if k > host.n:
        return []
    if host.is_complete:
        return list(itertools.combinations(range(host.n), k))
    return [X for X in itertools.combinations(range(host.n), k)
            if all(host.label(a, b) is not None for a, b in itertools.combinations(X, 2))]


def _present_pairs_lex(host: Host) -> list[tuple[int, int]]:
    return [(i, j) for i in range(host.n) for j in range(i + 1, host.n) if host.label(i, j) is not None]


@dataclass(frozen=True)
class Structure:
    """Shared constraint data for all hosts with the same order and pair set."""

    n: int
    k: int
    subsets: tuple[tuple[int, ...], ...]
    pairs: tuple[tuple[int, int], ...]
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    names: tuple[str, ...]

    @property
    def sparse(self):
        cached = self.__dict__.get("_sparse")
        if cached is None:
            from scipy.sparse import csr_matrix

            index = {p: i for i, p in enumerate(self.pairs)}
            rows, cols = [], []
            for j, X in enumerate(self.subsets):
                for e in itertools.combinations(X, 2):
                    rows.append(index[e])
                    cols.append(j)
            A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(self.pairs), len(self.subsets)))
            cached = (A, np.ones(len(self.pairs)))
            object.__setattr__(self, "_sparse", cached)
        return cached


@lru_cache(maxsize=64)
def _structure(n: int, k: int, present: tuple | None, packing: bool) -> Structure:
    if present is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        subsets = list(itertools.combinations(range(n), k))
    else:
        pairs = list(present)
        pset = set(pairs)
        subsets = [X for X in itertools.combinations(range(n), k)
                   if all(e in pset for e in itertools.combinations(X, 2))]
    index = {p: i for i, p in enumerate(pairs)}
    covered = [False] * len(pairs)
    rows = [[ZERO] * len(subsets) for _ in pairs]
    for j, X in enumerate(subsets):
        for e in itertools.combinations(X, 2):
            rows[index[e]][j] = ONE
            covered[index[e]] = True
    missing = [pairs[i] for i, c in enumerate(covered) if not c]
    if missing and not packing:
        raise InfeasibleHostError(f"pair {missing[0]} lies in no K_{k}; no fractional decomposition exists")
    names = ["x" + "_".join(map(str, X)) for X in subsets]
    if packing:
        for i, row in enumerate(rows):
            row.extend(ONE if t == i else ZERO for t in range(len(pairs)))
        names += [f"s{a}_{b}" for a, b in pairs]
    return Structure(n, k, tuple(subsets), tuple(pairs), tuple(tuple(r) for r in rows),
                     tuple(ONE for _ in pairs), tuple(names))


def structure(host: Host, k: int, packing: bool = False) -> Structure:
    if k < 3:
        raise DecompositionError("k must be at least 3")
    if k > host.n:
        raise DecompositionError(f"k={k} exceeds host order {host.n}")
    present = None if host.is_complete else tuple(_present_pairs_lex(host))
    return _structure(host.n, k, present, packing)


def _check_vector(host: Host, k: int, v: WeightVector):
    cat = v.catalog
    if cat.order != k:
        raise DecompositionError(f"weight vector is indexed by order-{cat.order} patterns, k={k}")
    if cat.kind != host.kind:
        raise DecompositionError(f"weight vector kind {cat.kind} does not match host kind {host.kind}")


def classify(host: Host, subsets: Sequence[tuple[int, ...]], catalog: PatternCatalog) -> list[Pattern]:
    table = catalog.lookup()
    return [table[host.subset_labels(X)] for X in subsets]


def objective(host: Host, k: int, v: WeightVector, st: Structure | None = None) -> list[Fraction]:
    st = st or structure(host, k)
    return [v.by_id(p.id) for p in classify(host, st.subsets, v.catalog)]


def build_decomposition_lp(host: Host, k: int, v: WeightVector, packing: bool = False) -> LpProblem:
    """One variable per k-clique, one row per present pair (= 1, or <= 1 with ``packing``)."""
    _check_vector(host, k, v)
    st = structure(host, k, packing)
    c = objective(host, k, v, st)
    if packing:
        c = c + [ZERO] * len(st.pairs)
    return LpProblem(st.A, st.b, tuple(c), st.names)


@dataclass(frozen=True)
class FractionalDecomposition:
    host: Host
    k: int
    weights: Mapping[tuple[int, ...], Fraction]
    packing: bool = False

    def weight(self, X: tuple[int, ...]) -> Fraction:
        return self.weights.get(tuple(X), ZERO)

    @property
    def total(self) -> Fraction:
        return sum(self.weights.values(), ZERO)

    def coverage(self) -> dict[tuple[int, int], Fraction]:
        cov = {e: ZERO for e in _present_pairs_lex(self.host)}
        for X, w in self.weights.items():
            for e in itertools.combinations(X, 2):
                cov[e] += w
        return cov

    def is_valid(self) -> bool:
        """Weights in [0, 1] on k-cliques and every present pair covered exactly once (at most once when packing)."""
        for X, w in self.weights.items():
            if not (0 <= w <= 1) or len(X) != self.k:
                return False
            if any(self.host.label(a, b) is None for a, b in itertools.combinations(X, 2)):
                return False
        for total in self.coverage().values():
            if total > 1 or (not self.packing and total != 1):
                return False
        return True

    def value(self, v: WeightVector) -> Fraction:
        return sum((v.by_id(p) * m for p, m in pattern_mass(self, v.catalog).items()), ZERO)


@dataclass
class DstarResult:
    """Outcome of a D* computation; ``value`` is None when infeasible (unless the zero convention is on)."""

    status: str
    value: Fraction | None
    decomposition: FractionalDecomposition | None = None
    solution: LpSolution | None = field(default=None, repr=False)
    problem: LpProblem | None = field(default=None, repr=False)

    def __iter__(self):
        yield self.value
        yield self.decomposition


def dstar(host: Host, k: int, v: WeightVector, *, packing: bool = False, hint: bool = True,
          zero_if_infeasible: bool = False) -> DstarResult:
    """Exact max over fractional K_k-decompositions f of sum_H v_H f(host, H).

    ``hint`` seeds the exact solver with a HiGHS basis; the answer is exact
    and certified either way.  ``zero_if_infeasible`` reports 0 for hosts
    without a decomposition instead of the infeasible status.
    """
    _check_vector(host, k, v)
    try:
        p = build_decomposition_lp(host, k, v, packing)
    except InfeasibleHostError:
        return DstarResult("infeasible", ZERO if zero_if_infeasible else None)
    sol = solve_exact(p, hint)
    if sol.status != lpmod.OPTIMAL:
        return DstarResult(sol.status, ZERO if zero_if_infeasible else None, None, sol, p)
    st = structure(host, k, packing)
    weights = {X: w for X, w in zip(st.subsets, sol.x) if w}
    f = FractionalDecomposition(host, k, weights, packing)
    return DstarResult(lpmod.OPTIMAL, sol.value, f, sol, p)


def solve_exact(p: LpProblem, hint: bool = True) -> LpSolution:
    basis_hint = None
    if hint:
        A, b, c = p.sparse_float()
        res = lpmod.solve_float(A, b, c)
        if res.status == lpmod.OPTIMAL:
            basis_hint = res.hint()
    sol = lpmod.solve(p, basis_hint=basis_hint)
    if sol.status == lpmod.OPTIMAL and not lpmod.verify_certificate(p, sol):
        raise lpmod.LpError("solver returned an optimum that fails its certificate")
    return sol


def nustar(host: Host, k: int, v: WeightVector, **kw) -> Fraction:
    """Normalized optimum D* * C(k,2) / |E(host)|."""
    e = host.num_present
    if e == 0:
        raise DecompositionError("host has no pairs")
    res = dstar(host, k, v, **kw)
    if res.value is None:
        raise InfeasibleHostError(f"{host.name or 'host'} has no fractional K_{k}-decomposition")
    return res.value * comb(k, 2) / e


class PatternMass(dict):
    """f(G, H) for every pattern H of one catalog, keyed by pattern id."""

    def __init__(self, catalog: PatternCatalog, masses: Mapping[bytes, Fraction]):
        super().__init__(masses)
        self.catalog = catalog

    def of(self, p: Pattern) -> Fraction:
        return self[p.id]

    @property
    def total(self) -> Fraction:
        return sum(self.values(), ZERO)


def pattern_mass(f: FractionalDecomposition, catalog: PatternCatalog | None = None) -> PatternMass:
    catalog = catalog or build_catalog(f.k, f.host.kind)
    masses = {p.id: ZERO for p in catalog}
    table = catalog.lookup()
    for X, w in f.weights.items():
        masses[table[f.host.subset_labels(X)].id] += w
    return PatternMass(catalog, masses)


def uniform_decomposition(host: Host, k: int = 3) -> FractionalDecomposition:
    """Weight 1/(n-2) on every triple of a complete host."""
    if k != 3:
        raise DecompositionError("the uniform decomposition is defined for k = 3")
    if not host.is_complete:
        raise DecompositionError("uniform decomposition needs a complete host")
    if host.n < 3:
        raise DecompositionError("need at least 3 vertices")
    w = Fraction(1, host.n - 2)
    return FractionalDecomposition(host, 3, {X: w for X in itertools.combinations(range(host.n), 3)})


def normalized_value(f: FractionalDecomposition, v: WeightVector) -> Fraction:
    return f.value(v) * comb(f.k, 2) / f.host.num_present


def divisible(n: int, k: int) -> bool:
    """k-1 | n-1 and C(k,2) | C(n,2)."""
    if n < 1 or k < 3:
        raise DecompositionError("need n >= 1 and k >= 3")
    return (n - 1) % (k - 1) == 0 and comb(n, 2) % comb(k, 2) == 0


def asymptotic_bound(r: int, value) -> Fraction:
    """(value * (r - 1) + 1) / r."""
    value = Fraction(value)
    if r < 3:
        raise DecompositionError("r must be at least 3")
    if not (0 <= value <= 1):
        raise DecompositionError("value must lie in [0, 1]")
    return (value * (r - 1) + 1) / r


def deletion_average_bound(host: Host, k: int, v: WeightVector, **kw) -> Fraction:
    """(n / (n - 2)) times the mean of D* over the vertex-deleted subhosts.

    Averaging the subhost optima gives a decomposition of ``host`` because
    every pair survives in exactly n - 2 of them, so the result never exceeds
    D*(host).
    """
    n = host.n
    if n < k + 1:
        raise DecompositionError(f"need n >= k + 1 = {k + 1}")
    total = ZERO
    for u in range(n):
        res = dstar(delete_vertex(host, u), k, v, **kw)
        if res.value is None:
            raise InfeasibleHostError(f"subhost without vertex {u} has no decomposition")
        total += res.value
    return Fraction(n, n - 2) * total / n


# ---------------------------------------------------------------------------
# integer decompositions

@dataclass(frozen=True)
class IntegerOptimum:
    value: Fraction
    blocks: tuple[tuple[tuple[int, ...], Pattern], ...]
    nodes: int

    def __iter__(self):
        yield self.value
        yield self.blocks


def integer_optimum(host: Host, k: int, v: WeightVector, max_n: int = INTOPT_MAX_N) -> IntegerOptimum:
    """Best nu_v(L) over all partitions L of the pairs of a complete host into k-cliques.

    Depth-first search that always covers the lexicographically smallest
    uncovered pair, trying blocks by decreasing weight, and cuts a branch when
    even giving every remaining block the largest weight cannot beat the best.
    """
    _check_vector(host, k, v)
    n = host.n
    if not host.is_complete:
        raise DecompositionError("integer_optimum needs a complete host")
    if n > max_n:
        raise DecompositionError(f"integer_optimum limited to n <= {max_n}")
    if not divisible(n, k):
        raise DecompositionError(f"K_{n} is not {k}-decomposable")
    subsets = list(itertools.combinations(range(n), k))
    pats = classify(host, subsets, v.catalog)
    weight = [v.by_id(p.id) for p in pats]
    wmax = max(v.values_list())
    pair_list = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pidx = {e: t for t, e in enumerate(pair_list)}
    masks = [sum(1 << pidx[e] for e in itertools.combinations(X, 2)) for X in subsets]
    by_pair: list[list[int]] = [[] for _ in pair_list]
    for s, X in enumerate(subsets):
        for e in itertools.combinations(X, 2):
            by_pair[pidx[e]].append(s)
    for lst in by_pair:
        lst.sort(key=lambda s: (-weight[s], s))
    full = (1 << len(pair_list)) - 1
    blocks_total = len(pair_list) // comb(k, 2)
    best = [None, None]
    nodes = 0
    chosen: list[int] = []

    def rec(covered: int, value: Fraction, used: int):
        nonlocal nodes
        nodes += 1
        if covered == full:
            if best[0] is None or value > best[0]:
                best[0] = value
                best[1] = list(chosen)
            return
        if best[0] is not None and value + (blocks_total - used) * wmax <= best[0]:
            return
        free = ~covered & full
        first = (free & -free).bit_length() - 1
        for s in by_pair[first]:
            if masks[s] & covered:
                continue
            chosen.append(s)
            rec(covered | masks[s], value + weight[s], used + 1)
            chosen.pop()

    rec(0, ZERO, 0)
    if best[0] is None:
        raise DecompositionError("no K_k-decomposition found")
    nu = best[0] * comb(k, 2) / comb(n, 2)
    blocks = tuple((subsets[s], pats[s]) for s in best[1])
    return IntegerOptimum(nu, blocks, nodes)


# ---------------------------------------------------------------------------
# random graph program

@dataclass(frozen=True)
class RandomGraphProgram:
    k: int
    v: WeightVector
    p: Fraction
    problem: LpProblem
    value: Fraction
    x: Mapping[bytes, Fraction]
    solution: LpSolution

    def x_of(self, pattern: Pattern | str) -> Fraction:
        if isinstance(pattern, str):
            pattern = self.v.catalog.alias(pattern) if not pattern.isdigit() else \
                next(q for q in self.v.catalog if q.literal() == pattern)
        return self.x[pattern.id]

    def witness(self) -> dict[bytes, Fraction]:
        """x_{K_k} = p, x_{I_k} = 1 - p, zero elsewhere."""
        cat = self.v.catalog
        kk = cat.alias(f"K{self.k}")
        ik = cat.alias(f"I{self.k}")
        w = {q.id: ZERO for q in cat}
        w[kk.id] += self.p
        w[ik.id] += 1 - self.p
        return w

    def is_feasible(self, x: Mapping[bytes, Fraction]) -> bool:
        vec = tuple(x[q.id] for q in self.v.catalog)
        if any(t < 0 for t in vec):
            return False
        return all(sum((a * t for a, t in zip(row, vec)), ZERO) == bi
                   for row, bi in zip(self.problem.A, self.problem.b))


def random_graph_lp(k: int, v: WeightVector, p) -> RandomGraphProgram:
    """max sum v_H x_H s.t. sum (e(H) - p C(k,2)) x_H = 0, sum x_H = 1, x >= 0."""
    p = Fraction(p)
    if not (0 <= p <= 1):
        raise DecompositionError("p must lie in [0, 1]")
    cat = v.catalog
    if cat.order != k:
        raise DecompositionError(f"weight vector has order {cat.order}, expected {k}")
    if cat.kind.antisymmetric:
        raise DecompositionError("the random graph program needs a graph (edge/non-edge) catalog")
    pairs = comb(k, 2)
    row1 = [Fraction(edge_count(q)) - p * pairs for q in cat]
    row2 = [ONE] * len(cat)
    prob = LpProblem.make([row1, row2], [0, 1], v.values_list(), [q.name for q in cat])
    sol = lpmod.solve(prob)
    if sol.status != lpmod.OPTIMAL or not lpmod.verify_certificate(prob, sol):
        raise DecompositionError(f"random graph program returned {sol.status}")
    x = {q.id: xv for q, xv in zip(cat, sol.x)}
    return RandomGraphProgram(k, v, p, prob, sol.value, x, sol)


def graph_catalog(k: int) -> PatternCatalog:
    return build_catalog(k, UNDIRECTED)
