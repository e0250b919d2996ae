import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from vecdecomp.decomp import (
    DecompositionError,
    InfeasibleHostError,
    asymptotic_bound,
    build_decomposition_lp,
    deletion_average_bound,
    divisible,
    dstar,
    graph_catalog,
    integer_optimum,
    normalized_value,
    nustar,
    pattern_mass,
    random_graph_lp,
    uniform_decomposition,
)
from vecdecomp.hosts import (
    blowup_cyclic,
    complete_bipartite_bicolored,
    enumerate_nonisomorphic_tournaments,
    graph_host,
    random_host,
    transitive_tournament,
)
from vecdecomp.lp import verify_certificate
from vecdecomp.patterns import BICOLORED, UNDIRECTED, WeightVector, build_catalog

F = Fraction


def steiner_systems(n):
    """All labelled triple systems on n points, by plain recursion (test oracle)."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []

    def rec(covered, blocks):
        free = next((p for p in pairs if p not in covered), None)
        if free is None:
            out.append(list(blocks))
            return
        a, b = free
        for c in range(n):
            if c in (a, b):
                continue
            t = tuple(sorted((a, b, c)))
            new = list(itertools.combinations(t, 2))
            if any(q in covered for q in new):
                continue
            rec(covered | set(new), blocks + [t])

    rec(frozenset(), [])
    return out


@pytest.mark.parametrize("parts,value", [([4, 3, 3], 12), ([4, 4, 3], 15), ([4, 4, 4], 18)])
def test_blowup_values(t3_vector, parts, value):
    res = dstar(blowup_cyclic(parts), 3, t3_vector)
    assert res.status == "optimal" and res.value == value
    assert res.decomposition.is_valid()
    assert verify_certificate(res.problem, res.solution)


def test_blowup_cap_222(t3_vector):
    h = blowup_cyclic([2, 2, 2])
    assert dstar(h, 3, t3_vector).value <= 3


def test_transitive_tournament(t3_vector):
    # every triple is transitive, so D* is the total mass C(n,2)/3
    h = transitive_tournament(7)
    assert dstar(h, 3, t3_vector).value == 7
    assert nustar(h, 3, t3_vector) == 1


def test_pure_simplex_agrees(t3_vector):
    h = blowup_cyclic([3, 3, 2])
    assert dstar(h, 3, t3_vector, hint=False).value == dstar(h, 3, t3_vector).value


def test_mass_identity(t3_vector):
    for h in enumerate_nonisomorphic_tournaments(5) + [blowup_cyclic([3, 3, 3])]:
        f = dstar(h, 3, t3_vector).decomposition
        assert f.total == F(comb(h.n, 2), 3)
        assert pattern_mass(f).total == f.total


def test_infeasible_host(graph_vector):
    v = graph_vector(UNDIRECTED, {"K3": 1, "P3": 0, "Q3": 0, "I3": 0})
    # a path is a host with present pairs in no triangle
    from vecdecomp.hosts import Host
    host = Host(3, UNDIRECTED, (1, None, 1), "path")
    assert dstar(host, 3, v).status == "infeasible"
    assert dstar(host, 3, v, zero_if_infeasible=True).value == 0
    with pytest.raises(InfeasibleHostError):
        nustar(host, 3, v)


def test_packing_mode(t3_vector):
    h = blowup_cyclic([2, 2, 2])
    assert dstar(h, 3, t3_vector, packing=True).value >= dstar(h, 3, t3_vector).value


def test_vector_kind_mismatch(t3_vector):
    with pytest.raises(DecompositionError):
        dstar(complete_bipartite_bicolored(2, 2), 3, t3_vector)


def test_extension_lemma_order5(t3_vector):
    for t in enumerate_nonisomorphic_tournaments(5):
        assert dstar(t, 3, t3_vector).value >= deletion_average_bound(t, 3, t3_vector)


def test_monotone_averaging(t3_vector):
    mins = {n: min(dstar(t, 3, t3_vector).value for t in enumerate_nonisomorphic_tournaments(n))
            for n in (4, 5, 6)}
    for n in (4, 5):
        assert mins[n + 1] >= F(n + 1, n - 1) * mins[n]


def test_uniform_lower_bound(graph_vector):
    v = graph_vector(BICOLORED, {"K3": 1, "P3": F(1, 3), "Q3": F(1, 2), "I3": 0})
    for seed in range(50):
        h = random_host(BICOLORED, 9, F(1, 2), seed=seed)
        assert nustar(h, 3, v) >= normalized_value(uniform_decomposition(h), v)


def test_asymptotic_and_divisible():
    assert asymptotic_bound(14, F(78, 91)) == F(85, 98)
    assert [n for n in range(3, 20) if divisible(n, 3)] == [3, 7, 9, 13, 15, 19]
    with pytest.raises(DecompositionError):
        asymptotic_bound(14, F(3, 2))


def test_nustar_blowup(t3_vector):
    assert nustar(blowup_cyclic([5, 5, 4]), 3, t3_vector) == F(78, 91)


def test_integer_optimum_bipartite(k3_i3_bicolored):
    res = integer_optimum(complete_bipartite_bicolored(3, 4), 3, k3_i3_bicolored)
    assert res.value == F(1, 7)
    names = sorted(p.name for _, p in res.blocks)
    assert names == ["I3"] + ["P3"] * 6


def test_integer_optimum_matches_oracle(graph_vector):
    systems = steiner_systems(7)
    assert len(systems) == 30
    cat = build_catalog(3, BICOLORED)
    rng = np.random.default_rng(0)
    for seed in range(8):
        vals = [F(int(x), 4) for x in rng.integers(0, 5, size=4)]
        v = WeightVector.from_sequence(cat, vals)
        h = random_host(BICOLORED, 7, F(1, 2), seed=seed)
        table = cat.lookup()
        best = max(sum(v[table[h.subset_labels(t)]] for t in blocks) for blocks in systems) * 3 / 21
        assert integer_optimum(h, 3, v).value == best


@pytest.mark.parametrize("n", [7, 9])
def test_relaxation_dominance(graph_vector, n):
    v = graph_vector(BICOLORED, {"K3": 1, "P3": F(1, 2), "Q3": 0, "I3": 1})
    for seed in range(3):
        h = random_host(BICOLORED, n, F(1, 2), seed=seed)
        assert integer_optimum(h, 3, v).value <= nustar(h, 3, v)


def test_integer_optimum_needs_divisible(k3_i3_bicolored):
    with pytest.raises(DecompositionError):
        integer_optimum(random_host(BICOLORED, 8, seed=1), 3, k3_i3_bicolored)


def test_random_graph_program():
    cat = graph_catalog(3)
    v = WeightVector(cat, {cat.alias("K3").id: F(1), cat.alias("P3").id: F(1, 2),
                           cat.alias("Q3").id: F(1, 2), cat.alias("I3").id: F(0)})
    prog = random_graph_lp(3, v, F(1, 2))
    assert prog.value == F(5, 8)
    assert prog.x_of("Q3") == F(3, 4) and prog.x_of("K3") == F(1, 4)
    for k in (3, 4):
        ck = graph_catalog(k)
        vk = WeightVector.constant(ck, 1)
        for p in (0, F(1, 4), F(1, 2), F(3, 4), 1):
            assert random_graph_lp(k, vk, p).is_feasible(random_graph_lp(k, vk, p).witness())


def test_build_lp_shape(t3_vector):
    h = blowup_cyclic([2, 2, 1])
    p = build_decomposition_lp(h, 3, t3_vector)
    assert p.m == comb(5, 2) and p.n == comb(5, 3)


def test_fractional_k4(graph_vector):
    from vecdecomp.hosts import edge_host

    v = graph_vector(UNDIRECTED, {"K3": 1, "P3": 0, "Q3": 0, "I3": 0})
    h = edge_host(4, list(itertools.combinations(range(4), 2)))
    res = dstar(h, 3, v)
    assert res.value == 2 and all(w == F(1, 2) for w in res.decomposition.weights.values())
