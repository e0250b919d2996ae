from fractions import Fraction

import numpy as np
import pytest

from vecdecomp.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpError,
    LpProblem,
    LpSolution,
    decide,
    dump_problem,
    load_problem,
    solve,
    solve_float_presolve,
    verify_certificate,
)

from lp_oracle import basic_feasible_optimum

F = Fraction


def random_lp(rng, m_max=10, n_max=30, feasible=True, bounded=False):
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(m, n_max + 1))
    A = [[F(int(x)) for x in rng.integers(-3, 4, size=n)] for _ in range(m)]
    if bounded:
        A[0] = [F(int(x)) for x in rng.integers(1, 4, size=n)]
    if feasible:
        x0 = [F(int(x)) for x in rng.integers(0, 3, size=n)]
        b = [sum(a * x for a, x in zip(row, x0)) for row in A]
    else:
        b = [F(int(x)) for x in rng.integers(-4, 5, size=m)]
    c = [F(int(x)) for x in rng.integers(-4, 5, size=n)]
    return LpProblem.make(A, b, c)


def test_tiny():
    p = LpProblem.make([[1, 1]], [1], [1, 0])
    s = solve(p)
    assert s.status == OPTIMAL and s.value == 1 and s.x == (1, 0)
    assert verify_certificate(p, s)


def test_infeasible_and_unbounded():
    assert solve(LpProblem.make([[1, 1], [1, 1]], [1, 2], [1, 0])).status == INFEASIBLE
    assert solve(LpProblem.make([[1, -1]], [0], [1, 0])).status == UNBOUNDED


def test_rejects_floats():
    with pytest.raises(LpError):
        LpProblem.make([[0.5]], [1], [1])


def test_random_graph_example():
    # LP(v, p) for v = (1, 1/2, 1/2, 0), p = 1/2, with slack-free equalities
    p = LpProblem.make([[1, 1, 1, 1], [-3, -1, 1, 3]], [1, 0],
                       [0, F(1, 2), F(1, 2), 1], ["I3", "Q3", "P3", "K3"])
    for hint in (None, [1, 3]):
        s = solve(p, basis_hint=hint)
        assert s.value == F(5, 8) and s.x == (0, F(3, 4), 0, F(1, 4))
        assert verify_certificate(p, s)


def test_beale_cycling_example():
    # classical degenerate example that cycles under the textbook largest-coefficient rule
    A = [[F(1, 4), -8, -1, 9, 1, 0, 0],
         [F(1, 2), -12, F(-1, 2), 3, 0, 1, 0],
         [0, 0, 1, 0, 0, 0, 1]]
    p = LpProblem.make(A, [0, 0, 1], [F(3, 4), -20, F(1, 2), -6, 0, 0, 0])
    s = solve(p)
    assert s.status == OPTIMAL and s.value == F(5, 4)
    assert verify_certificate(p, s)


def test_certificates_200_random():
    rng = np.random.default_rng(2024)
    optimal = 0
    for i in range(200):
        p = random_lp(rng, feasible=i % 5 != 0, bounded=i % 2 == 0)
        s = solve(p)
        if s.status == OPTIMAL:
            optimal += 1
            assert verify_certificate(p, s)
    assert optimal > 100


def test_oracle_agreement_small():
    rng = np.random.default_rng(7)
    for i in range(150):
        p = random_lp(rng, m_max=4, n_max=6, feasible=i % 4 != 0)
        s = solve(p)
        best = basic_feasible_optimum([list(r) for r in p.A], list(p.b), list(p.c))
        if best is None:
            assert s.status == INFEASIBLE
        elif s.status == OPTIMAL:
            assert s.value == best
        else:
            assert s.status == UNBOUNDED


def test_hint_route_matches_two_phase():
    rng = np.random.default_rng(11)
    for _ in range(40):
        p = random_lp(rng, m_max=6, n_max=12)
        a = solve(p)
        if a.status != OPTIMAL:
            continue
        b = solve(p, basis_hint=list(range(p.n)))
        assert b.value == a.value and verify_certificate(p, b)


def test_verify_rejects_bad_certificates():
    p = LpProblem.make([[1, 1]], [1], [1, 0])
    s = solve(p)
    bad = LpSolution(OPTIMAL, F(2), s.x, s.y, 0, "forged", ())
    assert not verify_certificate(p, bad)
    bad_y = LpSolution(OPTIMAL, s.value, s.x, (F(0),), 0, "forged", ())
    assert not verify_certificate(p, bad_y)
    with pytest.raises(LpError):
        verify_certificate(p, LpSolution(OPTIMAL, s.value, (F(1),), s.y, 0, "forged", ()))


def test_deterministic():
    rng = np.random.default_rng(5)
    p = random_lp(rng)
    assert solve(p) == solve(p)


def test_presolve_decisions():
    assert decide(5.0, [4], F(1, 100)).sides == ("above",)
    assert decide(3.0, [4], F(1, 100)).sides == ("below",)
    assert not decide(4.005, [4], F(1, 100)).decided
    p = LpProblem.make([[1, 1]], [1], [1, 0])
    with pytest.raises(LpError):
        solve_float_presolve(p, 0, [1])


def test_presolve_never_contradicts_exact():
    rng = np.random.default_rng(13)
    for _ in range(80):
        p = random_lp(rng, m_max=6, n_max=14)
        s = solve(p)
        if s.status != OPTIMAL:
            continue
        for t in (s.value - 1, s.value, s.value + F(1, 1000), s.value + 1):
            d = solve_float_presolve(p, F(1, 100), [t])
            if d.decided:
                assert (d.sides[0] == "above") == (s.value >= t)


def test_dump_roundtrip():
    rng = np.random.default_rng(3)
    p = random_lp(rng, m_max=4, n_max=8)
    q = load_problem(dump_problem(p, "random instance"))
    assert (q.A, q.b, q.c) == (p.A, p.b, p.c)
    with pytest.raises(LpError):
        load_problem("bogus 1 2\n")
