"""Independent LP oracle: enumerate every basis of Ax = b, x >= 0."""
import itertools
from fractions import Fraction


def _solve_square(M, rhs):
    n = len(M)
    aug = [list(row) + [r] for row, r in zip(M, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] / aug[col][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def _rank_rows(A):
    rows = [list(r) for r in A]
    keep = []
    basis = []
    for i, r in enumerate(rows):
        v = list(r)
        for piv, b in basis:
            if v[piv] != 0:
                f = v[piv] / b[piv]
                v = [x - f * y for x, y in zip(v, b)]
        nz = next((j for j, x in enumerate(v) if x != 0), None)
        if nz is not None:
            basis.append((nz, v))
            keep.append(i)
    return keep


def basic_feasible_optimum(A, b, c):
    """Max of c.x over all basic feasible solutions, or None if none exist.

    Rows that are linearly dependent are dropped (the caller's instances are
    consistent whenever any BFS exists).
    """
    m, n = len(A), len(A[0]) if A else len(c)
    keep = _rank_rows(A)
    A2 = [A[i] for i in keep]
    b2 = [b[i] for i in keep]
    r = len(A2)
    best = None
    for cols in itertools.combinations(range(n), r):
        M = [[A2[i][j] for j in cols] for i in range(r)]
        xb = _solve_square(M, b2) if r else []
        if xb is None or any(x < 0 for x in xb):
            continue
        x = [Fraction(0)] * n
        for j, val in zip(cols, xb):
            x[j] = val
        if any(sum(A[i][j] * x[j] for j in range(n)) != b[i] for i in range(m)):
            continue
        val = sum(ci * xi for ci, xi in zip(c, x))
        if best is None or val > best:
            best = val
    return best
