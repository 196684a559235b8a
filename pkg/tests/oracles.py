"""Slow, obviously-correct reference implementations used as test oracles."""

from fractions import Fraction
from itertools import product


def brent_violations(t):
    """All (x, y, z) where the tensor identity fails, by direct triple loop."""
    p, n2 = t.p, t.p * t.p
    bad = []
    for x, y, z in product(range(n2), repeat=3):
        i, k = divmod(x, p)
        k2, j = divmod(y, p)
        i2, j2 = divmod(z, p)
        want = int(k == k2 and i == i2 and j == j2)
        got = sum(t.U[x][q] * t.V[y][q] * t.W[z][q] for q in range(t.rank))
        if got != want:
            bad.append((x, y, z))
    return bad


def bilinear_apply(t, A, B):
    """Evaluate C_z = sum_q W[z][q] (sum_x U[x][q] A_x)(sum_y V[y][q] B_y) on scalars."""
    n2 = t.p * t.p
    a = [Fraction(v) for row in A for v in row]
    b = [Fraction(v) for row in B for v in row]
    prods = []
    for q in range(t.rank):
        left = sum(t.U[x][q] * a[x] for x in range(n2))
        right = sum(t.V[y][q] * b[y] for y in range(n2))
        prods.append(left * right)
    c = [sum(t.W[z][q] * prods[q] for q in range(t.rank)) for z in range(n2)]
    return [c[r * t.p:(r + 1) * t.p] for r in range(t.p)]


def matmul_exact(A, B):
    n = len(A)
    return [[sum(Fraction(A[i][k]) * Fraction(B[k][j]) for k in range(n)) for j in range(n)]
            for i in range(n)]


def interpret_graph(g, A, B):
    """Run a block program on scalar entries with exact rational arithmetic."""
    env = {}
    for k, v in enumerate(x for row in A for x in row):
        env[("ADP", k)] = Fraction(v)
    for k, v in enumerate(x for row in B for x in row):
        env[("BDP", k)] = Fraction(v)
    for s in g.statements:
        total = Fraction(0)
        for term in s.terms:
            left = env[(term.left.name, term.left.index)]
            if term.right is None:
                total += term.coef * left
            else:
                total += term.coef * left * env[(term.right.name, term.right.index)]
        env[(s.target.name, s.target.index)] = total
    return [[env[("CDP", i * g.p + j)] for j in range(g.p)] for i in range(g.p)]
