"""Proofs that a bilinear triple really multiplies matrices.

The exhaustive check evaluates every Brent equation

    sum_q U[x][q] * V[y][q] * W[z][q] == [k == k' and i == i' and j == j']

for x = (i, k), y = (k', j), z = (i', j') in exact integer arithmetic.
The sampled check is a polynomial identity test: random small-integer
operands pushed through the algorithm, compared with the exact product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .catalog import BilinearTriple

MAX_VIOLATIONS = 32
EXHAUSTIVE_MAX_P = 6


class Violation(NamedTuple):
    x: int | None
    y: int | None
    z: int
    expected: Fraction
    got: Fraction


@dataclass
class VerifyReport:
    passed: bool
    checked: int
    mode: str
    violations: list[Violation] = field(default_factory=list)
    total_violations: int = 0

    def __bool__(self) -> bool:
        return self.passed


def _integer_matrix(mat) -> tuple[np.ndarray, int]:
    """Scale a Fraction matrix to integers; returns (ints, common denominator)."""
    den = 1
    for row in mat:
        for x in row:
            den = math.lcm(den, x.denominator)
    vals = [[int(x * den) for x in row] for row in mat]
    big = max((abs(v) for row in vals for v in row), default=0)
    return np.array(vals, dtype=object if big >= 2**20 else np.int64), den


def _as_int64_safe(*mats: np.ndarray, rank: int) -> bool:
    if any(m.dtype == object for m in mats):
        return False
    bound = rank
    for m in mats:
        bound *= max(1, int(np.abs(m).max()))
    return bound < 2**62


def brent_check(t: BilinearTriple, mode: str | None = None, *, seed: int = 0, trials: int = 20) -> VerifyReport:
    """Verify ``t``; ``mode`` is ``"exhaustive"``, ``"sampled"`` or None (pick by size)."""
    if mode is None:
        mode = "exhaustive" if t.p <= EXHAUSTIVE_MAX_P else "sampled"
    if mode == "exhaustive":
        return _exhaustive(t)
    if mode == "sampled":
        return _sampled(t, seed, trials)
    raise ValueError(f"unknown verification mode {mode!r}")


def _exhaustive(t: BilinearTriple) -> VerifyReport:
    p, r, n2 = t.p, t.rank, t.p * t.p
    U, du = _integer_matrix(t.U)
    V, dv = _integer_matrix(t.V)
    W, dw = _integer_matrix(t.W)
    scale = du * dv * dw
    if not _as_int64_safe(U, V, W, rank=r):
        U, V, W = (m.astype(object) for m in (U, V, W))
    # tensor[x, y, z] = sum_q U[x,q] V[y,q] W[z,q]
    UV = (U[:, None, :] * V[None, :, :]).reshape(n2 * n2, r)
    tensor = (UV @ W.T).reshape(n2, n2, n2)

    expected = np.zeros((n2, n2, n2), dtype=tensor.dtype)
    for i in range(p):
        for k in range(p):
            for j in range(p):
                expected[i * p + k, k * p + j, i * p + j] = scale
    bad = np.argwhere(tensor != expected)
    violations = [
        Violation(int(x), int(y), int(z), Fraction(int(expected[x, y, z]), scale), Fraction(int(tensor[x, y, z]), scale))
        for x, y, z in bad[:MAX_VIOLATIONS]
    ]
    return VerifyReport(len(bad) == 0, n2 ** 3, "exhaustive", violations, len(bad))


def _sampled(t: BilinearTriple, seed: int, trials: int) -> VerifyReport:
    p, n2 = t.p, t.p * t.p
    U, du = _integer_matrix(t.U)
    V, dv = _integer_matrix(t.V)
    W, dw = _integer_matrix(t.W)
    scale = du * dv * dw
    Ut, Vt, Wo = U.T.astype(object), V.T.astype(object), W.astype(object)
    rng = np.random.default_rng(seed)
    violations: list[Violation] = []
    total = 0
    for _ in range(trials):
        a = rng.integers(-9, 10, size=(p, p))
        b = rng.integers(-9, 10, size=(p, p))
        exact = (a.astype(object) @ b.astype(object)).reshape(n2)
        T = Ut @ a.reshape(n2).astype(object)
        S = Vt @ b.reshape(n2).astype(object)
        C = Wo @ (T * S)
        for z in np.flatnonzero(C != exact * scale):
            total += 1
            if len(violations) < MAX_VIOLATIONS:
                violations.append(Violation(None, None, int(z), Fraction(int(exact[z])), Fraction(int(C[z]), scale)))
    return VerifyReport(total == 0, trials * n2, "sampled", violations, total)


def numeric_spot_check(t: BilinearTriple, n: int, trials: int = 5, seed: int = 0, dist: str = "uniform") -> float:
    """Largest ``|C_fast - C_naive| / (1 + |C_naive|)`` over one-level runs of ``t``."""
    from .analysis import random_operands, relative_error
    from .core import IndivisibleSizeError, naive_multiply
    from .executor import recursive_multiply

    if n % t.p:
        raise IndivisibleSizeError(f"indivisible size: n={n} is not divisible by p={t.p}")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        A, B = random_operands(rng, n, dist)
        C, _ = recursive_multiply([t], A, B, cutoff=1)
        worst = max(worst, float(relative_error(C, naive_multiply(A, B)).max()))
    return worst
