"""Exact coefficients, dense square matrices and block partitions.

A dense matrix is a C-contiguous ``float64`` numpy array of shape ``(n, n)``;
element ``(i, j)`` sits at flat offset ``i * n + j``. Coefficients are
:class:`fractions.Fraction` values, which are always kept in lowest terms
with a positive denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._kernels import gemm_accumulate

Coefficient = Fraction


class IndivisibleSizeError(ValueError):
    """A split factor does not divide the matrix side."""


class SizeMismatchError(ValueError):
    pass


def coefficient(value) -> Fraction:
    """Parse an int, Fraction or ``"num/den"`` string into a Coefficient."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            if int(den) == 0:
                raise ZeroDivisionError(f"zero denominator in coefficient {value!r}")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    if isinstance(value, float) and value.is_integer():
        return Fraction(int(value))
    raise TypeError(f"cannot interpret {value!r} as an exact coefficient")


def format_coefficient(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def as_dense(A) -> np.ndarray:
    """Return ``A`` as a square row-major float64 matrix (copying only if needed)."""
    M = np.ascontiguousarray(A, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


@dataclass(frozen=True)
class PartitionSet:
    parent_n: int
    factor: int
    blocks: tuple[np.ndarray, ...]

    @property
    def block_n(self) -> int:
        return self.parent_n // self.factor

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.blocks[i]


def partition(A, p: int) -> PartitionSet:
    """Split ``A`` into ``p * p`` copied blocks in row-major block order.

    Block ``i`` is block row ``i // p``, block column ``i % p``.
    """
    A = as_dense(A)
    n = A.shape[0]
    if p < 1 or n % p:
        raise IndivisibleSizeError(f"indivisible size: n={n} is not divisible by p={p}")
    m = n // p
    blocks = tuple(
        A[r * m:(r + 1) * m, c * m:(c + 1) * m].copy()
        for r in range(p)
        for c in range(p)
    )
    return PartitionSet(n, p, blocks)


def unpartition(P: PartitionSet | Sequence[np.ndarray]) -> np.ndarray:
    blocks = list(P.blocks if isinstance(P, PartitionSet) else P)
    p = math.isqrt(len(blocks))
    if p == 0 or p * p != len(blocks):
        raise ValueError(f"block count {len(blocks)} is not a perfect square")
    m = blocks[0].shape[0]
    for i, blk in enumerate(blocks):
        if blk.shape != (m, m):
            raise SizeMismatchError(f"block {i} has shape {blk.shape}, expected {(m, m)}")
    out = np.empty((p * m, p * m))
    for i, blk in enumerate(blocks):
        r, c = divmod(i, p)
        out[r * m:(r + 1) * m, c * m:(c + 1) * m] = blk
    return out


def _check_same(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise SizeMismatchError(f"size mismatch: {A.shape[0]} vs {B.shape[0]}")


def mat_add(alpha, A, beta, B) -> np.ndarray:
    """Element-wise ``alpha * A + beta * B`` as a new matrix."""
    A = as_dense(A)
    B = as_dense(B)
    _check_same(A, B)
    return axpby(float(alpha), A, float(beta), B)


def axpby(alpha: float, A: np.ndarray, beta: float, B: np.ndarray) -> np.ndarray:
    """Unchecked :func:`mat_add` for validated float64 blocks."""
    if alpha == 1.0:
        if beta == 1.0:
            return np.add(A, B)
        if beta == -1.0:
            return np.subtract(A, B)
    # Zero coefficients still go through the product so signed zeros match.
    left = alpha * A
    if beta == 1.0:
        left += B
    elif beta == -1.0:
        left -= B
    else:
        left += beta * B
    return left


def naive_multiply(A, B) -> np.ndarray:
    """Classical product with each entry summed over k in ascending order.

    This summation order is the reference every error figure is measured
    against.
    """
    A = as_dense(A)
    B = as_dense(B)
    _check_same(A, B)
    C = np.zeros_like(A)
    gemm_accumulate(C, A, B, 1.0)
    return C


def multiply_accumulate(C: np.ndarray, A: np.ndarray, B: np.ndarray, sign: float = 1.0) -> None:
    """In place ``C += sign * A @ B``, continuing C's running sums in k order."""
    _check_same(A, B)
    _check_same(C, A)
    gemm_accumulate(C, A, B, sign)
