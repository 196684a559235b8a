"""Fixed-order accumulation kernels behind the classical oracle.

Both kernels add ``sign * A[i, k] * B[k, j]`` into ``C[i, j]`` for k ascending,
one rounded multiply and one rounded add per step. Neither contracts to FMA,
so the numba kernel and the numpy fallback agree bit for bit.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

_PANEL_ROWS = 64
_PANEL_ELEMENTS = 1 << 17


def gemm_accumulate_numpy(C: np.ndarray, A: np.ndarray, B: np.ndarray, sign: float = 1.0) -> None:
    n = A.shape[0]
    rows = min(_PANEL_ROWS, n)
    tmp = np.empty((rows, n))
    for r0 in range(0, n, rows):
        r1 = min(r0 + rows, n)
        Cp = C[r0:r1]
        Ap = A[r0:r1] * sign
        t = tmp[: r1 - r0]
        for k in range(n):
            np.multiply(Ap[:, k, None], B[k], out=t)
            np.add(Cp, t, out=Cp)


if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _gemm_accumulate_jit(C, A, B, sign):  # pragma: no cover - compiled
        n = A.shape[0]
        # k panels of B sized to stay hot in L2 (~1 MiB)
        kb = max(4, min(n, _PANEL_ELEMENTS // max(n, 1)))
        for k0 in range(0, n, kb):
            k1 = min(n, k0 + kb)
            for i in range(n):
                k = k0
                # four k steps per sweep of row i; the adds stay in k order
                while k + 4 <= k1:
                    a0 = sign * A[i, k]
                    a1 = sign * A[i, k + 1]
                    a2 = sign * A[i, k + 2]
                    a3 = sign * A[i, k + 3]
                    for j in range(n):
                        c = C[i, j]
                        c += a0 * B[k, j]
                        c += a1 * B[k + 1, j]
                        c += a2 * B[k + 2, j]
                        c += a3 * B[k + 3, j]
                        C[i, j] = c
                    k += 4
                while k < k1:
                    a = sign * A[i, k]
                    for j in range(n):
                        C[i, j] += a * B[k, j]
                    k += 1

    def gemm_accumulate(C: np.ndarray, A: np.ndarray, B: np.ndarray, sign: float = 1.0) -> None:
        _gemm_accumulate_jit(C, A, B, float(sign))

    HAVE_JIT = True
else:  # pragma: no cover
    gemm_accumulate = gemm_accumulate_numpy
    HAVE_JIT = False
