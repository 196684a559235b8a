"""Wall-clock comparison of recursion chains against the classical baseline."""

from __future__ import annotations

import logging
import statistics
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import relative_error
from .catalog import BilinearTriple, chain_label, parse_chain
from .composer import effective_factor
from .core import naive_multiply
from .executor import recursive_multiply

log = logging.getLogger(__name__)

CSV_HEADER = "n,chain,cutoff,reps,median_seconds,gflops,max_rel_error"


@dataclass(frozen=True)
class BenchRow:
    n: int
    chain: str
    cutoff: int
    reps: int
    median_seconds: float
    max_rel_error: float = -1.0

    @property
    def gflops(self) -> float:
        # classical 2n^3 flops regardless of the algorithm actually run
        return 2.0 * self.n ** 3 / self.median_seconds / 1e9

    def csv(self) -> str:
        err = "-1" if self.max_rel_error < 0 else f"{self.max_rel_error:.3e}"
        return (f"{self.n},{self.chain},{self.cutoff},{self.reps},"
                f"{self.median_seconds:.6f},{self.gflops:.4f},{err}")


def _runner(chain: list[BilinearTriple], cutoff: int):
    if not chain:
        return naive_multiply
    return lambda A, B: recursive_multiply(chain, A, B, cutoff=cutoff)[0]


def time_once(fn, A, B) -> tuple[float, np.ndarray]:
    t0 = time.perf_counter()
    C = fn(A, B)
    return time.perf_counter() - t0, C


def bench_rows(sizes: Sequence[int], chains: Sequence, cutoff: int = 64, reps: int = 3,
               seed: int = 0, check: bool = False) -> tuple[list[BenchRow], list[str]]:
    """Benchmark every (size, chain) pair, largest size first.

    The classical baseline always runs first for each size. Pairs whose size
    the chain cannot split are skipped and reported in the second list.
    """
    if reps < 3:
        raise ValueError("reps must be at least 3")
    resolved: list[list[BilinearTriple]] = [[]]
    for c in chains:
        c = parse_chain(c) if isinstance(c, str) else list(c)
        if c and c not in resolved:
            resolved.append(c)
    rows, skipped = [], []
    for n in sorted(set(sizes), reverse=True):
        rng = np.random.default_rng([seed, n])
        A = rng.uniform(-1.0, 1.0, (n, n))
        B = rng.uniform(-1.0, 1.0, (n, n))
        reference = naive_multiply(A, B) if check else None
        for chain in resolved:
            label = chain_label(chain)
            if n % effective_factor(chain):
                msg = f"skipped n={n} chain={label}: {n} is not divisible by {effective_factor(chain)}"
                log.warning(msg)
                skipped.append(msg)
                continue
            fn = _runner(chain, cutoff)
            fn(A, B)  # warmup
            times = []
            for _ in range(reps):
                dt, C = time_once(fn, A, B)
                times.append(dt)
            err = float(relative_error(C, reference).max()) if check else -1.0
            rows.append(BenchRow(n, label, cutoff, reps, statistics.median(times), err))
    return rows, skipped


def bench_run(sizes: Sequence[int], chains: Sequence, cutoff: int = 64, reps: int = 3,
              seed: int = 0, check: bool = False) -> str:
    rows, _ = bench_rows(sizes, chains, cutoff, reps, seed, check)
    return "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n"
