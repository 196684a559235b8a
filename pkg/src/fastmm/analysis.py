"""Closed-form operation counts, workspace models and measured rounding error."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .catalog import BilinearTriple, chain_label
from .core import IndivisibleSizeError, naive_multiply
from .graph_ir import live_temporaries

DISTRIBUTIONS = ("uniform", "integer")


@dataclass(frozen=True)
class CostReport:
    n: int
    chain: str
    cutoff: int
    base_multiplies: int
    block_multiplies: int
    block_adds: int
    element_adds: int
    scalings: int
    workspace_elements: int
    speedup_vs_classical: Fraction

    CSV_HEADER = ("n,chain,cutoff,base_multiplies,block_multiplies,block_adds,"
                  "element_adds,scalings,workspace_elements,speedup_vs_classical")

    def csv_row(self) -> str:
        return ",".join(str(x) for x in (
            self.n, self.chain, self.cutoff, self.base_multiplies, self.block_multiplies,
            self.block_adds, self.element_adds, self.scalings, self.workspace_elements,
            f"{float(self.speedup_vs_classical):.6f}"))


def level_additions(t: BilinearTriple) -> int:
    """Block additions one level of ``t`` performs (signs folded into the adds)."""
    return (t.nnz("U") - t.rank) + (t.nnz("V") - t.rank) + (t.nnz("W") - t.p * t.p)


def level_scalings(t: BilinearTriple) -> int:
    return sum(1 for mat in (t.U, t.V, t.W) for row in mat for x in row if abs(x) not in (0, 1))


def _levels(chain: Sequence[BilinearTriple], n: int, cutoff: int):
    """Yield ``(triple, block side, number of instances)`` for each recursion level."""
    instances = 1
    for d, t in enumerate(chain):
        if n <= cutoff:
            break
        if n % t.p:
            raise IndivisibleSizeError(
                f"indivisible size at recursion level {d}: n={n} is not divisible by p={t.p}")
        n //= t.p
        yield t, n, instances
        instances *= t.rank
    yield None, n, instances


def count_model(chain: Sequence[BilinearTriple], n: int, cutoff: int = 1,
                strategy: str = "fused") -> CostReport:
    base = block_mults = adds = elem_adds = scal = 0
    for t, m, k in _levels(chain, n, cutoff):
        if t is None:
            base = k * m ** 3
            break
        block_mults += k * t.rank
        adds += k * level_additions(t)
        elem_adds += k * level_additions(t) * m * m
        scal += k * level_scalings(t)
    return CostReport(
        n=n, chain=chain_label(chain), cutoff=cutoff,
        base_multiplies=base, block_multiplies=block_mults, block_adds=adds,
        element_adds=elem_adds, scalings=scal,
        workspace_elements=workspace_model(chain, n, strategy, cutoff),
        speedup_vs_classical=Fraction(n ** 3, base),
    )


def _fused_profile(t: BilinearTriple) -> list[tuple[int, bool]]:
    """(live temporaries, is a multiply) for each statement of t's fused program."""
    from .executor import graph_for

    g = graph_for(t, "fused")
    return [(len(live), s.multiplies > 0) for live, s in zip(live_temporaries(g), g.statements)]


def workspace_model(chain: Sequence[BilinearTriple], n: int, strategy: str = "fused",
                    cutoff: int = 1) -> int:
    """Peak temporary elements across the recursion.

    ``product-major`` charges T, S and one P buffer per level. ``fused``
    follows the scheduled program: a statement holds its live temporaries,
    and a multiply additionally holds the workspace of the level below. When
    some product builds both operands this is ``2*(n/p)**2`` per level.
    """
    if strategy not in ("fused", "product-major"):
        raise ValueError(f"unknown strategy {strategy!r}")
    levels = [(t, m) for t, m, _ in _levels(chain, n, cutoff) if t is not None]
    if strategy == "product-major":
        return sum(3 * m * m for _, m in levels)
    below = 0
    for t, m in reversed(levels):
        below = max(live * m * m + (below if mult else 0) for live, mult in _fused_profile(t))
    return below


def random_operands(rng: np.random.Generator, n: int, dist: str = "uniform"):
    if dist == "uniform":
        return rng.uniform(-1.0, 1.0, (n, n)), rng.uniform(-1.0, 1.0, (n, n))
    if dist == "integer":
        return (rng.integers(-8, 9, (n, n)).astype(np.float64),
                rng.integers(-8, 9, (n, n)).astype(np.float64))
    raise ValueError(f"unknown distribution {dist!r}; choose from {', '.join(DISTRIBUTIONS)}")


def relative_error(C: np.ndarray, reference: np.ndarray) -> np.ndarray:
    return np.abs(C - reference) / (1.0 + np.abs(reference))


def error_profile(chain: Sequence[BilinearTriple], n: int, trials: int, seed: int,
                  dist: str = "uniform", cutoff: int = 1) -> tuple[float, float]:
    """(max, median) over trials of the per-trial max relative error against the oracle."""
    from .executor import recursive_multiply

    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    per_trial = []
    for _ in range(trials):
        A, B = random_operands(rng, n, dist)
        C, _ = recursive_multiply(chain, A, B, cutoff=cutoff)
        per_trial.append(float(relative_error(C, naive_multiply(A, B)).max()))
    return max(per_trial), statistics.median(per_trial)
