"""Run block programs and recursion chains on dense matrices, with counters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .catalog import BilinearTriple
from ._kernels import gemm_accumulate
from .core import IndivisibleSizeError, SizeMismatchError, as_dense, axpby
from .graph_ir import INPUTS, OUTPUT, GraphIR, Ref, build_bilinear_graph, live_temporaries, schedule


@dataclass
class ExecStats:
    """Operation counters aggregated over every recursion level.

    ``peak_workspace_elements`` is the largest number of temporary elements
    (T, S and P buffers across the active recursion frames) alive at once.
    A product's destination is charged to the frame that receives it, once
    the product is complete.
    """

    base_multiplies: int = 0
    block_multiplies: int = 0
    block_adds: int = 0
    element_adds: int = 0
    scalings: int = 0
    peak_workspace_elements: int = 0
    level_block_multiplies: list[int] = field(default_factory=list)

    def _count_product(self, depth: int) -> None:
        self.block_multiplies += 1
        while len(self.level_block_multiplies) <= depth:
            self.level_block_multiplies.append(0)
        self.level_block_multiplies[depth] += 1


# id(obj) -> (obj, derived); holding obj keeps the id from being reused.
_GRAPHS: dict[tuple[int, str], tuple[BilinearTriple, GraphIR]] = {}
_PLANS: dict[int, tuple[GraphIR, "_Plan"]] = {}


def graph_for(t: BilinearTriple, strategy: str = "fused") -> GraphIR:
    key = (id(t), strategy)
    hit = _GRAPHS.get(key)
    if hit is None or hit[0] is not t:
        hit = (t, schedule(build_bilinear_graph(t), strategy))
        _GRAPHS[key] = hit
    return hit[1]


@dataclass(frozen=True)
class _Plan:
    """A graph lowered to buffer slots; terms are (coef, left, right or -1)."""

    p: int
    slots: int
    inputs: tuple[tuple[int, ...], tuple[int, ...]]
    outputs: tuple[int, ...]
    steps: tuple[tuple[int, tuple[tuple[float, int, int], ...], int], ...]
    scalings: tuple[int, ...]


def _plan(g: GraphIR) -> _Plan:
    hit = _PLANS.get(id(g))
    if hit is not None and hit[0] is g:
        return hit[1]
    slot: dict[Ref, int] = {}

    def at(r: Ref) -> int:
        return slot.setdefault(r, len(slot))

    blocks = g.p * g.p
    inputs = tuple(tuple(at(Ref(name, i)) for i in range(blocks)) for name in INPUTS)
    outputs = tuple(at(Ref(OUTPUT, i)) for i in range(blocks))
    live = [len(x) for x in live_temporaries(g)]
    steps = []
    for s, nlive in zip(g.statements, live):
        terms = tuple((float(t.coef), at(t.left), at(t.right) if t.is_product else -1) for t in s.terms)
        steps.append((at(s.target), terms, nlive))
    plan = _Plan(g.p, len(slot), inputs, outputs, tuple(steps), tuple(s.scalings for s in g.statements))
    _PLANS[id(g)] = (g, plan)
    return plan


def _naive(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    C = np.zeros(X.shape)
    gemm_accumulate(C, X, Y, 1.0)
    return C


Multiply = Callable[[np.ndarray, np.ndarray, int], np.ndarray]


def _evaluate(terms, env: list, mul: Multiply, base_case: bool, ws: int,
              stats: ExecStats, depth: int, elems: int) -> np.ndarray:
    acc = None
    i = 0
    count = len(terms)
    while i < count:
        coef, left, right = terms[i]
        if right >= 0:
            X, Y = env[left], env[right]
            stats._count_product(depth)
            if acc is None:
                acc = mul(X, Y, ws)
            else:
                stats.block_adds += 1
                stats.element_adds += elems
                if base_case:
                    # continue the running k-sums of acc, like GEMM with beta=1
                    stats.base_multiplies += X.shape[0] ** 3
                    gemm_accumulate(acc, X, Y, 1.0)
                else:
                    acc = axpby(1.0, acc, 1.0, mul(X, Y, ws))
            i += 1
            continue
        X = env[left]
        if acc is None:
            if i + 1 < count and terms[i + 1][2] < 0:
                coef2, left2, _ = terms[i + 1]
                stats.block_adds += 1
                stats.element_adds += elems
                acc = axpby(coef, X, coef2, env[left2])
                i += 2
                continue
            acc = X if coef == 1.0 else coef * X
        else:
            stats.block_adds += 1
            stats.element_adds += elems
            acc = axpby(1.0, acc, coef, X)
        i += 1
    return acc


def _run(g: GraphIR, A: np.ndarray, B: np.ndarray, mul: Multiply, base_case: bool,
         stats: ExecStats, depth: int, ws: int) -> np.ndarray:
    n = A.shape[0]
    p = g.p
    if n % p:
        raise IndivisibleSizeError(
            f"indivisible size at recursion level {depth}: n={n} is not divisible by p={p}")
    plan = _plan(g)
    m = n // p
    elems = m * m
    env: list = [None] * plan.slots
    for M, slots in zip((A, B), plan.inputs):
        for i, k in enumerate(slots):
            r, c = divmod(i, p)
            env[k] = M[r * m:(r + 1) * m, c * m:(c + 1) * m].copy()
    for (target, terms, nlive), nscale in zip(plan.steps, plan.scalings):
        here = ws + nlive * elems
        if here > stats.peak_workspace_elements:
            stats.peak_workspace_elements = here
        stats.scalings += nscale
        env[target] = _evaluate(terms, env, mul, base_case, here, stats, depth, elems)
    C = np.empty((n, n))
    for i, k in enumerate(plan.outputs):
        r, c = divmod(i, p)
        C[r * m:(r + 1) * m, c * m:(c + 1) * m] = env[k]
    return C


def _operands(A, B) -> tuple[np.ndarray, np.ndarray]:
    A, B = as_dense(A), as_dense(B)
    if A.shape != B.shape:
        raise SizeMismatchError(f"size mismatch: {A.shape[0]} vs {B.shape[0]}")
    return A, B


def execute(g: GraphIR, A, B) -> tuple[np.ndarray, ExecStats]:
    """Run ``g`` once, in statement order, with the classical product for ``*``."""
    A, B = _operands(A, B)
    stats = ExecStats()

    def mul(X, Y, _ws):
        stats.base_multiplies += X.shape[0] ** 3
        return _naive(X, Y)

    C = _run(g, A, B, mul, True, stats, 0, 0)
    return C, stats


def recursive_multiply(chain: Sequence[BilinearTriple], A, B, cutoff: int = 1,
                       strategy: str = "fused") -> tuple[np.ndarray, ExecStats]:
    """Multiply by applying ``chain[0]`` at the top and ``chain[1:]`` inside each product.

    Falls back to :func:`naive_multiply` once the chain is used up or the
    block side is at most ``cutoff``.
    """
    if cutoff < 1:
        raise ValueError(f"cutoff must be at least 1, got {cutoff}")
    A, B = _operands(A, B)
    chain = list(chain)
    graphs = [graph_for(t, strategy) for t in chain]
    stats = ExecStats()

    def level(d: int, X: np.ndarray, Y: np.ndarray, ws: int) -> np.ndarray:
        n = X.shape[0]
        if d == len(chain) or n <= cutoff:
            stats.base_multiplies += n ** 3
            return _naive(X, Y)
        g = graphs[d]
        if n % g.p:
            raise IndivisibleSizeError(
                f"indivisible size at recursion level {d}: n={n} is not divisible by p={g.p}")
        child_base = d + 1 == len(chain) or n // g.p <= cutoff
        return _run(g, X, Y, lambda P, Q, w: level(d + 1, P, Q, w), child_base, stats, d, ws)

    return level(0, A, B, 0), stats
