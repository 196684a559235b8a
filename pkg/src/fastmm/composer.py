"""Kronecker composition of bilinear triples.

Composing an outer algorithm of factor ``po`` with an inner one of factor
``pi`` gives a one-level algorithm of factor ``po * pi``: product
``(qo, qi)`` applies the inner algorithm to the blocks produced by outer
product ``qo``. Rows are renumbered so that outer block ``b`` and inner
block ``s`` land on the row-major index of the fine ``po * pi`` split.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

from .catalog import BilinearTriple

ChainSpec = Sequence[BilinearTriple]


def fine_index(b: int, s: int, po: int, pi: int) -> int:
    """Row-major index, in the ``po*pi`` split, of inner block ``s`` of outer block ``b``."""
    n = po * pi
    row = (b // po) * pi + s // pi
    col = (b % po) * pi + s % pi
    return row * n + col


def _kron(outer, inner, po: int, pi: int):
    ro, ri = len(outer[0]), len(inner[0])
    rows = (po * pi) ** 2
    out = [[0] * (ro * ri) for _ in range(rows)]
    for b, orow in enumerate(outer):
        for s, irow in enumerate(inner):
            dest = out[fine_index(b, s, po, pi)]
            for qo, x in enumerate(orow):
                if x == 0:
                    continue
                base = qo * ri
                for qi, y in enumerate(irow):
                    if y != 0:
                        dest[base + qi] = x * y
    return out


def kron_compose(outer: BilinearTriple, inner: BilinearTriple, name: str | None = None) -> BilinearTriple:
    po, pi = outer.p, inner.p
    return BilinearTriple(
        name or f"{outer.name}*{inner.name}",
        po * pi,
        outer.rank * inner.rank,
        _kron(outer.U, inner.U, po, pi),
        _kron(outer.V, inner.V, po, pi),
        _kron(outer.W, inner.W, po, pi),
    )


def chain_flatten(chain: ChainSpec) -> BilinearTriple:
    """Left fold of :func:`kron_compose`; the first member is the outermost level."""
    if not chain:
        raise ValueError("nothing to flatten: the chain is empty")
    if len(chain) == 1:
        return chain[0]
    return reduce(kron_compose, chain)


def effective_factor(chain: ChainSpec) -> int:
    f = 1
    for t in chain:
        f *= t.p
    return f


def effective_rank(chain: ChainSpec) -> int:
    r = 1
    for t in chain:
        r *= t.rank
    return r
