"""Emit a scheduled block program as a BLAS-style C call sequence.

Calls used by the emitted text::

    gemm(alpha, X, Y, beta, Z, m)   Z = alpha * X * Y + beta * Z
    gema(alpha, X, beta, Y, Z, m)   Z = alpha * X + beta * Y
    gecopy(alpha, X, Z, m)          Z = alpha * X

Every operand is a ``view_t``: parent base pointer, row and column offset
and leading dimension, i.e. a tile of a row-major parent. Temporaries live
in a caller-provided workspace of ``slots * m * m`` elements; tiles are
reused once their value is dead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graph_ir import INPUTS, OUTPUT, GraphError, GraphIR, Ref, Statement

DIALECTS = ("c-blas",)


@dataclass(frozen=True)
class EmitConfig:
    dialect: str = "c-blas"
    element_type_name: str = "double"
    buffer_prefix: str = "W"

    def __post_init__(self):
        if self.dialect not in DIALECTS:
            raise ValueError(f"unknown dialect {self.dialect!r}; registered: {', '.join(DIALECTS)}")


def _c_scalar(c: Fraction) -> str:
    if c.denominator == 1:
        return f"{c.numerator}.0"
    return f"({c.numerator}.0/{c.denominator}.0)"


def _allocate(g: GraphIR) -> tuple[dict[Ref, int], int, bool]:
    """Linear-scan assignment of temporaries to workspace tiles."""
    last_use: dict[Ref, int] = {}
    for k, s in enumerate(g.statements):
        for r in s.uses():
            if r.is_temporary:
                last_use[r] = k
    tile: dict[Ref, int] = {}
    free: list[int] = []
    held: dict[int, Ref] = {}
    count = 0
    needs_scratch = False
    for k, s in enumerate(g.statements):
        if sum(t.is_product for t in s.terms[1:]):
            needs_scratch = True
        if s.target.is_temporary and s.target not in tile:
            if free:
                slot = free.pop(0)
            else:
                slot, count = count, count + 1
            tile[s.target] = slot
            held[slot] = s.target
        for slot, r in list(held.items()):
            if last_use.get(r, k) <= k:
                del held[slot]
                free.append(slot)
        free.sort()
    return tile, count, needs_scratch


def emit_callseq(g: GraphIR, cfg: EmitConfig | None = None, n: int | None = None) -> str:
    cfg = cfg or EmitConfig()
    if g.schedule is None:
        raise GraphError("graph is not scheduled; call schedule() before emitting code")
    elem = cfg.element_type_name
    pre = cfg.buffer_prefix
    tile, slots, needs_scratch = _allocate(g)
    scratch = f"{pre}{slots}" if needs_scratch else None
    total_slots = slots + (1 if needs_scratch else 0)

    def view(r: Ref) -> str:
        if r.is_temporary:
            return f"{pre}{tile[r]}"
        return f"{r.name}{r.index}"

    fn = "".join(ch if ch.isalnum() else "_" for ch in g.name)
    out = [
        "/* fastmm call sequence",
        f" * algorithm: {g.name}",
        f" * factor: {g.p}, block products: {g.block_multiplies}, block additions: {g.block_additions}",
        f" * schedule: {g.schedule}",
    ]
    if n is not None:
        if n % g.p:
            raise GraphError(f"indivisible size: n={n} is not divisible by p={g.p}")
        out.append(f" * problem size: n = {n}, block side m = {n // g.p}")
    out += [
        f" * workspace: {total_slots} tile(s) of m*m elements",
        " *",
        " * gemm(alpha, X, Y, beta, Z, m): Z = alpha*X*Y + beta*Z",
        " * gema(alpha, X, beta, Y, Z, m): Z = alpha*X + beta*Y",
        " * gecopy(alpha, X, Z, m):        Z = alpha*X",
        " */",
        f"typedef struct {{ {elem} *base; int row, col, ld; }} view_t;",
        "",
        f"void {fn}({elem} *A, {elem} *B, {elem} *C, {elem} *{pre}, int n)",
        "{",
        f"    const int m = n / {g.p};",
        "    /* blocks: (parent base, row offset, column offset, leading dimension) */",
    ]
    for parent, name in zip(("A", "B", "C"), INPUTS + (OUTPUT,)):
        for i in range(g.p * g.p):
            r, c = divmod(i, g.p)
            out.append(f"    view_t {name}{i} = {{{parent}, {r} * m, {c} * m, n}};")
    if total_slots:
        out.append("    /* workspace tiles */")
        for k in range(total_slots):
            out.append(f"    view_t {pre}{k} = {{{pre} + {k} * m * m, 0, 0, m}};")
    out.append("")
    for s in g.statements:
        out.append(f"    /* {s} */")
        out.extend("    " + call for call in _calls(s, view, scratch))
    out.append("}")
    return "\n".join(out) + "\n"


def _calls(s: Statement, view, scratch: str | None) -> list[str]:
    z = view(s.target)
    terms = s.terms
    calls = []
    first = terms[0]
    i = 1
    if first.is_product:
        calls.append(f"gemm(1.0, {view(first.left)}, {view(first.right)}, 0.0, {z}, m);")
    elif len(terms) > 1 and not terms[1].is_product:
        second = terms[1]
        calls.append(f"gema({_c_scalar(first.coef)}, {view(first.left)}, "
                     f"{_c_scalar(second.coef)}, {view(second.left)}, {z}, m);")
        i = 2
    else:
        calls.append(f"gecopy({_c_scalar(first.coef)}, {view(first.left)}, {z}, m);")
    for term in terms[i:]:
        if term.is_product:
            calls.append(f"gemm(1.0, {view(term.left)}, {view(term.right)}, 0.0, {scratch}, m);")
            calls.append(f"gema(1.0, {z}, 1.0, {scratch}, {z}, m);")
        else:
            calls.append(f"gema(1.0, {z}, {_c_scalar(term.coef)}, {view(term.left)}, {z}, m);")
    return calls
