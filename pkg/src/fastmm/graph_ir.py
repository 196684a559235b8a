"""Straight-line block programs: declarations plus ``<<`` assignments.

A program is a list of statements over named buffers. ``ADP``/``BDP`` are the
operand partitions, ``CDP`` the result partition, and ``T``/``S``/``P`` the
temporaries of a bilinear algorithm. The printed form is valid input for
:func:`parse_graph`::

    CDP[0] << (ADP[0]) * (BDP[0]) + (ADP[1]) * (BDP[2])
    T0 << (ADP[2]) - (ADP[3])
    P0 << (T0) * (BDP[1])
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .catalog import BilinearTriple
from .core import coefficient, format_coefficient

INPUTS = ("ADP", "BDP")
OUTPUT = "CDP"
PARTITIONS = INPUTS + (OUTPUT,)
TEMPORARIES = ("T", "S", "P")
STRATEGIES = ("product-major", "fused")

ONE = Fraction(1)


class GraphError(ValueError):
    pass


class GraphCycleError(GraphError):
    pass


@dataclass(frozen=True, order=True)
class Ref:
    name: str
    index: int

    def __str__(self) -> str:
        if self.name in PARTITIONS:
            return f"{self.name}[{self.index}]"
        return f"{self.name}{self.index}"

    @property
    def is_temporary(self) -> bool:
        return self.name in TEMPORARIES


@dataclass(frozen=True)
class Term:
    """``coef * left`` or, when ``right`` is set, ``left * right`` (coef must be 1)."""

    coef: Fraction
    left: Ref
    right: Ref | None = None

    def __post_init__(self):
        if self.right is not None and self.coef != 1:
            raise GraphError("product terms carry no scalar coefficient")

    @property
    def is_product(self) -> bool:
        return self.right is not None

    def refs(self) -> tuple[Ref, ...]:
        return (self.left,) if self.right is None else (self.left, self.right)


@dataclass(frozen=True)
class Statement:
    target: Ref
    terms: tuple[Term, ...]

    def uses(self) -> list[Ref]:
        return [r for term in self.terms for r in term.refs()]

    @property
    def multiplies(self) -> int:
        return sum(term.is_product for term in self.terms)

    @property
    def additions(self) -> int:
        return len(self.terms) - 1

    @property
    def scalings(self) -> int:
        return sum(1 for term in self.terms if abs(term.coef) != 1)

    @property
    def is_accumulation(self) -> bool:
        first = self.terms[0]
        return len(self.terms) > 1 and not first.is_product and first.coef == 1 and first.left == self.target

    def __str__(self) -> str:
        return format_statement(self)


@dataclass(frozen=True)
class GraphIR:
    p: int
    statements: tuple[Statement, ...]
    name: str = "graph"
    schedule: str | None = None
    constants: dict = field(default_factory=lambda: {"alpha": ONE}, compare=False)

    @property
    def inputs(self) -> tuple[str, ...]:
        return INPUTS

    @property
    def output(self) -> str:
        return OUTPUT

    @property
    def temporaries(self) -> list[Ref]:
        seen = {s.target for s in self.statements if s.target.is_temporary}
        return sorted(seen)

    @property
    def block_multiplies(self) -> int:
        return sum(s.multiplies for s in self.statements)

    @property
    def block_additions(self) -> int:
        return sum(s.additions for s in self.statements)

    def __str__(self) -> str:
        return pretty_print(self)


# -- builders ---------------------------------------------------------------

def build_classical_graph(p: int) -> GraphIR:
    """Blocked definition: ``C[i*p+j] = sum_k A[i*p+k] * B[k*p+j]``, k ascending."""
    if p < 1:
        raise GraphError(f"split factor must be positive, got {p}")
    stmts = []
    for i in range(p):
        for j in range(p):
            terms = tuple(Term(ONE, Ref("ADP", i * p + k), Ref("BDP", k * p + j)) for k in range(p))
            stmts.append(Statement(Ref(OUTPUT, i * p + j), terms))
    return GraphIR(p, tuple(stmts), name=f"classical-p{p}")


def _positive_first(terms) -> tuple[Term, ...]:
    # A leading positive term prints without a scalar prefix.
    return tuple(sorted(terms, key=lambda term: term.coef < 0))


def _operand(name: str, temp: str, q: int, column, stmts: list) -> Ref:
    if len(column) == 1 and column[0][1] == 1:
        return Ref(name, column[0][0])
    ref = Ref(temp, q)
    stmts.append(Statement(ref, _positive_first(Term(c, Ref(name, k)) for k, c in column)))
    return ref


def build_bilinear_graph(t: BilinearTriple) -> GraphIR:
    """Product-major program for ``t``: T_q, S_q, P_q for every q, then the outputs."""
    stmts: list[Statement] = []
    for q in range(t.rank):
        left = _operand("ADP", "T", q, t.column("U", q), stmts)
        right = _operand("BDP", "S", q, t.column("V", q), stmts)
        stmts.append(Statement(Ref("P", q), (Term(ONE, left, right),)))
    for i, row in enumerate(t.W):
        terms = _positive_first(Term(c, Ref("P", q)) for q, c in enumerate(row) if c != 0)
        if not terms:
            raise GraphError(f"{t.name}: output {i} receives no product")
        stmts.append(Statement(Ref(OUTPUT, i), terms))
    return GraphIR(t.p, tuple(stmts), name=t.name)


# -- printing and parsing ---------------------------------------------------

def _format_term(term: Term, first: bool) -> str:
    if term.is_product:
        body = f"({term.left}) * ({term.right})"
        return body if first else f"+ {body}"
    c = term.coef
    if first:
        return f"({term.left})" if c == 1 else f"{format_coefficient(c)} * ({term.left})"
    sign = "+" if c > 0 else "-"
    mag = abs(c)
    body = f"({term.left})" if mag == 1 else f"{format_coefficient(mag)} * ({term.left})"
    return f"{sign} {body}"


def format_statement(s: Statement) -> str:
    parts = [_format_term(term, i == 0) for i, term in enumerate(s.terms)]
    return f"{s.target} << " + " ".join(parts)


def pretty_print(g: GraphIR) -> str:
    return "".join(format_statement(s) + "\n" for s in g.statements)


_REF = r"(?:[A-Z]DP\[\d+\]|[TSP]\d+)"
_TOKEN = re.compile(
    rf"\s*(?:(?P<ref>\({_REF}\))|(?P<op>[+\-*])|(?P<num>\d+(?:/\d+)?))"
)


def _parse_ref(text: str) -> Ref:
    m = re.fullmatch(r"([A-Z]DP)\[(\d+)\]|([TSP])(\d+)", text.strip())
    if not m:
        raise GraphError(f"bad buffer reference {text!r}")
    if m.group(1):
        if m.group(1) not in PARTITIONS:
            raise GraphError(f"unknown partition {m.group(1)!r}")
        return Ref(m.group(1), int(m.group(2)))
    return Ref(m.group(3), int(m.group(4)))


def _tokenize(expr: str, lineno: int) -> list[tuple[str, str]]:
    tokens, pos = [], 0
    expr = expr.rstrip()
    while pos < len(expr):
        m = _TOKEN.match(expr, pos)
        if not m or m.end() == pos:
            raise GraphError(f"line {lineno}: cannot parse near {expr[pos:]!r}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
    return tokens


def parse_statement(line: str, lineno: int = 1) -> Statement:
    if "<<" not in line:
        raise GraphError(f"line {lineno}: missing '<<'")
    lhs, rhs = line.split("<<", 1)
    target = _parse_ref(lhs)
    tokens = _tokenize(rhs, lineno)
    terms: list[Term] = []
    pos = 0
    sign = 1

    def expect(kind):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos][0] != kind:
            got = tokens[pos][1] if pos < len(tokens) else "end of line"
            raise GraphError(f"line {lineno}: expected {kind}, got {got!r}")
        pos += 1
        return tokens[pos - 1][1]

    while True:
        if not terms and pos < len(tokens) and tokens[pos] == ("op", "-"):
            # leading negative coefficient, e.g. "-1 * (P0)"
            pos += 1
            sign = -sign
        if pos < len(tokens) and tokens[pos][0] == "num":
            coef = coefficient(expect("num")) * sign
            if expect("op") != "*":
                raise GraphError(f"line {lineno}: expected '*' after coefficient")
            terms.append(Term(coef, _parse_ref(expect("ref")[1:-1])))
        else:
            left = _parse_ref(expect("ref")[1:-1])
            if pos < len(tokens) and tokens[pos] == ("op", "*"):
                pos += 1
                right = _parse_ref(expect("ref")[1:-1])
                if sign != 1:
                    raise GraphError(f"line {lineno}: subtracted products are not part of the grammar")
                terms.append(Term(ONE, left, right))
            else:
                terms.append(Term(Fraction(sign), left))
        if pos == len(tokens):
            break
        op = expect("op")
        if op not in "+-":
            raise GraphError(f"line {lineno}: expected '+' or '-', got {op!r}")
        sign = 1 if op == "+" else -1
    return Statement(target, tuple(terms))


def parse_graph(text: str, name: str = "parsed", p: int | None = None) -> GraphIR:
    """Inverse of :func:`pretty_print`; ``p`` is inferred from partition indices if omitted."""
    stmts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        stmts.append(parse_statement(line, lineno))
    if p is None:
        top = max((r.index for s in stmts for r in [s.target, *s.uses()] if r.name in PARTITIONS), default=0)
        p = math.isqrt(top)
        if p * p <= top:
            p += 1
    g = GraphIR(p, tuple(stmts), name=name)
    validate(g)
    return g


# -- validation and liveness ------------------------------------------------

def validate(g: GraphIR) -> None:
    """Raise GraphError unless every use follows a definition and outputs are complete."""
    defined: set[Ref] = set()
    blocks = g.p * g.p
    for n, s in enumerate(g.statements):
        if s.target.name in INPUTS:
            raise GraphError(f"statement {n}: assignment to input {s.target}")
        for r in [s.target, *s.uses()]:
            if r.name in PARTITIONS and not 0 <= r.index < blocks:
                raise GraphError(f"statement {n}: {r} out of range for p={g.p}")
        for r in s.uses():
            if r.name not in INPUTS and r not in defined:
                raise GraphError(f"statement {n}: {r} used before definition")
        if s.target in defined:
            if s.target.is_temporary:
                raise GraphError(f"statement {n}: temporary {s.target} assigned twice")
            if not s.is_accumulation:
                raise GraphError(f"statement {n}: {s.target} overwritten without accumulating")
        defined.add(s.target)
    missing = [i for i in range(blocks) if Ref(OUTPUT, i) not in defined]
    if missing:
        raise GraphError(f"outputs never assigned: {missing}")


def live_temporaries(g: GraphIR) -> list[set[Ref]]:
    """Temporaries alive while statement ``n`` runs: defined earlier, still needed at ``n``.

    The statement's own target is not counted; it belongs to the statement.
    """
    defined_at: dict[Ref, int] = {}
    last_use: dict[Ref, int] = {}
    for n, s in enumerate(g.statements):
        for r in s.uses():
            if r.is_temporary:
                last_use[r] = n
        if s.target.is_temporary:
            defined_at.setdefault(s.target, n)
    out: list[set[Ref]] = [set() for _ in g.statements]
    for r, d in defined_at.items():
        for n in range(d + 1, last_use.get(r, -1) + 1):
            out[n].add(r)
    return out


def peak_live_temporaries(g: GraphIR) -> int:
    return max((len(s) for s in live_temporaries(g)), default=0)


# -- scheduling -------------------------------------------------------------

def _topological(stmts: tuple[Statement, ...]) -> list[Statement]:
    defs: dict[Ref, list[int]] = {}
    for n, s in enumerate(stmts):
        defs.setdefault(s.target, []).append(n)

    def producer(ref: Ref, n: int) -> int | None:
        sites = defs.get(ref)
        if not sites:
            return None
        before = [d for d in sites if d < n]
        if before:
            return before[-1]
        if len(sites) == 1:
            return sites[0]
        raise GraphError(f"{ref} is redefined and used before its first definition")

    preds: list[set[int]] = [set() for _ in stmts]
    for n, s in enumerate(stmts):
        for r in s.uses():
            if r.name in INPUTS:
                continue
            d = producer(r, n)
            if d is None:
                raise GraphError(f"{r} is used but never defined")
            if d != n:
                preds[n].add(d)
            elif not (r == s.target and s.is_accumulation):
                raise GraphCycleError(f"statement {n} depends on itself")
        sites = defs[s.target]
        k = sites.index(n)
        if k > 0:
            preds[n].add(sites[k - 1])
    succs: list[list[int]] = [[] for _ in stmts]
    indeg = [len(ps) for ps in preds]
    for n, ps in enumerate(preds):
        for d in ps:
            succs[d].append(n)
    ready = [n for n, d in enumerate(indeg) if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(stmts[n])
        for m in succs[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(ready, m)
    if len(order) != len(stmts):
        raise GraphCycleError("dependence cycle among statements")
    return order


def _decompose(stmts: list[Statement]):
    """Split a bilinear program into per-product definitions and output formulas.

    Returns None when the program is not of that shape (e.g. classical).
    """
    operand_defs: dict[Ref, Statement] = {}
    products: dict[int, Statement] = {}
    formulas: dict[int, list[Term]] = {}
    for s in stmts:
        t = s.target
        if t.name in ("T", "S"):
            if any(term.is_product for term in s.terms):
                return None
            operand_defs[t] = s
        elif t.name == "P":
            if len(s.terms) != 1 or not s.terms[0].is_product:
                return None
            products[t.index] = s
        elif t.name == OUTPUT:
            if s.is_accumulation:
                if t.index not in formulas:
                    return None
                terms = list(s.terms[1:])
            else:
                terms = list(s.terms)
                formulas[t.index] = []
            if any(term.is_product or term.left.name != "P" for term in terms):
                return None
            formulas[t.index].extend(terms)
    if not products:
        return None
    for terms in formulas.values():
        terms.sort(key=lambda term: term.left.index)
    return operand_defs, products, formulas


def schedule(g: GraphIR, strategy: str = "product-major") -> GraphIR:
    """Reorder ``g`` into ``strategy`` order; the result computes the same values.

    ``product-major`` builds every T_q, S_q, P_q and then each output in one
    statement. ``fused`` folds each product into the outputs right after it
    is formed, so only the current product's operands are ever alive.
    """
    if strategy not in STRATEGIES:
        raise GraphError(f"unknown schedule {strategy!r}; choose from {', '.join(STRATEGIES)}")
    ordered = _topological(g.statements)
    parts = _decompose(ordered)
    if parts is None:
        out = replace(g, statements=tuple(ordered), schedule=strategy)
        validate(out)
        return out
    operand_defs, products, formulas = parts

    def group(q: int) -> list[Statement]:
        prod = products[q]
        head = [operand_defs[r] for r in prod.terms[0].refs() if r in operand_defs]
        return head + [prod]

    stmts: list[Statement] = []
    if strategy == "product-major":
        for q in sorted(products):
            stmts.extend(group(q))
        for i in sorted(formulas):
            stmts.append(Statement(Ref(OUTPUT, i), tuple(formulas[i])))
    else:
        by_product: dict[int, list[tuple[int, Term]]] = {}
        for i in sorted(formulas):
            for term in formulas[i]:
                by_product.setdefault(term.left.index, []).append((i, term))
        started: set[int] = set()
        for q in sorted(products):
            stmts.extend(group(q))
            for i, term in by_product.get(q, []):
                target = Ref(OUTPUT, i)
                if i in started:
                    stmts.append(Statement(target, (Term(ONE, target), term)))
                else:
                    stmts.append(Statement(target, (term,)))
                    started.add(i)
    out = replace(g, statements=tuple(stmts), schedule=strategy)
    validate(out)
    return out
