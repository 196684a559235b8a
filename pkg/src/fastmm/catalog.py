"""Built-in bilinear algorithms and their JSON interchange format.

A triple ``(U, V, W)`` with split factor ``p`` and rank ``r`` describes the
algorithm

    T_q = sum_k U[k][q] A_k,   S_q = sum_l V[l][q] B_l,   P_q = T_q * S_q,
    C_i = sum_q W[i][q] P_q,

where A_k, B_l, C_i are the ``p * p`` blocks in row-major block order.
All three matrices have ``p * p`` rows and ``r`` columns.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import coefficient, format_coefficient

Matrix = tuple[tuple[Fraction, ...], ...]


class TripleFormatError(ValueError):
    pass


def _freeze(rows) -> Matrix:
    return tuple(tuple(coefficient(x) for x in row) for row in rows)


@dataclass(frozen=True)
class BilinearTriple:
    name: str
    p: int
    rank: int
    U: Matrix
    V: Matrix
    W: Matrix
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "U", _freeze(self.U))
        object.__setattr__(self, "V", _freeze(self.V))
        object.__setattr__(self, "W", _freeze(self.W))
        problems = validate_shape(self.p, self.rank, self.U, self.V, self.W)
        if problems:
            raise TripleFormatError(f"{self.name}: " + "; ".join(problems))

    @property
    def blocks(self) -> int:
        return self.p * self.p

    def column(self, which: str, q: int) -> list[tuple[int, Fraction]]:
        """Nonzero ``(row, coefficient)`` pairs of column ``q`` of U or V."""
        mat = {"U": self.U, "V": self.V, "W": self.W}[which]
        return [(k, row[q]) for k, row in enumerate(mat) if row[q] != 0]

    def nnz(self, which: str) -> int:
        mat = {"U": self.U, "V": self.V, "W": self.W}[which]
        return sum(1 for row in mat for x in row if x != 0)

    def renamed(self, name: str) -> "BilinearTriple":
        return BilinearTriple(name, self.p, self.rank, self.U, self.V, self.W)


def validate_shape(p, rank, U, V, W) -> list[str]:
    problems = []
    if not isinstance(p, int) or p < 1:
        return [f"bad split factor {p!r}"]
    if not isinstance(rank, int) or rank < 1:
        return [f"bad rank {rank!r}"]
    rows = p * p
    for label, mat in (("U", U), ("V", V), ("W", W)):
        if len(mat) != rows:
            problems.append(f"{label} row count {len(mat)} != {rows}")
            continue
        for i, row in enumerate(mat):
            if len(row) != rank:
                problems.append(f"{label} row {i} has {len(row)} columns, expected {rank}")
    if problems:
        return problems
    for label, mat in (("U", U), ("V", V)):
        for q in range(rank):
            if all(mat[k][q] == 0 for k in range(rows)):
                problems.append(f"{label} column {q} is all zero (dead product)")
    return problems


def validation_report(t: BilinearTriple) -> list[str]:
    """Warnings that do not make a triple invalid, e.g. non-unit coefficients."""
    out = []
    for label, mat in (("U", t.U), ("V", t.V), ("W", t.W)):
        odd = sorted({x for row in mat for x in row if x not in (0, 1, -1)})
        if odd:
            shown = ", ".join(format_coefficient(x) for x in odd)
            out.append(f"{label} has coefficients outside {{-1,0,1}}: {shown}")
    return out


def classical_triple(p: int) -> BilinearTriple:
    """Rank ``p**3`` triple of the blocked definition, products ordered (i, j, k)."""
    rows = p * p
    r = p ** 3
    U = [[0] * r for _ in range(rows)]
    V = [[0] * r for _ in range(rows)]
    W = [[0] * r for _ in range(rows)]
    for i in range(p):
        for j in range(p):
            for k in range(p):
                q = (i * p + j) * p + k
                U[i * p + k][q] = 1
                V[k * p + j][q] = 1
                W[i * p + j][q] = 1
    return BilinearTriple(f"classical-p{p}", p, r, U, V, W)


# Strassen with the block numbering of the a, b, c^t matrices it is usually
# tabulated with; W rows here are in natural order C0, C1, C2, C3.
_STRASSEN_U = [
    [0, 1, 1, 0, 1, 1, 0],
    [0, 0, -1, 1, 0, 0, 0],
    [1, 1, 1, 0, 1, 0, 0],
    [-1, -1, -1, 0, 0, 0, 1],
]
_STRASSEN_V = [
    [0, 0, 0, 0, 1, 1, 0],
    [1, 1, 0, 0, 1, 0, 1],
    [0, 1, 1, 1, 1, 0, 0],
    [0, 1, 1, 0, 1, 0, 1],
]
_STRASSEN_W = [
    [0, 0, 0, 1, 0, 1, 0],
    [-1, 1, -1, -1, 0, 0, 0],
    [0, -1, 0, 0, 1, -1, -1],
    [1, 0, 0, 0, 0, 0, 1],
]

# Laderman (1976), products m1..m23 and outputs c11..c33 with 1-based indices.
_LADERMAN_PRODUCTS = [
    ("a11+a12+a13-a21-a22-a32-a33", "b22"),
    ("a11-a21", "-b12+b22"),
    ("a22", "-b11+b12+b21-b22-b23-b31+b33"),
    ("-a11+a21+a22", "b11-b12+b22"),
    ("a21+a22", "-b11+b12"),
    ("a11", "b11"),
    ("-a11+a31+a32", "b11-b13+b23"),
    ("-a11+a31", "b13-b23"),
    ("a31+a32", "-b11+b13"),
    ("a11+a12+a13-a22-a23-a31-a32", "b23"),
    ("a32", "-b11+b13+b21-b22-b23-b31+b32"),
    ("-a13+a32+a33", "b22+b31-b32"),
    ("a13-a33", "b22-b32"),
    ("a13", "b31"),
    ("a32+a33", "-b31+b32"),
    ("-a13+a22+a23", "b23+b31-b33"),
    ("a13-a23", "b23-b33"),
    ("a22+a23", "-b31+b33"),
    ("a12", "b21"),
    ("a23", "b32"),
    ("a21", "b13"),
    ("a31", "b12"),
    ("a33", "b33"),
]
_LADERMAN_OUTPUTS = [
    (6, 14, 19),
    (1, 4, 5, 6, 12, 14, 15),
    (6, 7, 9, 10, 14, 16, 18),
    (2, 3, 4, 6, 14, 16, 17),
    (2, 4, 5, 6, 20),
    (14, 16, 17, 18, 21),
    (6, 7, 8, 11, 12, 13, 14),
    (12, 13, 14, 15, 22),
    (6, 7, 8, 9, 23),
]


def _linear_form(expr: str, symbol: str) -> list[int]:
    vec = [0] * 9
    for token in expr.replace("-", "+-").split("+"):
        if not token:
            continue
        sign = -1 if token.startswith("-") else 1
        token = token.lstrip("-")
        assert token[0] == symbol, token
        i, j = int(token[1]) - 1, int(token[2]) - 1
        vec[i * 3 + j] = sign
    return vec


def _laderman() -> BilinearTriple:
    r = len(_LADERMAN_PRODUCTS)
    U = [[0] * r for _ in range(9)]
    V = [[0] * r for _ in range(9)]
    W = [[0] * r for _ in range(9)]
    for q, (left, right) in enumerate(_LADERMAN_PRODUCTS):
        for k, x in enumerate(_linear_form(left, "a")):
            U[k][q] = x
        for k, x in enumerate(_linear_form(right, "b")):
            V[k][q] = x
    for i, products in enumerate(_LADERMAN_OUTPUTS):
        for m in products:
            W[i][m - 1] = 1
    return BilinearTriple("laderman-p3", 3, r, U, V, W)


_BUILDERS = {
    "classical-p2": lambda: classical_triple(2),
    "classical-p3": lambda: classical_triple(3),
    "strassen-p2": lambda: BilinearTriple("strassen-p2", 2, 7, _STRASSEN_U, _STRASSEN_V, _STRASSEN_W),
    "laderman-p3": _laderman,
}
_CACHE: dict[str, BilinearTriple] = {}

# Fewest-product builtin for each split factor.
FASTEST = {2: "strassen-p2", 3: "laderman-p3"}


def builtin_names() -> list[str]:
    return sorted(_BUILDERS)


def builtin(name: str) -> BilinearTriple:
    """Return a built-in triple; each one is proven by exhaustive check on first load."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown algorithm {name!r}; available: {', '.join(builtin_names())}")
    if name not in _CACHE:
        from .verifier import brent_check

        t = _BUILDERS[name]()
        report = brent_check(t)
        if not report.passed:
            raise AssertionError(f"builtin {name} failed verification: {report.violations[:3]}")
        _CACHE[name] = t
    return _CACHE[name]


def _encode(mat: Matrix) -> list[list]:
    return [[int(x) if x.denominator == 1 else format_coefficient(x) for x in row] for row in mat]


def save_triple(t: BilinearTriple) -> str:
    doc = {"name": t.name, "p": t.p, "rank": t.rank,
           "u": _encode(t.U), "v": _encode(t.V), "w": _encode(t.W)}
    lines = ["{"]
    lines.append(f'  "name": {json.dumps(t.name)},')
    lines.append(f'  "p": {t.p},')
    lines.append(f'  "rank": {t.rank},')
    for i, key in enumerate(("u", "v", "w")):
        rows = ",\n".join("    " + json.dumps(row) for row in doc[key])
        tail = "," if i < 2 else ""
        lines.append(f'  "{key}": [\n{rows}\n  ]{tail}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _decode(doc: dict, key: str, rows: int, rank: int) -> Matrix:
    label = key.upper()
    mat = doc.get(key)
    if not isinstance(mat, list):
        raise TripleFormatError(f"field {key!r}: expected a list of rows")
    if len(mat) != rows:
        raise TripleFormatError(f"{label} row count {len(mat)} != p*p = {rows}")
    out = []
    for i, row in enumerate(mat):
        if not isinstance(row, list) or len(row) != rank:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise TripleFormatError(f"{label} row {i}: expected {rank} entries, got {got}")
        parsed = []
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, str)):
                raise TripleFormatError(f"{label}[{i}][{j}]: expected integer or 'num/den', got {x!r}")
            try:
                parsed.append(coefficient(x))
            except ZeroDivisionError:
                raise TripleFormatError(f"{label}[{i}][{j}]: zero denominator in {x!r}") from None
            except (ValueError, TypeError):
                raise TripleFormatError(f"{label}[{i}][{j}]: cannot parse {x!r}") from None
        out.append(tuple(parsed))
    return tuple(out)


def load_triple(text: str) -> BilinearTriple:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TripleFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise TripleFormatError("top level must be a JSON object")
    for key in ("name", "p", "rank", "u", "v", "w"):
        if key not in doc:
            raise TripleFormatError(f"missing field {key!r}")
    name, p, rank = doc["name"], doc["p"], doc["rank"]
    if not isinstance(name, str):
        raise TripleFormatError("field 'name' must be a string")
    for key, val in (("p", p), ("rank", rank)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise TripleFormatError(f"field {key!r} must be a positive integer, got {val!r}")
    U = _decode(doc, "u", p * p, rank)
    V = _decode(doc, "v", p * p, rank)
    W = _decode(doc, "w", p * p, rank)
    return BilinearTriple(name, p, rank, U, V, W)


def read_triple(path) -> BilinearTriple:
    with open(path, encoding="utf-8") as fh:
        return load_triple(fh.read())


def write_triple(t: BilinearTriple, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(save_triple(t))


def resolve(name: str | BilinearTriple) -> BilinearTriple:
    """Look up a triple by factor (``"2"``), builtin name, or JSON file path."""
    if isinstance(name, BilinearTriple):
        return name
    name = name.strip()
    if name.isdigit():
        p = int(name)
        if p not in FASTEST:
            raise KeyError(f"no builtin algorithm for factor {p}; available factors: {sorted(FASTEST)}")
        return builtin(FASTEST[p])
    if name in _BUILDERS:
        return builtin(name)
    if name.endswith(".json"):
        return read_triple(name)
    raise KeyError(f"unknown algorithm {name!r}; available: {', '.join(builtin_names())}")


def parse_chain(text: str) -> list[BilinearTriple]:
    """Parse ``"2,3"``, ``"2x3"`` or ``"classical"``/``""`` (empty chain)."""
    text = text.strip()
    if text in ("", "classical", "[]"):
        return []
    parts = []
    for item in text.split(","):
        item = item.strip()
        if re.fullmatch(r"\d+(x\d+)+", item):
            parts.extend(item.split("x"))
        elif item:
            parts.append(item)
    return [resolve(s) for s in parts]


def chain_label(chain: Sequence[BilinearTriple]) -> str:
    if not chain:
        return "classical"
    labels = []
    for t in chain:
        short = next((str(p) for p, nm in FASTEST.items() if nm == t.name), t.name)
        labels.append(short)
    return "x".join(labels)
