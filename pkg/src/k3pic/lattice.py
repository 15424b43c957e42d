"""Even lattices given by Gram matrices, and a small expression language.

Grammar (whitespace-insensitive)::

    expr  := term (('+' | '\\perp' | '⊥') term)*
    term  := atom twist? ('^' int)?
    twist := '(' int ')'
    atom  := 'A' int | 'D' int | 'E' int | 'U' | '<' int '>'
           | 'T(' int ',' int ',' int ')'
           | 'M(' ints ';' ints ';' int ')'
           | '[' row (';' row)* ']'          # explicit Gram matrix, rows of ints
           | '(' expr ')'

Root lattices and the T/M graph lattices are negative definite on their
(-2)-curves; ``U`` is the hyperbolic plane ``[[0, 1], [1, 0]]`` and ``L(m)``
scales the form by ``m``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import List, Sequence, Tuple, Union

from . import linalg
from .errors import DegenerateLattice, NonIntegerDiscriminant, ParseError, ValidationError


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Root:
    kind: str   # 'A', 'D' or 'E'
    n: int


@dataclass(frozen=True)
class Hyperbolic:
    pass


@dataclass(frozen=True)
class Gen:
    k: int


@dataclass(frozen=True)
class TLattice:
    p: int
    q: int
    r: int


@dataclass(frozen=True)
class MLattice:
    ps: Tuple[int, ...]
    iis: Tuple[int, ...]
    k: int


@dataclass(frozen=True)
class GramLiteral:
    rows: Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class Twist:
    expr: "LatticeExpr"
    m: int


@dataclass(frozen=True)
class Power:
    expr: "LatticeExpr"
    m: int


@dataclass(frozen=True)
class OrthSum:
    terms: Tuple["LatticeExpr", ...]


LatticeExpr = Union[Root, Hyperbolic, Gen, TLattice, MLattice, GramLiteral,
                    Twist, Power, OrthSum]


def validate(e: LatticeExpr) -> LatticeExpr:
    if isinstance(e, Root):
        if e.kind == "A" and e.n < 1:
            raise ValidationError(f"A{e.n}: need n >= 1")
        if e.kind == "D" and e.n < 4:
            raise ValidationError(f"D{e.n}: need n >= 4")
        if e.kind == "E" and e.n not in (6, 7, 8):
            raise ValidationError(f"E{e.n}: only E6, E7, E8 exist")
    elif isinstance(e, Gen):
        if e.k == 0 or e.k % 2:
            raise ValidationError(f"<{e.k}> is not a nonzero even form")
    elif isinstance(e, TLattice):
        if min(e.p, e.q, e.r) < 2:
            raise ValidationError(f"T({e.p},{e.q},{e.r}): legs must be >= 2")
    elif isinstance(e, MLattice):
        if not e.ps or len(e.ps) != len(e.iis):
            raise ValidationError("M lattice needs equally many lengths and attachment indices")
        if any(p < 1 for p in e.ps) or list(e.ps) != sorted(e.ps):
            raise ValidationError(f"M lattice lengths {e.ps} must be positive and ascending")
        for p, i in zip(e.ps, e.iis):
            if not 1 <= i <= -(-p // 2):
                raise ValidationError(f"M lattice: attachment index {i} out of range for A{p}")
        if e.k % 2 or e.k < -4:
            raise ValidationError(f"M lattice: central self-intersection {e.k} must be even and >= -4")
    elif isinstance(e, GramLiteral):
        n = len(e.rows)
        if n == 0 or any(len(r) != n for r in e.rows):
            raise ValidationError("Gram literal must be square")
        if not linalg.is_symmetric(e.rows):
            raise ValidationError("Gram literal must be symmetric")
        if any(e.rows[i][i] % 2 for i in range(n)):
            raise ValidationError("Gram literal must have even diagonal")
    elif isinstance(e, (Twist, Power)):
        if isinstance(e, Power) and e.m < 1:
            raise ValidationError("exponent must be >= 1")
        if isinstance(e, Twist) and e.m == 0:
            raise ValidationError("twist by 0 is degenerate")
        validate(e.expr)
    elif isinstance(e, OrthSum):
        for t in e.terms:
            validate(t)
    return e


# --------------------------------------------------------------------------
# parsing and printing

_TOKEN = re.compile(r"\s*(?:(\\perp|⊥)|(-?\d+)|([ADEUTM])|([+^(),;<>\[\]]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos, text)
        start = m.start(m.lastindex)
        if m.group(1):
            toks.append(("+", "+", start))
        elif m.group(2):
            toks.append(("int", int(m.group(2)), start))
        elif m.group(3):
            toks.append(("name", m.group(3), start))
        else:
            toks.append((m.group(4), m.group(4), start))
        pos = m.end()
    toks.append(("eof", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg):
        raise ParseError(msg, self.tok[2], self.text)

    def take(self, kind):
        t = self.tok
        if t[0] != kind:
            self.error(f"expected {kind!r}, found {t[1]!r}")
        self.i += 1
        return t[1]

    def int_(self):
        return self.take("int")

    def ints(self):
        out = [self.int_()]
        while self.tok[0] == ",":
            self.i += 1
            out.append(self.int_())
        return tuple(out)

    def parse(self):
        e = self.expr()
        if self.tok[0] != "eof":
            self.error(f"unexpected {self.tok[1]!r}")
        return e

    def expr(self):
        terms = [self.term()]
        while self.tok[0] == "+":
            self.i += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else OrthSum(tuple(terms))

    def term(self):
        a = self.atom()
        if self.tok[0] == "(":
            self.i += 1
            a = Twist(a, self.int_())
            self.take(")")
        if self.tok[0] == "^":
            self.i += 1
            a = Power(a, self.int_())
        return a

    def atom(self):
        kind, val, _ = self.tok
        if kind == "name":
            self.i += 1
            if val in "ADE":
                if self.tok[0] != "int" or self.tok[1] < 0:
                    self.error(f"expected a rank after {val}")
                return Root(val, self.int_())
            if val == "U":
                return Hyperbolic()
            if val == "T":
                self.take("(")
                args = self.ints()
                self.take(")")
                if len(args) != 3:
                    self.error("T needs three arguments")
                return TLattice(*args)
            if val == "M":
                self.take("(")
                ps = self.ints()
                self.take(";")
                iis = self.ints()
                self.take(";")
                k = self.int_()
                self.take(")")
                return MLattice(ps, iis, k)
        if kind == "<":
            self.i += 1
            k = self.int_()
            self.take(">")
            return Gen(k)
        if kind == "[":
            self.i += 1
            rows = [self.ints()]
            while self.tok[0] == ";":
                self.i += 1
                rows.append(self.ints())
            self.take("]")
            return GramLiteral(tuple(rows))
        if kind == "(":
            self.i += 1
            e = self.expr()
            self.take(")")
            return e
        self.error(f"unexpected {val!r}")


def parse_lattice_expr(text: str) -> LatticeExpr:
    return validate(_Parser(text).parse())


def format_expr(e: LatticeExpr) -> str:
    """Canonical text; ``parse_lattice_expr(format_expr(e)) == e``."""
    if isinstance(e, Root):
        return f"{e.kind}{e.n}"
    if isinstance(e, Hyperbolic):
        return "U"
    if isinstance(e, Gen):
        return f"<{e.k}>"
    if isinstance(e, TLattice):
        return f"T({e.p},{e.q},{e.r})"
    if isinstance(e, MLattice):
        return "M({};{};{})".format(",".join(map(str, e.ps)),
                                    ",".join(map(str, e.iis)), e.k)
    if isinstance(e, GramLiteral):
        return "[" + ";".join(",".join(map(str, r)) for r in e.rows) + "]"
    if isinstance(e, Twist):
        inner = format_expr(e.expr)
        if isinstance(e.expr, (OrthSum, Twist, Power)):
            inner = f"({inner})"
        return f"{inner}({e.m})"
    if isinstance(e, Power):
        inner = format_expr(e.expr)
        if isinstance(e.expr, (OrthSum, Power)):
            inner = f"({inner})"
        return f"{inner}^{e.m}"
    if isinstance(e, OrthSum):
        return "+".join(f"({format_expr(t)})" if isinstance(t, OrthSum) else format_expr(t)
                        for t in e.terms)
    raise TypeError(e)


# --------------------------------------------------------------------------
# Gram matrices

def _chain(n: int) -> List[List[int]]:
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = -2
        if i + 1 < n:
            g[i][i + 1] = g[i + 1][i] = 1
    return g


def _star(center: int, legs: Sequence[Tuple[int, int]]) -> List[List[int]]:
    """Central vertex of square ``center`` joined to vertex ``i`` (1-based) of
    an A_p chain for every ``(p, i)`` in ``legs``."""
    n = 1 + sum(p for p, _ in legs)
    g = [[0] * n for _ in range(n)]
    g[0][0] = center
    off = 1
    for p, i in legs:
        ch = _chain(p)
        for a in range(p):
            for b in range(p):
                g[off + a][off + b] = ch[a][b]
        g[0][off + i - 1] = g[off + i - 1][0] = 1
        off += p
    return g


def root_gram(kind: str, n: int) -> List[List[int]]:
    if kind == "A":
        return _chain(n)
    if kind == "D":
        g = _chain(n)
        g[n - 2][n - 1] = g[n - 1][n - 2] = 0
        g[n - 3][n - 1] = g[n - 1][n - 3] = 1
        return g
    if kind == "E":
        g = _chain(n)
        g[n - 2][n - 1] = g[n - 1][n - 2] = 0
        g[2][n - 1] = g[n - 1][2] = 1
        return g
    raise ValueError(kind)


def expr_gram(e: LatticeExpr) -> List[List[int]]:
    """Gram matrix of an expression (no nondegeneracy check)."""
    if isinstance(e, Root):
        return root_gram(e.kind, e.n)
    if isinstance(e, Hyperbolic):
        return [[0, 1], [1, 0]]
    if isinstance(e, Gen):
        return [[e.k]]
    if isinstance(e, TLattice):
        return _star(-2, [(e.p - 1, 1), (e.q - 1, 1), (e.r - 1, 1)])
    if isinstance(e, MLattice):
        return _star(e.k, list(zip(e.ps, e.iis)))
    if isinstance(e, GramLiteral):
        return [list(r) for r in e.rows]
    if isinstance(e, Twist):
        return [[e.m * x for x in row] for row in expr_gram(e.expr)]
    if isinstance(e, Power):
        g = expr_gram(e.expr)
        return linalg.block_diag(*([g] * e.m))
    if isinstance(e, OrthSum):
        return linalg.block_diag(*(expr_gram(t) for t in e.terms))
    raise TypeError(e)


@dataclass(frozen=True)
class GramLattice:
    gram: Tuple[Tuple[int, ...], ...]
    rank: int
    signature: Tuple[int, int]
    det: int

    @classmethod
    def from_matrix(cls, m: Sequence[Sequence[int]], check: bool = True) -> "GramLattice":
        g = tuple(tuple(int(x) for x in row) for row in m)
        if not linalg.is_symmetric(g):
            raise ValidationError("Gram matrix is not symmetric")
        d = linalg.det(g)
        if check and d == 0:
            raise DegenerateLattice("Gram matrix is degenerate")
        pos, _, neg = linalg.inertia(g)
        return cls(gram=g, rank=len(g), signature=(pos, neg), det=d)

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def matrix(self) -> List[List[int]]:
        return [list(r) for r in self.gram]

    def __add__(self, other: "GramLattice") -> "GramLattice":
        return GramLattice.from_matrix(linalg.block_diag(self.gram, other.gram))


def to_gram(e: Union[LatticeExpr, str]) -> GramLattice:
    if isinstance(e, str):
        e = parse_lattice_expr(e)
    return GramLattice.from_matrix(expr_gram(e))


def disc(lat: GramLattice) -> int:
    return linalg.det(lat.gram)


def t_disc(p: int, q: int, r: int) -> int:
    return p * q * r - p * q - p * r - q * r


def m_disc(ps: Sequence[int], iis: Sequence[int], k: int) -> int:
    """Closed-form discriminant of an M lattice.

    Evaluates ``-(-1)^(sum p) * prod(p+1) * (k + sum i(p+1-i)/(p+1))``; the
    determinant of the Gram matrix built by :func:`expr_gram` is the negative
    of this value.
    """
    val = Fraction(k) + sum(Fraction(i * (p + 1 - i), p + 1) for p, i in zip(ps, iis))
    val *= -(-1) ** sum(ps) * prod(p + 1 for p in ps)
    if val.denominator != 1:
        raise NonIntegerDiscriminant(f"M({ps};{iis};{k}) gives {val}")
    return int(val)
