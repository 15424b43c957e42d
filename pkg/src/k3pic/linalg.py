"""Exact integer and rational linear algebra on list-of-lists matrices.

Everything here works with Python ints and :class:`fractions.Fraction`;
matrices are plain nested lists so that values stay exact.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(m: Sequence[Sequence]) -> list:
    return [list(r) for r in zip(*m)] if m else []


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def block_diag(*blocks: Sequence[Sequence[int]]) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        k = len(b)
        for i in range(k):
            for j in range(k):
                out[off + i][off + j] = b[i][j]
        off += k
    return out


def is_symmetric(m: Sequence[Sequence]) -> bool:
    n = len(m)
    return all(m[i][j] == m[j][i] for i in range(n) for j in range(i + 1, n))


def det(m: Sequence[Sequence[int]]) -> int:
    """Determinant by Bareiss fraction-free elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def rank(m: Sequence[Sequence]) -> int:
    """Rank over the rationals (fraction-free row reduction)."""
    a = [list(r) for r in m]
    if not a:
        return 0
    rows, cols = len(a), len(a[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, rows):
            f = a[i][c]
            if f:
                a[i] = [x * p - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == rows:
            break
    return r


def inverse(m: Sequence[Sequence]) -> List[List[Fraction]]:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


def inertia(m: Sequence[Sequence]) -> Tuple[int, int, int]:
    """Return ``(n_plus, n_zero, n_minus)`` of a symmetric matrix.

    Symmetric Gaussian elimination over the rationals; a zero diagonal with a
    nonzero off-diagonal entry is fixed by the congruence ``e_i -> e_i + e_j``.
    Ties in pivot choice go to the leftmost index.
    """
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active
                         if i < j and a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        p = a[piv][piv]
        if p > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        row = a[piv]
        for i in active:
            f = a[i][piv] / p
            if f:
                ri = a[i]
                for k in active:
                    ri[k] -= f * row[k]
        for i in active:
            a[i][piv] = a[piv][i] = Fraction(0)
    return pos, n - pos - neg, neg


def _swap_rows(m, i, j):
    m[i], m[j] = m[j], m[i]


def _swap_cols(m, i, j):
    for row in m:
        row[i], row[j] = row[j], row[i]


def smith_normal_form(m: Sequence[Sequence[int]]):
    """Return ``(d, u, v)`` with ``u @ m @ v`` diagonal and ``d`` its diagonal.

    ``u`` and ``v`` are unimodular; the diagonal is non-negative with
    ``d[0] | d[1] | ...`` (zeros last).
    """
    a = [list(r) for r in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    u = identity(rows)
    v = identity(cols)

    def row_op(i, j, f):  # row_i -= f * row_j
        a[i] = [x - f * y for x, y in zip(a[i], a[j])]
        u[i] = [x - f * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, f):  # col_i -= f * col_j
        for r in a:
            r[i] -= f * r[j]
        for r in v:
            r[i] -= f * r[j]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows)
              for j in range(t, cols) if a[i][j] != 0]
        if not nz:
            break
        _, pi, pj = min(nz)
        _swap_rows(a, t, pi)
        _swap_rows(u, t, pi)
        _swap_cols(a, t, pj)
        _swap_cols(v, t, pj)
        while True:
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_op(i, t, a[i][t] // a[t][t])
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_op(j, t, a[t][j] // a[t][t])
                    if a[t][j]:
                        done = False
            if done:
                bad = next(((i, j) for i in range(t + 1, rows)
                            for j in range(t + 1, cols) if a[i][j] % a[t][t]), None)
                if bad is None:
                    break
                # fold the offending row in so the pivot can shrink
                i, _ = bad
                a[t] = [x + y for x, y in zip(a[t], a[i])]
                u[t] = [x + y for x, y in zip(u[t], u[i])]
                continue
            nz = [(abs(a[i][j]), i, j) for i in range(t, rows)
                  for j in range(t, cols) if a[i][j] != 0
                  and (i == t or j == t)]
            _, pi, pj = min(nz)
            _swap_rows(a, t, pi)
            _swap_rows(u, t, pi)
            _swap_cols(a, t, pj)
            _swap_cols(v, t, pj)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    d = [a[i][i] for i in range(min(rows, cols))]
    return d, u, v


def hermite_rows(rows: Sequence[Sequence[int]]) -> Matrix:
    """Row-style Hermite normal form; returns the nonzero rows (a Z-basis of
    the row span)."""
    a = [list(r) for r in rows if any(r)]
    if not a:
        return []
    cols = len(a[0])
    out = []
    r = 0
    for c in range(cols):
        while True:
            nz = [i for i in range(r, len(a)) if a[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[piv] = a[piv], a[r]
            clean = True
            for i in range(r + 1, len(a)):
                if a[i][c]:
                    f = a[i][c] // a[r][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        clean = False
            if clean:
                break
        if r < len(a) and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                f = a[i][c] // a[r][c]
                if f:
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            r += 1
            if r == len(a):
                break
    out = [row for row in a[:r]]
    return out


def rational_lattice_basis(vectors: Sequence[Sequence]) -> List[List[Fraction]]:
    """Z-basis of the Z-span of rational vectors."""
    den = 1
    for vec in vectors:
        for x in vec:
            den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [[int(Fraction(x) * den) for x in vec] for vec in vectors]
    return [[Fraction(x, den) for x in row] for row in hermite_rows(ints)]


def integer_kernel(m: Sequence[Sequence[int]]) -> Matrix:
    """Z-basis (as rows) of ``{x in Z^n : m x = 0}``."""
    rows = len(m)
    n = len(m[0])
    # column-reduce m while tracking the transform; zero columns give kernel
    aug = [list(col) + [int(i == j) for j in range(n)]
           for i, col in enumerate(transpose(m))]
    h = hermite_rows(aug)
    kern = [row[rows:] for row in h if not any(row[:rows])]
    return kern


def unimodular_completion(q: Sequence[int]) -> Matrix:
    """Unimodular ``v`` with ``q @ v = (gcd(q), 0, ..., 0)``.

    Columns 1.. of ``v`` are a Z-basis of the integer kernel of ``q``.
    """
    d, u, v = smith_normal_form([list(q)])
    # u is 1x1 (+-1)
    if u[0][0] == -1:
        v = [[-x if j == 0 else x for j, x in enumerate(r)] for r in v]
    return v
