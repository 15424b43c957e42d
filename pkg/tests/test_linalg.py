import random

import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from k3pic import linalg

rng = random.Random(1234)


def _rand(rows, cols, lo=-6, hi=6):
    return [[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)]


def _sym(n, lo=-4, hi=4):
    m = _rand(n, n, lo, hi)
    return [[m[i][j] + m[j][i] for j in range(n)] for i in range(n)]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_det_and_rank_match_sympy(n):
    for _ in range(15):
        m = _rand(n, n)
        assert linalg.det(m) == sympy.Matrix(m).det()
        assert linalg.rank(m) == sympy.Matrix(m).rank()


def test_rank_rectangular():
    for _ in range(30):
        m = _rand(rng.randint(1, 5), rng.randint(1, 5), -2, 2)
        assert linalg.rank(m) == sympy.Matrix(m).rank()


def test_inverse():
    for _ in range(20):
        m = _rand(4, 4)
        if linalg.det(m) == 0:
            continue
        inv = linalg.inverse(m)
        assert sympy.Matrix(inv) == sympy.Matrix(m).inv()


def _sign_changes(coeffs):
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _inertia_oracle(m):
    # Descartes' rule is exact for a real-rooted characteristic polynomial
    x = sympy.Symbol("x")
    cp = sympy.Matrix(m).charpoly(x).all_coeffs()
    zero = len(cp) - 1 - max(i for i, c in enumerate(cp) if c != 0)
    pos = _sign_changes(cp)
    neg = _sign_changes([c * (-1) ** (len(cp) - 1 - i) for i, c in enumerate(cp)])
    return pos, zero, neg


@pytest.mark.parametrize("n", [2, 3, 4])
def test_inertia_matches_eigenvalue_signs(n):
    for _ in range(10):
        m = _sym(n)
        assert linalg.inertia(m) == _inertia_oracle(m)


def test_inertia_zero_diagonal():
    assert linalg.inertia([[0, 1], [1, 0]]) == (1, 0, 1)
    assert linalg.inertia([[0, 0], [0, 0]]) == (0, 2, 0)


def test_snf_matches_sympy_and_transforms():
    for _ in range(40):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        m = _rand(rows, cols)
        d, u, v = linalg.smith_normal_form(m)
        prod = linalg.matmul(linalg.matmul(u, m), v)
        for i in range(rows):
            for j in range(cols):
                assert prod[i][j] == (d[i] if i == j else 0)
        assert abs(linalg.det(u)) == 1 and abs(linalg.det(v)) == 1
        nz = [x for x in d if x]
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
        oracle = sympy_snf(sympy.Matrix(m), domain=sympy.ZZ)
        want = sorted(abs(oracle[i, i]) for i in range(min(rows, cols)) if oracle[i, i])
        assert sorted(nz) == want


def test_integer_kernel():
    for _ in range(30):
        m = _rand(rng.randint(1, 3), 5, -3, 3)
        k = linalg.integer_kernel(m)
        assert len(k) == 5 - linalg.rank(m)
        for row in k:
            assert linalg.matvec(m, row) == [0] * len(m)
        if k:
            # saturated: the gcd of maximal minors is 1
            snf = linalg.smith_normal_form(k)[0]
            assert all(x == 1 for x in snf)


def test_hermite_rows_spans_same_lattice():
    for _ in range(20):
        m = _rand(4, 3)
        h = linalg.hermite_rows(m)
        assert len(h) == linalg.rank(m)
        d1 = [x for x in linalg.smith_normal_form(m)[0] if x]
        d2 = [x for x in linalg.smith_normal_form(h)[0] if x]
        assert d1 == d2


def test_unimodular_completion():
    for q in ([2, 4, 5, 9], [6, 10, 15], [3, 0, 0]):
        v = linalg.unimodular_completion(q)
        assert abs(linalg.det(v)) == 1
        out = linalg.matvec(linalg.transpose(v), q)
        assert out[0] == sympy.gcd_list(q) and not any(out[1:])
