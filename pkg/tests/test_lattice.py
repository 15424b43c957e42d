import pytest
import sympy
from hypothesis import given, settings, strategies as st

from k3pic import linalg
from k3pic.discform import discriminant_form, is_isomorphic
from k3pic.errors import DegenerateLattice, ParseError, ValidationError
from k3pic.lattice import (GramLattice, GramLiteral, Gen, Hyperbolic, MLattice, OrthSum,
                           Power, Root, TLattice, Twist, disc, expr_gram, format_expr,
                           m_disc, parse_lattice_expr, t_disc, to_gram)

from _support import fixtures


def test_parse_examples():
    e = parse_lattice_expr("E8 + E8 + U")
    assert isinstance(e, OrthSum) and len(e.terms) == 3
    assert to_gram(e).rank == 18
    e = parse_lattice_expr("T(4,4,4)")
    assert e == TLattice(4, 4, 4) and to_gram(e).rank == 10
    assert parse_lattice_expr(r"E8 \perp U") == parse_lattice_expr("E8 ⊥ U")


@pytest.mark.parametrize("text", ["D3", "E9", "A0", "<3>", "<0>", "T(1,3,7)", "U^0",
                                  "[2,1;0,2]", "[1,0;0,2]", "M(2,1;1,1;0)"])
def test_validation_errors(text):
    with pytest.raises(ValidationError):
        parse_lattice_expr(text)


@pytest.mark.parametrize("text", ["", "E8 +", "X4", "E8 U", "T(2,3)", "(E8", "<4", "E8 + + U"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_lattice_expr(text)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as ei:
        parse_lattice_expr("E8 + ?")
    assert ei.value.position is not None


def _sympy_det(m):
    return int(sympy.Matrix(m).det())


def test_small_dets():
    u = to_gram("U")
    assert u.det == disc(u) == -1 and u.signature == (1, 1)
    e8 = to_gram("E8")
    assert e8.det == _sympy_det(e8.matrix()) == 1 and e8.signature == (0, 8)
    assert to_gram("A1").det == -2 and to_gram("<-2>").gram == ((-2,),)
    t = to_gram("T(4,4,4)")
    assert t.rank == 10 and abs(t.det) == 16 == t_disc(4, 4, 4)
    assert _sympy_det(t.matrix()) == t.det


@pytest.mark.parametrize("n", range(1, 9))
def test_root_lattice_dets(n):
    # |det| = order of the root lattice discriminant group
    a = to_gram(f"A{n}")
    assert a.det == (-1) ** n * (n + 1) == _sympy_det(a.matrix())
    assert a.signature == (0, n)
    if n >= 4:
        assert to_gram(f"D{n}").det == (-1) ** n * 4
    if n in (6, 7, 8):
        assert to_gram(f"E{n}").det == (-1) ** n * (9 - n)


def test_twist_and_power():
    assert to_gram("U(2)").det == -4
    assert to_gram("A1^5").rank == 5 and to_gram("A1^5").det == -32
    assert to_gram("(A1 + U)^2").rank == 6
    assert to_gram("[-2,1;1,-4]").det == 7


def test_t_disc_examples():
    assert t_disc(2, 3, 7) == 1
    assert t_disc(2, 5, 5) == 5
    assert t_disc(2, 3, 6) == 0
    with pytest.raises(DegenerateLattice):
        to_gram("T(2,3,6)")


def test_t_lattice_grid():
    # det = (-1)^(rank+1) (pqr - pq - pr - qr) for every leg triple up to 8
    for p in range(2, 9):
        for q in range(p, 9):
            for r in range(q, 9):
                g = expr_gram(TLattice(p, q, r))
                n = p + q + r - 2
                assert len(g) == n
                assert linalg.det(g) == (-1) ** (n + 1) * t_disc(p, q, r)


def _m_params(max_len=3, max_p=4):
    out = []
    for n in range(1, max_len + 1):
        for ps in sympy.utilities.iterables.combinations_with_replacement(range(1, max_p + 1), n):
            iis_opts = [range(1, -(-p // 2) + 1) for p in ps]
            for iis in sympy.utilities.iterables.cartes(*iis_opts):
                for k in (-4, -2, 0, 2):
                    out.append((tuple(ps), tuple(iis), k))
    return out


def test_m_lattice_grid():
    params = _m_params()
    assert len(params) > 300
    for ps, iis, k in params:
        g = expr_gram(MLattice(ps, iis, k))
        assert linalg.det(g) == -m_disc(ps, iis, k)


def test_m_example():
    assert m_disc((1, 1, 1), (1, 1, 1), 0) == 12
    assert to_gram("M(1,1,1;1,1,1;0)").det == -12


def test_t237_is_e8_u():
    t = to_gram("T(2,3,7)")
    e = to_gram("E8 + U")
    assert (t.rank, abs(t.det), t.signature) == (e.rank, abs(e.det), e.signature)
    assert is_isomorphic(discriminant_form(t), discriminant_form(e))


def test_row_52_alternative():
    a, b = to_gram("E8 + D9 + U"), to_gram("E8^2 + <-4> + U")
    assert (a.rank, abs(a.det), a.signature) == (b.rank, abs(b.det), b.signature)
    assert is_isomorphic(discriminant_form(a), discriminant_form(b))


@pytest.mark.parametrize("rec", fixtures(), ids=lambda r: f"family{r.id}")
def test_pic_expressions_elaborate(rec):
    lat = rec.pic_lattice()
    assert lat.is_even
    assert lat.rank == rec.expected_rank
    assert lat.signature == (1, rec.expected_rank - 1)
    assert discriminant_form(lat).order == abs(lat.det)


def test_gram_lattice_checks():
    with pytest.raises(ValidationError):
        GramLattice.from_matrix([[0, 1], [2, 0]])
    with pytest.raises(DegenerateLattice):
        GramLattice.from_matrix([[0, 0], [0, -2]])
    s = to_gram("E8") + to_gram("U")
    assert s.rank == 10 and s.det == -1


# -- round trip --------------------------------------------------------------

_roots = st.one_of(
    st.integers(1, 12).map(lambda n: Root("A", n)),
    st.integers(4, 12).map(lambda n: Root("D", n)),
    st.sampled_from([6, 7, 8]).map(lambda n: Root("E", n)),
)
_gens = st.integers(-20, 20).filter(lambda k: k and k % 2 == 0).map(Gen)
_ts = st.tuples(st.integers(2, 9), st.integers(2, 9), st.integers(2, 9)).map(lambda t: TLattice(*t))


@st.composite
def _ms(draw):
    ps = tuple(sorted(draw(st.lists(st.integers(1, 5), min_size=1, max_size=3))))
    iis = tuple(draw(st.integers(1, -(-p // 2))) for p in ps)
    k = draw(st.sampled_from([-4, -2, 0, 2, 4]))
    return MLattice(ps, iis, k)


@st.composite
def _literals(draw):
    n = draw(st.integers(1, 3))
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = 2 * draw(st.integers(-3, 3))
        for j in range(i + 1, n):
            rows[i][j] = rows[j][i] = draw(st.integers(-3, 3))
    return GramLiteral(tuple(tuple(r) for r in rows))


_atoms = st.one_of(_roots, st.just(Hyperbolic()), _gens, _ts, _ms(), _literals())

_exprs = st.recursive(
    _atoms,
    lambda inner: st.one_of(
        st.tuples(inner, st.integers(-5, 5).filter(bool)).map(lambda t: Twist(*t)),
        st.tuples(inner, st.integers(1, 4)).map(lambda t: Power(*t)),
        st.lists(inner, min_size=2, max_size=4).map(lambda ts: OrthSum(tuple(ts))),
    ),
    max_leaves=6,
)


@settings(max_examples=300, deadline=None)
@given(_exprs)
def test_format_parse_round_trip(e):
    text = format_expr(e)
    assert parse_lattice_expr(text) == e
    assert format_expr(parse_lattice_expr(text)) == text
