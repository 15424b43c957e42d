"""Property checks that need no external ground truth."""

import random
from itertools import islice

from hypothesis import given, settings, strategies as st

from k3pic.discform import (atom, discriminant_form, enumerate_isotropic, is_isomorphic,
                            mod2, negate, overlattice_gram, quotient_form)
from k3pic.lattice import to_gram

from _support import BLOCKS, commuting_oracle, random_lattice

def test_scramble_preserves_invariants():
    rng = random.Random(3)
    for _ in range(50):
        names, lat = random_lattice(rng)
        ref = to_gram(" + ".join(names))
        assert lat.det == ref.det and lat.signature == ref.signature and lat.is_even
        assert is_isomorphic(discriminant_form(lat), discriminant_form(ref))


def test_group_order_is_abs_det():
    rng = random.Random(11)
    for name in BLOCKS + ["T(2,3,7)", "T(3,3,4)", "T(2,5,5)", "M(1,2;1,1;-2)", "M(1,1,1;1,1,1;0)",
                          "[-2,1;1,-4]", "E8^2 + U", "D16 + U"]:
        lat = to_gram(name)
        assert discriminant_form(lat).order == abs(lat.det)
    for _ in range(100):
        _, lat = random_lattice(rng, max_disc=512, max_blocks=5)
        assert discriminant_form(lat).order == abs(lat.det)


def _polarization_holds(f, pairs):
    return all(mod2(f.q(f.add(x, y)) - f.q(x) - f.q(y) - 2 * f.b(x, y)) == 0 for x, y in pairs)


def test_polarization_random_lattices():
    rng = random.Random(5)
    for _ in range(40):
        _, lat = random_lattice(rng, max_disc=512, max_blocks=5)
        f = discriminant_form(lat)
        els = list(f.elements())
        if f.order <= 64:
            pairs = [(x, y) for x in els for y in els]
        else:
            pairs = [(rng.choice(els), rng.choice(els)) for _ in range(2000)]
        assert _polarization_holds(f, pairs)


def test_quotient_overlattice_commute_1000_cases():
    cases, lattices, failures = commuting_oracle()
    assert cases >= 1000 and not failures
    print(f"{cases} (lattice, subgroup) cases over {lattices} lattices")


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_quotient_overlattice_commute_hypothesis(r):
    _, lat = random_lattice(r)
    f = discriminant_form(lat)
    for h in enumerate_isotropic(f, dedup=True):
        m = overlattice_gram(lat, h, form=f)
        assert is_isomorphic(discriminant_form(m), quotient_form(f, h))


_atom_params = st.one_of(
    st.tuples(st.just("w"), st.just(2), st.just(1), st.sampled_from([1, -1])),
    st.tuples(st.just("w"), st.just(2), st.integers(2, 3), st.sampled_from([1, -1, 5, -5])),
    st.tuples(st.just("w"), st.sampled_from([3, 5, 7]), st.integers(1, 2), st.sampled_from([1, -1])),
    st.tuples(st.sampled_from(["u", "v"]), st.integers(1, 2)),
)


@settings(max_examples=200, deadline=None)
@given(st.lists(_atom_params, min_size=1, max_size=3))
def test_negate_involution(params):
    f = atom(*params[0])
    for p in params[1:]:
        f = f + atom(*p)
    if f.order > 4096:
        return
    nn = negate(negate(f))
    assert nn.value_table == f.value_table
    assert is_isomorphic(nn, f)
    n1 = negate(f)
    assert all(mod2(n1.q(x) + f.q(x)) == 0 for x in f.elements())


@settings(max_examples=200, deadline=None)
@given(st.lists(_atom_params, min_size=1, max_size=3))
def test_polarization_atom_sums(params):
    f = atom(*params[0])
    for p in params[1:]:
        f = f + atom(*p)
    els = list(islice(f.elements(), 64))
    assert _polarization_holds(f, [(x, y) for x in els for y in els[:16]])
