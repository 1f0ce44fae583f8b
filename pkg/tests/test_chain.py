import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import chain as ch
from core.chain import BettiVector, ChainMap, Total, identity_map, make_complex, unit_complex
from core.errors import NotDifferential, ShapeError, SheafError
from core.field import get_field

FIELDS = ['F2', 'Fp:3', 'Q']

# (度数, 种类)：point 为 k[−n]，pair 为无环的 k → k
pieces = st.lists(st.tuples(st.integers(-2, 2), st.sampled_from(['point', 'pair'])), max_size=4)


def build(field, layout):
    parts = []
    for n, kind in layout:
        k = unit_complex(field, n)
        parts.append(k if kind == 'point' else ch.cone(identity_map(k)))
    return ch.direct_sum(*parts) if parts else ch.zero_complex(field)


def expected_betti(layout):
    counts = {}
    for n, kind in layout:
        if kind == 'point':
            counts[n] = counts.get(n, 0) + 1
    return BettiVector(counts)


def convolve_betti(left, right, sign):
    counts = {}
    for i, a in left.items():
        for j, b in right.items():
            n = i + j if sign > 0 else j - i
            counts[n] = counts.get(n, 0) + a * b
    return BettiVector(counts)


def test_betti_vector_basics():
    betti = BettiVector({0: 1, 1: 2, 3: 0})
    assert betti == {0: 1, 1: 2}
    assert str(betti) == '{0:1, 1:2}'
    assert str(BettiVector()) == '{}'
    assert betti.total == 3
    assert betti.euler() == -1
    assert betti.shifted(1) == {-1: 1, 0: 2}
    assert betti.homological() == {0: 1, -1: 2}
    assert ch.add_betti(betti, {1: 1}) == {0: 1, 1: 3}
    with pytest.raises(ValueError):
        BettiVector({0: -1})


def test_shape_mismatch_rejected(f2):
    with pytest.raises(ShapeError):
        make_complex(f2, {0: 1, 1: 1}, {0: f2.zeros(2, 1)})


def test_square_of_differential_must_vanish(f2):
    one = f2.identity(1)
    with pytest.raises(NotDifferential) as excinfo:
        make_complex(f2, {0: 1, 1: 1, 2: 1}, {0: one, 1: one})
    assert excinfo.value.degree == 0


def test_homology_of_small_complexes(f2):
    assert ch.homology(unit_complex(f2)) == {0: 1}
    assert ch.homology(ch.cone(identity_map(unit_complex(f2, 3)))) == {}
    assert ch.is_acyclic(ch.zero_complex(f2))


@pytest.mark.parametrize('name', FIELDS)
def test_unit_laws(name):
    field = get_field(name)
    c = build(field, [(0, 'point'), (1, 'pair'), (-1, 'point')])
    k = unit_complex(field)
    assert ch.tensor(k, c).same_as(c)
    assert ch.tensor(c, k).same_as(c)
    assert ch.hom_complex(k, c).same_as(c)


@settings(max_examples=30, deadline=None)
@given(left=pieces, right=pieces, name=st.sampled_from(FIELDS))
def test_kunneth_for_tensor_and_hom(left, right, name):
    field = get_field(name)
    a, b = build(field, left), build(field, right)
    assert ch.homology(a) == expected_betti(left)
    assert ch.homology(ch.tensor(a, b)) == convolve_betti(expected_betti(left), expected_betti(right), 1)
    assert ch.homology(ch.hom_complex(a, b)) == convolve_betti(expected_betti(left), expected_betti(right), -1)


@settings(max_examples=30, deadline=None)
@given(layout=pieces, k=st.integers(-3, 3))
def test_shift_moves_homology(layout, k):
    field = get_field('Fp:5')
    c = build(field, layout)
    shifted = ch.shift(c, k)
    assert ch.homology(shifted) == ch.homology(c).shifted(k)
    assert ch.shift(shifted, -k).same_as(c)


def test_tensor_sign_keeps_square_zero(rationals):
    # 两个因子都有非零微分时 Koszul 符号必不可少
    pair = ch.cone(identity_map(unit_complex(rationals)))
    product = ch.tensor(pair, pair)
    assert product.dims == {-2: 1, -1: 2, 0: 1}
    assert ch.homology(product) == {}


def test_chain_map_must_commute(f2):
    pair = ch.cone(identity_map(unit_complex(f2, 1)))
    with pytest.raises(ShapeError):
        ChainMap(pair, pair, {0: f2.identity(1), 1: f2.zeros(1, 1)})


def test_quasi_isomorphism_checks_agree(f2):
    k = unit_complex(f2)
    c = build(f2, [(0, 'point'), (0, 'pair')])
    assert ch.is_quasi_iso(identity_map(c))
    assert ch.homology_iso(identity_map(c))
    assert not ch.is_quasi_iso(ch.zero_map(k, k))
    assert not ch.homology_iso(ch.zero_map(k, k))
    # k → (k 在 0 度 ⊕ 无环对)：包含第一个分量
    inclusion = ChainMap(k, c, {0: f2.from_entries(2, 1, [(0, 0, 1)])})
    assert ch.is_quasi_iso(inclusion)
    assert ch.homology_iso(inclusion)


def test_compose_and_add(rationals):
    k = unit_complex(rationals)
    double = ChainMap(k, k, {0: rationals.from_entries(1, 1, [(0, 0, 2)])})
    assert ch.compose(identity_map(k), double).equals(double)
    assert ch.add_maps(double, double, -1).is_zero()
    with pytest.raises(ShapeError):
        ch.compose(double, ch.zero_map(k, unit_complex(rationals, 1)))


def test_hom_map_is_pre_and_post_composition(rationals):
    k = unit_complex(rationals)
    two = ChainMap(k, k, {0: rationals.from_entries(1, 1, [(0, 0, 2)])})
    three = ChainMap(k, k, {0: rationals.from_entries(1, 1, [(0, 0, 3)])})
    induced = ch.hom_map(two, three)
    assert induced.component(0)[0, 0] == 6


def test_cone_euler_characteristic(rationals):
    k = unit_complex(rationals)
    target = build(rationals, [(0, 'point'), (1, 'point'), (2, 'pair')])
    f = ChainMap(k, target, {0: rationals.from_entries(target.dim(0), 1, [(0, 0, 1)])})
    assert ch.euler_characteristic(ch.cone(f)) == ch.euler_characteristic(target) - 1
    assert ch.homology(ch.cone(f)) == {1: 1}


def test_total_assembles_links(f2):
    k = unit_complex(f2)
    total = Total(f2, [('a', k, 0, 1), ('b', k, 1, 1)], [('a', 'b', identity_map(k), 1)])
    assert total.complex.dims == {0: 1, 1: 1}
    assert ch.homology(total.complex) == {}
    assert total.slot('b', 1) == 0
    with pytest.raises(SheafError):
        Total(f2, [('a', k, 0, 1), ('b', k, 0, 1)], [('a', 'b', identity_map(k), 1)])


def test_total_map_to_single(f2):
    k = unit_complex(f2)
    total = Total(f2, [('a', k, 0, 1)])
    comparison = total.map_to(ch.single(k), [('a', None, identity_map(k))])
    assert ch.is_quasi_iso(comparison)
