import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import chain as ch
from core.chain import identity_map, unit_complex
from core.errors import BaseMismatch, NotFunctorial, NotNatural, UnsupportedTail
from core.field import get_field
from core.funcat import (NatTrans, PFunctor, bar_resolution, constant, direct_sum, down_set_functor, hocolim,
                         holim, kan_left, kan_right, make_functor, pullback, recognize_yoneda, rhom,
                         shift_functor, skyscraper, stalk, stalk_comparison, tensor_functor, yoneda)
from core.poset import collapse, identity, opposite
from core.tails import TailValue, make_tail, tail_betti, tail_is_perfect
from core.utils import make_rng
from services import sample_service as samples

seeds = st.integers(0, 10 ** 6)
small_fields = st.sampled_from(['F2', 'Fp:3'])


def random_setup(seed, name, size=4, with_down_sets=True):
    rng = make_rng(seed)
    poset = samples.random_poset(rng, size)
    functor = samples.random_functor(rng, poset, get_field(name), with_down_sets=with_down_sets)
    return rng, poset, functor


def tailed_chain(field):
    """2-链上的 k → k，b 处追加尾部 Σ k[i]"""
    poset = samples.two_chain()
    k = unit_complex(field)
    return PFunctor(poset, field, {'a': k, 'b': k}, {('a', 'b'): identity_map(k)},
                    tails={'b': make_tail(k)}, name='tailed')


@pytest.mark.parametrize('build, expected', [
    (samples.boundary_triangle, {0: 1, 1: 1}),
    (samples.hexagon, {0: 1, 1: 1}),
    (samples.octahedron, {0: 1, 2: 1}),
])
def test_sections_of_constant_sheaf(build, expected, f2):
    poset = build()
    betti = ch.homology(holim(constant(poset, f2)))
    assert betti == expected
    assert betti == samples.nerve_betti(poset, f2)


def test_sections_match_simplicial_oracle(rationals):
    facets = samples.HEXAGON
    poset = samples.hexagon()
    oracle = samples.simplicial_betti(samples.closure_of(facets), rationals)
    assert ch.homology(holim(constant(poset, rationals))) == oracle


def test_hocolim_of_constant_sheaf(circle, f2):
    betti = ch.homology(hocolim(constant(circle, f2)))
    assert betti == {0: 1, -1: 1}
    assert betti.homological() == {0: 1, 1: 1}


def test_non_functorial_diamond_reported(f2):
    poset = samples.square()
    k = unit_complex(f2)
    values = {p: k for p in poset.elements}
    edges = {cover: identity_map(k) for cover in poset.hasse if cover != ('c', 'd')}
    with pytest.raises(NotFunctorial) as excinfo:
        make_functor(poset, values, edges)
    assert excinfo.value.diamond == ('a', 'c', 'd')


def test_non_natural_square_reported(chain2, f2):
    k = unit_complex(f2)
    source = yoneda(chain2, 'a', f2)
    target = constant(chain2, f2)
    with pytest.raises(NotNatural) as excinfo:
        NatTrans(source, target, {'a': identity_map(k)})
    assert excinfo.value.cover == ('a', 'b')


def test_yoneda_and_skyscraper_supports(circle, f2):
    assert [p for p in circle.elements if not yoneda(circle, '1', f2).values[p].is_zero()] == ['1', '1-2', '1-3']
    assert [p for p in circle.elements if not down_set_functor(circle, '1-2', f2).values[p].is_zero()] == \
        ['1', '2', '1-2']
    assert skyscraper(circle, '2', f2).total_dim() == 1


def test_recognize_yoneda(circle, f2):
    assert recognize_yoneda(yoneda(circle, '2', f2)) == '2'
    assert recognize_yoneda(constant(circle, f2)) is None
    assert recognize_yoneda(skyscraper(circle, '1', f2)) is None


@settings(max_examples=25, deadline=None)
@given(seed=seeds, name=small_fields)
def test_random_functors_are_functorial(seed, name):
    _, poset, functor = random_setup(seed, name)
    make_functor(poset, functor.values, functor.edges, field=functor.field)


@settings(max_examples=100, deadline=None)
@given(seed=seeds, name=small_fields, size=st.integers(1, 8))
def test_stalk_comparison_is_quasi_iso(seed, name, size):
    rng, poset, functor = random_setup(seed, name, size)
    p = rng.choice(poset.elements)
    comparison = stalk_comparison(functor, p)
    assert ch.is_quasi_iso(comparison)
    assert ch.homology(comparison.target) == ch.homology(functor.values[p])


@settings(max_examples=20, deadline=None)
@given(seed=seeds, name=small_fields)
def test_rhom_agrees_with_natural_transformations(seed, name):
    rng, poset, source = random_setup(seed, name, with_down_sets=False)
    target = samples.random_functor(rng, poset, source.field)
    betti = ch.homology(rhom(source, target))
    for degree in (-1, 0, 1):
        assert betti.get(degree, 0) == samples.natural_hom_betti(source, target, degree)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, name=small_fields)
def test_kan_extensions_along_identity(seed, name):
    _, poset, functor = random_setup(seed, name)
    f = identity(poset)
    left, right = kan_left(f, functor), kan_right(f, functor)
    for q in poset.elements:
        assert ch.homology(left.values[q]) == ch.homology(functor.values[q])
        assert ch.homology(right.values[q]) == ch.homology(functor.values[q])


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_kan_extensions_to_a_point(seed):
    _, poset, functor = random_setup(seed, 'F2')
    f = collapse(poset)
    assert ch.homology(kan_left(f, functor).values['*']) == ch.homology(hocolim(functor))
    assert ch.homology(kan_right(f, functor).values['*']) == ch.homology(holim(functor))


@settings(max_examples=20, deadline=None)
@given(seed=seeds, name=small_fields)
def test_bar_resolution_is_exact(seed, name):
    _, poset, functor = random_setup(seed, name)
    presentation = bar_resolution(functor)
    assert presentation.is_exact()
    assert len(presentation) <= len(poset.chains)


def test_pullback_along_collapse(circle, f2):
    point = samples.point_collapse(circle).target
    k = unit_complex(f2, 0, 2)
    pulled = pullback(constant(point, f2, k), samples.point_collapse(circle))
    assert all(pulled.values[p].dims == {0: 2} for p in circle.elements)
    with pytest.raises(BaseMismatch):
        pullback(constant(circle, f2), samples.point_collapse(circle))


def test_tail_stalks_and_rhom(f2):
    functor = tailed_chain(f2)
    assert isinstance(stalk(functor, 'b'), TailValue)
    assert str(functor.betti('a')) == '{0:1}'
    value = rhom(yoneda(functor.base, 'b', f2), functor)
    assert tail_betti(value) == functor.betti('b')
    # y(a) 看到的尾部被 a<b 抵消
    lower = rhom(yoneda(functor.base, 'a', f2), functor)
    assert tail_is_perfect(lower)
    assert tail_betti(lower).finite == {0: 1}


def test_tail_restrictions(f2):
    functor = tailed_chain(f2)
    with pytest.raises(UnsupportedTail):
        shift_functor(functor, 1)
    with pytest.raises(UnsupportedTail):
        rhom(functor, functor)
    with pytest.raises(UnsupportedTail):
        bar_resolution(functor)
    doubled = direct_sum(functor, functor)
    assert tail_betti(doubled.tails['b']).base == {0: 2}


def test_rhom_rejects_different_bases(circle, chain2, f2):
    with pytest.raises(BaseMismatch):
        rhom(constant(circle, f2), constant(chain2, f2))
    with pytest.raises(BaseMismatch):
        rhom(constant(chain2, f2), constant(opposite(chain2), f2))


def test_tensor_functor(circle, f2):
    value = unit_complex(f2, 1, 2)
    result = tensor_functor(constant(circle, f2), value)
    assert ch.homology(holim(result)) == {1: 2, 2: 2}
    tailed = tensor_functor(tailed_chain(f2), value)
    assert tailed.tails['b'].tail_base.dims == {1: 2}
    assert tailed.values['a'].dims == {1: 2}
