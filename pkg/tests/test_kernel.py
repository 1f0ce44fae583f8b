import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import chain as ch
from core.chain import identity_map, unit_complex
from core.errors import BaseMismatch, NotFunctorial, NotNatural, UnknownElement, UnsupportedTail
from core.field import get_field
from core.funcat import NatTrans, constant, direct_sum, skyscraper, yoneda
from core.kernel import (associator, column, column_comparison, compose_kernels, convolve, euler_prediction,
                         external_product, identity_kernel, kernel_base, make_kernel, row, unit_comparison,
                         with_tail)
from core.poset import opposite
from core.tails import make_tail
from core.utils import make_rng
from services import sample_service as samples

seeds = st.integers(0, 10 ** 6)


def small_poset(rng, name):
    return samples.random_poset(rng, rng.randint(1, 3), name=name)


def test_kernel_base_naming(chain2):
    base = kernel_base(chain2, chain2)
    assert base.name == 'chain2^opxchain2'
    assert base.leq('(b,a)', '(a,a)')
    assert base.leq('(a,a)', '(a,b)')
    assert not base.leq('(a,a)', '(b,a)')


def test_identity_kernel_columns(chain2, f2):
    kernel = identity_kernel(chain2, f2)
    assert kernel.value('a', 'b').dims == {0: 1}
    assert kernel.value('b', 'a').is_zero()
    col = column(kernel, 'a')
    assert [q for q in chain2.elements if not col.values[q].is_zero()] == ['a', 'b']
    assert row(kernel, 'a').base.same_as(opposite(chain2))
    with pytest.raises(UnknownElement):
        column(kernel, 'z')


@settings(max_examples=50, deadline=None)
@given(seed=seeds, name=st.sampled_from(['F2', 'Fp:3']))
def test_identity_kernel_is_a_unit(seed, name):
    rng = make_rng(seed)
    poset = samples.random_poset(rng, rng.randint(1, 5))
    functor = samples.random_functor(rng, poset, get_field(name))
    result, comparison = unit_comparison(functor)
    assert result.base.same_as(poset)
    assert comparison.is_quasi_iso()


@settings(max_examples=50, deadline=None)
@given(seed=seeds, name=st.sampled_from(['F2', 'Fp:3']))
def test_convolution_is_associative(seed, name):
    rng = make_rng(seed)
    field = get_field(name)
    p, q, r = small_poset(rng, 'P'), small_poset(rng, 'Q'), small_poset(rng, 'R')
    functor = samples.random_functor(rng, p, field)
    first = samples.random_kernel(rng, p, q, field)
    second = samples.random_kernel(rng, q, r, field)
    left, right, comparison = associator(functor, first, second)
    assert left.base.same_as(r) and right.base.same_as(r)
    assert comparison.is_quasi_iso()


def test_associator_on_identity_kernels(chain2, f2):
    functor = yoneda(chain2, 'a', f2)
    kernel = identity_kernel(chain2, f2)
    left, right, comparison = associator(functor, kernel, kernel)
    assert comparison.is_quasi_iso()
    assert ch.homology(left.values['b']) == ch.homology(right.values['b']) == {0: 1}


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_euler_characteristic_prediction(seed):
    rng = make_rng(seed)
    field = get_field('Q')
    p, q = small_poset(rng, 'P'), small_poset(rng, 'Q')
    functor = samples.random_functor(rng, p, field)
    kernel = samples.random_kernel(rng, p, q, field)
    result = convolve(functor, kernel)
    for x in q.elements:
        assert ch.euler_characteristic(result.values[x]) == euler_prediction(functor, kernel, x)


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_yoneda_convolution_is_the_column(seed):
    rng = make_rng(seed)
    field = get_field('Fp:5')
    p, q = small_poset(rng, 'P'), small_poset(rng, 'Q')
    kernel = samples.random_kernel(rng, p, q, field)
    for element in p.elements:
        result, comparison = column_comparison(kernel, element)
        assert comparison.target.base.same_as(q)
        assert comparison.is_quasi_iso()


def test_column_comparison_is_not_just_stalkwise(chain2, f2):
    # y(a) 与 sky(a) ⊕ sky(b) 的茎处处相同，但不同构
    kernel = identity_kernel(chain2, f2)
    _, comparison = column_comparison(kernel, 'a')
    assert comparison.is_quasi_iso()
    fake = direct_sum(skyscraper(chain2, 'a', f2), skyscraper(chain2, 'b', f2))
    assert all(ch.homology(fake.values[x]) == ch.homology(comparison.target.values[x]) for x in chain2.elements)
    components = {x: ch.zero_map(fake.values[x], comparison.target.values[x]) for x in chain2.elements}
    components['b'] = identity_map(fake.values['b'])
    assert not NatTrans(fake, comparison.target, components).is_quasi_iso()
    with pytest.raises(NotNatural):
        NatTrans(fake, comparison.target, {x: identity_map(fake.values[x]) for x in chain2.elements})


def test_external_product_values(chain2, f2):
    left = constant(opposite(chain2), f2, unit_complex(f2, 0, 2))
    right = yoneda(chain2, 'b', f2)
    kernel = external_product(left, right)
    assert kernel.value('a', 'b').dims == {0: 2}
    assert kernel.value('a', 'a').is_zero()
    # 外积核的卷积：hocolim(F ⊗ 常值) ⊗ G
    result = convolve(constant(chain2, f2), kernel)
    assert ch.homology(result.values['b']) == {0: 2}
    assert ch.homology(result.values['a']) == {}


def test_convolution_checks_bases(circle, chain2, f2):
    kernel = identity_kernel(chain2, f2)
    with pytest.raises(BaseMismatch):
        convolve(constant(circle, f2), kernel)
    with pytest.raises(BaseMismatch):
        compose_kernels(kernel, identity_kernel(circle, f2))


def test_tailed_kernels_cannot_be_composed(chain2, f2):
    kernel = with_tail(identity_kernel(chain2, f2), 'a', 'b', make_tail(unit_complex(f2)))
    assert kernel.has_tails()
    with pytest.raises(UnsupportedTail):
        compose_kernels(kernel, identity_kernel(chain2, f2))


def test_tailed_kernel_convolution_carries_tail(chain2, f2):
    kernel = with_tail(identity_kernel(chain2, f2), 'a', 'b', make_tail(unit_complex(f2), 1, 2))
    result = convolve(yoneda(chain2, 'a', f2), kernel)
    assert 'b' in result.tails
    betti = result.betti('b')
    assert betti.finite == {0: 1}
    assert betti.first_tail_degree() == 1
    clean = convolve(yoneda(chain2, 'b', f2), kernel)
    assert not clean.has_tails()


def test_parallel_assembly_matches_sequential(rng, chain2, f2, monkeypatch):
    kernel = samples.random_kernel(rng, chain2, chain2, f2)
    functor = samples.random_functor(rng, chain2, f2)
    sequential = convolve(functor, kernel)
    monkeypatch.setenv('SHEAFCTL_WORKERS', '4')
    parallel = convolve(functor, kernel)
    assert all(parallel.values[q].same_as(sequential.values[q]) for q in chain2.elements)


def test_make_kernel_checks_functoriality(chain2, f2):
    k = unit_complex(f2)
    values = {'(a,a)': k, '(a,b)': k, '(b,b)': k}
    edges = {('(a,a)', '(a,b)'): identity_map(k), ('(b,b)', '(a,b)'): identity_map(k)}
    kernel = make_kernel(chain2, chain2, values, edges, name='by_hand')
    reference = identity_kernel(chain2, f2)
    for p in chain2.elements:
        for q in chain2.elements:
            assert kernel.value(p, q).same_as(reference.value(p, q))
    values['(b,a)'] = k
    edges[('(b,a)', '(a,a)')] = identity_map(k)
    with pytest.raises(NotFunctorial):
        make_kernel(chain2, chain2, values, edges)
    with pytest.raises(UnknownElement):
        make_kernel(chain2, chain2, {'(c,a)': k}, {})
