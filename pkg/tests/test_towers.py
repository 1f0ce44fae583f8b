import pytest

from core import chain as ch
from core.chain import identity_map, unit_complex
from core.errors import ShapeError, SheafError
from core.towers import (TowerFunctor, extend_horizon, tower_const, tower_support, tower_truncation, tower_yoneda,
                         truncation_comparison, window, window_poset)


def test_window_poset_orientation():
    poset = window_poset(3)
    assert poset.elements == ('0', '1', '2', '3')
    assert poset.leq('3', '0')
    assert poset.maximal() == ['0']


def test_tower_values_past_horizon(f2):
    k = unit_complex(f2)
    tower = tower_truncation(k, 1)
    assert tower.value(1).dims == {0: 1}
    assert tower.value(5).is_zero()
    assert tower.step(0).equals(identity_map(k))
    assert tower.step(1).is_zero()
    assert tower_yoneda(2, f2).name == 'y(2)'


def test_tower_shape_checks(f2):
    k = unit_complex(f2)
    with pytest.raises(SheafError):
        TowerFunctor([], [], k)
    with pytest.raises(ShapeError):
        TowerFunctor([k, k], [], k)
    with pytest.raises(ShapeError):
        TowerFunctor([k], [], k, ch.zero_map(unit_complex(f2, 1), k))


def test_support(f2):
    k = unit_complex(f2)
    assert tower_support(tower_const(k, 2)) is None
    assert tower_support(tower_truncation(k, 2)) == ['0', '1', '2']


def test_window_is_a_functor_on_the_window(f2):
    functor = window(tower_const(unit_complex(f2)), 4)
    assert len(functor.base) == 5
    assert ch.homology(functor.map('4', '0').source) == {0: 1}
    assert ch.is_quasi_iso(functor.map('4', '0'))


def test_extend_horizon_keeps_the_tower(f2):
    k = unit_complex(f2)
    tower = tower_truncation(k, 1)
    longer = extend_horizon(tower, 4)
    assert longer.horizon == 4
    assert all(longer.value(n).same_as(tower.value(n)) for n in range(8))
    assert longer.step(1).is_zero()
    assert longer.value(3).is_zero()
    assert extend_horizon(longer, 2) is longer


@pytest.mark.parametrize('horizon', [0, 2, 3])
def test_truncation_comparison_is_stable(horizon, f2):
    k = unit_complex(f2)
    result = truncation_comparison(extend_horizon(tower_const(k), horizon))
    assert result.stable
    assert (result.lhs, result.rhs, result.quasi_iso) == ({}, {0: 1}, False)
    assert result.cutoff == horizon + 1
    assert result.horizons == (horizon + 3, horizon + 4)


def test_compact_towers_pass_the_comparison(f2):
    k = unit_complex(f2, 0, 2)
    result = truncation_comparison(tower_truncation(k, 2), unit_complex(f2))
    assert result.quasi_iso
    assert result.lhs == result.rhs
