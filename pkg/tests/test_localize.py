import pytest

from core import chain as ch
from core.errors import BaseMismatch, NotVerified
from core.funcat import PFunctor, constant, yoneda
from core.localize import (check_bireflective, counit_left, loc_left, loc_right, restrict, transfer_report,
                           unit_left_pointwise, unit_right, yoneda_comparison)
from core.poset import identity
from core.tails import make_tail
from core.utils import make_rng
from services import sample_service as samples


@pytest.fixture
def coarsen():
    return samples.coarsening_map()


def test_coarsening_is_bireflective(coarsen, f2):
    result = check_bireflective(coarsen, f2)
    assert result.verified
    assert result.status == 'verified'


def test_point_collapse_is_refuted(circle, f2):
    result = check_bireflective(samples.point_collapse(circle), f2)
    assert not result.verified
    assert result.witness == '*'
    assert result.witness_at == '*'
    assert result.witness_betti.homological() == {0: 1, 1: 1}
    assert result.status == 'refuted(*)'


def test_left_localization_sends_yonedas_to_yonedas(coarsen, f2):
    for p in coarsen.source.elements:
        assert yoneda_comparison(coarsen, p, f2).is_quasi_iso()


def test_counit_on_generators(coarsen, f2):
    for x in coarsen.target.elements:
        source, counit = counit_left(coarsen, yoneda(coarsen.target, x, f2))
        assert counit.is_quasi_iso()
        assert source.base.same_as(coarsen.target)


def test_right_unit_for_bireflective_map(coarsen, f2):
    rng = make_rng(11)
    for functor in (constant(coarsen.target, f2), samples.random_functor(rng, coarsen.target, f2)):
        target, unit = unit_right(coarsen, functor)
        assert unit.is_quasi_iso()


def test_restriction_and_kan_extensions(coarsen, f2):
    functor = constant(coarsen.target, f2)
    pulled = restrict(coarsen, functor)
    assert pulled.base.same_as(coarsen.source)
    assert all(ch.homology(loc_left(coarsen, pulled).values[x]) == {0: 1} for x in coarsen.target.elements)
    assert all(ch.homology(loc_right(coarsen, pulled).values[x]) == {0: 1} for x in coarsen.target.elements)
    with pytest.raises(BaseMismatch):
        restrict(coarsen, constant(coarsen.source, f2))


def test_unit_left_pointwise_along_identity(circle, f2):
    functor = constant(circle, f2)
    for p, component in unit_left_pointwise(identity(circle), functor).items():
        assert ch.is_quasi_iso(component)


def test_transfer_report_passes_on_coarsening(coarsen, f2):
    rng = make_rng(3)
    k = ch.unit_complex(f2)
    acyclic = ch.cone(ch.identity_map(ch.unit_complex(f2, 1)))
    functors = [samples.random_functor(rng, coarsen.target, f2) for _ in range(50)]
    functors.append(PFunctor(coarsen.target, f2, {}, {}, tails={'1-2': make_tail(k)}))
    functors.append(PFunctor(coarsen.target, f2, {'1-2': k}, {}, tails={'1-2': make_tail(acyclic, 0, 2)}))
    report = transfer_report(check_bireflective(coarsen, f2), functors)
    assert report.verdict is True
    summary = dict(report.sections[-1].entries)
    assert summary['detection'] == summary['generation'] == summary['properness'] == 'true'
    lines = dict(report.sections[0].entries)
    assert lines['sample[50]'] == 'compact=false detection=true generation=skipped properness=true'
    assert lines['sample[51]'] == 'compact=true detection=true generation=true properness=true'


def test_transfer_report_requires_verification(circle, f2):
    refuted = check_bireflective(samples.point_collapse(circle), f2)
    with pytest.raises(NotVerified):
        transfer_report(refuted, [constant(samples.point_collapse(circle).target, f2)])
