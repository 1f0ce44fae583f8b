"""沿单调映射 q: P → Q 的双反射子范畴 Fun(Q) ↪ Fun(P)

ι_* = restrict（沿 q 拉回），ι* = loc_left（左 Kan），ι^♭ = loc_right（右 Kan）。
双反射由余单位在 Yoneda 生成元上的逐点拟同构判定。
"""
import logging

from . import chain as ch
from .chain import identity_map, single
from .classify import cellularize, is_compact, is_proper
from .errors import BaseMismatch, NotVerified
from .funcat import (NatTrans, kan_left, kan_left_totals, kan_right, kan_right_totals, pullback,
                     yoneda)
from .models import Bireflection, Report
from .utils import ordered_map

logger = logging.getLogger(__name__)


def restrict(f, functor):
    """ι_*：p ↦ G(f(p))"""
    if not functor.base.same_as(f.target):
        raise BaseMismatch(f"函子的底 {functor.base.name} 不是映射的值域 {f.target.name}")
    return pullback(functor, f)


def loc_left(f, functor):
    return kan_left(f, functor)


def loc_right(f, functor):
    return kan_right(f, functor)


def counit_left(f, functor):
    """loc_left(restrict G) → G：0-链 (p₀) 上取 G(f(p₀) ≤ y)；返回 (左端函子, 自然变换)"""
    pulled = restrict(f, functor)
    totals = kan_left_totals(f, pulled)
    source = kan_left(f, pulled, totals)
    components = {}
    for y in f.target.elements:
        total = totals[y]
        blocks = [(key, None, functor.map(f(key[0]), y)) for key in total.order if len(key) == 1]
        components[y] = total.map_to(single(functor.values[y]), blocks)
    return source, NatTrans(source, functor, components, check=False)


def unit_right(f, functor):
    """G → loc_right(restrict G)：余单纯 0 度上取 G(x ≤ f(p₀))"""
    pulled = restrict(f, functor)
    totals = kan_right_totals(f, pulled)
    target = kan_right(f, pulled, totals)
    components = {}
    for x in f.target.elements:
        total = totals[x]
        blocks = [(None, key, functor.map(x, f(key[0]))) for key in total.order if len(key) == 1]
        components[x] = single(functor.values[x]).map_to(total, blocks)
    return target, NatTrans(functor, target, components, check=False)


def unit_left_pointwise(f, functor):
    """F(p) → loc_left(F)(f(p))：0-链 (p) 的和项包含；只逐点给出"""
    totals = kan_left_totals(f, functor)
    maps = {}
    for p in f.source.elements:
        total = totals[f(p)]
        blocks = [(None, (p,), identity_map(functor.values[p]))] if total.has((p,)) else []
        maps[p] = single(functor.values[p]).map_to(total, blocks)
    return maps


def yoneda_comparison(f, p, field):
    """loc_left(y(P,p)) → y(Q, f(p))"""
    generator = yoneda(f.source, p, field)
    totals = kan_left_totals(f, generator)
    source = kan_left(f, generator, totals)
    target = yoneda(f.target, f(p), field)
    components = {}
    for y in f.target.elements:
        total = totals[y]
        blocks = [(key, None, identity_map(generator.values[key[0]]))
                  for key in total.order if len(key) == 1 and not target.values[y].is_zero()]
        components[y] = total.map_to(single(target.values[y]), blocks)
    return NatTrans(source, target, components, check=False)


def _check_generator(f, x, field):
    source, counit = counit_left(f, yoneda(f.target, x, field))
    for y in f.target.elements:
        if not ch.is_quasi_iso(counit[y]):
            return y, ch.homology(source.values[y])
    return None


def check_bireflective(f, field):
    """对每个 x ∈ Q 检查 loc_left(restrict(y(x))) → y(x) 是否逐点拟同构"""
    results = ordered_map(lambda x: _check_generator(f, x, field), f.target.elements)
    for x, failure in zip(f.target.elements, results):
        if failure is not None:
            at, betti = failure
            logger.info(f"双反射被否证: 生成元 y({x}) 在 {at} 处余单位不是拟同构，Betti {betti.homological()}")
            return Bireflection(f, verified=False, witness=x, witness_at=at, witness_betti=betti)
    return Bireflection(f, verified=True)


def _generated(f, functor, cache):
    """G 的胞腔表示中每个胞腔 y(x) 都是某个 loc_left(y(p)) 的像"""
    presentation = cellularize(functor)
    if not presentation.is_exact():
        return False
    for cell in presentation.cells:
        x = cell.element
        if x not in cache:
            sources = f.preimage(x)
            cache[x] = any(yoneda_comparison(f, p, functor.field).is_quasi_iso() for p in sources)
        if not cache[x]:
            return False
    return True


def transfer_report(bireflection, samples, version='', seed=None):
    """在已验证的双反射上检查紧性检测、生成与真性传递"""
    if not bireflection.verified:
        raise NotVerified(f"映射 {bireflection.map.name} 未通过双反射检查: {bireflection.status}")
    f = bireflection.map
    field_name = samples[0].field.name if samples else ''
    report = Report('transfer-report', version, field_name, seed=seed)
    detail = report.section('samples')
    passed = {'detection': True, 'generation': True, 'properness': True}
    cache = {}
    for i, functor in enumerate(samples):
        pulled = restrict(f, functor)
        compact_q = is_compact(functor).value
        compact_p = is_compact(pulled).value
        detection = compact_q or not compact_p
        generation = _generated(f, functor, cache) if compact_q else None
        properness = is_proper(functor).value == is_proper(pulled).value
        passed['detection'] &= detection
        passed['generation'] &= generation is not False
        passed['properness'] &= properness
        gen_text = 'skipped' if generation is None else str(generation).lower()
        detail.add(f'sample[{i}]', f'compact={str(compact_q).lower()} detection={str(detection).lower()} '
                                   f'generation={gen_text} properness={str(properness).lower()}')
    summary = report.section('summary')
    summary.add('map', f.name)
    summary.add('status', bireflection.status)
    for key, value in passed.items():
        summary.add(key, str(value).lower())
    report.verdict = all(passed.values())
    return report
