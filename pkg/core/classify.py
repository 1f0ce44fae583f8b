"""紧性与真性的判定、紧对象的胞腔化、卷积核分类及其操作层面的交叉验证

判据（有限支撑 + 完美茎 / 完美茎）是结论的来源，操作层面的见证只用于验证判据。
"""
import logging

from . import chain as ch
from .errors import NotCompact, UnsupportedSystem
from .funcat import (NatTrans, PFunctor, bar_resolution, recognize_yoneda, rhom, rhom_induced,
                     yoneda, yoneda_presentation)
from .kernel import column, column_comparison, convolve
from .models import INFINITE_SUPPORT, ColumnVerdict, KernelVerdict, Report, Verdict, WitnessResult
from .tails import TailBetti, tail_betti, tail_is_perfect, value_betti, value_is_perfect
from .towers import TowerFunctor, tower_const, tower_support, tower_yoneda, truncation_comparison
from .utils import derive_seed, make_rng, ordered_map
from services.sample_service import random_functor

logger = logging.getLogger(__name__)


class FiniteSystem:
    """有限有向系统 G_0 → … → G_r，带指定的余极限与余锥映射 G_r → colimit"""

    def __init__(self, functors, links, colimit, cocone):
        if len(links) != len(functors) - 1:
            raise UnsupportedSystem("有限系统的连接映射个数应比对象少一个")
        self.functors = list(functors)
        self.links = list(links)
        self.colimit = colimit
        self.cocone = cocone


class TruncationSystem:
    """τ_0 → τ_1 → …，余极限为常值塔 V"""

    def __init__(self, value=None):
        self.value = value


def _nonzero(betti):
    if isinstance(betti, dict):
        return bool(betti)
    return bool(betti.finite) or not betti.is_finite()


def betti_agree(left, right):
    """两个（可能带尾的）Betti 在覆盖全部非平凡度数的窗口上一致"""
    left = left if isinstance(left, TailBetti) else TailBetti(left, {}, 0, 1)
    right = right if isinstance(right, TailBetti) else TailBetti(right, {}, 0, 1)
    marks = [0]
    for betti in (left, right):
        marks += list(betti.finite) + [m + betti.anchor for m in betti.base]
    reach = 4 * max(left.stride, right.stride)
    return left.window(min(marks) - 1, max(marks) + reach) == right.window(min(marks) - 1, max(marks) + reach)


def support(functor):
    """同调支撑；ℕ^op 上无限支撑时返回 INFINITE_SUPPORT"""
    if isinstance(functor, TowerFunctor):
        found = tower_support(functor)
        return INFINITE_SUPPORT if found is None else found
    return [p for p in functor.base.elements if _nonzero(functor.betti(p))]


def _first_imperfect(functor):
    """第一个不完美的茎及其尾部同调起始度数"""
    for p in functor.base.elements:
        tail = functor.tails.get(p)
        if tail is not None and not tail_is_perfect(tail):
            return p, tail_betti(tail).first_tail_degree()
    return None, None


def _betti_evidence(functor, elements):
    return {p: str(functor.betti(p)) for p in elements}


def is_proper(functor):
    """真 ⟺ 每个茎完美（支撑可以无限）"""
    if isinstance(functor, TowerFunctor):
        return Verdict('proper', True, support=support(functor), reason='塔的取值均为有限复形')
    found = support(functor)
    offending, degree = _first_imperfect(functor)
    return Verdict('proper', offending is None, support=found, betti=_betti_evidence(functor, found),
                   offending=offending, offending_degree=degree,
                   reason='' if offending is None else '茎不完美')


def is_v_proper(functor):
    """系数取链复形时 V-真性与真性一致"""
    return is_proper(functor)


def is_compact(functor):
    """紧 ⟺ 支撑有限且每个茎完美"""
    if isinstance(functor, TowerFunctor):
        found = support(functor)
        if found == INFINITE_SUPPORT:
            return Verdict('compact', False, support=found, reason='支撑无限',
                           betti={'eventual': str(ch.homology(functor.eventual_value))})
        return Verdict('compact', True, support=found)
    verdict = is_proper(functor)
    verdict.predicate = 'compact'
    return verdict


def cellularize(functor):
    """紧对象的有限胞腔表示；恰为 y(p)⊗V 时只用一个胞腔"""
    verdict = is_compact(functor)
    if not verdict.value:
        raise NotCompact(f"对象不是紧的: {verdict.reason}（{verdict.offending or verdict.support}）")
    functor = functor.without_acyclic_tails()
    p = recognize_yoneda(functor)
    if p is not None:
        return yoneda_presentation(functor, p)
    return bar_resolution(functor)


def cell_bound(functor):
    """严格链数 × 非零茎度数的个数"""
    degrees = {n for c in functor.values.values() for n in c.degrees}
    return len(functor.base.chains) * max(len(degrees), 1)


def _column_verdict(kernel, p):
    col = column(kernel, p)
    offending, degree = _first_imperfect(col)
    failing_betti = str(col.betti(offending)) if offending is not None else ''
    return ColumnVerdict(p, finite_support=True, perfect=offending is None, failing=offending,
                         failing_degree=degree, failing_betti=failing_betti)


def check_kernel(kernel):
    """每一列 K|_{{p}×Q} 是否紧；全部为紧时卷积保持紧对象"""
    verdicts = ordered_map(lambda p: _column_verdict(kernel, p), kernel.left.elements)
    return KernelVerdict(dict(zip(kernel.left.elements, verdicts)))


def check_kernel_sufficient(kernel):
    """充分条件：所有茎完美且列支撑有限"""
    offending, degree = _first_imperfect(kernel.carrier)
    return Verdict('preserves_compacts', offending is None, support=support(kernel.carrier),
                   offending=offending, offending_degree=degree)


def generator_check(kernel):
    """独立检查：对每个 p 判定 y(p) ∗ K 是否紧"""
    def one(p):
        return is_compact(convolve(yoneda(kernel.left, p, kernel.field), kernel))
    return dict(zip(kernel.left.elements, ordered_map(one, kernel.left.elements)))


def _column_match(kernel, p):
    """y(p) ∗ K → column(K,p) 是逐点拟同构，且两端尾部的符号 Betti 一致"""
    result, comparison = column_comparison(kernel, p)
    if not comparison.is_quasi_iso():
        return False
    target = comparison.target
    tailed = [q for q in kernel.right.elements if q in result.tails or q in target.tails]
    return all(betti_agree(result.betti(q), target.betti(q)) for q in tailed)


def cross_validate_kernel(kernel, sample_size, seed, version='', field_name=''):
    """(a) 生成元层面：y(p) ∗ K ≃ column(K,p) 且紧性一致；(b) 随机紧对象 F ∗ K 的紧性一致"""
    criterion = check_kernel(kernel)
    report = Report('cross-validate', version, field_name or kernel.field.name, seed=seed)
    generators = report.section('generators')
    agree = True
    for p, verdict in generator_check(kernel).items():
        matches = _column_match(kernel, p)
        expected = criterion.per_column[p].compact
        ok = matches and verdict.value == expected
        agree = agree and ok
        line = f'compact={str(verdict.value).lower()} column_match={str(matches).lower()}'
        if verdict.offending is not None:
            line += f' offending={verdict.offending} degree={verdict.offending_degree}'
        generators.add(f'y({p})', line)
    samples = report.section('samples')
    for i in range(sample_size):
        rng = make_rng(derive_seed(seed, 'cross-validate', i))
        sample = random_functor(rng, kernel.left, kernel.field)
        verdict = is_compact(convolve(sample, kernel))
        implied = criterion.preserves_compacts
        # 核保持紧对象时结果必须为紧；核不保持时样本的结论不受约束，只记录
        ok = verdict.value or not implied
        agree = agree and ok
        samples.add(f'sample[{i}]', f'compact={str(verdict.value).lower()}')
    summary = report.section('summary')
    summary.add('check_kernel', str(criterion.preserves_compacts).lower())
    summary.add('agreement', str(agree).lower())
    report.verdict = agree
    if not agree:
        logger.warning(f"交叉验证不一致: 核 {kernel.name}，种子 {seed}")
    return report


def _finite_witness(functor, system):
    last = system.functors[-1]
    comparison = rhom_induced(functor, system.cocone)
    lhs = ch.homology(comparison.source)
    rhs = ch.homology(comparison.target)
    for link in system.links:
        if not isinstance(link, NatTrans):
            raise UnsupportedSystem("有限系统的连接必须是自然变换")
    logger.debug(f"有限系统: 末项 {last.name}，lhs {lhs}，rhs {rhs}")
    return WitnessResult(lhs=lhs, rhs=rhs, quasi_iso=ch.is_quasi_iso(comparison))


def compactness_witness(functor, system, version='', seed=None):
    """操作层面的紧性检查：比较 colim rhom(F, G_i) 与 rhom(F, colim G_i)"""
    if isinstance(system, TruncationSystem):
        if not isinstance(functor, TowerFunctor):
            raise UnsupportedSystem("截断系统只接受 ℕ^op 上的塔")
        result = truncation_comparison(functor, system.value)
    elif isinstance(system, FiniteSystem):
        if not isinstance(functor, PFunctor):
            raise UnsupportedSystem("有限系统只接受有限偏序上的函子")
        result = _finite_witness(functor, system)
    else:
        raise UnsupportedSystem(f"不支持的有向系统类型: {type(system).__name__}")
    criterion = is_compact(functor)
    report = Report('compactness-witness', version, functor.field.name, seed=seed)
    section = report.section('comparison')
    section.add('lhs', str(result.lhs))
    section.add('rhs', str(result.rhs))
    section.add('quasi_iso', str(result.quasi_iso).lower())
    if result.horizons:
        section.add('horizons', ','.join(str(h) for h in result.horizons))
        section.add('stable', str(result.stable).lower())
    report.section('criterion').add('compact', str(criterion.value).lower())
    # 操作层面的结论不能与判据矛盾
    report.verdict = result.quasi_iso and result.stable
    if result.quasi_iso != criterion.value:
        logger.error(f"紧性见证与判据矛盾: 见证 {result.quasi_iso}，判据 {criterion.value}")
    return report, result


def properness_witness(functor, version=''):
    """对每个 Yoneda 生成元计算 rhom(y(p), F)，检查是否完美，并与判据比较"""
    report = Report('properness-witness', version, functor.field.name)
    section = report.section('generators')
    all_perfect = True
    for p in functor.base.elements:
        value = rhom(yoneda(functor.base, p, functor.field), functor)
        perfect = value_is_perfect(value)
        all_perfect = all_perfect and perfect
        betti = value_betti(value)
        section.add(f'rhom(y({p}),F)', f'{betti} perfect={str(perfect).lower()}')
    criterion = is_proper(functor)
    report.section('criterion').add('proper', str(criterion.value).lower())
    report.verdict = all_perfect
    if all_perfect != criterion.value:
        logger.error("真性见证与判据矛盾")
    return report


def tower_colimit_demo(field, horizon=0, version='', seed=None):
    """ℕ^op 上的常值塔：真而不紧；截断系统上 const 的比较映射失败，y(0) 的成功"""
    k = ch.unit_complex(field)
    const = tower_const(k, horizon)
    report = Report('demo towers', version, field.name, seed=seed)
    classes = report.section('classification')
    proper, compact = is_proper(const), is_compact(const)
    classes.add('proper', proper.value)
    classes.add('compact', compact.value)
    classes.add('support', support(const))
    ok = proper.value and not compact.value
    for label, source, expect in (('const', const, False), ('y(0)', tower_yoneda(0, field), True)):
        witness, result = compactness_witness(source, TruncationSystem(k), version, seed)
        section = report.section(f'witness[{label}]')
        for key, value in witness.sections[0].entries:
            section.add(key, value)
        section.add('cutoff', result.cutoff)
        ok = ok and result.stable and result.quasi_iso == expect
    report.verdict = ok
    if not ok:
        logger.error("常值塔演示的结论与预期不符")
    return report
