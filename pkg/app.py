"""sheafctl 命令行入口：读入偏序/函子/核/映射/塔文件，运行运算与判定，输出确定性报告

退出码：0 = 成功或判定为真，1 = 判定为假，2 = 输入错误（解析失败、前提不满足、用法错误）。
日志只写 stderr，报告只写 stdout。
"""
import logging
import os
import sys

import click
from dotenv import load_dotenv

from core import __version__
from core import chain as ch
from core.classify import (cell_bound, cellularize, check_kernel, cross_validate_kernel, is_compact, is_proper,
                           tower_colimit_demo)
from core.errors import NotCompact, SheafError
from core.field import get_field
from core.funcat import hocolim, holim, rhom, stalk, stalk_comparison
from core.kernel import convolve
from core.localize import check_bireflective, transfer_report
from core.tails import TailValue, slice_window, tail_betti
from core.towers import TowerFunctor, extend_horizon
from core.utils import derive_seed, make_rng
from services.file_service import (input_digests, load_any, load_kernel, load_map, load_poset, load_sheaf,
                                   load_tower)
from services.report_service import add_verdict_evidence, betti_table, exit_code, new_report, render
from services.sample_service import random_functor

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = 'SHEAFCTL_LOG_LEVEL'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _configure_logging():
    level = os.getenv(LOG_LEVEL_ENV, 'WARNING').upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format=LOG_FORMAT, stream=sys.stderr)


def _parse_field(ctx, param, value):
    if value is None:
        return None
    try:
        return get_field(value)
    except SheafError as e:
        raise click.BadParameter(str(e)) from None


def common_options(func):
    """--emit / --field / --seed / --horizon"""
    func = click.option('--horizon', type=click.IntRange(0, None), default=None,
                        help='塔的表示长度；带尾值时为 Betti 窗口的拷贝数')(func)
    func = click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), default=None, help='随机种子')(func)
    func = click.option('--field', 'field', default=None, callback=_parse_field,
                        help='覆盖文件中的系数域：F2、Fp:<p> 或 Q')(func)
    func = click.option('--emit', type=click.Choice(['human', 'machine']), default='human',
                        help='输出格式')(func)
    return func


def _emit(report, emit):
    click.echo(render(report, emit), nl=False)
    return exit_code(report)


def _load_functor(paths, field):
    """[偏序文件] 函子文件"""
    paths = list(paths)
    if len(paths) == 1:
        return load_sheaf(paths[0], field=field)
    if len(paths) == 2:
        return load_sheaf(paths[1], load_poset(paths[0]), field)
    raise click.UsageError('需要参数: [偏序文件] 函子文件')


def _betti_section(section, values, horizon, homological=False):
    """{标签: Complex 或 TailValue}：普通复形进 Betti 表，带尾值写符号 Betti、一个有限窗口与截断复算的校验"""
    plain = {}
    for label, value in values.items():
        if isinstance(value, TailValue):
            betti = tail_betti(value)
            section.add(f'betti[{label}]', str(betti))
            start = betti.first_tail_degree()
            degrees = list(betti.finite)
            if start is None:
                # 尾部同调为零：窗口只覆盖有限部分
                low, high = min([0] + degrees), max([0] + degrees)
            else:
                low, high = min([0, start] + degrees), start + (horizon or 3) * value.stride
            window = betti.window(low, high)
            section.add(f'window[{label}]', str(window))
            agrees = slice_window(value, low, high) == window
            section.add(f'window_check[{label}]', 'agree' if agrees else 'disagree')
            if not agrees:
                logger.error(f"符号 Betti 与截断复算不一致: {label} 在 [{low}, {high}]")
            continue
        plain[label] = ch.homology(value)
        shown = plain[label].homological() if homological else plain[label]
        section.add(f'betti[{label}]', str(shown))
    if plain:
        section.table = betti_table(plain, homological)
    return section


# ---------- 命令 ----------

@click.group(name='sheafctl')
@click.version_option(__version__, prog_name='sheafctl')
def cli():
    """有限偏序上可构造层的精确计算工具"""


@cli.command()
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def validate(paths, emit, field, seed, horizon):
    """解析并校验输入文件"""
    report = new_report('validate', __version__, field.name if field else 'file', seed, input_digests(paths))
    section = report.section('files')
    for path in paths:
        kind, obj = load_any(path, field)
        section.add(os.path.basename(path), f'{kind} ok {_describe(kind, obj)}')
    report.verdict = True
    return _emit(report, emit)


def _describe(kind, obj):
    if kind == 'poset':
        return f'elements={len(obj)} covers={len(obj.hasse)} chains={len(obj.chains)}'
    if kind == 'shf':
        return f'base={obj.base.name} total_dim={obj.total_dim()} tails={len(obj.tails)}'
    if kind == 'ker':
        return f'left={obj.left.name} right={obj.right.name} tails={len(obj.carrier.tails)}'
    if kind == 'mono':
        return f'from={obj.source.name} to={obj.target.name}'
    return f'horizon={obj.horizon}'


@cli.command()
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def homology(paths, emit, field, seed, horizon):
    """每个元素处茎的上同调"""
    functor = _load_functor(paths, field)
    report = new_report('homology', __version__, functor.field.name, seed, input_digests(paths))
    section = report.section('stalks')
    _betti_section(section, {p: stalk(functor, p) for p in functor.base.elements}, horizon)
    return _emit(report, emit)


@cli.command(name='stalk')
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.argument('element')
@common_options
def stalk_command(paths, element, emit, field, seed, horizon):
    """茎 F(p) 及比较映射 F(p) → rhom(y(p), F) 的拟同构检查"""
    functor = _load_functor(paths, field)
    functor.base.check(element)
    report = new_report('stalk', __version__, functor.field.name, seed, input_digests(paths))
    section = report.section('stalk')
    section.add('element', element)
    if functor.has_tails():
        _betti_section(section, {element: stalk(functor, element)}, horizon)
        report.verdict = True
        return _emit(report, emit)
    _betti_section(section, {element: functor.values[element]}, horizon)
    comparison = stalk_comparison(functor, element)
    quasi = ch.is_quasi_iso(comparison)
    section.add('rhom(y,F)', str(ch.homology(comparison.target)))
    section.add('quasi_iso', quasi)
    report.verdict = quasi
    return _emit(report, emit)


@cli.command()
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def sections(paths, emit, field, seed, horizon):
    """整体截面 holim F（上同调指标）"""
    functor = _load_functor(paths, field)
    report = new_report('sections', __version__, functor.field.name, seed, input_digests(paths))
    section = report.section('sections')
    _betti_section(section, {'sections': holim(functor)}, horizon)
    return _emit(report, emit)


@cli.command(name='rhom')
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def rhom_command(paths, emit, field, seed, horizon):
    """导出 Hom：[偏序文件] F G"""
    paths = list(paths)
    if len(paths) == 3:
        poset = load_poset(paths[0])
        source, target = load_sheaf(paths[1], poset, field), load_sheaf(paths[2], poset, field)
    elif len(paths) == 2:
        source, target = load_sheaf(paths[0], field=field), load_sheaf(paths[1], field=field)
    else:
        raise click.UsageError('需要参数: [偏序文件] F G')
    report = new_report('rhom', __version__, source.field.name, seed, input_digests(paths))
    section = report.section('rhom')
    _betti_section(section, {'rhom': rhom(source, target)}, horizon)
    return _emit(report, emit)


@cli.command(name='hocolim')
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def hocolim_command(paths, emit, field, seed, horizon):
    """同伦余极限（同调指标）"""
    functor = _load_functor(paths, field)
    report = new_report('hocolim', __version__, functor.field.name, seed, input_digests(paths))
    section = report.section('hocolim')
    _betti_section(section, {'hocolim': hocolim(functor)}, horizon, homological=True)
    section.add('indexing', 'homological')
    return _emit(report, emit)


@cli.command(name='cellularize')
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def cellularize_command(paths, emit, field, seed, horizon):
    """紧对象的有限胞腔表示；非紧时给出判据证据并以 1 退出"""
    functor = _load_functor(paths, field)
    report = new_report('cellularize', __version__, functor.field.name, seed, input_digests(paths))
    try:
        presentation = cellularize(functor)
    except NotCompact as e:
        logger.info(f"胞腔化失败: {e}")
        add_verdict_evidence(report, is_compact(functor))
        return _emit(report, emit)
    section = report.section('cells')
    for i, cell in enumerate(presentation.cells):
        section.add(f'cell[{i}]', f'y({cell.element}) dims={cell.value.dims} shift={cell.shift}')
    summary = report.section('summary')
    summary.add('count', len(presentation))
    summary.add('bound', cell_bound(functor))
    exact = presentation.is_exact()
    summary.add('exact', exact)
    report.verdict = exact and len(presentation) <= cell_bound(functor)
    return _emit(report, emit)


def _load_classified(paths, field, horizon):
    paths = list(paths)
    if len(paths) == 1 and paths[0].endswith('.tower'):
        tower = load_tower(paths[0], field)
        return extend_horizon(tower, horizon) if horizon is not None else tower
    return _load_functor(paths, field)


@cli.command()
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--compact', 'predicate', flag_value='compact', default=True, help='判定紧性')
@click.option('--proper', 'predicate', flag_value='proper', help='判定真性')
@common_options
def classify(paths, predicate, emit, field, seed, horizon):
    """紧性 / 真性判定，附可复算的证据"""
    obj = _load_classified(paths, field, horizon)
    report = new_report(f'classify --{predicate}', __version__, obj.field.name, seed, input_digests(paths))
    verdict = is_compact(obj) if predicate == 'compact' else is_proper(obj)
    if isinstance(obj, TowerFunctor):
        report.section('tower').add('horizon', obj.horizon).add('eventual', str(ch.homology(obj.eventual_value)))
    add_verdict_evidence(report, verdict)
    return _emit(report, emit)


@cli.command(name='convolve')
@click.argument('paths', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def convolve_command(paths, emit, field, seed, horizon):
    """F ∗ K：[偏序文件] 函子文件 核文件"""
    paths = list(paths)
    if len(paths) < 2:
        raise click.UsageError('需要参数: [偏序文件] 函子文件 核文件')
    functor = _load_functor(paths[:-1], field)
    kernel = load_kernel(paths[-1], left=functor.base, field=field or functor.field)
    result = convolve(functor, kernel)
    report = new_report('convolve', __version__, functor.field.name, seed, input_digests(paths))
    section = report.section('convolution')
    _betti_section(section, {q: stalk(result, q) for q in result.base.elements}, horizon)
    return _emit(report, emit)


@cli.command(name='check-kernel')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@common_options
def check_kernel_command(path, emit, field, seed, horizon):
    """逐列检查核是否保持紧对象"""
    kernel = load_kernel(path, field=field)
    report = new_report('check-kernel', __version__, kernel.field.name, seed, input_digests([path]))
    verdict = check_kernel(kernel)
    columns = report.section('columns')
    for p, column in verdict.per_column.items():
        line = f'compact={str(column.compact).lower()}'
        if column.failing is not None:
            line += f' offending={column.failing} degree={column.failing_degree} betti={column.failing_betti}'
        columns.add(f'column[{p}]', line)
    report.section('summary').add('preserves_compacts', verdict.preserves_compacts)
    report.verdict = verdict.preserves_compacts
    return _emit(report, emit)


@cli.command(name='cross-validate')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@click.option('--samples', type=click.IntRange(0, None), default=20, help='随机紧对象的个数')
@common_options
def cross_validate_command(path, samples, emit, field, seed, horizon):
    """判据与生成元层面/随机样本层面的检查是否一致"""
    kernel = load_kernel(path, field=field)
    seed = 0 if seed is None else seed
    logger.info(f"交叉验证: 核 {kernel.name}，样本 {samples}，种子 {seed}")
    report = cross_validate_kernel(kernel, samples, seed, __version__)
    report.inputs = input_digests([path])
    return _emit(report, emit)


@cli.command(name='localize-check')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@common_options
def localize_check(path, emit, field, seed, horizon):
    """检查单调映射给出的子范畴是否双反射"""
    f = load_map(path)
    field = field or get_field('F2')
    report = new_report('localize-check', __version__, field.name, seed, input_digests([path]))
    result = check_bireflective(f, field)
    section = report.section('bireflection')
    section.add('map', f.name)
    section.add('status', result.status)
    if not result.verified:
        section.add('witness_at', result.witness_at)
        section.add('witness_betti', str(result.witness_betti.homological()))
    report.verdict = result.verified
    return _emit(report, emit)


@cli.command(name='transfer-report')
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@click.option('--samples', type=click.IntRange(0, None), default=20, help='值域上的随机样本个数')
@common_options
def transfer_report_command(path, samples, emit, field, seed, horizon):
    """在已验证的双反射上检查紧性检测、生成与真性传递"""
    f = load_map(path)
    field = field or get_field('F2')
    seed = 0 if seed is None else seed
    bireflection = check_bireflective(f, field)
    functors = [random_functor(make_rng(derive_seed(seed, 'transfer', i)), f.target, field)
                for i in range(samples)]
    report = transfer_report(bireflection, functors, __version__, seed)
    report.field = field.name
    report.inputs = input_digests([path])
    return _emit(report, emit)


@cli.group()
def demo():
    """内置演示"""


@demo.command(name='towers')
@common_options
def demo_towers(emit, field, seed, horizon):
    """ℕ^op 上常值塔：真但不紧，并由截断系统给出操作层面的证书"""
    report = tower_colimit_demo(field or get_field('F2'), horizon or 0, __version__, seed)
    return _emit(report, emit)


def run(argv=None):
    """执行一次命令并返回退出码"""
    load_dotenv()
    _configure_logging()
    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name='sheafctl',
                        standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 2
    except click.exceptions.Abort:
        click.echo('已中止', err=True)
        return 2
    except SheafError as e:
        logger.debug("输入错误", exc_info=True)
        click.echo(f'错误: {e}', err=True)
        return 2
    return code or 0


if __name__ == '__main__':
    sys.exit(run())
