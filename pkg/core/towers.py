"""ℕ^op 上的终究常值塔

位置 n+1 → n 为 ℕ^op 的箭头，0 是最大元。超出 horizon 后取值恒为 eventual_value、映射为恒等，
所有无限计算都化为有限窗口 {0..M}，并在 M 与 M+1 两个窗口上重复计算以确认稳定。
"""
import logging
from functools import lru_cache

from . import chain as ch
from .chain import identity_map, unit_complex, zero_complex
from .errors import ShapeError, SheafError
from .funcat import NatTrans, PFunctor, rhom_induced
from .models import WitnessResult
from .poset import build_poset

logger = logging.getLogger(__name__)


class TowerFunctor:
    """values[n] 为位置 n 的取值，steps[n]: values[n+1] → values[n]，junction: eventual → values[N]"""

    def __init__(self, values, steps, eventual_value, junction=None, name=''):
        if not values:
            raise SheafError("塔至少需要位置 0 的取值")
        self.values = list(values)
        self.field = self.values[0].field
        self.eventual_value = eventual_value
        self.name = name
        if len(steps) != len(self.values) - 1:
            raise ShapeError(f"塔需要 {len(self.values) - 1} 个步进映射，收到 {len(steps)}")
        for n, step in enumerate(steps):
            if step.source.dims != self.values[n + 1].dims or step.target.dims != self.values[n].dims:
                raise ShapeError(f"步进映射 {n + 1}→{n} 的端点维数不符")
        self.steps = list(steps)
        if junction is None:
            junction = ch.zero_map(eventual_value, self.values[-1])
        if junction.source.dims != eventual_value.dims or junction.target.dims != self.values[-1].dims:
            raise ShapeError("衔接映射的端点维数不符")
        self.junction = junction

    @property
    def horizon(self):
        return len(self.values) - 1

    def value(self, n):
        return self.values[n] if n <= self.horizon else self.eventual_value

    def step(self, n):
        """位置 n+1 → n 的结构映射"""
        if n < self.horizon:
            return self.steps[n]
        if n == self.horizon:
            return self.junction
        return identity_map(self.eventual_value)

    def __repr__(self):
        return f"TowerFunctor({self.name}, horizon={self.horizon}, eventual={self.eventual_value.dims})"


def tower_const(value, horizon=0):
    values = [value] * (horizon + 1)
    steps = [identity_map(value)] * horizon
    return TowerFunctor(values, steps, value, identity_map(value), name='const')


def tower_truncation(value, m):
    """τ_m：位置 0..m 取 V，之后为 0"""
    values = [value] * (m + 1)
    steps = [identity_map(value)] * m
    return TowerFunctor(values, steps, zero_complex(value.field), name=f'tau{m}')


def tower_yoneda(n, field):
    """Map_{ℕ^op}(n, −) 只在位置 0..n 非零"""
    tower = tower_truncation(unit_complex(field), n)
    tower.name = f'y({n})'
    return tower


def extend_horizon(tower, horizon):
    """同一个塔换一个更长的表示：多出的位置取 eventual_value，衔接映射后移"""
    if horizon <= tower.horizon:
        return tower
    values = tower.values + [tower.eventual_value] * (horizon - tower.horizon)
    steps = tower.steps + [tower.junction] + [identity_map(tower.eventual_value)] * (horizon - tower.horizon - 1)
    return TowerFunctor(values, steps, tower.eventual_value, identity_map(tower.eventual_value), tower.name)


@lru_cache(maxsize=None)
def window_poset(size):
    """窗口 {0..size}，覆盖关系 n+1 ⋖ n"""
    elements = [str(n) for n in range(size + 1)]
    covers = [(str(n + 1), str(n)) for n in range(size)]
    return build_poset(elements, covers, f'Nop[0..{size}]')


def window(tower, size):
    base = window_poset(size)
    values = {str(n): tower.value(n) for n in range(size + 1)}
    edges = {(str(n + 1), str(n)): tower.step(n) for n in range(size)}
    return PFunctor(base, tower.field, values, edges, check=False, name=tower.name)


def tower_support(tower):
    """同调支撑；eventual_value 非无环时返回 None（无限支撑）"""
    if ch.homology(tower.eventual_value):
        return None
    return [str(n) for n in range(tower.horizon + 1) if ch.homology(tower.values[n])]


def truncation_inclusion(value, m, size):
    """窗口上的自然变换 τ_m → const(V)：位置 ≤ m 取恒等"""
    source = window(tower_truncation(value, m), size)
    target = window(tower_const(value), size)
    components = {str(n): identity_map(value) for n in range(min(m, size) + 1)}
    return NatTrans(source, target, components)


def _truncation_step(value, m, size):
    source = window(tower_truncation(value, m), size)
    target = window(tower_truncation(value, m + 1), size)
    components = {str(n): identity_map(value) for n in range(min(m, size) + 1)}
    return NatTrans(source, target, components)


def _compare_once(source, value, cutoff, size):
    source_window = window(source, size)
    # 余极限在 cutoff 处已稳定：τ_cutoff → τ_{cutoff+1} 诱导同调同构
    settle = rhom_induced(source_window, _truncation_step(value, cutoff, size))
    comparison = rhom_induced(source_window, truncation_inclusion(value, cutoff, size))
    return {
        'lhs': ch.homology(comparison.source),
        'rhs': ch.homology(comparison.target),
        'settled': ch.homology_iso(settle),
        'quasi_iso': ch.is_quasi_iso(comparison),
    }


def truncation_comparison(source, value=None):
    """colim_m rhom(F, τ_m) → rhom(F, colim τ_m)，在两个窗口上计算并检查稳定性"""
    value = value or unit_complex(source.field)
    cutoff = source.horizon + 1
    size = cutoff + 2
    first = _compare_once(source, value, cutoff, size)
    second = _compare_once(source, value, cutoff, size + 1)
    stable = first == second
    if not stable:
        logger.error(f"窗口 {size} 与 {size + 1} 的结果不一致: {first} / {second}")
    if not first['settled']:
        raise SheafError(f"截断系统在 {cutoff} 处尚未稳定")
    logger.info(f"截断比较: lhs {first['lhs']}，rhs {first['rhs']}，拟同构 {first['quasi_iso']}")
    return WitnessResult(lhs=first['lhs'], rhs=first['rhs'], quasi_iso=first['quasi_iso'],
                         stable=stable, horizons=(size, size + 1), cutoff=cutoff)
