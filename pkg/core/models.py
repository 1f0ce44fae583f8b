"""判定结果与报告的数据模型"""
import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

# 支撑无限时 support 字段的取值
INFINITE_SUPPORT = 'infinite'


@dataclass
class Verdict:
    """compact / proper 判定；evidence 足以复算结论"""
    predicate: str
    value: bool
    support: object = ()
    betti: dict = field(default_factory=dict)
    offending: str = None
    offending_degree: int = None
    reason: str = ''

    @property
    def infinite_support(self):
        return self.support == INFINITE_SUPPORT

    def evidence_lines(self):
        support = INFINITE_SUPPORT if self.infinite_support else ','.join(self.support) or '∅'
        lines = [('support', support)]
        for element, betti in self.betti.items():
            lines.append((f'betti[{element}]', str(betti)))
        if self.offending is not None:
            lines.append(('offending', self.offending))
        if self.offending_degree is not None:
            lines.append(('offending_degree', str(self.offending_degree)))
        if self.reason:
            lines.append(('reason', self.reason))
        return lines


@dataclass
class ColumnVerdict:
    element: str
    finite_support: bool
    perfect: bool
    failing: str = None
    failing_degree: int = None
    failing_betti: str = ''

    @property
    def compact(self):
        return self.finite_support and self.perfect


@dataclass
class KernelVerdict:
    per_column: dict

    @property
    def preserves_compacts(self):
        return all(c.compact for c in self.per_column.values())

    def offending(self):
        return [c for c in self.per_column.values() if not c.compact]


@dataclass
class Bireflection:
    map: object
    verified: bool
    witness: str = None
    witness_at: str = None
    witness_betti: object = None

    @property
    def status(self):
        return 'verified' if self.verified else f'refuted({self.witness})'


@dataclass
class Section:
    """报告的一节：键值行加可选的 pandas 表格"""
    title: str
    entries: list = field(default_factory=list)
    table: object = None

    def add(self, key, value):
        self.entries.append((key, value))
        return self


@dataclass
class Report:
    command: str
    version: str
    field: str
    seed: object = None
    inputs: list = field(default_factory=list)
    sections: list = field(default_factory=list)
    verdict: bool = None

    def section(self, title):
        section = Section(title)
        self.sections.append(section)
        return section

    @property
    def passed(self):
        return self.verdict is not False


@dataclass
class WitnessResult:
    """比较映射 colim rhom(F, G_i) → rhom(F, colim G_i) 的计算结果"""
    lhs: object
    rhs: object
    quasi_iso: bool
    stable: bool = True
    horizons: tuple = ()
    cutoff: int = None
