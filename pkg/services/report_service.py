"""报告生成服务

报告由 core.models.Report 描述，渲染为两种形式：
  - human：节标题 + pandas Betti 表 + `evidence:` 行 + 末尾 `verdict:` 行；
  - machine：按行的 key=value，逐字节稳定。
两种形式都写入工具版本、系数域、种子与每个输入文件的 sha256。
"""
import logging

import pandas as pd

from core.chain import BettiVector
from core.models import Report
from core.tails import TailBetti

logger = logging.getLogger(__name__)

NO_SEED = '-'


def _text(value):
    if isinstance(value, bool):
        return str(value).lower()
    if value is None:
        return NO_SEED
    return str(value)


def betti_table(rows, homological=False):
    """{行标签: BettiVector} → DataFrame，列为度数（升序），缺项填 0

    homological=True 时度数取反（hocolim 按同调指标报告）。
    """
    prepared = {}
    for label, betti in rows.items():
        if isinstance(betti, TailBetti):
            betti = betti.finite
        betti = BettiVector(betti)
        prepared[label] = betti.homological() if homological else betti
    degrees = sorted({n for betti in prepared.values() for n in betti}) or [0]
    data = [[prepared[label].get(n, 0) for n in degrees] for label in prepared]
    frame = pd.DataFrame(data, index=list(prepared), columns=degrees, dtype='int64')
    frame.index.name = 'H' if not homological else 'H_'
    return frame


def add_verdict_evidence(report, verdict, title='evidence'):
    """把 Verdict 的证据行写进一节"""
    section = report.section(title)
    for key, value in verdict.evidence_lines():
        section.add(key, value)
    report.verdict = verdict.value
    return section


def new_report(command, version, field_name, seed=None, inputs=()):
    return Report(command, version, field_name, seed=seed, inputs=list(inputs))


def _header_lines(report):
    lines = [('command', report.command), ('version', report.version), ('field', report.field),
             ('seed', _text(report.seed))]
    for name, digest in report.inputs:
        lines.append((f'input[{name}]', f'sha256:{digest}'))
    return lines


def render_human(report):
    out = [f'# sheafctl {report.command}']
    out += [f'{key}: {value}' for key, value in _header_lines(report)[1:]]
    for section in report.sections:
        out.append('')
        out.append(f'[{section.title}]')
        if section.table is not None:
            out.append(section.table.to_string())
        for key, value in section.entries:
            out.append(f'evidence: {key}: {_text(value)}')
    if report.verdict is not None:
        out.append('')
        out.append(f'verdict: {_text(report.verdict)}')
    return '\n'.join(out) + '\n'


def _machine_key(text):
    return str(text).replace(' ', '_').replace('=', ':')


def render_machine(report):
    out = [f'{key}={value}' for key, value in _header_lines(report)]
    for section in report.sections:
        prefix = _machine_key(section.title)
        if section.table is not None:
            frame = section.table
            for label in frame.index:
                for degree in frame.columns:
                    out.append(f'{prefix}.table.{_machine_key(label)}.{degree}={int(frame.at[label, degree])}')
        for key, value in section.entries:
            out.append(f'{prefix}.{_machine_key(key)}={_text(value)}')
    if report.verdict is not None:
        out.append(f'verdict={_text(report.verdict)}')
    return '\n'.join(out) + '\n'


def render(report, emit='human'):
    if emit == 'machine':
        return render_machine(report)
    return render_human(report)


def exit_code(report):
    """0 = 成功或判定为真，1 = 判定为假"""
    return 0 if report.passed else 1
