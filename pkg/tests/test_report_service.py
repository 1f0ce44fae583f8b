from core.chain import BettiVector
from core.models import Report, Verdict
from core.tails import TailBetti
from services.report_service import (add_verdict_evidence, betti_table, exit_code, new_report, render,
                                     render_human, render_machine)


def sample_report(verdict=True):
    report = new_report('sections', '0.1.0', 'F2', inputs=[('a.shf', 'abc')])
    section = report.section('betti by element')
    section.table = betti_table({'x': {0: 1, 1: 2}, 'y': BettiVector({-1: 1})})
    section.add('total=dim', 4)
    report.verdict = verdict
    return report


def test_betti_table_columns():
    frame = betti_table({'x': {0: 1, 1: 2}, 'y': BettiVector({-1: 1})})
    assert list(frame.columns) == [-1, 0, 1]
    assert frame.index.name == 'H'
    assert frame.loc['x'].tolist() == [0, 1, 2]
    assert frame.loc['y'].tolist() == [1, 0, 0]


def test_betti_table_homological_and_empty():
    frame = betti_table({'x': {0: 1, 1: 2}}, homological=True)
    assert frame.index.name == 'H_'
    assert list(frame.columns) == [-1, 0]
    assert frame.loc['x'].tolist() == [2, 1]
    empty = betti_table({'z': {}})
    assert list(empty.columns) == [0]
    assert empty.loc['z'].tolist() == [0]
    tailed = betti_table({'t': TailBetti({0: 3}, {0: 1}, 2, 1)})
    assert tailed.loc['t'].tolist() == [3]


def test_render_human():
    lines = render_human(sample_report()).splitlines()
    assert lines[:5] == ['# sheafctl sections', 'version: 0.1.0', 'field: F2', 'seed: -',
                         'input[a.shf]: sha256:abc']
    assert '[betti by element]' in lines
    assert 'evidence: total=dim: 4' in lines
    assert lines[-1] == 'verdict: true'


def test_render_machine():
    lines = render_machine(sample_report(False)).splitlines()
    assert lines[:5] == ['command=sections', 'version=0.1.0', 'field=F2', 'seed=-',
                         'input[a.shf]=sha256:abc']
    assert 'betti_by_element.table.x.1=2' in lines
    assert 'betti_by_element.table.y.-1=1' in lines
    assert 'betti_by_element.total:dim=4' in lines
    assert lines[-1] == 'verdict=false'
    assert render(sample_report(False), 'machine') == render_machine(sample_report(False))


def test_report_without_verdict():
    report = Report('homology', '0.1.0', 'Q', seed=7)
    report.section('empty')
    assert 'verdict' not in render_human(report)
    assert 'seed=7' in render_machine(report).splitlines()
    assert exit_code(report) == 0


def test_verdict_evidence_and_exit_codes():
    report = new_report('classify', '0.1.0', 'F2')
    verdict = Verdict('compact', False, ['a', 'b'], offending='b', offending_degree=0)
    section = add_verdict_evidence(report, verdict)
    assert section.entries == [('support', 'a,b'), ('offending', 'b'), ('offending_degree', '0')]
    assert report.verdict is False
    assert exit_code(report) == 1
    assert exit_code(sample_report(True)) == 0
