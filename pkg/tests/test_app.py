import os

import pytest

from app import run


@pytest.fixture
def cli(capsys, sample_file):
    """cli('sections', 'circle.poset', ...) → (退出码, stdout, stderr)；以 .poset 等结尾的参数按样本路径解析"""
    def invoke(*args):
        argv = [sample_file(a) if os.path.splitext(a)[1] in ('.poset', '.shf', '.ker', '.mono', '.tower') else a
                for a in args]
        code = run(argv)
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return invoke


def test_sections_of_circle(cli):
    code, out, _ = cli('sections', 'circle.poset', 'const_k.shf')
    assert code == 0
    assert 'evidence: betti[sections]: {0:1, 1:1}' in out.splitlines()
    assert out.startswith('# sheafctl sections\n')
    # 省略偏序文件时按文件头查找同目录下的 circle.poset
    code, alone, _ = cli('sections', 'const_k.shf')
    assert code == 0
    assert 'evidence: betti[sections]: {0:1, 1:1}' in alone.splitlines()


def test_hocolim_is_homological(cli):
    code, out, _ = cli('hocolim', 'circle.poset', 'const_k.shf')
    assert code == 0
    lines = out.splitlines()
    assert 'evidence: betti[hocolim]: {0:1, 1:1}' in lines
    assert 'evidence: indexing: homological' in lines


def test_stalk_comparison(cli):
    code, out, _ = cli('stalk', 'circle.poset', 'const_k.shf', '1-2')
    assert code == 0
    assert 'evidence: quasi_iso: true' in out.splitlines()
    code, _, err = cli('stalk', 'circle.poset', 'const_k.shf', 'nope')
    assert code == 2
    assert 'nope' in err


def test_tailed_stalk_reports_symbolic_betti(cli):
    code, out, _ = cli('homology', 'chain2.poset', 'const_tail.shf', '--emit', 'machine')
    assert code == 0
    assert 'stalks.betti[a]={0:1}' in out.splitlines()
    assert any(line.startswith('stalks.window[b]=') for line in out.splitlines())


def test_acyclic_tails_report_a_finite_window(cli):
    code, out, _ = cli('homology', 'chain2.poset', 'y_a_acyclic.shf', '--emit', 'machine')
    assert code == 0
    lines = out.splitlines()
    assert 'stalks.betti[b]={0:1}' in lines
    assert 'stalks.window[b]={0:1}' in lines
    assert 'stalks.window_check[b]=agree' in lines
    code, out, _ = cli('convolve', 'y_a.shf', 'id_acyclic.ker', '--emit', 'machine')
    assert code == 0
    lines = out.splitlines()
    assert 'convolution.betti[a]={0:1}' in lines
    assert 'convolution.window_check[a]=agree' in lines


def test_cellularize_accepts_acyclic_tails(cli):
    code, out, _ = cli('cellularize', 'y_a_acyclic.shf')
    assert code == 0
    lines = out.splitlines()
    assert 'evidence: exact: true' in lines
    assert 'evidence: count: 1' in lines


def test_rhom_and_convolve(cli):
    code, out, _ = cli('rhom', 'chain2.poset', 'y_a.shf', 'sky_b.shf')
    assert code == 0
    assert 'evidence: betti[rhom]: {}' in out.splitlines()
    code, out, _ = cli('convolve', 'y_a.shf', 'id.ker', '--emit', 'machine')
    assert code == 0
    assert 'convolution.betti[b]={0:1}' in out.splitlines()


def test_check_kernel(cli):
    assert cli('check-kernel', 'id.ker')[0] == 0
    code, out, _ = cli('check-kernel', 'id_tail.ker')
    assert code == 1
    assert 'offending=b degree=1' in out
    assert out.splitlines()[-1] == 'verdict: false'


def test_classify_tower_and_tail(cli):
    code, out, _ = cli('classify', '--compact', 'const.tower')
    assert code == 1
    assert 'evidence: support: infinite' in out.splitlines()
    assert cli('classify', '--proper', 'const.tower')[0] == 0
    assert cli('classify', '--compact', 'trunc2.tower')[0] == 0
    assert cli('classify', '--proper', 'const_tail.shf')[0] == 1


def test_cellularize(cli):
    code, out, _ = cli('cellularize', 'chain2.poset', 'sky_b.shf')
    assert code == 0
    assert 'evidence: exact: true' in out.splitlines()
    code, out, _ = cli('cellularize', 'const_tail.shf')
    assert code == 1
    assert 'evidence: offending: b' in out.splitlines()


def test_localize_check(cli):
    code, out, _ = cli('localize-check', 'coarsen.mono')
    assert code == 0
    assert 'evidence: status: verified' in out.splitlines()
    code, out, _ = cli('localize-check', 'collapse.mono')
    assert code == 1
    lines = out.splitlines()
    assert 'evidence: status: refuted(*)' in lines
    assert 'evidence: witness_betti: {0:1, 1:1}' in lines


def test_transfer_report(cli):
    code, out, _ = cli('transfer-report', 'coarsen.mono', '--samples', '2', '--seed', '11')
    assert code == 0
    assert out.splitlines()[-1] == 'verdict: true'
    code, out, err = cli('transfer-report', 'collapse.mono', '--samples', '2')
    assert code == 2
    assert out == ''
    assert err


def test_cross_validate(cli):
    code, out, _ = cli('cross-validate', 'tail_k.ker', '--samples', '3', '--emit', 'machine')
    assert code == 0
    assert 'seed=0' in out.splitlines()
    assert out.splitlines()[-1] == 'verdict=true'


def test_demo_towers(cli):
    code, out, _ = cli('demo', 'towers')
    assert code == 0
    assert 'evidence: compact: false' in out.splitlines()


def test_validate_all_samples(cli, sample_file):
    names = sorted(os.listdir(os.path.dirname(sample_file('pt.poset'))))
    code, out, _ = cli('validate', *names)
    assert code == 0
    assert sum(line.startswith('input[') for line in out.splitlines()) == len(names)


@pytest.mark.parametrize('args', [
    ('sections', '--field', 'Fp:4', 'circle.poset', 'const_k.shf'),
    ('sections', 'circle.poset', 'missing.shf'),
    ('sections', 'circle.poset', 'const_k.shf', 'y_a.shf', 'sky_b.shf'),
    ('sections', 'chain2.poset', 'const_k.shf'),
    ('frobnicate',),
])
def test_input_errors_exit_with_two(args, cli):
    code, out, _ = cli(*args)
    assert code == 2
    assert out == ''


def test_machine_output_is_deterministic(cli):
    args = ('transfer-report', 'coarsen.mono', '--samples', '3', '--seed', '5', '--emit', 'machine')
    first, second = cli(*args), cli(*args)
    assert first[:2] == second[:2]
    assert first[1].splitlines()[0] == 'command=transfer-report'
