"""
确定性检查：对 samples/ 语料的每条命令以 machine 格式运行两次，比较输出是否逐字节一致，
并检查全部输入文件的 parse→emit→parse 幂等性
"""
import io
import os
import sys
from contextlib import redirect_stdout

from dotenv import load_dotenv

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)
env_path = os.path.join(project_root, '.env')
if os.path.exists(env_path):
    load_dotenv(env_path)
else:
    load_dotenv()

from app import run  # noqa: E402
from services import file_service  # noqa: E402

SAMPLES = os.path.join(project_root, 'samples')


def sample(name):
    return os.path.join(SAMPLES, name)


COMMANDS = [
    ['validate'] + [sample(n) for n in sorted(os.listdir(SAMPLES))],
    ['homology', sample('circle.poset'), sample('const_k.shf')],
    ['stalk', sample('circle.poset'), sample('const_k.shf'), '1-2'],
    ['sections', sample('circle.poset'), sample('const_k.shf')],
    ['rhom', sample('chain2.poset'), sample('y_a.shf'), sample('sky_b.shf')],
    ['hocolim', sample('circle.poset'), sample('const_k.shf')],
    ['cellularize', sample('chain2.poset'), sample('sky_b.shf')],
    ['classify', '--compact', sample('const.tower')],
    ['classify', '--proper', sample('const_tail.shf')],
    ['homology', sample('chain2.poset'), sample('y_a_acyclic.shf')],
    ['cellularize', sample('y_a_acyclic.shf')],
    ['convolve', sample('y_a.shf'), sample('id.ker')],
    ['convolve', sample('y_a.shf'), sample('id_acyclic.ker')],
    ['check-kernel', sample('id.ker')],
    ['check-kernel', sample('id_tail.ker')],
    ['cross-validate', sample('tail_k.ker'), '--samples', '5', '--seed', '7'],
    ['localize-check', sample('coarsen.mono')],
    ['localize-check', sample('collapse.mono')],
    ['transfer-report', sample('coarsen.mono'), '--samples', '5', '--seed', '11'],
    ['demo', 'towers'],
]

EMITTERS = {
    'poset': file_service.emit_poset,
    'shf': file_service.emit_sheaf,
    'ker': file_service.emit_kernel,
    'mono': file_service.emit_map,
    'tower': file_service.emit_tower,
}


def capture(argv):
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = run(argv + ['--emit', 'machine'])
    return code, buffer.getvalue()


def check_commands():
    failures = 0
    for argv in COMMANDS:
        first, second = capture(argv), capture(argv)
        same = first == second
        failures += not same
        print(f"{'一致' if same else '不一致'}  退出码 {first[0]}  {' '.join(os.path.basename(a) for a in argv)}")
    return failures


def check_round_trips():
    failures = 0
    for name in sorted(os.listdir(SAMPLES)):
        path = sample(name)
        kind, obj = file_service.load_any(path)
        emitted = EMITTERS[kind](obj)
        again = EMITTERS[kind](_reparse(kind, emitted, obj, path))
        same = emitted == again
        failures += not same
        print(f"{'幂等' if same else '不幂等'}  {name}")
    return failures


def _reparse(kind, text, obj, path):
    if kind == 'poset':
        return file_service.parse_poset(text, path)
    if kind == 'shf':
        return file_service.parse_sheaf(text, obj.base, path)
    if kind == 'ker':
        return file_service.parse_kernel(text, obj.left, obj.right, path)
    if kind == 'mono':
        return file_service.parse_map(text, obj.source, obj.target, path)
    return file_service.parse_tower(text, path)


if __name__ == '__main__':
    print("=" * 60)
    print("确定性与格式幂等检查")
    print("=" * 60)
    total = check_commands() + check_round_trips()
    print(f"\n失败 {total} 项")
    sys.exit(1 if total else 0)
