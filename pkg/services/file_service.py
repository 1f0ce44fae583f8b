"""文件格式服务：.poset / .shf / .ker / .mono / .tower 的解析与规范输出

所有格式都是按行的 UTF-8 文本，`#` 之后为注释。解析对空白宽容，出错时抛出 ParseError，
携带文件名、行号和出错记号；规范输出使用单个空格并按声明顺序排列，parse→emit→parse 幂等。
"""
import logging
import os
import re

from core.chain import ChainMap, Complex
from core.errors import CycleError, NotFunctorial, NotMonotone, ParseError, SheafError
from core.field import get_field
from core.funcat import PFunctor
from core.kernel import Kernel, kernel_base
from core.poset import RESERVED_CHARS, build_poset, monotone_map
from core.tails import TailValue
from core.towers import TowerFunctor
from core.utils import digest_file

logger = logging.getLogger(__name__)

# 允许的输入扩展名
ALLOWED_EXTENSIONS = {'poset', 'shf', 'ker', 'mono', 'tower'}

_TOKEN = re.compile(r'[{};]|[^\s{};]+')
END_OF_LINE = '<行尾>'
EVENTUAL = 'eventual'


def allowed_file(filename, allowed_extensions=None):
    """检查文件扩展名是否允许"""
    if allowed_extensions is None:
        allowed_extensions = ALLOWED_EXTENSIONS
    if not filename or '.' not in filename:
        logger.warning(f"allowed_file: 文件名无效或没有扩展名 - {filename}")
        return False
    ext = filename.rsplit('.', 1)[1].lower().strip()
    return ext in allowed_extensions


def read_file_content(file_path):
    """读取 UTF-8 文本；读不到或编码错误都转换为 ParseError"""
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            return f.read()
    except UnicodeDecodeError:
        raise ParseError('文件不是 UTF-8 文本', file_path) from None
    except OSError as e:
        raise ParseError(f'无法读取文件: {e.strerror}', file_path) from None


def input_digests(paths):
    """[(文件名, sha256)]，按给定顺序"""
    return [(os.path.basename(path), digest_file(path)) for path in paths]


# ---------- 词法 ----------

class _Line:
    """一行记号的游标"""

    def __init__(self, path, number, tokens):
        self.path = path
        self.number = number
        self.tokens = tokens
        self.pos = 0

    def error(self, message, token=None):
        if token is None:
            token = self.tokens[self.pos - 1] if self.pos else self.tokens[0]
        return ParseError(message, self.path, self.number, token)

    def next(self, what):
        if self.pos >= len(self.tokens):
            raise self.error(f'缺少{what}', END_OF_LINE)
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, literal):
        token = self.next(f" '{literal}'")
        if token != literal:
            raise self.error(f"应为 '{literal}'", token)
        return token

    def integer(self, what):
        token = self.next(what)
        try:
            return int(token)
        except ValueError:
            raise self.error(f'{what}应为整数', token) from None

    def done(self):
        if self.pos < len(self.tokens):
            raise self.error('多余的记号', self.tokens[self.pos])


def _lines(text, path):
    lines = []
    for number, raw in enumerate(text.lstrip("\ufeff").splitlines(), 1):
        tokens = _TOKEN.findall(raw.split('#', 1)[0])
        if tokens:
            lines.append(_Line(path, number, tokens))
    if not lines:
        raise ParseError('文件为空', path, 0, END_OF_LINE)
    return lines


def _field(line, token, override):
    if override is not None:
        return override
    try:
        return get_field(token)
    except SheafError:
        raise line.error('无法识别的系数域', token) from None


def _header(line, keyword, *labels):
    """`keyword <name> label1 <v1> label2 <v2> …` → (name, {label: value})"""
    line.expect(keyword)
    name = line.next('名称')
    values = {}
    for label in labels:
        line.expect(label)
        values[label] = line.next(label)
    line.done()
    return name, values


def peek_header(text, path='<input>'):
    """只读首行，返回记号列表（用于按名字定位配套的偏序文件）"""
    return _lines(text, path)[0].tokens


# ---------- 矩阵与取值块 ----------

def _matrix(line, field):
    """mat <rows> <cols> { r c value ; … }，省略的元素为零"""
    line.expect('mat')
    rows = line.integer('行数')
    cols = line.integer('列数')
    if rows < 0 or cols < 0:
        raise line.error('矩阵尺寸不能为负')
    line.expect('{')
    entries = []
    while True:
        token = line.next(" '}'")
        if token == '}':
            break
        if token == ';':
            continue
        try:
            r = int(token)
        except ValueError:
            raise line.error('矩阵行下标应为整数', token) from None
        c = line.integer('矩阵列下标')
        raw = line.next('矩阵元素')
        try:
            value = field.parse_value(raw)
        except ValueError:
            raise line.error('无法解析的矩阵元素', raw) from None
        if not (0 <= r < rows and 0 <= c < cols):
            raise line.error(f'下标 ({r},{c}) 超出 {rows}×{cols}', token)
        entries.append((r, c, value))
    return field.from_entries(rows, cols, entries)


def _emit_matrix(field, matrix):
    rows, cols = matrix.shape
    body = ' ; '.join(f'{r} {c} {field.format_value(v)}' for r, c, v in field.entries(matrix))
    return f'mat {rows} {cols} {{ {body} }}' if body else f'mat {rows} {cols} {{ }}'


def _dims_block(line, allow_tail=True):
    """{ deg n dim d ; … ; tail base { … } anchor a stride s }"""
    line.expect('{')
    dims, tail = {}, None
    while True:
        token = line.next(" '}'")
        if token == '}':
            break
        if token == ';':
            continue
        if token == 'deg':
            n = line.integer('度数')
            line.expect('dim')
            d = line.integer('维数')
            if n in dims:
                raise line.error(f'度数 {n} 重复声明', str(n))
            if d < 0:
                raise line.error('维数不能为负', str(d))
            dims[n] = d
        elif token == 'tail' and allow_tail:
            if tail is not None:
                raise line.error('同一取值只能有一个尾部', token)
            line.expect('base')
            base, _ = _dims_block(line, allow_tail=False)
            line.expect('anchor')
            anchor = line.integer('锚点')
            line.expect('stride')
            stride = line.integer('步长')
            if stride < 1:
                raise line.error('步长必须为正整数', str(stride))
            tail = (base, anchor, stride)
        else:
            raise line.error('未知的关键字', token)
    return dims, tail


def _emit_dims(complex_):
    return ' ; '.join(f'deg {n} dim {d}' for n, d in complex_.dims.items())


def _emit_val(element, complex_, tail=None):
    parts = [_emit_dims(complex_)] if complex_.dims else []
    if tail is not None:
        parts.append(f'tail base {{ {_emit_dims(tail.tail_base)} }} anchor {tail.anchor} stride {tail.stride}')
    body = ' ; '.join(parts)
    return f'val {element} {{ {body} }}' if body else f'val {element} {{ }}'


# ---------- 函子体（.shf / .ker / .tower 共用） ----------

class _Body:
    """按元素收集 val / diff / taildiff / map 行，最后统一校验形状并装配"""

    def __init__(self, field):
        self.field = field
        self.dims = {}
        self.tails = {}
        self.diffs = {}
        self.tail_diffs = {}
        self.maps = {}

    def read(self, line, keyword, element_of, cover_of):
        if keyword == 'val':
            element = element_of(line, line.next('元素'))
            if element in self.dims:
                raise line.error(f'元素 {element} 的取值重复声明', element)
            dims, tail = _dims_block(line)
            line.done()
            self.dims[element] = dims
            if tail is not None:
                self.tails[element] = tail
        elif keyword in ('diff', 'taildiff'):
            element = element_of(line, line.next('元素'))
            line.expect('deg')
            n = line.integer('度数')
            matrix = _matrix(line, self.field)
            line.done()
            store = self.diffs if keyword == 'diff' else self.tail_diffs
            if (element, n) in store:
                raise line.error(f'{element} 在度数 {n} 的微分重复', element)
            store[(element, n)] = (line, matrix)
        elif keyword == 'map':
            token = line.next('覆盖关系')
            lower, upper = cover_of(line, token)
            line.expect('deg')
            n = line.integer('度数')
            matrix = _matrix(line, self.field)
            line.done()
            if (lower, upper, n) in self.maps:
                raise line.error(f'映射 {lower}<{upper} 在度数 {n} 重复', token)
            self.maps[(lower, upper, n)] = (line, token, matrix)
        else:
            raise line.error('未知的关键字', keyword)

    def _complex(self, dims, diffs, element, what):
        field = self.field
        components = {}
        for (owner, n), (line, matrix) in diffs.items():
            if owner != element:
                continue
            expected = (dims.get(n + 1, 0), dims.get(n, 0))
            if matrix.shape != expected:
                raise line.error(f'{what}微分形状应为 {expected[0]}×{expected[1]}', element)
            components[n] = matrix
        try:
            return Complex(field, dims, components)
        except SheafError as e:
            raise ParseError(str(e), self._any_line(diffs, element).path,
                             self._any_line(diffs, element).number, element) from None

    @staticmethod
    def _any_line(store, element):
        return next(line for (owner, _), (line, _) in store.items() if owner == element)

    def values(self, elements):
        for (owner, _), (line, _) in self.diffs.items():
            if owner not in self.dims:
                raise line.error(f'元素 {owner} 没有 val 声明', owner)
        for (owner, _), (line, _) in self.tail_diffs.items():
            if owner not in self.tails:
                raise line.error(f'元素 {owner} 没有尾部声明', owner)
        values = {e: self._complex(self.dims.get(e, {}), self.diffs, e, '') for e in elements}
        tails = {}
        for element, (base_dims, anchor, stride) in self.tails.items():
            base = self._complex(base_dims, self.tail_diffs, element, '尾部')
            tails[element] = TailValue(Complex(self.field, {}), base, anchor, stride)
        return values, tails

    def edges(self, values, covers):
        """covers: [(lower, upper)]，返回 {(lower, upper): ChainMap}"""
        grouped = {}
        for (lower, upper, n), (line, token, matrix) in self.maps.items():
            source, target = values[lower], values[upper]
            expected = (target.dim(n), source.dim(n))
            if matrix.shape != expected:
                raise line.error(f'映射形状应为 {expected[0]}×{expected[1]}', token)
            grouped.setdefault((lower, upper), (line, token, {}))[2][n] = matrix
        edges = {}
        for lower, upper in covers:
            if (lower, upper) not in grouped:
                continue
            line, token, components = grouped[(lower, upper)]
            try:
                edges[(lower, upper)] = ChainMap(values[lower], values[upper], components)
            except SheafError as e:
                raise line.error(str(e), token) from None
        return edges

    def diamond_error(self, error):
        """函子性失败定位到菱形 p < r ⋖ q 中 r<q 的 map 行，没有时取进入 q 的第一条 map 行"""
        _, r, q = error.diamond
        into_q = [(lower, line, token) for (lower, upper, _), (line, token, _) in self.maps.items() if upper == q]
        _, line, token = next((item for item in into_q if item[0] == r), into_q[0])
        return line.error(str(error), token)


def _element_in(poset):
    def element_of(line, token):
        if token not in poset:
            raise line.error(f'偏序 {poset.name} 中没有该元素', token)
        return token
    return element_of


def _cover_in(poset):
    def cover_of(line, token):
        if token.count('<') != 1:
            raise line.error("覆盖关系应写作 下<上", token)
        lower, upper = token.split('<')
        for element in (lower, upper):
            if element not in poset:
                raise line.error(f'偏序 {poset.name} 中没有元素 {element}', token)
        if (lower, upper) not in poset.hasse:
            raise line.error(f'{lower}<{upper} 不是覆盖关系', token)
        return lower, upper
    return cover_of


def _parse_functor(lines, base, field, name):
    body = _Body(field)
    element_of, cover_of = _element_in(base), _cover_in(base)
    for line in lines:
        body.read(line, line.next('关键字'), element_of, cover_of)
    values, tails = body.values(base.elements)
    edges = body.edges(values, base.hasse)
    try:
        return PFunctor(base, field, values, edges, tails=tails, name=name)
    except NotFunctorial as e:
        raise body.diamond_error(e) from None


def _emit_functor(functor):
    field = functor.field
    out = []
    for p in functor.base.elements:
        value, tail = functor.values[p], functor.tails.get(p)
        if value.is_zero() and tail is None:
            continue
        out.append(_emit_val(p, value, tail))
        for n, matrix in sorted(value.diffs.items()):
            out.append(f'diff {p} deg {n} {_emit_matrix(field, matrix)}')
        if tail is not None:
            for n, matrix in sorted(tail.tail_base.diffs.items()):
                out.append(f'taildiff {p} deg {n} {_emit_matrix(field, matrix)}')
    for lower, upper in functor.base.hasse:
        edge = functor.edges.get((lower, upper))
        if edge is None:
            continue
        for n, matrix in sorted(edge.components.items()):
            out.append(f'map {lower}<{upper} deg {n} {_emit_matrix(field, matrix)}')
    return out


# ---------- .poset ----------

def parse_poset(text, path='<input>'):
    lines = _lines(text, path)
    header = lines[0]
    header.expect('poset')
    name = header.next('偏序名')
    header.done()
    elements, covers, seen, declared = [], [], set(), {}
    for line in lines[1:]:
        keyword = line.next('关键字')
        if keyword == 'elem':
            while line.pos < len(line.tokens):
                token = line.next('元素')
                if RESERVED_CHARS & set(token):
                    raise line.error('元素 id 含有保留字符', token)
                if token in seen:
                    raise line.error('元素 id 重复', token)
                seen.add(token)
                elements.append(token)
        elif keyword == 'rel':
            while line.pos < len(line.tokens):
                token = line.next('关系')
                if token.count('<') != 1:
                    raise line.error("关系应写作 下<上", token)
                lower, upper = token.split('<')
                for element in (lower, upper):
                    if element not in seen:
                        raise line.error(f'未声明的元素 {element}', token)
                covers.append((lower, upper))
                declared.setdefault((lower, upper), (line, token))
        else:
            raise line.error('未知的关键字', keyword)
    try:
        return build_poset(elements, covers, name)
    except CycleError as e:
        # 指向环上最后声明的那条关系
        closing = [declared[pair] for pair in zip(e.cycle, e.cycle[1:]) if pair in declared]
        line, token = max(closing, key=lambda item: item[0].number)
        raise line.error(str(e), token) from None


def emit_poset(poset):
    out = [f'poset {poset.name}', 'elem ' + ' '.join(poset.elements)]
    if poset.hasse:
        out.append('rel ' + ' '.join(f'{a}<{b}' for a, b in poset.hasse))
    return '\n'.join(out) + '\n'


# ---------- .shf ----------

def parse_sheaf(text, poset, path='<input>', field=None):
    """field 不为 None 时覆盖文件头中的系数域"""
    lines = _lines(text, path)
    header = lines[0]
    name, labels = _header(header, 'sheaf', 'over', 'field')
    if labels['over'] != poset.name:
        raise header.error(f'函子声明的底偏序与给定偏序 {poset.name} 不符', labels['over'])
    field = _field(header, labels['field'], field)
    return _parse_functor(lines[1:], poset, field, name)


def emit_sheaf(functor):
    out = [f'sheaf {functor.name or "F"} over {functor.base.name} field {functor.field.name}']
    out += _emit_functor(functor)
    return '\n'.join(out) + '\n'


# ---------- .ker ----------

def parse_kernel(text, left, right, path='<input>', field=None):
    lines = _lines(text, path)
    header = lines[0]
    name, labels = _header(header, 'kernel', 'left', 'right', 'field')
    for side, poset in (('left', left), ('right', right)):
        if labels[side] != poset.name:
            raise header.error(f'核声明的{side}偏序与给定偏序 {poset.name} 不符', labels[side])
    field = _field(header, labels['field'], field)
    carrier = _parse_functor(lines[1:], kernel_base(left, right), field, name)
    return Kernel(left, right, carrier, name)


def emit_kernel(kernel):
    carrier = kernel.carrier
    out = [f'kernel {kernel.name or "K"} left {kernel.left.name} right {kernel.right.name} '
           f'field {carrier.field.name}']
    out += _emit_functor(carrier)
    return '\n'.join(out) + '\n'


# ---------- .mono ----------

def parse_map(text, source, target, path='<input>'):
    lines = _lines(text, path)
    header = lines[0]
    name, labels = _header(header, 'map', 'from', 'to')
    for label, poset in (('from', source), ('to', target)):
        if labels[label] != poset.name:
            raise header.error(f'映射声明的偏序与给定偏序 {poset.name} 不符', labels[label])
    assignment, sent = {}, {}
    for line in lines[1:]:
        line.expect('send')
        p = line.next('定义域元素')
        line.expect('->')
        q = line.next('值域元素')
        line.done()
        if p not in source:
            raise line.error(f'偏序 {source.name} 中没有该元素', p)
        if q not in target:
            raise line.error(f'偏序 {target.name} 中没有该元素', q)
        if p in assignment:
            raise line.error('元素的像重复声明', p)
        assignment[p] = q
        sent[p] = line
    missing = [p for p in source.elements if p not in assignment]
    if missing:
        raise header.error(f'映射没有给出 {missing[0]} 的像', missing[0])
    try:
        return monotone_map(source, target, assignment, name)
    except NotMonotone as e:
        upper = e.cover[1]
        raise sent[upper].error(str(e), upper) from None


def emit_map(f):
    out = [f'map {f.name or "f"} from {f.source.name} to {f.target.name}']
    out += [f'send {p} -> {f(p)}' for p in f.source.elements]
    return '\n'.join(out) + '\n'


# ---------- .tower ----------

def parse_tower(text, path='<input>', field=None):
    """位置 0..N 与 eventual；`map <n+1><<n>` 为步进映射，`map eventual<<N>` 为衔接映射"""
    lines = _lines(text, path)
    header = lines[0]
    name, labels = _header(header, 'tower', 'horizon', 'field')
    try:
        horizon = int(labels['horizon'])
    except ValueError:
        raise header.error('horizon 应为整数', labels['horizon']) from None
    if horizon < 0:
        raise header.error('horizon 不能为负', labels['horizon'])
    field = _field(header, labels['field'], field)
    positions = [str(n) for n in range(horizon + 1)]
    slots = positions + [EVENTUAL]
    arrows = [(str(n + 1), str(n)) for n in range(horizon)] + [(EVENTUAL, str(horizon))]

    def element_of(line, token):
        if token not in slots:
            raise line.error(f'位置应为 0..{horizon} 或 {EVENTUAL}', token)
        return token

    def cover_of(line, token):
        pair = tuple(token.split('<'))
        if pair not in arrows:
            raise line.error('塔只允许 n+1<n 与 eventual<N 形式的映射', token)
        return pair

    body = _Body(field)
    for line in lines[1:]:
        body.read(line, line.next('关键字'), element_of, cover_of)
    if body.tails:
        line = next(line for line in lines[1:] if 'tail' in line.tokens)
        raise line.error('塔的取值不支持尾部', 'tail')
    values, _ = body.values(slots)
    edges = body.edges(values, arrows)

    def step(lower, upper):
        return edges.get((lower, upper)) or ChainMap(values[lower], values[upper], {}, check=False)

    steps = [step(str(n + 1), str(n)) for n in range(horizon)]
    return TowerFunctor([values[p] for p in positions], steps, values[EVENTUAL],
                        step(EVENTUAL, str(horizon)), name=name)


def emit_tower(tower):
    field = tower.field
    out = [f'tower {tower.name or "T"} horizon {tower.horizon} field {field.name}']
    slots = [(str(n), tower.values[n]) for n in range(tower.horizon + 1)]
    slots.append((EVENTUAL, tower.eventual_value))
    for label, value in slots:
        if value.is_zero():
            continue
        out.append(_emit_val(label, value))
        for n, matrix in sorted(value.diffs.items()):
            out.append(f'diff {label} deg {n} {_emit_matrix(field, matrix)}')
    arrows = [(f'{n + 1}<{n}', tower.steps[n]) for n in range(tower.horizon)]
    arrows.append((f'{EVENTUAL}<{tower.horizon}', tower.junction))
    for label, step in arrows:
        for n, matrix in sorted(step.components.items()):
            out.append(f'map {label} deg {n} {_emit_matrix(field, matrix)}')
    return '\n'.join(out) + '\n'


# ---------- 按路径加载 ----------

def _sibling(path, name):
    return os.path.join(os.path.dirname(path) or '.', f'{name}.poset')


def load_poset(path):
    return parse_poset(read_file_content(path), path)


def load_sheaf(path, poset=None, field=None):
    """poset 缺省时按文件头中的偏序名在同目录下查找 <name>.poset"""
    text = read_file_content(path)
    if poset is None:
        tokens = peek_header(text, path)
        if len(tokens) < 4 or tokens[2] != 'over':
            raise ParseError("文件头应为 'sheaf <名> over <偏序> field <域>'", path, 1, tokens[0])
        poset = load_poset(_sibling(path, tokens[3]))
    return parse_sheaf(text, poset, path, field)


def load_kernel(path, left=None, right=None, field=None):
    text = read_file_content(path)
    tokens = peek_header(text, path)
    if len(tokens) < 6 or tokens[2] != 'left' or tokens[4] != 'right':
        raise ParseError("文件头应为 'kernel <名> left <偏序> right <偏序> field <域>'", path, 1, tokens[0])
    left = left or load_poset(_sibling(path, tokens[3]))
    right = right or (left if tokens[5] == left.name else load_poset(_sibling(path, tokens[5])))
    return parse_kernel(text, left, right, path, field)


def load_map(path, source=None, target=None):
    text = read_file_content(path)
    tokens = peek_header(text, path)
    if len(tokens) < 6 or tokens[2] != 'from' or tokens[4] != 'to':
        raise ParseError("文件头应为 'map <名> from <偏序> to <偏序>'", path, 1, tokens[0])
    source = source or load_poset(_sibling(path, tokens[3]))
    target = target or load_poset(_sibling(path, tokens[5]))
    return parse_map(text, source, target, path)


def load_tower(path, field=None):
    return parse_tower(read_file_content(path), path, field)


def load_any(path, field=None):
    """按扩展名分派；返回 (种类, 对象)"""
    if not allowed_file(path):
        raise ParseError('不支持的文件类型', path, 0, os.path.basename(path))
    ext = path.rsplit('.', 1)[1].lower()
    loaders = {
        'poset': lambda: load_poset(path),
        'shf': lambda: load_sheaf(path, field=field),
        'ker': lambda: load_kernel(path, field=field),
        'mono': lambda: load_map(path),
        'tower': lambda: load_tower(path, field),
    }
    return ext, loaders[ext]()
