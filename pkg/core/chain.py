"""有界链复形与链映射

上同调约定：d 把度数升 1，d_n 的形状为 dim(n+1) × dim(n)。
Koszul 符号：d(x⊗y) = dx⊗y + (−1)^{|x|} x⊗dy；Hom 复形 d(f) = d∘f − (−1)^{|f|} f∘d。
"""
import logging

from .errors import FieldMismatch, NotDifferential, ShapeError, SheafError

logger = logging.getLogger(__name__)


class BettiVector(dict):
    """度数 → 同调维数，只保存非零项"""

    def __init__(self, data=None):
        super().__init__()
        for degree, value in sorted((data or {}).items()):
            if value < 0:
                raise ValueError(f"Betti 数不能为负: {degree}:{value}")
            if value:
                self[int(degree)] = int(value)

    @property
    def total(self):
        return sum(self.values())

    def shifted(self, k):
        """Betti(C[k])：度数 n 处取原来 n+k 处的值"""
        return BettiVector({n - k: v for n, v in self.items()})

    def homological(self):
        return BettiVector({-n: v for n, v in self.items()})

    def euler(self):
        return sum((-1) ** (n % 2) * v for n, v in self.items())

    def __str__(self):
        if not self:
            return '{}'
        return '{' + ', '.join(f'{n}:{v}' for n, v in sorted(self.items())) + '}'

    __repr__ = __str__


def add_betti(*vectors):
    merged = {}
    for vector in vectors:
        for n, v in vector.items():
            merged[n] = merged.get(n, 0) + v
    return BettiVector(merged)


class Complex:
    """有限维向量空间的有界链复形，构造时检查形状与 d∘d = 0"""

    def __init__(self, field, dims, diffs=None, check=True):
        self.field = field
        self.dims = {int(n): int(d) for n, d in sorted(dims.items()) if d}
        self.diffs = {}
        for n, matrix in (diffs or {}).items():
            n = int(n)
            rows, cols = self.dim(n + 1), self.dim(n)
            field.check_shape(matrix, rows, cols, f"度数 {n} 的微分")
            if rows and cols and not field.is_zero(matrix):
                self.diffs[n] = matrix
        if check:
            for n in self.diffs:
                if n + 1 in self.diffs:
                    square = field.matmul(self.diffs[n + 1], self.diffs[n])
                    if not field.is_zero(square):
                        raise NotDifferential(n)

    def dim(self, n):
        return self.dims.get(n, 0)

    def diff(self, n):
        if n in self.diffs:
            return self.diffs[n]
        return self.field.zeros(self.dim(n + 1), self.dim(n))

    @property
    def degrees(self):
        return sorted(self.dims)

    @property
    def total_dim(self):
        return sum(self.dims.values())

    def is_zero(self):
        return not self.dims

    def same_as(self, other):
        if self.field != other.field or self.dims != other.dims:
            return False
        return all(self.field.equal(self.diff(n), other.diff(n)) for n in self.dims)

    def __repr__(self):
        return f"Complex({self.field.name}, dims={self.dims})"


def make_complex(field, dims, differentials=None):
    """带校验地构造复形；形状不符抛 ShapeError，d∘d ≠ 0 抛 NotDifferential"""
    return Complex(field, dims, differentials)


def zero_complex(field):
    return Complex(field, {})


def unit_complex(field, degree=0, dim=1):
    """k^dim 置于给定度数"""
    return Complex(field, {degree: dim})


def _same_field(*complexes):
    field = complexes[0].field
    for other in complexes[1:]:
        if other.field != field:
            raise FieldMismatch(field.name, other.field.name)
    return field


def homology(complex_):
    """逐度精确消元：dim ker d_n − rank d_{n−1}"""
    field = complex_.field
    ranks = {n: field.rank(m) for n, m in complex_.diffs.items()}
    return BettiVector({
        n: d - ranks.get(n, 0) - ranks.get(n - 1, 0) for n, d in complex_.dims.items()
    })


def is_acyclic(complex_):
    return not homology(complex_)


def euler_characteristic(complex_):
    return sum((-1) ** (n % 2) * d for n, d in complex_.dims.items())


# ---------- 链映射 ----------

class ChainMap:
    def __init__(self, source, target, components=None, check=True):
        field = _same_field(source, target)
        self.source = source
        self.target = target
        self.components = {}
        for n, matrix in (components or {}).items():
            n = int(n)
            field.check_shape(matrix, target.dim(n), source.dim(n), f"度数 {n} 的链映射分量")
            if target.dim(n) and source.dim(n) and not field.is_zero(matrix):
                self.components[n] = matrix
        if check:
            degrees = set(source.dims) | {n - 1 for n in source.dims}
            for n in sorted(degrees):
                left = field.matmul(target.diff(n), self.component(n))
                right = field.matmul(self.component(n + 1), source.diff(n))
                if not field.equal(left, right):
                    raise ShapeError(f"链映射与微分不交换（度数 {n}）")

    @property
    def field(self):
        return self.source.field

    def component(self, n):
        if n in self.components:
            return self.components[n]
        return self.field.zeros(self.target.dim(n), self.source.dim(n))

    def is_zero(self):
        return not self.components

    def equals(self, other):
        degrees = set(self.components) | set(other.components)
        return all(self.field.equal(self.component(n), other.component(n)) for n in degrees)


def identity_map(complex_):
    field = complex_.field
    return ChainMap(complex_, complex_, {n: field.identity(d) for n, d in complex_.dims.items()},
                    check=False)


def zero_map(source, target):
    return ChainMap(source, target, {}, check=False)


def compose(second, first):
    """second ∘ first"""
    if first.target.dims != second.source.dims:
        raise ShapeError("复合的链映射端点不匹配")
    field = first.field
    comps = {n: field.matmul(second.component(n), first.component(n)) for n in first.source.dims}
    return ChainMap(first.source, second.target, comps, check=False)


def add_maps(first, second, coefficient=1):
    field = first.field
    degrees = set(first.components) | set(second.components)
    comps = {n: first.component(n) + field.signed(second.component(n), coefficient)
             for n in degrees}
    return ChainMap(first.source, first.target, comps, check=False)


def induced_rank(chain_map, n):
    """H^n(f) 的秩：rank[f·Z | B] − rank B"""
    field = chain_map.field
    source, target = chain_map.source, chain_map.target
    cycles = field.kernel_basis(source.diff(n))
    if cycles.shape[1] == 0 or target.dim(n) == 0:
        return 0
    image = field.matmul(chain_map.component(n), cycles)
    boundaries = target.diff(n - 1)
    stacked = field.hstack([image, boundaries], target.dim(n))
    return field.rank(stacked) - field.rank(boundaries)


# ---------- 代数运算 ----------

def shift(complex_, k):
    """C[k]^n = C^{n+k}，微分乘 (−1)^k"""
    sign = -1 if k % 2 else 1
    field = complex_.field
    return Complex(field, {n - k: d for n, d in complex_.dims.items()},
                   {n - k: field.signed(m, sign) for n, m in complex_.diffs.items()}, check=False)


def shift_map(chain_map, k):
    return ChainMap(shift(chain_map.source, k), shift(chain_map.target, k),
                    {n - k: m for n, m in chain_map.components.items()}, check=False)


def direct_sum(*complexes):
    field = _same_field(*complexes)
    degrees = sorted({n for c in complexes for n in c.dims})
    dims = {n: sum(c.dim(n) for c in complexes) for n in degrees}
    diffs = {}
    for n in degrees:
        matrix = field.zeros(dims.get(n + 1, 0), dims[n])
        row = col = 0
        for c in complexes:
            field.place(matrix, row, col, c.diff(n))
            row += c.dim(n + 1)
            col += c.dim(n)
        diffs[n] = matrix
    return Complex(field, dims, diffs, check=False)


def direct_sum_maps(*maps):
    source = direct_sum(*[m.source for m in maps])
    target = direct_sum(*[m.target for m in maps])
    field = source.field
    comps = {}
    for n in source.dims:
        matrix = field.zeros(target.dim(n), source.dim(n))
        row = col = 0
        for m in maps:
            field.place(matrix, row, col, m.component(n))
            row += m.target.dim(n)
            col += m.source.dim(n)
        comps[n] = matrix
    return ChainMap(source, target, comps, check=False)


def _tensor_layout(left, right, n):
    layout, offset = [], 0
    for i in left.degrees:
        j = n - i
        size = left.dim(i) * right.dim(j)
        if size:
            layout.append((i, j, offset, size))
            offset += size
    return layout, offset


def tensor(left, right):
    field = _same_field(left, right)
    degrees = sorted({i + j for i in left.dims for j in right.dims})
    layouts = {n: _tensor_layout(left, right, n) for n in degrees}
    dims = {n: layouts[n][1] for n in degrees}
    diffs = {}
    for n in degrees:
        if n + 1 not in layouts:
            continue
        target_slots = {(i, j): off for i, j, off, _ in layouts[n + 1][0]}
        matrix = field.zeros(dims[n + 1], dims[n])
        for i, j, off, _ in layouts[n][0]:
            if (i + 1, j) in target_slots:
                block = field.kron(left.diff(i), field.identity(right.dim(j)))
                field.place(matrix, target_slots[(i + 1, j)], off, block)
            if (i, j + 1) in target_slots:
                block = field.kron(field.identity(left.dim(i)), right.diff(j))
                field.place(matrix, target_slots[(i, j + 1)], off, field.signed(block, (-1) ** (i % 2)))
        diffs[n] = matrix
    return Complex(field, dims, diffs)


def tensor_offset(left, right, i, j):
    """(C⊗D)^{i+j} 中 C^i ⊗ D^j 块的起始位置；块为空时返回 None"""
    for a, b, off, _ in _tensor_layout(left, right, i + j)[0]:
        if (a, b) == (i, j):
            return off
    return None


def tensor_maps(first, second):
    """f⊗g：C⊗D → C′⊗D′（两者都是 0 次链映射，无符号）"""
    source = tensor(first.source, second.source)
    target = tensor(first.target, second.target)
    field = source.field
    comps = {}
    for n in source.dims:
        matrix = field.zeros(target.dim(n), source.dim(n))
        target_slots = {(i, j): off for i, j, off, _ in _tensor_layout(first.target, second.target, n)[0]}
        for i, j, off, _ in _tensor_layout(first.source, second.source, n)[0]:
            if (i, j) in target_slots:
                block = field.kron(first.component(i), second.component(j))
                field.place(matrix, target_slots[(i, j)], off, block)
        comps[n] = matrix
    return ChainMap(source, target, comps, check=False)


def _hom_layout(source, target, n):
    layout, offset = [], 0
    for m in source.degrees:
        size = target.dim(m + n) * source.dim(m)
        if size:
            layout.append((m, offset, size))
            offset += size
    return layout, offset


def hom_complex(source, target):
    """Hom(C, D)^n = ∏_m Hom(C^m, D^{m+n})；矩阵按行优先展开"""
    field = _same_field(source, target)
    degrees = sorted({j - i for i in source.dims for j in target.dims})
    layouts = {n: _hom_layout(source, target, n) for n in degrees}
    dims = {n: layouts[n][1] for n in degrees}
    diffs = {}
    for n in degrees:
        if n + 1 not in layouts:
            continue
        target_slots = {m: off for m, off, _ in layouts[n + 1][0]}
        matrix = field.zeros(dims[n + 1], dims[n])
        sign = -((-1) ** (n % 2))
        for m, off, _ in layouts[n][0]:
            if m in target_slots:
                block = field.kron(target.diff(m + n), field.identity(source.dim(m)))
                field.place(matrix, target_slots[m], off, block)
            if m - 1 in target_slots:
                block = field.kron(field.identity(target.dim(m + n)), source.diff(m - 1).T)
                field.place(matrix, target_slots[m - 1], off, field.signed(block, sign))
        diffs[n] = matrix
    return Complex(field, dims, diffs)


def hom_map(pre, post):
    """φ ↦ post∘φ∘pre：Hom(C, D) → Hom(C′, D′)，其中 pre: C′→C，post: D→D′"""
    source = hom_complex(pre.target, post.source)
    target = hom_complex(pre.source, post.target)
    field = source.field
    comps = {}
    for n in source.dims:
        matrix = field.zeros(target.dim(n), source.dim(n))
        target_slots = {m: off for m, off, _ in _hom_layout(pre.source, post.target, n)[0]}
        for m, off, _ in _hom_layout(pre.target, post.source, n)[0]:
            if m in target_slots:
                block = field.kron(post.component(m + n), pre.component(m).T)
                field.place(matrix, target_slots[m], off, block)
        comps[n] = matrix
    return ChainMap(source, target, comps, check=False)


def cone(chain_map):
    """cone(f)^n = S^{n+1} ⊕ T^n，d = [[−d_S, 0], [f, d_T]]"""
    source, target = chain_map.source, chain_map.target
    field = source.field
    degrees = sorted({n - 1 for n in source.dims} | set(target.dims))
    dims = {n: source.dim(n + 1) + target.dim(n) for n in degrees}
    diffs = {}
    for n in degrees:
        rows = source.dim(n + 2) + target.dim(n + 1)
        matrix = field.zeros(rows, dims[n])
        field.place(matrix, 0, 0, -source.diff(n + 1))
        field.place(matrix, source.dim(n + 2), 0, chain_map.component(n + 1))
        field.place(matrix, source.dim(n + 2), source.dim(n + 1), target.diff(n))
        diffs[n] = matrix
    return Complex(field, dims, diffs)


def cone_square(top, bottom, source_map, target_map):
    """交换方块诱导的锥之间的映射：cone(top) → cone(bottom)，(x, y) ↦ (α x, β y)"""
    source, target = cone(top), cone(bottom)
    field = source.field
    comps = {}
    for n in source.dims:
        matrix = field.zeros(target.dim(n), source.dim(n))
        field.place(matrix, 0, 0, source_map.component(n + 1))
        field.place(matrix, bottom.source.dim(n + 1), top.source.dim(n + 1), target_map.component(n))
        comps[n] = matrix
    return ChainMap(source, target, comps, check=False)


def is_quasi_iso(chain_map):
    """当且仅当 cone(f) 各度同调为零"""
    return is_acyclic(cone(chain_map))


def homology_iso(chain_map):
    """用诱导秩判断同调同构（与 is_quasi_iso 等价，不构造锥）"""
    source_h, target_h = homology(chain_map.source), homology(chain_map.target)
    if source_h != target_h:
        return False
    return all(induced_rank(chain_map, n) == v for n, v in source_h.items())


# ---------- 总复形装配 ----------

class Total:
    """把若干带偏移的复形用链映射连接成总复形

    parts: [(key, complex, offset, sign)]，内部度 m 位于总度 m + offset，内部微分乘 sign；
    links: [(src_key, tgt_key, chain_map, coefficient)]，要求 offset(tgt) = offset(src) + 1。
    """

    def __init__(self, field, parts, links=()):
        self.field = field
        self.parts = {}
        self.order = []
        for key, complex_, offset, sign in parts:
            if complex_.field != field:
                raise FieldMismatch(field.name, complex_.field.name)
            self.parts[key] = (complex_, offset, sign)
            self.order.append(key)
        degrees = sorted({m + offset for complex_, offset, _ in self.parts.values()
                          for m in complex_.dims})
        self.slots = {}
        dims = {}
        for t in degrees:
            cursor = 0
            for key in self.order:
                complex_, offset, _ = self.parts[key]
                size = complex_.dim(t - offset)
                if size:
                    self.slots[(key, t)] = cursor
                    cursor += size
            dims[t] = cursor
        diffs = {t: field.zeros(dims.get(t + 1, 0), dims[t]) for t in degrees}
        for key in self.order:
            complex_, offset, sign = self.parts[key]
            for m, matrix in complex_.diffs.items():
                t = m + offset
                field.place(diffs[t], self.slots[(key, t + 1)], self.slots[(key, t)],
                            field.signed(matrix, sign))
        for src, tgt, chain_map, coefficient in links:
            _, src_offset, _ = self.parts[src]
            _, tgt_offset, _ = self.parts[tgt]
            if tgt_offset != src_offset + 1:
                raise SheafError(f"连接 {src}→{tgt} 的偏移不相差 1")
            for m, matrix in chain_map.components.items():
                t = m + src_offset
                field.place(diffs[t], self.slots[(tgt, t + 1)], self.slots[(src, t)],
                            field.signed(matrix, coefficient))
        self.complex = Complex(field, dims, diffs)

    def has(self, key):
        return key in self.parts

    def slot(self, key, t):
        return self.slots.get((key, t))

    def part(self, key):
        return self.parts[key]

    def map_to(self, other, blocks, source_complex=None, target_complex=None):
        """按部件构造总复形之间的链映射；blocks: [(src_key, tgt_key, chain_map)]，两部件偏移相同"""
        field = self.field
        source = self.complex if source_complex is None else source_complex
        target = other.complex if target_complex is None else target_complex
        comps = {t: field.zeros(target.dim(t), source.dim(t)) for t in source.dims}
        for src, tgt, chain_map in blocks:
            _, src_offset, _ = self.parts[src]
            _, tgt_offset, _ = other.parts[tgt]
            if src_offset != tgt_offset:
                raise SheafError(f"部件 {src}→{tgt} 偏移不同，无法构造 0 次链映射")
            for m, matrix in chain_map.components.items():
                t = m + src_offset
                row, col = other.slot(tgt, t), self.slot(src, t)
                if row is None or col is None:
                    continue
                field.place(comps[t], row, col, matrix)
        return ChainMap(source, target, comps)


def single(complex_, key=None):
    """把一个普通复形看作只有一个部件的总复形"""
    return Total(complex_.field, [(key, complex_, 0, 1)])
