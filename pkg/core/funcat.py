"""函子范畴 Fun(P, Complex)：可构造层的组合模型

包含：函子与自然变换的校验、Yoneda 生成元、茎、cobar 导出 Hom、双边 bar 张量、
同伦（余）极限、Kan 扩张、bar 分解与胞腔表示。
bar 的链 p₀<…<p_n 放在总度数 内部度 − n，cobar 放在 内部度 + n。
"""
import logging

from . import chain as ch
from .chain import Total, identity_map, single, unit_complex, zero_complex
from .errors import BaseMismatch, NotFunctorial, NotNatural, ShapeError, SheafError, UnsupportedTail
from .poset import opposite
from .tails import sum_tails, tail_add_finite, tail_betti, tail_is_perfect, tail_tensor
from .utils import ordered_map

logger = logging.getLogger(__name__)


def _sign(n):
    return -1 if n % 2 else 1


class PFunctor:
    """偏序上的复形图；tails 记录各元素上的纯尾部（进出尾部的结构映射为零）"""

    def __init__(self, base, field, values, edge_maps, tails=None, check=True, name=''):
        self.base = base
        self.field = field
        self.name = name
        self.values = {p: values.get(p) or zero_complex(field) for p in base.elements}
        for p in values:
            base.check(p, '函子取值')
        self.edges = {}
        for (p, q), edge in edge_maps.items():
            if (p, q) not in base.hasse:
                raise SheafError(f"{p}<{q} 不是覆盖关系")
            if edge.source.dims != self.values[p].dims or edge.target.dims != self.values[q].dims:
                raise ShapeError(f"结构映射 {p}<{q} 的端点维数与取值不符")
            self.edges[(p, q)] = edge
        self.tails = {p: t for p, t in (tails or {}).items() if not t.tail_base.is_zero()}
        self._maps = {}
        for complex_ in self.values.values():
            if complex_.field != field:
                raise BaseMismatch(f"取值的系数域 {complex_.field.name} 与 {field.name} 不一致")
        if check:
            self._check_functorial()

    def __repr__(self):
        dims = {p: c.total_dim for p, c in self.values.items() if c.total_dim}
        return f"PFunctor({self.base.name}, {self.field.name}, {dims})"

    def edge(self, p, q):
        if (p, q) in self.edges:
            return self.edges[(p, q)]
        return ch.zero_map(self.values[p], self.values[q])

    def map(self, p, q):
        """p ≤ q 时的结构映射 F(p→q)，沿规范覆盖路径复合"""
        key = (p, q)
        if key in self._maps:
            return self._maps[key]
        if p == q:
            result = identity_map(self.values[p])
        elif not self.base.leq(p, q):
            raise SheafError(f"{p} ≰ {q}，不存在结构映射")
        else:
            via = next(r for r in self.base.lower_covers(q) if self.base.leq(p, r))
            result = ch.compose(self.edge(via, q), self.map(p, via))
        self._maps[key] = result
        return result

    def _check_functorial(self):
        base = self.base
        for q in base.elements:
            lowers = base.lower_covers(q)
            if len(lowers) < 2:
                continue
            for p in base.elements:
                if not base.less(p, q):
                    continue
                candidates = [r for r in lowers if base.leq(p, r)]
                if len(candidates) < 2:
                    continue
                reference = self.map(p, q)
                for r in candidates[1:]:
                    other = ch.compose(self.edge(r, q), self.map(p, r))
                    if not other.equals(reference):
                        raise NotFunctorial((p, r, q))

    def has_tails(self):
        return bool(self.tails)

    def betti(self, p):
        """茎的 Betti；带尾值时返回符号 Betti"""
        return ch.homology(self.values[p]) if p not in self.tails else tail_betti(stalk(self, p))

    def total_dim(self):
        return sum(c.total_dim for c in self.values.values())

    def without_acyclic_tails(self):
        """去掉基底无环的尾部，结果与原函子拟同构"""
        kept = {p: t for p, t in self.tails.items() if not (tail_is_perfect(t) and t.finite_part.is_zero())}
        if len(kept) == len(self.tails):
            return self
        return PFunctor(self.base, self.field, self.values, self.edges, tails=kept, check=False, name=self.name)


class NatTrans:
    def __init__(self, source, target, components, check=True):
        if not source.base.same_as(target.base):
            raise BaseMismatch("自然变换两端的底偏序不同")
        self.source = source
        self.target = target
        self.components = {}
        for p in source.base.elements:
            component = components.get(p)
            if component is None:
                component = ch.zero_map(source.values[p], target.values[p])
            self.components[p] = component
        if check:
            for p, q in source.base.hasse:
                left = ch.compose(target.edge(p, q), self.components[p])
                right = ch.compose(self.components[q], source.edge(p, q))
                if not left.equals(right):
                    raise NotNatural((p, q))

    def __getitem__(self, p):
        return self.components[p]

    def is_quasi_iso(self):
        return all(ch.is_quasi_iso(self.components[p]) for p in self.source.base.elements)

    def failing(self):
        """不是拟同构的元素列表"""
        return [p for p in self.source.base.elements if not ch.is_quasi_iso(self.components[p])]


def make_functor(base, values, edge_maps, field=None, tails=None, name=''):
    """带函子性检查地构造；field 缺省时取自任一取值"""
    if field is None:
        sample = next(iter(values.values()), None)
        if sample is None:
            raise SheafError("无法推断系数域：函子没有任何取值")
        field = sample.field
    return PFunctor(base, field, values, edge_maps, tails=tails, name=name)


def _identity_on(base, support, value):
    values = {p: value for p in support}
    edges = {(p, q): identity_map(value) for p, q in base.hasse if p in support and q in support}
    return values, edges


def constant(base, field, value=None):
    value = value or unit_complex(field)
    values, edges = _identity_on(base, set(base.elements), value)
    return PFunctor(base, field, values, edges, check=False, name='const')


def yoneda(base, p, field, value=None):
    """y(p) ⊗ V：在 {q : p ≤ q} 上取 V，映射为恒等"""
    value = value or unit_complex(field)
    values, edges = _identity_on(base, set(base.up(p)), value)
    return PFunctor(base, field, values, edges, check=False, name=f'y({p})')


def down_set_functor(base, p, field, value=None):
    value = value or unit_complex(field)
    values, edges = _identity_on(base, set(base.down(p)), value)
    return PFunctor(base, field, values, edges, check=False, name=f'down({p})')


def skyscraper(base, p, field, value=None):
    base.check(p)
    value = value or unit_complex(field)
    return PFunctor(base, field, {p: value}, {}, check=False, name=f'sky({p})')


def _pointwise(functors, make_value, make_map, name=''):
    first = functors[0]
    for other in functors[1:]:
        if not other.base.same_as(first.base):
            raise BaseMismatch("函子的底偏序不同")
        if other.field != first.field:
            raise BaseMismatch("函子的系数域不同")
    base = first.base
    values = {p: make_value(*[f.values[p] for f in functors]) for p in base.elements}
    edges = {(p, q): make_map(*[f.edge(p, q) for f in functors]) for p, q in base.hasse}
    return PFunctor(base, first.field, values, edges, check=False, name=name)


def direct_sum(*functors):
    result = _pointwise(functors, ch.direct_sum, ch.direct_sum_maps, 'sum')
    tails = {}
    for functor in functors:
        for p, tail in functor.tails.items():
            tails[p] = sum_tails([tails[p], tail]) if p in tails else tail
    result.tails = tails
    return result


def shift_functor(functor, k):
    if functor.has_tails():
        raise UnsupportedTail("带尾值的函子不支持平移")
    return _pointwise([functor], lambda c: ch.shift(c, k), lambda m: ch.shift_map(m, k), f'{functor.name}[{k}]')


def tensor_functor(functor, value):
    """逐点与固定复形 V 张量"""
    result = _pointwise([functor], lambda c: ch.tensor(c, value),
                        lambda m: ch.tensor_maps(m, identity_map(value)), f'{functor.name}⊗V')
    result.tails = {p: tail_tensor(t, value) for p, t in functor.tails.items()}
    return result


def cone_nat(eta):
    """自然变换的逐点锥"""
    source, target = eta.source, eta.target
    if source.has_tails() or target.has_tails():
        raise UnsupportedTail("带尾值的函子不支持取锥")
    base = source.base
    values = {p: ch.cone(eta[p]) for p in base.elements}
    edges = {(p, q): ch.cone_square(eta[p], eta[q], source.edge(p, q), target.edge(p, q))
             for p, q in base.hasse}
    return PFunctor(base, source.field, values, edges, check=False, name='cone')


def identity_nat(functor):
    return NatTrans(functor, functor, {p: identity_map(c) for p, c in functor.values.items()}, check=False)


def pullback(functor, f):
    """沿单调映射 f: P → Q 的拉回 p ↦ G(f(p))；尾值逐点拉回"""
    if not f.target.same_as(functor.base):
        raise BaseMismatch(f"映射的值域 {f.target.name} 不是函子的底 {functor.base.name}")
    source = f.source
    values = {p: functor.values[f(p)] for p in source.elements}
    edges = {(p, q): functor.map(f(p), f(q)) for p, q in source.hasse}
    tails = {p: functor.tails[f(p)] for p in source.elements if f(p) in functor.tails}
    return PFunctor(source, functor.field, values, edges, tails=tails, check=False,
                    name=f'{functor.name}∘{f.name}')


# ---------- 茎 ----------

def stalk(functor, p):
    """求值即茎；带尾值时返回 TailValue"""
    functor.base.check(p)
    if p in functor.tails:
        tail = functor.tails[p]
        return tail_add_finite(tail, functor.values[p])
    return functor.values[p]


def _same_base(left, right, op=True):
    expected = opposite(right.base) if op else right.base
    if not left.base.same_as(expected):
        raise BaseMismatch(f"底偏序不匹配: {left.base.name} 与 {expected.name}")
    if left.field != right.field:
        raise BaseMismatch(f"系数域不匹配: {left.field.name} 与 {right.field.name}")


# ---------- cobar：导出 Hom ----------

def _cobar_total(source, target, chains):
    """∏_{σ} Hom(F(p₀), G(p_n))，σ 的度数偏移为 +n"""
    parts = []
    for chain in chains:
        value = ch.hom_complex(source.values[chain[0]], target.values[chain[-1]])
        if not value.is_zero():
            n = len(chain) - 1
            parts.append((chain, value, n, _sign(n)))
    present = {key for key, *_ in parts}
    links = []
    for chain, value, n, _ in parts:
        if n == 0:
            continue
        for i in range(n + 1):
            face = chain[:i] + chain[i + 1:]
            if face not in present:
                continue
            if i == 0:
                link = ch.hom_map(source.map(chain[0], chain[1]), identity_map(target.values[chain[-1]]))
            elif i == n:
                link = ch.hom_map(identity_map(source.values[chain[0]]), target.map(chain[-2], chain[-1]))
            else:
                link = identity_map(value)
            links.append((face, chain, link, _sign(i)))
    return Total(source.field, parts, links)


def rhom_total(source, target):
    _same_base(source, target, op=False)
    if source.has_tails():
        raise UnsupportedTail("rhom 的第一个变量不能带尾值")
    return _cobar_total(source, target, source.base.chains)


def rhom_tail(source, target):
    """target 的尾部对 rhom 的贡献：⊕ tail_base ⊗ rhom(F, 摩天大楼)；无尾值时为 None"""
    contributions = []
    for p, tail in target.tails.items():
        sky = skyscraper(target.base, p, target.field)
        piece = _cobar_total(source, sky, source.base.chains).complex
        contributions.append(tail_tensor(tail, piece))
    return sum_tails(contributions)


def rhom(source, target):
    """正规化 cobar 全复形；target 带尾值时结果为 TailValue"""
    finite = rhom_total(source, target).complex
    tail = rhom_tail(source, target)
    return finite if tail is None else tail_add_finite(tail, finite)


def holim(functor):
    """整体截面 = rhom(常值 k, F)"""
    return rhom(constant(functor.base, functor.field), functor)


def stalk_comparison(functor, p):
    """G(p) → rhom(y(p), G)：v ↦ (G(p≤p₀)v) 落在余单纯 0 度"""
    generator = yoneda(functor.base, p, functor.field)
    total = rhom_total(generator, functor)
    source = single(functor.values[p])
    blocks = [(None, (q,), functor.map(p, q)) for q in functor.base.up(p) if total.has((q,))]
    return source.map_to(total, blocks)


def rhom_induced(source, eta):
    """η: G → G′ 诱导 rhom(F, G) → rhom(F, G′)"""
    left = rhom_total(source, eta.source)
    right = rhom_total(source, eta.target)
    blocks = []
    for key in left.order:
        if right.has(key):
            link = ch.hom_map(identity_map(source.values[key[0]]), eta[key[-1]])
            blocks.append((key, key, link))
    return left.map_to(right, blocks)


# ---------- bar：导出余端 ----------

def _bar_total(gop, functor, chains):
    """⊕_{σ} Gop(p_n) ⊗ F(p₀)，σ 的度数偏移为 −n"""
    parts = []
    for chain in chains:
        value = ch.tensor(gop.values[chain[-1]], functor.values[chain[0]])
        if not value.is_zero():
            n = len(chain) - 1
            parts.append((chain, value, -n, _sign(n)))
    present = {key for key, *_ in parts}
    links = []
    for chain, value, n, _ in parts:
        if n == 0:
            continue
        for i in range(n + 1):
            face = chain[:i] + chain[i + 1:]
            if face not in present:
                continue
            if i == 0:
                link = ch.tensor_maps(identity_map(gop.values[chain[-1]]), functor.map(chain[0], chain[1]))
            elif i == n:
                link = ch.tensor_maps(gop.map(chain[-1], chain[-2]), identity_map(functor.values[chain[0]]))
            else:
                link = identity_map(value)
            links.append((chain, face, link, _sign(i)))
    return Total(functor.field, parts, links)


def bar_total(gop, base, functor):
    if not functor.base.same_as(base):
        raise BaseMismatch(f"函子不在 {base.name} 上")
    _same_base(gop, functor, op=True)
    if functor.has_tails():
        raise UnsupportedTail("bar_tensor 的协变变量不能带尾值")
    return _bar_total(gop, functor, base.chains)


def bar_tail(gop, base, functor):
    """Gop 的尾部对 bar 的贡献；无尾值时为 None"""
    contributions = []
    for p, tail in gop.tails.items():
        sky = skyscraper(gop.base, p, gop.field)
        piece = _bar_total(sky, functor, base.chains).complex
        contributions.append(tail_tensor(tail, piece))
    return sum_tails(contributions)


def bar_tensor(gop, base, functor):
    """双边 bar B(Gop, P, F)；Gop 带尾值时结果为 TailValue"""
    finite = bar_total(gop, base, functor).complex
    tail = bar_tail(gop, base, functor)
    return finite if tail is None else tail_add_finite(tail, finite)


def bar_induced(gop_map, functor_map, left=None, right=None):
    """Gop → Gop′ 与 F → F′ 共同诱导的 bar 之间的映射；可传入已算好的两端总复形"""
    base = functor_map.source.base
    left = left or bar_total(gop_map.source, base, functor_map.source)
    right = right or bar_total(gop_map.target, base, functor_map.target)
    blocks = []
    for key in left.order:
        if right.has(key):
            link = ch.tensor_maps(gop_map[key[-1]], functor_map[key[0]])
            blocks.append((key, key, link))
    return left.map_to(right, blocks)


def hocolim(functor):
    """同伦余极限 = bar_tensor(常值 k, P, F)，上同调指标（报告时取反）"""
    return bar_tensor(constant(opposite(functor.base), functor.field), functor.base, functor)


def augmentation(total, functor, q):
    """bar 型总复形在 0-链上经 F(p₀→q) 映到 F(q)"""
    blocks = [(key, None, functor.map(key[0], q)) for key in total.order if len(key) == 1]
    return total.map_to(single(functor.values[q]), blocks)


# ---------- Kan 扩张 ----------

def _lower_chains(f, q):
    """f(p) ≤ q 的 p 组成的链"""
    target = f.target
    return [c for c in f.source.chains if target.leq(f(c[-1]), q)]


def _upper_chains(f, q):
    target = f.target
    return [c for c in f.source.chains if target.leq(q, f(c[0]))]


def kan_left_totals(f, functor):
    """左 Kan 扩张的逐点 bar 总复形，按目标偏序声明顺序"""
    if not f.source.same_as(functor.base):
        raise BaseMismatch("Kan 扩张的函子不在映射的定义域上")
    if functor.has_tails():
        raise UnsupportedTail("Kan 扩张不支持带尾值的函子")
    const = constant(opposite(functor.base), functor.field)
    totals = ordered_map(lambda q: _bar_total(const, functor, _lower_chains(f, q)), f.target.elements)
    return dict(zip(f.target.elements, totals))


def kan_left(f, functor, totals=None):
    """值 q ↦ hocolim_{f(p)≤q} F；结构映射为和项的包含"""
    totals = totals or kan_left_totals(f, functor)
    target = f.target
    edges = {}
    for p, q in target.hasse:
        small, big = totals[p], totals[q]
        blocks = [(key, key, identity_map(small.part(key)[0])) for key in small.order]
        edges[(p, q)] = small.map_to(big, blocks)
    values = {q: totals[q].complex for q in target.elements}
    return PFunctor(target, functor.field, values, edges, check=False, name=f'{f.name}_!{functor.name}')


def kan_right_totals(f, functor):
    if not f.source.same_as(functor.base):
        raise BaseMismatch("Kan 扩张的函子不在映射的定义域上")
    if functor.has_tails():
        raise UnsupportedTail("Kan 扩张不支持带尾值的函子")
    const = constant(functor.base, functor.field)
    totals = ordered_map(lambda q: _cobar_total(const, functor, _upper_chains(f, q)), f.target.elements)
    return dict(zip(f.target.elements, totals))


def kan_right(f, functor, totals=None):
    """值 q ↦ holim_{q≤f(p)} F；结构映射为上链的投影"""
    totals = totals or kan_right_totals(f, functor)
    target = f.target
    edges = {}
    for p, q in target.hasse:
        big, small = totals[p], totals[q]
        blocks = [(key, key, identity_map(small.part(key)[0])) for key in small.order]
        edges[(p, q)] = big.map_to(small, blocks)
    values = {q: totals[q].complex for q in target.elements}
    return PFunctor(target, functor.field, values, edges, check=False, name=f'{f.name}_*{functor.name}')


# ---------- 胞腔表示 ----------

class Cell:
    """y(element) ⊗ value[shift] 形状的胞腔；attachments 为 (目标胞腔, 链映射, 系数)"""

    def __init__(self, key, element, value, shift, attachments=()):
        self.key = key
        self.element = element
        self.value = value
        self.shift = shift
        self.attachments = list(attachments)

    def __repr__(self):
        return f"Cell({self.element}, dims={self.value.dims}, shift={self.shift})"


class CellPresentation:
    """有限胞腔表示；comparison 为实现到目标函子的自然变换"""

    def __init__(self, target, cells, augment, exact=True):
        self.target = target
        self.cells = list(cells)
        # 0 维胞腔 key → 到 F(element) 的链映射
        self.augment = dict(augment)
        self.realization, self._totals = realize(self, with_totals=True)
        components = {}
        for q in target.base.elements:
            total = self._totals[q]
            blocks = []
            for cell in self.cells:
                if cell.key in self.augment and total.has(cell.key):
                    blocks.append((cell.key, None,
                                   ch.compose(target.map(cell.element, q), self.augment[cell.key])))
            components[q] = total.map_to(single(target.values[q]), blocks)
        self.comparison = NatTrans(self.realization, target, components, check=False)
        self.exact = exact

    def __len__(self):
        return len(self.cells)

    def is_exact(self):
        return self.comparison.is_quasi_iso()


def realize(presentation, with_totals=False):
    """按胞腔迭代粘合重建函子：q 处取 element ≤ q 的胞腔"""
    target = presentation.target
    base = target.base
    totals = {}
    for q in base.elements:
        chosen = [c for c in presentation.cells if base.leq(c.element, q)]
        keys = {c.key for c in chosen}
        parts = [(c.key, c.value, -c.shift, _sign(c.shift)) for c in chosen]
        links = [(c.key, to, m, coef) for c in chosen for to, m, coef in c.attachments if to in keys]
        totals[q] = Total(target.field, parts, links)
    edges = {}
    for p, q in base.hasse:
        small, big = totals[p], totals[q]
        blocks = [(key, key, identity_map(small.part(key)[0])) for key in small.order]
        edges[(p, q)] = small.map_to(big, blocks)
    functor = PFunctor(base, target.field, {q: t.complex for q, t in totals.items()}, edges,
                       check=False, name='realize')
    return (functor, totals) if with_totals else functor


def bar_resolution(functor):
    """正规化 bar 分解 B(kP, P, F)：每条 F(p₀) ≠ 0 的严格链给出胞腔 y(p_n) ⊗ F(p₀)[n]"""
    functor = functor.without_acyclic_tails()
    if functor.has_tails():
        raise UnsupportedTail("bar 分解不支持带尾值的函子")
    base = functor.base
    chains = [c for c in base.chains if not functor.values[c[0]].is_zero()]
    present = set(chains)
    cells = []
    for chain in chains:
        n = len(chain) - 1
        attachments = []
        for i in range(n + 1) if n else ():
            face = chain[:i] + chain[i + 1:]
            if face not in present:
                continue
            if i == 0:
                link = functor.map(chain[0], chain[1])
            else:
                link = identity_map(functor.values[chain[0]])
            attachments.append((face, link, _sign(i)))
        cells.append(Cell(chain, chain[-1], functor.values[chain[0]], n, attachments))
    augment = {c: identity_map(functor.values[c[0]]) for c in chains if len(c) == 1}
    logger.debug(f"bar 分解: {len(cells)} 个胞腔")
    return CellPresentation(functor, cells, augment)


def yoneda_presentation(functor, p):
    """F ≅ y(p) ⊗ F(p) 时的单胞腔表示"""
    value = functor.values[p]
    cell = Cell((p,), p, value, 0)
    return CellPresentation(functor, [cell], {(p,): identity_map(value)})


def recognize_yoneda(functor):
    """若 F 恰为 y(p) ⊗ V（支撑为 P_{p/}、映射为恒等）返回 p，否则 None"""
    functor = functor.without_acyclic_tails()
    if functor.has_tails():
        return None
    base = functor.base
    support = [p for p in base.elements if not functor.values[p].is_zero()]
    if not support:
        return None
    for p in support:
        if set(base.up(p)) != set(support):
            continue
        value = functor.values[p]
        if not all(functor.values[q].same_as(value) for q in support):
            return None
        for lower, upper in base.hasse:
            if lower in support and upper in support:
                if not functor.edge(lower, upper).equals(identity_map(value)):
                    return None
        return p
    return None
