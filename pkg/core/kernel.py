"""卷积核 K ∈ Fun(P^op × Q)

卷积 (−) ∗ K 实现为 P 上的导出余端：(F ∗ K)(q) = B(K(−, q), P, F)。
"""
import logging

from . import chain as ch
from .chain import identity_map, single, unit_complex
from .errors import BaseMismatch, UnknownElement, UnsupportedTail
from .funcat import (NatTrans, PFunctor, augmentation, bar_induced, bar_tail, bar_total,
                     identity_nat, make_functor, pullback, yoneda)
from .poset import MonotoneMap, opposite, pair_id, product
from .tails import sum_tails
from .utils import ordered_map

logger = logging.getLogger(__name__)


class Kernel:
    def __init__(self, left, right, carrier, name=''):
        self.left = left
        self.right = right
        self.carrier = carrier
        self.name = name

    @property
    def field(self):
        return self.carrier.field

    def value(self, p, q):
        return self.carrier.values[pair_id(p, q)]

    def has_tails(self):
        return self.carrier.has_tails()

    def __repr__(self):
        return f"Kernel({self.name or '?'}: {self.left.name}^op × {self.right.name})"


def kernel_base(left, right):
    return product(opposite(left), right, f'{left.name}^opx{right.name}')


def make_kernel(left, right, values, edge_maps, field=None, tails=None, name=''):
    """values 以 (p,q) 形式的元素 id 为键；按 make_functor 校验函子性"""
    carrier = make_functor(kernel_base(left, right), values, edge_maps, field=field, tails=tails, name=name)
    return Kernel(left, right, carrier, name)


def identity_kernel(poset, field):
    """(p,q) 处在 p ≤ q 时取 k，结构映射为恒等"""
    base = kernel_base(poset, poset)
    k = unit_complex(field)
    support = {pair_id(p, q) for p in poset.elements for q in poset.up(p)}
    values = {e: k for e in support}
    edges = {(a, b): identity_map(k) for a, b in base.hasse if a in support and b in support}
    carrier = PFunctor(base, field, values, edges, check=False, name='id')
    return Kernel(poset, poset, carrier, f'id_{poset.name}')


def external_product(left_functor, right_functor, name=''):
    """F₀ ⊠ G：(p,q) ↦ F₀(p) ⊗ G(q)，F₀ 定义在 P^op 上"""
    if left_functor.has_tails() or right_functor.has_tails():
        raise UnsupportedTail("外积不支持带尾值的因子")
    left = opposite(left_functor.base)
    right = right_functor.base
    base = kernel_base(left, right)
    values, edges = {}, {}
    for p in left.elements:
        for q in right.elements:
            values[pair_id(p, q)] = ch.tensor(left_functor.values[p], right_functor.values[q])
    for a, b in base.hasse:
        (p, q), (p2, q2) = base.pairs[a], base.pairs[b]
        if q == q2:
            edges[(a, b)] = ch.tensor_maps(left_functor.edge(p, p2), identity_map(right_functor.values[q]))
        else:
            edges[(a, b)] = ch.tensor_maps(identity_map(left_functor.values[p]), right_functor.edge(q, q2))
    carrier = PFunctor(base, left_functor.field, values, edges, check=False, name=name or 'ext')
    return Kernel(left, right, carrier, name or 'ext')


def with_tail(kernel, p, q, tail):
    """在 (p,q) 处追加一个纯尾部"""
    element = pair_id(p, q)
    tails = dict(kernel.carrier.tails)
    tails[element] = sum_tails([tails[element], tail]) if element in tails else tail
    carrier = kernel.carrier
    updated = PFunctor(carrier.base, carrier.field, carrier.values, carrier.edges, tails=tails,
                       check=False, name=carrier.name)
    return Kernel(kernel.left, kernel.right, updated, kernel.name)


def column(kernel, p):
    """K|_{{p}×Q}：q ↦ K(p,q)"""
    if p not in kernel.left:
        raise UnknownElement(p, f"核 {kernel.name} 的左偏序")
    f = MonotoneMap(kernel.right, kernel.carrier.base, {q: pair_id(p, q) for q in kernel.right.elements},
                    f'col{p}')
    result = pullback(kernel.carrier, f)
    result.name = f'{kernel.name}(p={p})'
    return result


def row(kernel, q):
    """P^op 上的函子 p ↦ K(p,q)"""
    if q not in kernel.right:
        raise UnknownElement(q, f"核 {kernel.name} 的右偏序")
    f = MonotoneMap(opposite(kernel.left), kernel.carrier.base,
                    {p: pair_id(p, q) for p in kernel.left.elements}, f'row{q}')
    return pullback(kernel.carrier, f)


def _row_map(kernel, q, q2, rows):
    """K(−,q) → K(−,q′) 的自然变换（q ≤ q′）"""
    components = {p: kernel.carrier.map(pair_id(p, q), pair_id(p, q2)) for p in kernel.left.elements}
    return NatTrans(rows[q], rows[q2], components, check=False)


def convolution_totals(functor, kernel):
    if not functor.base.same_as(kernel.left):
        raise BaseMismatch(f"函子的底 {functor.base.name} 不是核的左偏序 {kernel.left.name}")
    if functor.field != kernel.field:
        raise BaseMismatch("函子与核的系数域不同")
    rows = {q: row(kernel, q) for q in kernel.right.elements}
    totals = ordered_map(lambda q: bar_total(rows[q], kernel.left, functor), kernel.right.elements)
    return rows, dict(zip(kernel.right.elements, totals))


def convolve(functor, kernel, prepared=None):
    """F ∗ K：Q 上的函子，q 处为 B(K(−,q), P, F)，q 方向的结构映射由 K 诱导"""
    rows, totals = prepared or convolution_totals(functor, kernel)
    same = identity_nat(functor)
    edges = {}
    for q, q2 in kernel.right.hasse:
        edges[(q, q2)] = bar_induced(_row_map(kernel, q, q2, rows), same, totals[q], totals[q2])
    tails = {}
    for q in kernel.right.elements:
        if rows[q].tails:
            tails[q] = bar_tail(rows[q], kernel.left, functor)
    values = {q: totals[q].complex for q in kernel.right.elements}
    logger.debug(f"卷积 {functor.name} ∗ {kernel.name} 完成")
    return PFunctor(kernel.right, functor.field, values, edges, tails=tails, check=False,
                    name=f'{functor.name}*{kernel.name}')


def unit_comparison(functor):
    """F ∗ id → F：在 0-链上取 F(p₀→q)，返回 (卷积结果, 比较自然变换)"""
    kernel = identity_kernel(functor.base, functor.field)
    prepared = convolution_totals(functor, kernel)
    result = convolve(functor, kernel, prepared)
    totals = prepared[1]
    components = {q: augmentation(totals[q], functor, q) for q in functor.base.elements}
    return result, NatTrans(result, functor, components, check=False)


def column_comparison(kernel, p):
    """y(p) ∗ K → column(K,p)：0-链 (p₀) 上取 K(p₀,q) → K(p,q)，返回 (卷积结果, 比较自然变换)"""
    generator = yoneda(kernel.left, p, kernel.field)
    target = column(kernel, p)
    prepared = convolution_totals(generator, kernel)
    result = convolve(generator, kernel, prepared)
    rows, totals = prepared
    components = {}
    for q in kernel.right.elements:
        total = totals[q]
        blocks = [(key, None, rows[q].map(key[0], p)) for key in total.order if len(key) == 1]
        components[q] = total.map_to(single(target.values[q]), blocks)
    return result, NatTrans(result, target, components, check=False)


def composition_totals(first, second):
    """K∘L 在每个 (p,r) 处的 bar 总复形，连同 K 的列与 L 的行"""
    if not first.right.same_as(second.left):
        raise BaseMismatch(f"核的中间偏序不一致: {first.right.name} 与 {second.left.name}")
    if first.has_tails() or second.has_tails():
        raise UnsupportedTail("带尾值的核暂不支持复合")
    if first.field != second.field:
        raise BaseMismatch("两个核的系数域不同")
    middle = first.right
    columns = {p: column(first, p) for p in first.left.elements}
    rows = {r: row(second, r) for r in second.right.elements}
    base = kernel_base(first.left, second.right)

    def build(element):
        p, r = base.pairs[element]
        return bar_total(rows[r], middle, columns[p])

    totals = dict(zip(base.elements, ordered_map(build, base.elements)))
    return columns, rows, totals


def compose_kernels(first, second, name='', prepared=None):
    """(K∘L)(p,r) = B(L(−,r), Q, K(p,−))"""
    columns, rows, totals = prepared or composition_totals(first, second)
    base = kernel_base(first.left, second.right)
    edges = {}
    for a, b in base.hasse:
        (p, r), (p2, r2) = base.pairs[a], base.pairs[b]
        if r == r2:
            # P 方向：K(p,−) → K(p′,−)，p′ ≤ p
            components = {q: first.carrier.map(pair_id(p, q), pair_id(p2, q)) for q in first.right.elements}
            column_map = NatTrans(columns[p], columns[p2], components, check=False)
            edges[(a, b)] = bar_induced(identity_nat(rows[r]), column_map, totals[a], totals[b])
        else:
            edges[(a, b)] = bar_induced(_row_map(second, r, r2, rows), identity_nat(columns[p]),
                                        totals[a], totals[b])
    values = {e: totals[e].complex for e in base.elements}
    carrier = PFunctor(base, first.field, values, edges, check=False, name=name or 'comp')
    return Kernel(first.left, second.right, carrier, name or f'{first.name}∘{second.name}')


def _rebracket(functor, inner, outer, middle, target_total, r):
    """(F∗K)∗L 与 F∗(K∘L) 在 r 处的同构：两端的块都是 L(q_m,r) ⊗ K(p_n,q₀) ⊗ F(p₀)"""
    field = functor.field
    k_rows, k_totals = inner
    l_rows, l_totals = outer
    source_total = l_totals[r]
    source, target = source_total.complex, target_total.complex
    comps = {t: field.zeros(target.dim(t), source.dim(t)) for t in source.dims}
    for tau in source_total.order:
        m = len(tau) - 1
        l_value = l_rows[r].values[tau[-1]]
        fk_total = k_totals[tau[0]]
        fk = fk_total.complex
        for sigma in fk_total.order:
            n = len(sigma) - 1
            k_value = k_rows[tau[0]].values[sigma[-1]]
            f_value = functor.values[sigma[0]]
            mid_total = middle[pair_id(sigma[-1], r)]
            for a in l_value.degrees:
                for b in k_value.degrees:
                    for c in f_value.degrees:
                        e, x = b + c - n, a + b - m
                        t = a + e - m
                        col0 = source_total.slot(tau, t) + ch.tensor_offset(l_value, fk, a, e) + \
                            fk_total.slot(sigma, e) + ch.tensor_offset(k_value, f_value, b, c)
                        row0 = target_total.slot(sigma, t) + ch.tensor_offset(mid_total.complex, f_value, x, c)
                        mid0 = mid_total.slot(tau, x) + ch.tensor_offset(l_value, k_value, a, b)
                        width = f_value.dim(c)
                        block = field.signed(field.identity(width), (-1) ** ((n * (a + m)) % 2))
                        for il in range(l_value.dim(a)):
                            for ik in range(k_value.dim(b)):
                                col = col0 + il * fk.dim(e) + ik * width
                                row = row0 + (mid0 + il * k_value.dim(b) + ik) * width
                                field.place(comps[t], row, col, block)
    return ch.ChainMap(source, target, comps)


def associator(functor, first, second):
    """(F∗K)∗L → F∗(K∘L)：逐块重新结合，块上乘 (−1)^{n(a+m)}

    n、m 为 P、Q 中严格链的长度，a 为 L 因子的内部度数。返回 (左端, 右端, 比较自然变换)。
    """
    inner = convolution_totals(functor, first)
    fk = convolve(functor, first, inner)
    outer = convolution_totals(fk, second)
    left = convolve(fk, second, outer)
    prepared = composition_totals(first, second)
    combined = compose_kernels(first, second, prepared=prepared)
    final = convolution_totals(functor, combined)
    right = convolve(functor, combined, final)
    components = {r: _rebracket(functor, inner, outer, prepared[2], final[1][r], r)
                  for r in second.right.elements}
    return left, right, NatTrans(left, right, components, check=False)


def euler_prediction(functor, kernel, q):
    """Σ_{σ} (−1)^n χ(F(p₀))·χ(K(p_n,q))，仅适用于有限取值的核"""
    total = 0
    for chain in kernel.left.chains:
        n = len(chain) - 1
        total += (-1) ** n * ch.euler_characteristic(functor.values[chain[0]]) * \
            ch.euler_characteristic(kernel.value(chain[-1], q))
    return total
