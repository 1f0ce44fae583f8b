"""有限偏序集与单调映射

元素 id 为字符串，所有遍历都按声明顺序进行，下游矩阵的基因此是确定的。
可达闭包、环检测和传递约简交给 networkx。
"""
import logging
from functools import cached_property
from itertools import combinations

import networkx as nx

from .errors import CycleError, EmptyComplex, NotMonotone, SheafError, UnknownElement

logger = logging.getLogger(__name__)

# 元素 id 中不允许出现的字符（会与文本格式的分隔符冲突）
RESERVED_CHARS = set(' \t<>(),{};#')


class Poset:
    """已校验的有限偏序集；构造后不可变，请使用 build_poset 创建"""

    def __init__(self, name, elements, hasse, pairs=None):
        self.name = name
        self.elements = tuple(elements)
        self.hasse = tuple(hasse)
        self.index = {e: i for i, e in enumerate(self.elements)}
        # 乘积偏序的元素 → (左分量, 右分量)
        self.pairs = dict(pairs or {})
        graph = nx.DiGraph()
        graph.add_nodes_from(self.elements)
        graph.add_edges_from(self.hasse)
        self._graph = graph
        self._above = {e: frozenset(nx.descendants(graph, e)) | {e} for e in self.elements}
        self._upper_covers = {e: [] for e in self.elements}
        self._lower_covers = {e: [] for e in self.elements}
        for lower, upper in self.hasse:
            self._upper_covers[lower].append(upper)
            self._lower_covers[upper].append(lower)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, element):
        return element in self.index

    def __repr__(self):
        return f"Poset({self.name}, {len(self.elements)} 个元素, {len(self.hasse)} 条覆盖)"

    def same_as(self, other):
        return self.elements == other.elements and set(self.hasse) == set(other.hasse)

    def check(self, element, where=''):
        if element not in self.index:
            raise UnknownElement(element, where or self.name)
        return element

    def leq(self, p, q):
        return q in self._above[p]

    def less(self, p, q):
        return p != q and q in self._above[p]

    def up(self, p):
        """{q : p ≤ q}，按声明顺序"""
        above = self._above[self.check(p)]
        return [q for q in self.elements if q in above]

    def down(self, p):
        self.check(p)
        return [q for q in self.elements if p in self._above[q]]

    def upper_covers(self, p):
        return list(self._upper_covers[p])

    def lower_covers(self, p):
        return list(self._lower_covers[p])

    def minimal(self):
        return [e for e in self.elements if not self._lower_covers[e]]

    def maximal(self):
        return [e for e in self.elements if not self._upper_covers[e]]

    def closure(self):
        """自反传递闭包，返回 (p, q) 对的集合"""
        return {(p, q) for p in self.elements for q in self._above[p]}

    @cached_property
    def chains(self):
        """全部严格链 p₀<…<p_n，按声明顺序的字典序：(a,) < (a,b) < (b,)"""
        result = []

        def extend(chain):
            result.append(chain)
            last = chain[-1]
            for q in self.elements:
                if self.less(last, q):
                    extend(chain + (q,))

        for p in self.elements:
            extend((p,))
        return tuple(result)

    def strict_chains(self, length=None):
        """length 为 None 时返回全部严格链，否则只返回 n = length 的链"""
        if length is None:
            return list(self.chains)
        return [c for c in self.chains if len(c) == length + 1]

    @property
    def height(self):
        return max(len(c) for c in self.chains) - 1 if self.elements else -1


def _check_id(element, where):
    if not element or RESERVED_CHARS & set(element):
        raise SheafError(f"非法元素 id '{element}'（{where}）")


def build_poset(elements, hasse, name='P', pairs=None, check_ids=True):
    """校验并构造偏序；冗余覆盖被删除并记录日志"""
    elements = list(elements)
    seen = set()
    for element in elements:
        if element in seen:
            raise SheafError(f"元素 id 重复: {element}")
        if check_ids and not pairs:
            _check_id(element, name)
        seen.add(element)
    covers = []
    for lower, upper in hasse:
        for element in (lower, upper):
            if element not in seen:
                raise UnknownElement(element, name)
        if lower == upper:
            logger.warning(f"偏序 {name}: 忽略自环覆盖 {lower}<{upper}")
            continue
        if (lower, upper) not in covers:
            covers.append((lower, upper))
    graph = nx.DiGraph()
    graph.add_nodes_from(elements)
    graph.add_edges_from(covers)
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        raise CycleError([edge[0] for edge in cycle] + [cycle[0][0]])
    reduced = nx.transitive_reduction(graph)
    kept = [pair for pair in covers if reduced.has_edge(*pair)]
    if len(kept) < len(covers):
        dropped = [f"{a}<{b}" for a, b in covers if not reduced.has_edge(a, b)]
        logger.warning(f"偏序 {name}: 删除被蕴含的冗余覆盖 {', '.join(dropped)}")
    return Poset(name, elements, kept, pairs)


def point_poset(name='pt', element='*'):
    return build_poset([element], [], name)


def chain_poset(length, name=None):
    """0 < 1 < … < length−1"""
    elements = [str(i) for i in range(length)]
    return build_poset(elements, list(zip(elements, elements[1:])), name or f'chain{length}')


def _vertex_key(vertex):
    return (0, int(vertex), '') if vertex.isdigit() else (1, 0, vertex)


def simplex_id(vertices):
    return '-'.join(vertices)


def face_poset(facets, name='faces'):
    """抽象单纯复形的面偏序：非空单形按面包含排序，先按维数、再按顶点字典序"""
    simplices = set()
    for facet in facets:
        vertices = tuple(sorted({str(v) for v in facet}, key=_vertex_key))
        for size in range(1, len(vertices) + 1):
            simplices.update(combinations(vertices, size))
    if not simplices:
        raise EmptyComplex("单纯复形没有非空面")
    ordered = sorted(simplices, key=lambda s: (len(s), [_vertex_key(v) for v in s]))
    members = set(ordered)
    covers = []
    for simplex in ordered:
        for i in range(len(simplex)):
            face = simplex[:i] + simplex[i + 1:]
            if face in members:
                covers.append((simplex_id(face), simplex_id(simplex)))
    rank = {simplex_id(s): i for i, s in enumerate(ordered)}
    covers.sort(key=lambda c: (rank[c[0]], rank[c[1]]))
    return build_poset([simplex_id(s) for s in ordered], covers, name)


def opposite(poset):
    name = poset.name[:-3] if poset.name.endswith('^op') else f'{poset.name}^op'
    return Poset(name, poset.elements, [(b, a) for a, b in poset.hasse], poset.pairs)


def pair_id(left, right):
    return f'({left},{right})'


def product(left, right, name=None):
    """分量序乘积；元素 id 为 (p,q)，先遍历左因子"""
    elements, pairs = [], {}
    for p in left.elements:
        for q in right.elements:
            element = pair_id(p, q)
            elements.append(element)
            pairs[element] = (p, q)
    covers = []
    for p in left.elements:
        for q in right.elements:
            for q2 in right.upper_covers(q):
                covers.append((pair_id(p, q), pair_id(p, q2)))
            for p2 in left.upper_covers(p):
                covers.append((pair_id(p, q), pair_id(p2, q)))
    rank = {e: i for i, e in enumerate(elements)}
    covers.sort(key=lambda c: (rank[c[0]], rank[c[1]]))
    return Poset(name or f'{left.name}x{right.name}', elements, covers, pairs)


def induced(poset, subset, name=None):
    """诱导子偏序；覆盖关系取限制后序的 Hasse 图"""
    members = set(subset)
    for element in members:
        poset.check(element)
    elements = [e for e in poset.elements if e in members]
    covers = []
    for a in elements:
        for b in elements:
            if poset.less(a, b) and not any(
                    poset.less(a, c) and poset.less(c, b) for c in elements):
                covers.append((a, b))
    pairs = {e: poset.pairs[e] for e in elements if e in poset.pairs}
    return Poset(name or f'{poset.name}|sub', elements, covers, pairs)


def up_set(poset, p):
    """P_{p/} = {q : p ≤ q}，连同它到 P 的嵌入"""
    sub = induced(poset, poset.up(p), f'{poset.name}_{{{p}/}}')
    return sub, inclusion(sub, poset)


def down_set(poset, p):
    sub = induced(poset, poset.down(p), f'{poset.name}_{{/{p}}}')
    return sub, inclusion(sub, poset)


class MonotoneMap:
    """单调映射 source → target"""

    def __init__(self, source, target, assignment, name=''):
        self.source = source
        self.target = target
        self.assignment = dict(assignment)
        self.name = name

    def __call__(self, p):
        return self.assignment[p]

    def preimage(self, q):
        return [p for p in self.source.elements if self.assignment[p] == q]

    def is_identity(self):
        return self.source.same_as(self.target) and all(p == q for p, q in self.assignment.items())


def monotone_map(source, target, assignment, name=''):
    """校验全域性与单调性（只需检查覆盖关系）"""
    for p in source.elements:
        if p not in assignment:
            raise UnknownElement(p, f"映射 {name or '?'} 未定义该元素的像")
        target.check(assignment[p], f"映射 {name or '?'} 的像")
    for p in assignment:
        source.check(p, f"映射 {name or '?'} 的定义域")
    for lower, upper in source.hasse:
        a, b = assignment[lower], assignment[upper]
        if not target.leq(a, b):
            raise NotMonotone(lower, upper, a, b)
    return MonotoneMap(source, target, assignment, name)


def identity(poset):
    return MonotoneMap(poset, poset, {p: p for p in poset.elements}, 'id')


def inclusion(sub, poset):
    return MonotoneMap(sub, poset, {p: p for p in sub.elements}, 'incl')


def collapse(poset, point=None):
    point = point or point_poset()
    return MonotoneMap(poset, point, {p: point.elements[0] for p in poset.elements}, 'collapse')