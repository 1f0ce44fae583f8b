"""样本生成服务：随机偏序、随机函子与核、标准例子，以及不依赖 bar/cobar 的独立预言机"""
import logging
import string

from core import chain as ch
from core.chain import ChainMap, Complex
from core.funcat import NatTrans, PFunctor, cone_nat, direct_sum, down_set_functor
from core.kernel import Kernel, kernel_base
from core.poset import build_poset, collapse, face_poset, monotone_map, point_poset

logger = logging.getLogger(__name__)

BOUNDARY_TRIANGLE = [['1', '2'], ['2', '3'], ['1', '3']]
HEXAGON = [['1', '4'], ['4', '2'], ['2', '5'], ['5', '3'], ['3', '6'], ['6', '1']]
# 顶点 1/2、3/4、5/6 两两相对
OCTAHEDRON = [[a, b, c] for a in '12' for b in '34' for c in '56']


def boundary_triangle():
    return face_poset(BOUNDARY_TRIANGLE, 'circle')


def hexagon():
    return face_poset(HEXAGON, 'hexagon')


def octahedron():
    return face_poset(OCTAHEDRON, 'octahedron')


def two_chain():
    return build_poset(['a', 'b'], [('a', 'b')], 'chain2')


def square():
    return build_poset(['a', 'b', 'c', 'd'], [('a', 'b'), ('a', 'c'), ('b', 'd'), ('c', 'd')], 'square')


def coarsening_map():
    """六边形 → 三角形：每个细分胞腔送到包含其内部的粗胞腔"""
    fine, coarse = hexagon(), boundary_triangle()
    midpoint = {'4': '1-2', '5': '2-3', '6': '1-3'}
    assignment = {}
    for element in fine.elements:
        vertices = element.split('-')
        if len(vertices) == 1:
            assignment[element] = midpoint.get(element, element)
        else:
            # 半边恰含一个中点，送到该中点所在的粗边
            assignment[element] = next(midpoint[v] for v in vertices if v in midpoint)
    return monotone_map(fine, coarse, assignment, 'coarsen')


def point_collapse(poset):
    return monotone_map(poset, point_poset(), collapse(poset).assignment, 'collapse')


# ---------- 随机对象 ----------

def random_poset(rng, size, density=0.4, name='R'):
    """按声明顺序只加向后的边，保证无环；冗余覆盖由 build_poset 修复"""
    elements = list(string.ascii_lowercase[:size])
    covers = [(a, b) for i, a in enumerate(elements) for b in elements[i + 1:] if rng.random() < density]
    return build_poset(elements, covers, name)


def _projective_sum(poset, field, generators):
    """⊕ y(p)[−n]：generators 为 (p, n) 列表，值为零微分复形"""
    values, edges = {}, {}
    present = {q: [i for i, (p, _) in enumerate(generators) if poset.leq(p, q)] for q in poset.elements}

    def dims_at(q):
        dims = {}
        for i in present[q]:
            n = generators[i][1]
            dims[n] = dims.get(n, 0) + 1
        return dims

    def position(q, i):
        n = generators[i][1]
        return [j for j in present[q] if generators[j][1] == n].index(i)

    for q in poset.elements:
        values[q] = Complex(field, dims_at(q))
    for a, b in poset.hasse:
        comps = {}
        for n, dim in values[a].dims.items():
            entries = [(position(b, i), position(a, i), 1) for i in present[a] if generators[i][1] == n]
            comps[n] = field.from_entries(values[b].dim(n), dim, entries)
        edges[(a, b)] = ChainMap(values[a], values[b], comps, check=False)
    return PFunctor(poset, field, values, edges, check=False, name='proj'), present, position


def random_nat(rng, poset, field, sources, targets):
    """投射和之间的随机自然变换：y(p) → y(p′) 仅当 p′ ≤ p 且度数相同"""
    source, source_present, source_pos = _projective_sum(poset, field, sources)
    target, target_present, target_pos = _projective_sum(poset, field, targets)
    scalars = {}
    for i, (p, n) in enumerate(sources):
        for j, (p2, n2) in enumerate(targets):
            if n == n2 and poset.leq(p2, p) and rng.random() < 0.7:
                scalars[(i, j)] = rng.randrange(1, max(field.characteristic, 4))
    components = {}
    for q in poset.elements:
        comps = {}
        for n in source.values[q].dims:
            entries = [(target_pos(q, j), source_pos(q, i), c) for (i, j), c in scalars.items()
                       if sources[i][1] == n and i in source_present[q]]
            comps[n] = field.from_entries(target.values[q].dim(n), source.values[q].dim(n), entries)
        components[q] = ChainMap(source.values[q], target.values[q], comps, check=False)
    return NatTrans(source, target, components)


def random_functor(rng, poset, field, max_generators=3, degrees=(0, 1), with_down_sets=True):
    """随机紧对象：投射和之间随机自然变换的锥，可再加一个下集函子"""
    def generators():
        count = rng.randint(0, max_generators)
        return [(rng.choice(poset.elements), rng.choice(degrees)) for _ in range(count)]

    functor = cone_nat(random_nat(rng, poset, field, generators(), generators()))
    if with_down_sets and rng.random() < 0.3:
        functor = direct_sum(functor, down_set_functor(poset, rng.choice(poset.elements), field))
    return functor


def random_kernel(rng, left, right, field, max_generators=3):
    carrier = random_functor(rng, kernel_base(left, right), field, max_generators, with_down_sets=False)
    return Kernel(left, right, carrier, 'random')


# ---------- 独立预言机 ----------

def simplicial_betti(simplices, field):
    """单纯同调的直接计算：simplices 为顶点元组的集合（须对取面封闭）"""
    by_dim = {}
    for simplex in simplices:
        by_dim.setdefault(len(simplex) - 1, []).append(tuple(simplex))
    for faces in by_dim.values():
        faces.sort()
    index = {d: {s: i for i, s in enumerate(faces)} for d, faces in by_dim.items()}
    ranks = {}
    for d, faces in by_dim.items():
        if d == 0:
            continue
        entries = []
        for col, simplex in enumerate(faces):
            for i in range(len(simplex)):
                face = simplex[:i] + simplex[i + 1:]
                entries.append((index[d - 1][face], col, (-1) ** i))
        boundary = field.from_entries(len(by_dim[d - 1]), len(faces), entries)
        ranks[d] = field.rank(boundary)
    return ch.BettiVector({d: len(faces) - ranks.get(d, 0) - ranks.get(d + 1, 0)
                           for d, faces in by_dim.items()})


def closure_of(facets):
    simplices = set()
    for facet in facets:
        vertices = tuple(sorted(facet))
        count = len(vertices)
        for mask in range(1, 2 ** count):
            simplices.add(tuple(v for k, v in enumerate(vertices) if mask >> k & 1))
    return simplices


def nerve_betti(poset, field):
    """序复形（严格链）的单纯同调"""
    return simplicial_betti([tuple(poset.index[p] for p in chain) for chain in poset.chains], field)


def natural_hom_betti(source, target, degree=0):
    """朴素 Hom 复形 Nat(F, G) 在给定度数的同调维数（F 为投射胞腔对象时等于导出 Hom）"""
    field = source.field
    base = source.base

    def naturality(n):
        # 自然性方程：G(a→b)∘φ_a − φ_b∘F(a→b) = 0
        homs = [ch.hom_complex(source.values[p], target.values[p]) for p in base.elements]
        offsets, cursor = {}, 0
        for p, hom in zip(base.elements, homs):
            offsets[p] = cursor
            cursor += hom.dim(n)
        rows = []
        for a, b in base.hasse:
            post = ch.hom_map(ch.identity_map(source.values[a]), target.edge(a, b))
            pre = ch.hom_map(source.edge(a, b), ch.identity_map(target.values[b]))
            width = ch.hom_complex(source.values[a], target.values[b]).dim(n)
            block = field.zeros(width, cursor)
            field.place(block, 0, offsets[a], post.component(n))
            field.place(block, 0, offsets[b], -pre.component(n))
            rows.append(block)
        constraint = field.vstack(rows, cursor) if rows else field.zeros(0, cursor)
        differential = field.zeros(sum(h.dim(n + 1) for h in homs), cursor)
        row = 0
        for p, hom in zip(base.elements, homs):
            field.place(differential, row, offsets[p], hom.diff(n))
            row += hom.dim(n + 1)
        return field.kernel_basis(constraint), differential

    cycles_space, d_here = naturality(degree)
    before, d_before = naturality(degree - 1)
    if cycles_space.shape[1] == 0:
        return 0
    kernel_dim = cycles_space.shape[1] - field.rank(field.matmul(d_here, cycles_space))
    image_dim = field.rank(field.matmul(d_before, before)) if before.shape[1] else 0
    return kernel_dim - image_dim

