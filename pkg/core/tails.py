"""周期尾值：finite_part ⊕ ⊕_{i≥0} tail_base[anchor + i·stride]

第 i 个拷贝把 tail_base 的 n 度放到 n + anchor + i·stride 度。各拷贝的微分相同，
因此同调只需由一个切片计算。
"""
import logging

from .chain import BettiVector, direct_sum, homology, shift, tensor, zero_complex
from .errors import FieldMismatch, SheafError, StrideMismatch

logger = logging.getLogger(__name__)


class TailValue:
    def __init__(self, finite_part, tail_base, anchor=0, stride=1):
        if finite_part.field != tail_base.field:
            raise FieldMismatch(finite_part.field.name, tail_base.field.name)
        if int(stride) < 1:
            raise SheafError(f"尾值步长必须为正整数，收到 {stride}")
        self.finite_part = finite_part
        self.tail_base = tail_base
        self.anchor = int(anchor)
        self.stride = int(stride)

    @property
    def field(self):
        return self.finite_part.field

    def __repr__(self):
        return (f"TailValue(finite={self.finite_part.dims}, base={self.tail_base.dims}, "
                f"anchor={self.anchor}, stride={self.stride})")

    def copy_offset(self, i):
        return self.anchor + i * self.stride

    def is_finite(self):
        return self.tail_base.is_zero()


class TailBetti:
    """符号 Betti：有限部分加上等差族 {base 平移 anchor + i·stride}"""

    def __init__(self, finite, base, anchor, stride):
        self.finite = BettiVector(finite)
        self.base = BettiVector(base)
        self.anchor = anchor
        self.stride = stride

    def is_finite(self):
        return not self.base

    def at(self, n):
        value = self.finite.get(n, 0)
        for m, b in self.base.items():
            gap = n - m - self.anchor
            if gap >= 0 and gap % self.stride == 0:
                value += b
        return value

    def window(self, low, high):
        """[low, high] 内的实际 Betti"""
        return BettiVector({n: self.at(n) for n in range(low, high + 1)})

    def first_tail_degree(self):
        if not self.base:
            return None
        return min(self.base) + self.anchor

    def __eq__(self, other):
        if isinstance(other, TailBetti):
            return (self.finite, self.base, self.anchor, self.stride) == \
                (other.finite, other.base, other.anchor, other.stride)
        if isinstance(other, dict) and self.is_finite():
            return self.finite == other
        return NotImplemented

    def __str__(self):
        if self.is_finite():
            return str(self.finite)
        return f"{self.finite} + Σ_{{i≥0}} {self.base}[{self.anchor}+{self.stride}i]"

    __repr__ = __str__


def make_tail(tail_base, anchor=0, stride=1, finite_part=None):
    finite_part = finite_part if finite_part is not None else zero_complex(tail_base.field)
    return TailValue(finite_part, tail_base, anchor, stride)


def tail_betti(tail):
    return TailBetti(homology(tail.finite_part), homology(tail.tail_base), tail.anchor, tail.stride)


def tail_is_perfect(tail):
    """完美 ⟺ tail_base 无环"""
    return not homology(tail.tail_base)


def truncate(tail, copies):
    """只保留前 copies 个尾部拷贝，得到普通复形"""
    parts = [tail.finite_part]
    parts += [shift(tail.tail_base, -tail.copy_offset(i)) for i in range(copies)]
    return direct_sum(*parts)


def stable_below(tail, copies):
    """截断到 copies 个拷贝后，低于该度数的同调与符号 Betti 一致"""
    if tail.tail_base.is_zero():
        return None
    return tail.copy_offset(copies) + min(tail.tail_base.degrees)


def tail_tensor(tail, complex_):
    """T ⊗ C：有限部分与每个拷贝分别张量"""
    return TailValue(tensor(tail.finite_part, complex_), tensor(tail.tail_base, complex_),
                     tail.anchor, tail.stride)


def tail_add_finite(tail, complex_):
    return TailValue(direct_sum(tail.finite_part, complex_), tail.tail_base, tail.anchor, tail.stride)


def tail_sum(left, right):
    """同步长的两个尾值之和；锚点取较小者，另一基底相应平移"""
    if left.stride != right.stride:
        raise StrideMismatch(left.stride, right.stride)
    anchor = min(left.anchor, right.anchor)
    base = direct_sum(shift(left.tail_base, -(left.anchor - anchor)),
                      shift(right.tail_base, -(right.anchor - anchor)))
    return TailValue(direct_sum(left.finite_part, right.finite_part), base, anchor, left.stride)


def sum_tails(tails):
    """把若干尾值合成一个；空列表返回 None"""
    result = None
    for tail in tails:
        result = tail if result is None else tail_sum(result, tail)
    return result


def value_betti(value):
    """Complex 或 TailValue 的 Betti（后者为符号形式）"""
    if isinstance(value, TailValue):
        return tail_betti(value)
    return homology(value)


def value_is_perfect(value):
    if isinstance(value, TailValue):
        return tail_is_perfect(value)
    return True


def slice_betti(tail, copies=3):
    """由截断复形直接计算的 Betti，用作符号 Betti 的独立校验"""
    return homology(truncate(tail, copies))


def slice_window(tail, low, high):
    """截断到足够多的拷贝后直接计算 [low, high] 内的 Betti"""
    copies = 0
    if not tail.tail_base.is_zero():
        while stable_below(tail, copies) <= high:
            copies += 1
    betti = slice_betti(tail, copies)
    return BettiVector({n: v for n, v in betti.items() if low <= n <= high})
