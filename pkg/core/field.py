"""精确系数域

素域 𝔽_p 使用 galois 的有限域数组，有理数域 ℚ 使用存放 sympy.Rational 的 numpy object 数组。
两者对外暴露同一组矩阵操作，全部为精确运算，不出现浮点。
"""
import logging
from functools import lru_cache

import galois
import numpy as np
import sympy

from .errors import ShapeError, SheafError

logger = logging.getLogger(__name__)


class Field:
    """系数域的公共接口；矩阵一律为二维数组，形状为 (行, 列)"""

    name = ''
    characteristic = 0

    def __eq__(self, other):
        return isinstance(other, Field) and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"Field({self.name})"

    # ---------- 由子类实现 ----------
    def zeros(self, rows, cols):
        raise NotImplementedError

    def identity(self, n):
        raise NotImplementedError

    def element(self, value):
        raise NotImplementedError

    def parse_value(self, token):
        raise NotImplementedError

    def format_value(self, value):
        raise NotImplementedError

    def rank(self, matrix):
        raise NotImplementedError

    def kernel_basis(self, matrix):
        raise NotImplementedError

    def is_zero(self, matrix):
        raise NotImplementedError

    def from_entries(self, rows, cols, entries):
        raise NotImplementedError

    def entries(self, matrix):
        raise NotImplementedError

    def random_matrix(self, rows, cols, rng, density=0.5):
        raise NotImplementedError

    def scale(self, matrix, coefficient):
        raise NotImplementedError

    # ---------- 公共实现 ----------
    def check_shape(self, matrix, rows, cols, what='矩阵'):
        if tuple(matrix.shape) != (rows, cols):
            raise ShapeError(f"{what}形状应为 {rows}×{cols}，实际为 {matrix.shape[0]}×{matrix.shape[1]}")

    def matmul(self, left, right):
        if left.shape[1] != right.shape[0]:
            raise ShapeError(f"无法相乘: {left.shape} 与 {right.shape}")
        if 0 in (left.shape[0], left.shape[1], right.shape[1]):
            return self.zeros(left.shape[0], right.shape[1])
        return left @ right

    def compose(self, *matrices):
        """从右到左复合：compose(A, B, C) = A·B·C"""
        result = matrices[-1]
        for matrix in reversed(matrices[:-1]):
            result = self.matmul(matrix, result)
        return result

    def kron(self, left, right):
        ra, ca = left.shape
        rb, cb = right.shape
        if 0 in (ra, ca, rb, cb):
            return self.zeros(ra * rb, ca * cb)
        product = left[:, None, :, None] * right[None, :, None, :]
        return product.reshape(ra * rb, ca * cb)

    def equal(self, left, right):
        if tuple(left.shape) != tuple(right.shape):
            return False
        if left.size == 0:
            return True
        return self.is_zero(left - right)

    def signed(self, matrix, sign):
        return matrix if sign > 0 else -matrix

    def place(self, target, row, col, block):
        """把 block 累加到 target[row:, col:] 处（原地修改）"""
        h, w = block.shape
        if h == 0 or w == 0:
            return target
        target[row:row + h, col:col + w] = target[row:row + h, col:col + w] + block
        return target

    def hstack(self, blocks, rows):
        cols = sum(b.shape[1] for b in blocks)
        result = self.zeros(rows, cols)
        offset = 0
        for block in blocks:
            self.place(result, 0, offset, block)
            offset += block.shape[1]
        return result

    def vstack(self, blocks, cols):
        rows = sum(b.shape[0] for b in blocks)
        result = self.zeros(rows, cols)
        offset = 0
        for block in blocks:
            self.place(result, offset, 0, block)
            offset += block.shape[0]
        return result


class PrimeField(Field):
    def __init__(self, p):
        if not sympy.isprime(p):
            raise SheafError(f"{p} 不是素数")
        self.p = int(p)
        self.characteristic = self.p
        self.name = 'F2' if self.p == 2 else f'Fp:{self.p}'
        self.GF = galois.GF(self.p)

    def zeros(self, rows, cols):
        return self.GF.Zeros((rows, cols))

    def identity(self, n):
        return self.GF.Identity(n)

    def element(self, value):
        return self.GF(int(value) % self.p)

    def parse_value(self, token):
        if '/' in token:
            num, den = token.split('/', 1)
            den = int(den) % self.p
            if den == 0:
                raise ValueError(f"分母在 {self.name} 中为零")
            return (int(num) * pow(den, -1, self.p)) % self.p
        return int(token) % self.p

    def format_value(self, value):
        return str(int(value) % self.p)

    def rank(self, matrix):
        if matrix.size == 0 or self.is_zero(matrix):
            return 0
        return int(np.linalg.matrix_rank(matrix))

    def kernel_basis(self, matrix):
        rows, cols = matrix.shape
        if cols == 0:
            return self.zeros(0, 0)
        if rows == 0 or self.is_zero(matrix):
            return self.identity(cols)
        basis = matrix.null_space()
        if basis.shape[0] == 0:
            return self.zeros(cols, 0)
        return basis.T

    def is_zero(self, matrix):
        if matrix.size == 0:
            return True
        return not np.any(matrix.view(np.ndarray))

    def from_entries(self, rows, cols, entries):
        raw = np.zeros((rows, cols), dtype=np.int64)
        for r, c, value in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ShapeError(f"矩阵下标 ({r},{c}) 超出 {rows}×{cols}")
            raw[r, c] = int(value) % self.p
        return self.GF(raw)

    def entries(self, matrix):
        raw = matrix.view(np.ndarray)
        return [(int(r), int(c), int(raw[r, c])) for r, c in np.argwhere(raw != 0)]

    def random_matrix(self, rows, cols, rng, density=0.5):
        raw = np.zeros((rows, cols), dtype=np.int64)
        for r in range(rows):
            for c in range(cols):
                if rng.random() < density:
                    raw[r, c] = rng.randrange(1, self.p)
        return self.GF(raw)

    def scale(self, matrix, coefficient):
        return matrix * self.element(coefficient)


class RationalField(Field):
    name = 'Q'
    characteristic = 0

    def zeros(self, rows, cols):
        result = np.empty((rows, cols), dtype=object)
        result.fill(sympy.Integer(0))
        return result

    def identity(self, n):
        result = self.zeros(n, n)
        for i in range(n):
            result[i, i] = sympy.Integer(1)
        return result

    def element(self, value):
        return sympy.Rational(value)

    def parse_value(self, token):
        if '/' in token:
            num, den = token.split('/', 1)
            if int(den) == 0:
                raise ValueError("分母为零")
            return sympy.Rational(int(num), int(den))
        return sympy.Rational(int(token))

    def format_value(self, value):
        return str(sympy.Rational(value))

    def _to_sympy(self, matrix):
        return sympy.Matrix(matrix.shape[0], matrix.shape[1], list(matrix.flat))

    def rank(self, matrix):
        if matrix.size == 0 or self.is_zero(matrix):
            return 0
        return int(self._to_sympy(matrix).rank())

    def kernel_basis(self, matrix):
        rows, cols = matrix.shape
        if cols == 0:
            return self.zeros(0, 0)
        if rows == 0 or self.is_zero(matrix):
            return self.identity(cols)
        vectors = self._to_sympy(matrix).nullspace()
        result = self.zeros(cols, len(vectors))
        for j, vector in enumerate(vectors):
            for i in range(cols):
                result[i, j] = sympy.Rational(vector[i])
        return result

    def is_zero(self, matrix):
        return all(value == 0 for value in matrix.flat)

    def from_entries(self, rows, cols, entries):
        result = self.zeros(rows, cols)
        for r, c, value in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ShapeError(f"矩阵下标 ({r},{c}) 超出 {rows}×{cols}")
            result[r, c] = sympy.Rational(value)
        return result

    def entries(self, matrix):
        found = []
        rows, cols = matrix.shape
        for r in range(rows):
            for c in range(cols):
                if matrix[r, c] != 0:
                    found.append((r, c, sympy.Rational(matrix[r, c])))
        return found

    def random_matrix(self, rows, cols, rng, density=0.5):
        result = self.zeros(rows, cols)
        for r in range(rows):
            for c in range(cols):
                if rng.random() < density:
                    result[r, c] = sympy.Integer(rng.choice([-2, -1, 1, 2]))
        return result

    def scale(self, matrix, coefficient):
        factor = sympy.Rational(coefficient)
        result = self.zeros(*matrix.shape)
        for index, value in np.ndenumerate(matrix):
            result[index] = value * factor
        return result


@lru_cache(maxsize=None)
def get_field(name='F2'):
    """按名字取系数域：F2、Fp:<p>、Q；同名返回同一实例"""
    text = name.strip()
    if text == 'Q':
        return RationalField()
    if text == 'F2':
        return PrimeField(2)
    if text.startswith('Fp:'):
        try:
            p = int(text[3:])
        except ValueError:
            raise SheafError(f"无法识别的系数域: {name}") from None
        if p == 2:
            return get_field('F2')
        return PrimeField(p)
    raise SheafError(f"无法识别的系数域: {name}")
