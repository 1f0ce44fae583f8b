"""异常定义

所有领域异常都继承 SheafError，CLI 层统一捕获并转换为退出码 2。
"""


class SheafError(Exception):
    """领域异常基类"""


class CycleError(SheafError):
    """覆盖关系中存在经过不同元素的有向环"""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__(f"覆盖关系存在有向环: {' -> '.join(self.cycle)}")


class UnknownElement(SheafError):
    def __init__(self, element, where=''):
        self.element = element
        suffix = f"（{where}）" if where else ''
        super().__init__(f"未知元素: {element}{suffix}")


class NotMonotone(SheafError):
    """单调性被某条覆盖关系破坏"""

    def __init__(self, lower, upper, image_lower, image_upper):
        self.cover = (lower, upper)
        self.images = (image_lower, image_upper)
        super().__init__(
            f"映射不单调: {lower}<{upper} 被送到 {image_lower}, {image_upper}"
        )


class EmptyComplex(SheafError):
    """单纯复形没有任何面"""


class ShapeError(SheafError):
    """矩阵形状与维数不符"""


class NotDifferential(SheafError):
    def __init__(self, degree):
        self.degree = degree
        super().__init__(f"d∘d ≠ 0，出现在度数 {degree}")


class FieldMismatch(SheafError):
    def __init__(self, left, right):
        super().__init__(f"系数域不一致: {left} 与 {right}")


class NotFunctorial(SheafError):
    """两条覆盖路径的复合不相等；diamond 为 (p, r, q)"""

    def __init__(self, diamond):
        self.diamond = tuple(diamond)
        p, r, q = self.diamond
        super().__init__(f"函子性失败: 经 {r} 的路径 {p}→{r}→{q} 与规范路径不一致")


class NotNatural(SheafError):
    def __init__(self, cover):
        self.cover = tuple(cover)
        super().__init__(f"自然性方块不交换: {cover[0]}<{cover[1]}")


class BaseMismatch(SheafError):
    """两个对象的底偏序或系数域不一致"""


class NotCompact(SheafError):
    """要求紧对象的操作收到了非紧对象"""


class NotVerified(SheafError):
    """要求已验证的双反射，但映射未通过检查"""


class UnsupportedSystem(SheafError):
    """紧性见证只支持声明过的有向系统类"""


class StrideMismatch(SheafError):
    def __init__(self, left, right):
        super().__init__(f"尾值步长不一致: {left} 与 {right}")


class UnsupportedTail(SheafError):
    """带尾值的对象参与了 v1 不支持的运算"""


class ParseError(SheafError):
    """文本格式解析失败，携带文件名、行号与出错记号"""

    def __init__(self, message, path='<input>', line=0, token=''):
        self.path = path
        self.line = line
        self.token = token
        self.message = message
        super().__init__(f"{path}:{line}: 记号 '{token}': {message}")
