"""
异常定义

所有领域异常都继承 BcnError（不继承 ValueError），这样在 pydantic 校验器里抛出时
会原样冒泡，而不是被包装成 ValidationError。
"""


class BcnError(Exception):
    """bcnq 异常基类"""


class DimensionMismatch(BcnError):
    """矩阵维度不匹配"""


class IndexOutOfRange(BcnError, IndexError):
    """状态 / 输入 / 规范向量下标越界（下标从 1 开始）"""


class RankDeficient(BcnError):
    """逻辑矩阵不是满行秩（存在全零行）"""


class InvalidPartition(BcnError):
    """块不互斥、不覆盖全集或含空块"""


class PreconditionError(BcnError):
    """调用前提不满足"""


class MalformedTable(BcnError):
    """真值表行数或取值不合法"""


class CongruenceViolation(BcnError):
    """划分不满足同余条件：同一块内两个状态在某个输入下的后继落在不同块"""

    def __init__(self, u: int, a: int, b: int):
        self.u = u
        self.a = a
        self.b = b
        super().__init__(
            f"划分不是同余的: 输入 u={u} 下状态 {a} 与 {b} 同块, 但后继分属不同块 (请先执行 refine)"
        )

    @property
    def witness(self) -> tuple[int, int, int]:
        return (self.u, self.a, self.b)


class IllDefinedCost(BcnError):
    """某个等价类内代价取值不唯一，商代价无法定义"""

    def __init__(self, class_index: int, u: int | None):
        self.class_index = class_index
        self.u = u
        where = "终端代价 g" if u is None else f"输入 u={u} 的阶段代价 l"
        super().__init__(f"等价类 {class_index} 内{where}取值不一致")


class FormatError(BcnError):
    """文件解析失败，带文件名与行号（从 1 开始）"""

    def __init__(self, message: str, source: str = "<string>", line: int | None = None):
        self.source = source
        self.line = line
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")
