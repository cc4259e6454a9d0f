"""异常定义

core 层只抛异常、不打印；client 层负责把异常翻译成退出码与提示信息。
"""
from typing import Optional, Sequence


class SindyCryptError(Exception):
    """所有领域异常的基类"""


class InvalidParameterError(SindyCryptError, ValueError):
    """参数不合法 (非有限值、越界、长度不一致等)"""


class DivergenceError(SindyCryptError, ArithmeticError):
    """迭代发散：某个坐标非有限或超过阈值

    Attributes:
        step: 发散发生的迭代步 (从 1 开始计数)
        state: 发散前的最后一个有限状态
    """

    def __init__(self, message: str, step: Optional[int] = None,
                 state: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.step = step
        self.state = tuple(state) if state is not None else None


class UnderdeterminedError(InvalidParameterError):
    """样本数不足以支撑候选库的列数"""

    def __init__(self, rows: int, columns: int):
        super().__init__(f"样本不足: {rows} 行 < {columns} 列，回归欠定")
        self.rows = rows
        self.columns = columns


class DegenerateRegressionError(SindyCryptError, ArithmeticError):
    """活动集列秩亏损"""

    def __init__(self, columns: Sequence[str]):
        names = ", ".join(columns)
        super().__init__(f"活动集秩亏损，线性相关的列: {names}")
        self.columns = tuple(columns)


class EmptyModelError(SindyCryptError, ArithmeticError):
    """阈值化后所有系数都被剪除"""


class IdentificationError(SindyCryptError, RuntimeError):
    """某个坐标没有任何可用的候选左端项"""

    def __init__(self, coordinate: str, causes: Sequence[str] = ()):
        detail = "; ".join(causes) if causes else "无候选"
        super().__init__(f"坐标 {coordinate}' 辨识失败: {detail}")
        self.coordinate = coordinate
        self.causes = tuple(causes)


class KeyUnusableError(SindyCryptError, RuntimeError):
    """密钥导致映射发散，无法生成密钥流"""


class InvalidPermutationError(InvalidParameterError):
    """索引向量不是双射"""


class FormatError(SindyCryptError, ValueError):
    """文件格式错误

    Attributes:
        path: 出错文件 (可能为空，例如解析内存中的字节)
        offset: 出错位置 (字节偏移或行号，取决于格式)
    """

    def __init__(self, message: str, path: Optional[str] = None,
                 offset: Optional[int] = None):
        where = []
        if path:
            where.append(str(path))
        if offset is not None:
            where.append(f"@{offset}")
        prefix = f"[{' '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.detail = message
        self.path = path
        self.offset = offset


class UndefinedCorrelationError(SindyCryptError, ArithmeticError):
    """方差为零时相关系数无定义"""


class SweepError(SindyCryptError, RuntimeError):
    """扫描中某个网格点失败，携带该点的取值"""

    def __init__(self, value: object, cause: Exception):
        super().__init__(f"扫描点 {value} 失败: {cause}")
        self.value = value
        self.cause = cause
