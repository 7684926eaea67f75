"""
错误类型
所有领域错误都继承 HcSketchError，exit_code 供 CLI 直接作为退出码使用
"""

from typing import Optional


class HcSketchError(Exception):
    """基础错误"""

    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.path = path

    def __str__(self) -> str:
        prefix = ""
        if self.path is not None:
            prefix = f"{self.path}:"
        if self.line is not None:
            prefix += f"{self.line}:"
        return f"{prefix} {self.message}" if prefix else self.message


# 输入格式 / 结构错误
class ParseError(HcSketchError):
    exit_code = 3


class DuplicateVertexInEdge(ParseError):
    """同一条边里出现重复顶点"""


class VertexIdOutOfRange(ParseError):
    """顶点编号超出 [0, 2^61-1)"""


class InvalidHypergraph(HcSketchError):
    exit_code = 3


class IsolatedVertex(InvalidHypergraph):
    """模式图中存在度为0的顶点"""


class UnknownPatternVertex(HcSketchError):
    exit_code = 3


class SizeMismatch(HcSketchError):
    """有向边长度与模式边长度不一致"""

    exit_code = 3


# 配置 / 合并不匹配
class ConfigMismatch(HcSketchError):
    exit_code = 4


class BasisMismatch(ConfigMismatch):
    """两个sketch的种子或模式不同，不能合并"""


class FingerprintMismatch(ConfigMismatch):
    pass


class VersionMismatch(ConfigMismatch):
    pass


class CorruptPayload(ConfigMismatch):
    pass


class InvalidEpsilon(ConfigMismatch):
    pass


class TooFewCopies(ConfigMismatch):
    pass


class LimitsConfigError(ConfigMismatch):
    """limits.json 配置文件错误"""


# 规模限制
class TooLarge(HcSketchError):
    exit_code = 5


class EdgeTooLarge(TooLarge):
    pass


class SizeLimit(TooLarge):
    """输入超出精确枚举的桌面规模"""
