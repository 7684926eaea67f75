"""
规模限制配置
从 config/limits.json 读取，文件缺失时使用内置默认值
"""

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .errors import LimitsConfigError


DEFAULT_LIMITS_PATH = Path(__file__).resolve().parents[2] / "config" / "limits.json"


@dataclass(frozen=True)
class Limits:
    max_pattern_vertices: int = 16
    max_edge_size: int = 8
    max_copies: int = 1_000_000
    exact_max_vertices: int = 12
    exact_max_edges: int = 40
    # 向量化更新时每批处理的边数
    chunk_edges: int = 4096
    # 网格化累加器保持精确求和的模长上界 (2^21)
    exact_sum_bound: int = 1 << 21

    def override(self, **kwargs) -> "Limits":
        """返回替换了非None字段的新Limits"""
        changes = {k: v for k, v in kwargs.items() if v is not None}
        for key, value in changes.items():
            _check_value(key, value)
        return _check_maxima(replace(self, **changes))


def _check_value(key: str, value) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise LimitsConfigError(f"{key} 必须是正整数: {value!r}")


def _check_maxima(limits: Limits) -> Limits:
    if limits.max_pattern_vertices > 16:
        raise LimitsConfigError("max_pattern_vertices 不能超过16 (τ = 2^t - 1 需要留出余量)")
    if limits.max_edge_size > 8:
        raise LimitsConfigError("max_edge_size 不能超过8 (每条边要枚举 ℓ! 个排列)")
    return limits


def load_limits(path: Optional[Path] = None) -> Limits:
    """读取并校验limits.json"""
    limits_path = Path(path) if path is not None else DEFAULT_LIMITS_PATH
    if not limits_path.exists():
        if path is not None:
            raise LimitsConfigError(f"配置文件不存在: {limits_path}")
        return Limits()

    try:
        data = json.loads(limits_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LimitsConfigError(f"无法解析配置文件 {limits_path}: {exc}") from exc
    if not isinstance(data, dict):
        raise LimitsConfigError(f"配置文件顶层必须是对象: {limits_path}")

    known = {f.name for f in fields(Limits)}
    for key, value in data.items():
        if key not in known:
            raise LimitsConfigError(f"未知配置项: {key}")
        _check_value(key, value)

    return _check_maxima(Limits(**data))
