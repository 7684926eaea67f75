"""
估计器组模块
功能：s 个种子不同的独立副本 (seed_base + index)，取平均（可选中位数-均值）输出估计，
根据 ε 推荐副本数，支持按副本合并与文件读写

所有副本的累加器放在一个 (s, k) 复数数组里，更新按边长度分组后在副本维度上向量化，
结果与 s 个单独 Sketch 逐边更新逐位一致
"""

import logging
import struct
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Dict, Iterable, List, Optional

import numpy as np

from .config import Limits
from .errors import (
    BasisMismatch,
    ConfigMismatch,
    CorruptPayload,
    EdgeTooLarge,
    FingerprintMismatch,
    InvalidEpsilon,
    TooFewCopies,
    VersionMismatch,
)
from .hashing import MASK64, BasisStack, derive_basis_stack, seeds_for
from .pattern import PatternProfile
from .sketch import (
    Sketch,
    StreamEdge,
    orientation_order,
    payload_size,
    read_payload,
    root_table,
    serialize,
    warn_if_inexact,
)


logger = logging.getLogger(__name__)

# 使 Chebyshev 失败概率 <= 1/3 的常数
COPIES_CONSTANT = 3
# 每个向量化步骤中 (副本 × 边 × 顶点) 元素数的上限
ELEMENT_LIMIT = 1 << 22

BANK_MAGIC = b"HCBK"
BANK_VERSION = 1
_BANK_HEADER = struct.Struct("<4sH32sQII")


class EstimatorBank:
    """s 个独立估计副本"""

    def __init__(
        self,
        profile: PatternProfile,
        copies: int,
        seed_base: int = 0,
        limits: Optional[Limits] = None,
        stack: Optional[BasisStack] = None,
    ):
        if copies < 1:
            raise ConfigMismatch(f"副本数必须 >= 1: {copies}")
        if not 0 <= seed_base <= MASK64:
            raise ConfigMismatch(f"seed_base 必须在 [0, 2^64) 内: {seed_base}")
        self.profile = profile
        self.s = copies
        self.seed_base = seed_base
        self.limits = limits or Limits()
        self.stack = stack if stack is not None else derive_basis_stack(profile, seeds_for(seed_base, copies))
        self.accumulators = np.zeros((copies, profile.k), dtype=np.complex128)
        self.processed = np.zeros(copies, dtype=np.int64)
        # 副本对象按需构建（标量随机基的展开较慢）
        self._copies: Dict[int, Sketch] = {}

    def copy_at(self, i: int) -> Sketch:
        """第 i 个副本，累加器是本对象数组的视图"""
        if i not in self._copies:
            self._copies[i] = Sketch(
                self.profile,
                self.stack.basis(i, self.profile),
                accumulators=self.accumulators[i],
                processed=self.processed[i:i + 1],
                limits=self.limits,
            )
        return self._copies[i]

    @property
    def copies(self) -> List[Sketch]:
        return [self.copy_at(i) for i in range(self.s)]

    @property
    def edges_processed(self) -> int:
        return int(self.processed[0])

    def same_config(self, other: "EstimatorBank") -> bool:
        return (
            self.profile.fingerprint == other.profile.fingerprint
            and self.seed_base == other.seed_base
            and self.s == other.s
        )

    def empty_like(self) -> "EstimatorBank":
        return EstimatorBank(self.profile, self.s, self.seed_base, self.limits, stack=self.stack)

    def __repr__(self) -> str:
        return f"EstimatorBank(s={self.s}, seed_base={self.seed_base}, edges={self.edges_processed})"


# ---------------------------------------------------------------------------
# 更新
# ---------------------------------------------------------------------------

def _apply_group(b: EstimatorBank, size: int, vertices: np.ndarray, signs: np.ndarray) -> None:
    """
    同一长度的一批边
    Args:
        vertices: (n, ℓ) uint64
        signs: (n,) int64
    """
    profile = b.profile
    targets = profile.edges_of_size(size)
    if targets:
        n = vertices.shape[0]
        D = profile.exponent_modulus
        L = profile.degree_lcm
        keys = vertices.reshape(-1)
        y = b.stack.y_values(keys).reshape(b.s, n, size)
        q = b.stack.q_exponents[:, None, None]
        degrees = profile.indexed_degrees
        parts: Dict[int, np.ndarray] = {}
        table = root_table(D)
        weights = signs.astype(np.float64)[None, :]
        for j in targets:
            pattern_edge = profile.indexed_edges[j]
            for c in pattern_edge:
                if c not in parts:
                    x = b.stack.x_exponents(c, keys).reshape(b.s, n, size)
                    parts[c] = (x * (D // degrees[c]) + q * y * (L // degrees[c])) % D
            total = np.zeros(b.s, dtype=np.complex128)
            for order in orientation_order(size):
                exponents = parts[pattern_edge[0]][:, :, order[0]].copy()
                for i in range(1, size):
                    exponents += parts[pattern_edge[i]][:, :, order[i]]
                terms = table.lookup(exponents % D)
                total += (terms * weights).sum(axis=1)
            b.accumulators[:, j] += total
    b.processed += int(signs.sum())


def bank_update_many(b: EstimatorBank, edges: Iterable[StreamEdge]) -> int:
    """
    批量更新，按边长度分组、按块向量化
    Returns:
        处理的边数
    """
    groups: Dict[int, List[StreamEdge]] = {}
    count = 0
    for e in edges:
        if e.size > b.limits.max_edge_size:
            raise EdgeTooLarge(f"边长度 {e.size} 超过上限 {b.limits.max_edge_size}")
        groups.setdefault(e.size, []).append(e)
        count += 1
    for size, group in sorted(groups.items()):
        chunk = max(1, min(b.limits.chunk_edges, ELEMENT_LIMIT // (b.s * size)))
        for start in range(0, len(group), chunk):
            block = group[start:start + chunk]
            vertices = np.array([e.vertices for e in block], dtype=np.uint64)
            signs = np.array([e.sign for e in block], dtype=np.int64)
            _apply_group(b, size, vertices, signs)
    if count:
        warn_if_inexact(b.accumulators, b.limits)
    return count


def bank_update(b: EstimatorBank, e: StreamEdge) -> None:
    """把一条边应用到每个副本"""
    bank_update_many(b, [e])


# ---------------------------------------------------------------------------
# 查询
# ---------------------------------------------------------------------------

def bank_query_values(b: EstimatorBank) -> np.ndarray:
    """每个副本的单独查询值 scale · Re(Π Z)"""
    product = b.accumulators[:, 0].copy()
    for j in range(1, b.profile.k):
        product = product * b.accumulators[:, j]
    return float(b.profile.scale) * product.real


def bank_estimate(b: EstimatorBank, groups: Optional[int] = None) -> float:
    """
    Z* = (1/s) Σ Z_i
    groups=r (>1) 时改为 r 组均值的中位数
    """
    values = bank_query_values(b)
    if groups is None or groups <= 1:
        return float(np.mean(values))
    if groups > b.s:
        raise ConfigMismatch(f"分组数 {groups} 大于副本数 {b.s}")
    means = [float(np.mean(chunk)) for chunk in np.array_split(values, groups)]
    return float(np.median(means))


def empirical_variance(b: EstimatorBank) -> float:
    """各副本查询值的无偏样本方差"""
    if b.s < 2:
        raise TooFewCopies(f"至少需要2个副本才能估计方差，当前 s={b.s}")
    return float(np.var(bank_query_values(b), ddof=1))


@dataclass(frozen=True)
class CopyPlan:
    copies: int
    required: int
    clamped: bool


def recommend_copies(
    epsilon: float,
    m_bound: int,
    count_lower_bound: int,
    profile: PatternProfile,
    max_copies: Optional[int] = None,
) -> CopyPlan:
    """
    s = ceil(3 · m^k / (ε² · #H_lower²))，超出上限时截断并记录
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon(f"epsilon 必须在 (0,1) 内: {epsilon}")
    if m_bound < 1 or count_lower_bound < 1:
        raise ConfigMismatch("m_bound 和 count_lower_bound 必须 >= 1")
    eps = Fraction(repr(float(epsilon)))
    exact = Fraction(COPIES_CONSTANT * m_bound ** profile.k) / (eps * eps * count_lower_bound ** 2)
    required = max(1, ceil(exact))
    limit = max_copies if max_copies is not None else Limits().max_copies
    if required > limit:
        logger.warning("推荐副本数 %d 超过上限 %d，已截断", required, limit)
        return CopyPlan(copies=limit, required=required, clamped=True)
    return CopyPlan(copies=required, required=required, clamped=False)


# ---------------------------------------------------------------------------
# 合并与文件
# ---------------------------------------------------------------------------

def bank_merge(a: EstimatorBank, b: EstimatorBank) -> EstimatorBank:
    """逐副本合并"""
    if a.profile.fingerprint != b.profile.fingerprint or a.seed_base != b.seed_base:
        raise BasisMismatch(f"随机基不一致: seed_base {a.seed_base} vs {b.seed_base} 或模式不同")
    if not a.same_config(b):
        raise ConfigMismatch(f"估计器组配置不一致: s {a.s} vs {b.s}")
    merged = a.empty_like()
    merged.accumulators += a.accumulators
    merged.accumulators += b.accumulators
    merged.processed += a.processed + b.processed
    warn_if_inexact(merged.accumulators, merged.limits)
    logger.debug("合并估计器组: %d + %d 条边", a.edges_processed, b.edges_processed)
    return merged


def serialize_bank(b: EstimatorBank) -> bytes:
    """header (magic, version, fingerprint, seed_base, s, k) + s 个 sketch"""
    header = _BANK_HEADER.pack(BANK_MAGIC, BANK_VERSION, b.profile.fingerprint, b.seed_base, b.s, b.profile.k)
    return header + b"".join(serialize(b.copy_at(i)) for i in range(b.s))


def read_bank_header(data: bytes) -> Dict[str, object]:
    if len(data) < _BANK_HEADER.size:
        raise CorruptPayload(f"估计器组数据被截断: {len(data)} 字节")
    magic, version, fingerprint, seed_base, s, k = _BANK_HEADER.unpack_from(data)
    if magic != BANK_MAGIC:
        raise CorruptPayload(f"magic不正确: {magic!r}")
    if version != BANK_VERSION:
        raise VersionMismatch(f"不支持的估计器组版本 {version} (期望 {BANK_VERSION})")
    return {"fingerprint": fingerprint, "seed_base": seed_base, "s": s, "k": k}


def deserialize_bank(data: bytes, profile: PatternProfile, limits: Optional[Limits] = None) -> EstimatorBank:
    header = read_bank_header(data)
    if header["fingerprint"] != profile.fingerprint:
        raise FingerprintMismatch("估计器组的模式指纹与当前模式不一致")
    s, k = int(header["s"]), int(header["k"])
    step = payload_size(k)
    if k != profile.k or s < 1 or len(data) != _BANK_HEADER.size + s * step:
        raise CorruptPayload(f"估计器组长度不正确: s={s}, k={k}, {len(data)} 字节")

    bank = EstimatorBank(profile, s, int(header["seed_base"]), limits)
    expected_seeds = seeds_for(bank.seed_base, s)
    for i in range(s):
        offset = _BANK_HEADER.size + i * step
        seed, edges, accumulators = read_payload(data[offset:offset + step], profile)
        if seed != expected_seeds[i]:
            raise CorruptPayload(f"第 {i} 个副本的种子 {seed} 与 seed_base 不符")
        bank.accumulators[i] = accumulators
        bank.processed[i] = edges
    return bank
