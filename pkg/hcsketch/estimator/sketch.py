"""
Sketch模块（核心算法）
功能：单个估计副本。维护 k 个复数累加器 Z_{e*}，每条到达边按带符号的排列和更新，
查询时输出 scale · Re(Π Z_{e*})，支持线性合并与二进制序列化

单位根一律用整数指数 E (mod D = τ·L) 表示，每一项查表得到 exp(2πi·E/D)，
并取整到 2^-32 网格；网格值在 |Z| < 2^21 内相加是精确的，
因此插入/删除抵消、乱序、合并都逐位一致
"""

import logging
import struct
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from math import isqrt
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .config import Limits
from .errors import (
    BasisMismatch,
    CorruptPayload,
    DuplicateVertexInEdge,
    EdgeTooLarge,
    FingerprintMismatch,
    SizeMismatch,
    VersionMismatch,
)
from .hashing import RandomBasis, derive_basis, x_exponent, y_value
from .pattern import PatternProfile


logger = logging.getLogger(__name__)

GRID_BITS = 32
GRID_SCALE = float(1 << GRID_BITS)
# 单级表的最大长度，超过则用两级表
SINGLE_TABLE_LIMIT = 1 << 20

SKETCH_MAGIC = b"HCSK"
SKETCH_VERSION = 1
_HEADER = struct.Struct("<4sH32sQqI")


@dataclass(frozen=True)
class StreamEdge:
    """带符号的流边，vertices 已规范化为升序"""

    sign: int
    vertices: Tuple[int, ...]

    @classmethod
    def make(
        cls,
        sign: int,
        vertices: Iterable[int],
        max_edge_size: int = 8,
        line: Optional[int] = None,
    ) -> "StreamEdge":
        if sign not in (1, -1):
            raise ValueError(f"sign 必须是 +1 或 -1: {sign}")
        edge = tuple(sorted(vertices))
        if not edge:
            raise DuplicateVertexInEdge("空边", line=line)
        for a, b in zip(edge, edge[1:]):
            if a == b:
                raise DuplicateVertexInEdge(f"边内顶点重复: {a}", line=line)
        if len(edge) > max_edge_size:
            raise EdgeTooLarge(f"边长度 {len(edge)} 超过上限 {max_edge_size}", line=line)
        return cls(sign=sign, vertices=edge)

    @property
    def size(self) -> int:
        return len(self.vertices)


# ---------------------------------------------------------------------------
# 单位根查表
# ---------------------------------------------------------------------------

class RootTable:
    """exp(2πi·E/D) 的网格化查表，D 较大时拆成 E = a·B + b 两级"""

    def __init__(self, modulus: int):
        self.modulus = modulus
        if modulus <= SINGLE_TABLE_LIMIT:
            self.block = None
            angles = 2.0 * np.pi * np.arange(modulus, dtype=np.float64) / modulus
            self.re = np.rint(np.cos(angles) * GRID_SCALE) / GRID_SCALE
            self.im = np.rint(np.sin(angles) * GRID_SCALE) / GRID_SCALE
        else:
            # 两级：两张表都用 2^31 定点整数，乘积在 int64 内精确，再舍入回 2^-32 网格
            self.block = isqrt(modulus - 1) + 1
            hi_count = (modulus - 1) // self.block + 1
            hi_angles = 2.0 * np.pi * (np.arange(hi_count, dtype=np.float64) * self.block) / modulus
            lo_angles = 2.0 * np.pi * np.arange(self.block, dtype=np.float64) / modulus
            scale = float(1 << 31)
            self.hi_re = np.rint(np.cos(hi_angles) * scale).astype(np.int64)
            self.hi_im = np.rint(np.sin(hi_angles) * scale).astype(np.int64)
            self.lo_re = np.rint(np.cos(lo_angles) * scale).astype(np.int64)
            self.lo_im = np.rint(np.sin(lo_angles) * scale).astype(np.int64)

    def lookup(self, exponents: np.ndarray) -> np.ndarray:
        exponents = np.asarray(exponents, dtype=np.int64)
        if self.block is None:
            return self.re[exponents] + 1j * self.im[exponents]
        a = exponents // self.block
        b = exponents % self.block
        hr, hi, lr, li = self.hi_re[a], self.hi_im[a], self.lo_re[b], self.lo_im[b]
        shift = 62 - GRID_BITS
        half = np.int64(1 << (shift - 1))
        re = (hr * lr - hi * li + half) >> shift
        im = (hr * li + hi * lr + half) >> shift
        return re.astype(np.float64) / GRID_SCALE + 1j * (im.astype(np.float64) / GRID_SCALE)


@lru_cache(maxsize=32)
def root_table(modulus: int) -> RootTable:
    return RootTable(modulus)


@lru_cache(maxsize=16)
def orientation_order(size: int) -> Tuple[Tuple[int, ...], ...]:
    """ℓ! 个排列，固定的字典序"""
    return tuple(permutations(range(size)))


# ---------------------------------------------------------------------------
# 指数计算
# ---------------------------------------------------------------------------

def _vertex_part(profile: PatternProfile, basis: RandomBasis, c: int, u: int) -> int:
    """单个因子 X_c(u)·Q^{Y(u)/deg_H(c)} 的指数 (mod D)"""
    deg = profile.degrees[c]
    D = profile.exponent_modulus
    x = x_exponent(basis, c, u)
    y = y_value(basis, u)
    return (x * (D // deg) + basis.q_exponent * y * (profile.degree_lcm // deg)) % D


def term_exponent(
    profile: PatternProfile,
    basis: RandomBasis,
    oriented_pattern_edge: Sequence[int],
    oriented_stream_tuple: Sequence[int],
) -> int:
    """
    M_{e*}(u_1..u_ℓ) = exp(2πi·E/D) 中的整数指数 E

    Args:
        oriented_pattern_edge: 模式顶点 (c_1..c_ℓ)
        oriented_stream_tuple: 流顶点 (u_1..u_ℓ)
    """
    if len(oriented_pattern_edge) != len(oriented_stream_tuple):
        raise SizeMismatch(
            f"模式边长度 {len(oriented_pattern_edge)} 与流边长度 {len(oriented_stream_tuple)} 不一致"
        )
    total = 0
    for c, u in zip(oriented_pattern_edge, oriented_stream_tuple):
        total += _vertex_part(profile, basis, c, u)
    return total % profile.exponent_modulus


# ---------------------------------------------------------------------------
# Sketch
# ---------------------------------------------------------------------------

class Sketch:
    """
    单个估计副本
    accumulators / processed 可以是 EstimatorBank 内部数组的视图
    """

    def __init__(
        self,
        profile: PatternProfile,
        basis: RandomBasis,
        accumulators: Optional[np.ndarray] = None,
        processed: Optional[np.ndarray] = None,
        limits: Optional[Limits] = None,
    ):
        if basis.profile_fingerprint != profile.fingerprint:
            raise BasisMismatch("随机基与模式不对应")
        self.profile = profile
        self.basis = basis
        self.limits = limits or Limits()
        self.accumulators = (
            accumulators if accumulators is not None else np.zeros(profile.k, dtype=np.complex128)
        )
        self._processed = processed if processed is not None else np.zeros(1, dtype=np.int64)

    @classmethod
    def fresh(cls, profile: PatternProfile, seed: int, limits: Optional[Limits] = None) -> "Sketch":
        return cls(profile, derive_basis(profile, seed), limits=limits)

    @property
    def seed(self) -> int:
        return self.basis.seed

    @property
    def edges_processed(self) -> int:
        return int(self._processed[0])

    @edges_processed.setter
    def edges_processed(self, value: int) -> None:
        self._processed[0] = value

    def copy(self) -> "Sketch":
        return Sketch(
            self.profile,
            self.basis,
            accumulators=np.array(self.accumulators, dtype=np.complex128),
            processed=np.array(self._processed, dtype=np.int64),
            limits=self.limits,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sketch):
            return NotImplemented
        return (
            self.basis.identity() == other.basis.identity()
            and self.edges_processed == other.edges_processed
            and self.accumulators.tobytes() == other.accumulators.tobytes()
        )

    def __repr__(self) -> str:
        return f"Sketch(seed={self.seed}, k={self.profile.k}, edges={self.edges_processed})"


def warn_if_inexact(accumulators: np.ndarray, limits: Limits) -> None:
    if accumulators.size == 0:
        return
    peak = max(float(np.max(np.abs(accumulators.real))), float(np.max(np.abs(accumulators.imag))))
    if peak >= limits.exact_sum_bound:
        logger.warning(
            "累加器模长 %.3g 超过精确求和上界 %d，抵消/合并不再逐位精确",
            peak,
            limits.exact_sum_bound,
        )


def update(s: Sketch, e: StreamEdge) -> None:
    """
    对每个长度匹配的模式边，累加 sign · Σ_{σ∈S_ℓ} M(u_σ(1)..u_σ(ℓ))
    """
    size = len(e.vertices)
    if size > s.limits.max_edge_size:
        raise EdgeTooLarge(f"边长度 {size} 超过上限 {s.limits.max_edge_size}")
    if len(set(e.vertices)) != size:
        raise DuplicateVertexInEdge(f"边内顶点重复: {e.vertices}")

    profile = s.profile
    targets = profile.edges_of_size(size)
    if targets:
        table = root_table(profile.exponent_modulus)
        D = profile.exponent_modulus
        orders = orientation_order(size)
        part_cache = {}
        for j in targets:
            pattern_edge = profile.oriented_edges[j]
            exponents = []
            for order in orders:
                total = 0
                for i, c in enumerate(pattern_edge):
                    key = (c, order[i])
                    if key not in part_cache:
                        part_cache[key] = _vertex_part(profile, s.basis, c, e.vertices[order[i]])
                    total += part_cache[key]
                exponents.append(total % D)
            terms = table.lookup(np.array(exponents, dtype=np.int64))
            s.accumulators[j] += e.sign * terms.sum()
        warn_if_inexact(s.accumulators, s.limits)
    s.edges_processed = s.edges_processed + e.sign


def update_many(s: Sketch, edges: Iterable[StreamEdge]) -> None:
    for e in edges:
        update(s, e)


def raw_product(s: Sketch) -> complex:
    """Z_H(G) = Π_{e*} Z_{e*}"""
    product = complex(s.accumulators[0])
    for z in s.accumulators[1:]:
        product *= complex(z)
    return product


def query(s: Sketch) -> float:
    """单副本输出 scale · Re(Z_H(G))"""
    return float(s.profile.scale) * raw_product(s).real


def merge(a: Sketch, b: Sketch) -> Sketch:
    """同一随机基下的两个sketch逐分量相加"""
    if a.basis.identity() != b.basis.identity():
        raise BasisMismatch(
            f"随机基不一致: seed {a.seed} vs {b.seed}，"
            f"指纹 {a.basis.profile_fingerprint.hex()[:12]} vs {b.basis.profile_fingerprint.hex()[:12]}"
        )
    merged = a.copy()
    merged.accumulators += b.accumulators
    merged.edges_processed = a.edges_processed + b.edges_processed
    warn_if_inexact(merged.accumulators, merged.limits)
    return merged


# ---------------------------------------------------------------------------
# 序列化
# ---------------------------------------------------------------------------

def serialize(s: Sketch) -> bytes:
    """magic | version u16 | fingerprint 32B | seed u64 | edges i64 | k u32 | k × (re, im) f64 LE"""
    header = _HEADER.pack(
        SKETCH_MAGIC,
        SKETCH_VERSION,
        s.profile.fingerprint,
        s.seed,
        s.edges_processed,
        s.profile.k,
    )
    body = np.ascontiguousarray(s.accumulators, dtype="<c16").tobytes()
    return header + body


def payload_size(k: int) -> int:
    return _HEADER.size + 16 * k


def read_payload(data: bytes, profile: PatternProfile) -> Tuple[int, int, np.ndarray]:
    """校验并拆出 (seed, edges_processed, accumulators)"""
    if len(data) < _HEADER.size:
        raise CorruptPayload(f"sketch数据被截断: {len(data)} 字节")
    magic, version, fingerprint, seed, edges, k = _HEADER.unpack_from(data)
    if magic != SKETCH_MAGIC:
        raise CorruptPayload(f"magic不正确: {magic!r}")
    if version != SKETCH_VERSION:
        raise VersionMismatch(f"不支持的sketch版本 {version} (期望 {SKETCH_VERSION})")
    if fingerprint != profile.fingerprint:
        raise FingerprintMismatch("sketch的模式指纹与当前模式不一致")
    if k != profile.k or len(data) != payload_size(k):
        raise CorruptPayload(f"sketch长度不正确: k={k}, {len(data)} 字节")
    accumulators = np.frombuffer(data, dtype="<c16", count=k, offset=_HEADER.size).astype(np.complex128)
    return seed, edges, accumulators


def deserialize(data: bytes, profile: PatternProfile, limits: Optional[Limits] = None) -> Sketch:
    seed, edges, accumulators = read_payload(data, profile)
    sketch = Sketch(profile, derive_basis(profile, seed), accumulators=accumulators, limits=limits)
    sketch.edges_processed = edges
    return sketch
