"""
哈希模块
功能：素域 F_p (p = 2^61 - 1) 上的 w-wise 独立多项式哈希，以及每个估计副本的三类随机源：
  Q   随机 τ 次单位根（只存指数 j）
  X_c 每个模式顶点一个 (2tk)-wise 独立哈希，取值为 deg_H(c) 次单位根的指数
  Y   4k-wise 独立哈希，取值于 S = {1, 2, 4, ..., 2^(t-1)}

所有系数由 (seed, 模式指纹) 通过 splitmix 风格的计数器模式展开，完全确定。
标量路径用 Python 整数，向量路径 (BasisStack) 用 numpy uint64，两者结果逐位一致。
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

from .errors import UnknownPatternVertex
from .pattern import PatternProfile


MERSENNE_P = (1 << 61) - 1
MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# PRF 域
DOMAIN_Q = 0
DOMAIN_Y = 1
DOMAIN_X = 2

_P = np.uint64(MERSENNE_P)
_MASK30 = np.uint64((1 << 30) - 1)
_MASK31 = np.uint64((1 << 31) - 1)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U61 = np.uint64(61)
_ONE = np.uint64(1)


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _fingerprint_word(fingerprint: bytes) -> int:
    return int.from_bytes(fingerprint[:8], "little")


def prf_key(seed: int, fingerprint: bytes) -> int:
    return _mix64((seed ^ _fingerprint_word(fingerprint)) & MASK64)


def prf_word(key: int, domain: int, counter: int) -> int:
    """计数器模式输出：mix(key + (domain<<32 | counter) * γ)"""
    return _mix64((key + ((domain << 32) | counter) * GOLDEN_GAMMA) & MASK64)


def _prf_words_np(keys: np.ndarray, domain: int, count: int) -> np.ndarray:
    """keys (s,) -> (s, count)"""
    counters = np.array(
        [(((domain << 32) | i) * GOLDEN_GAMMA) & MASK64 for i in range(count)],
        dtype=np.uint64,
    )
    return _mix64_np(keys[:, None] + counters[None, :])


def _to_field(word: int) -> int:
    return (word >> 3) % MERSENNE_P


def _to_field_np(words: np.ndarray) -> np.ndarray:
    value = words >> np.uint64(3)
    return np.where(value == _P, np.uint64(0), value)


# ---------------------------------------------------------------------------
# F_p 算术（numpy 版本）
# ---------------------------------------------------------------------------

def _fold(x: np.ndarray) -> np.ndarray:
    x = (x & _P) + (x >> _U61)
    return np.where(x >= _P, x - _P, x)


def mulmod61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    a*b mod (2^61-1)，a, b < 2^61，按 31 位拆分避免 uint64 溢出
    2^61 ≡ 1, 2^62 ≡ 2 (mod p)
    """
    a_hi, a_lo = a >> _U31, a & _MASK31
    b_hi, b_lo = b >> _U31, b & _MASK31
    hh = a_hi * b_hi
    mid = a_hi * b_lo + a_lo * b_hi
    ll = a_lo * b_lo
    total = (hh << _ONE) + (mid >> _U30) + ((mid & _MASK30) << _U31) + ll
    return _fold(total)


def addmod61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _fold(a + b)


def horner61(coefficients: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """
    多项式求值
    Args:
        coefficients: (s, w) uint64，c0 + c1*v + ... + c_{w-1}*v^{w-1}
        keys: (n,) uint64，均 < p
    Returns:
        (s, n) uint64
    """
    keys = np.asarray(keys, dtype=np.uint64)[None, :]
    w = coefficients.shape[1]
    acc = np.broadcast_to(coefficients[:, w - 1][:, None], (coefficients.shape[0], keys.shape[1])).copy()
    for j in range(w - 2, -1, -1):
        acc = addmod61(mulmod61(acc, keys), coefficients[:, j][:, None])
    return acc


# ---------------------------------------------------------------------------
# 标量哈希与随机基
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KWiseHash:
    """w 个系数的多项式哈希，输出约化到 {0, ..., r-1}"""

    independence: int
    coefficients: Tuple[int, ...]
    prime: int
    range: int


def eval_hash(h: KWiseHash, v: int) -> int:
    acc = 0
    for c in reversed(h.coefficients):
        acc = (acc * v + c) % h.prime
    return acc % h.range


def make_hash(key: int, domain: int, independence: int, out_range: int) -> KWiseHash:
    coefficients = tuple(_to_field(prf_word(key, domain, i)) for i in range(independence))
    return KWiseHash(independence=independence, coefficients=coefficients, prime=MERSENNE_P, range=out_range)


@dataclass(frozen=True)
class RandomBasis:
    """一个估计副本的全部随机性"""

    seed: int
    q_exponent: int
    x_hashes: Dict[int, KWiseHash]
    y_hash: KWiseHash
    profile_fingerprint: bytes

    def identity(self) -> Tuple[int, bytes]:
        return (self.seed, self.profile_fingerprint)


def x_independence(profile: PatternProfile) -> int:
    return 2 * profile.t * profile.k


def y_independence(profile: PatternProfile) -> int:
    return max(4 * profile.k, profile.t)


def derive_basis(profile: PatternProfile, seed: int) -> RandomBasis:
    """由 (profile, seed) 确定性地展开随机基"""
    seed &= MASK64
    key = prf_key(seed, profile.fingerprint)
    q_exponent = prf_word(key, DOMAIN_Q, 0) % profile.tau
    y_hash = make_hash(key, DOMAIN_Y, y_independence(profile), profile.t)
    x_hashes = {
        c: make_hash(key, DOMAIN_X + idx, x_independence(profile), profile.degrees[c])
        for idx, c in enumerate(profile.vertices)
    }
    return RandomBasis(
        seed=seed,
        q_exponent=q_exponent,
        x_hashes=x_hashes,
        y_hash=y_hash,
        profile_fingerprint=profile.fingerprint,
    )


def x_exponent(basis: RandomBasis, c: int, v: int) -> int:
    """X_c(v) = exp(2πi·x/deg_H(c)) 中的指数 x"""
    try:
        h = basis.x_hashes[c]
    except KeyError:
        raise UnknownPatternVertex(f"模式中没有顶点 {c}") from None
    return eval_hash(h, v)


def y_value(basis: RandomBasis, v: int) -> int:
    return 1 << eval_hash(basis.y_hash, v)


# ---------------------------------------------------------------------------
# 向量化随机基（s 个副本堆叠）
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BasisStack:
    """
    s 个副本的随机基，按副本堆叠
    x_coefficients[c] 是第 c 个模式顶点 (按 profile.vertices 顺序) 的 (s, 2tk) 系数
    """

    seeds: np.ndarray
    q_exponents: np.ndarray
    x_coefficients: Tuple[np.ndarray, ...]
    x_ranges: Tuple[int, ...]
    y_coefficients: np.ndarray
    y_range: int
    profile_fingerprint: bytes

    @property
    def size(self) -> int:
        return int(self.seeds.shape[0])

    def subset(self, index) -> "BasisStack":
        return BasisStack(
            seeds=self.seeds[index],
            q_exponents=self.q_exponents[index],
            x_coefficients=tuple(x[index] for x in self.x_coefficients),
            x_ranges=self.x_ranges,
            y_coefficients=self.y_coefficients[index],
            y_range=self.y_range,
            profile_fingerprint=self.profile_fingerprint,
        )

    def x_exponents(self, c_index: int, keys: np.ndarray) -> np.ndarray:
        """(s, n) 的 X 指数"""
        values = horner61(self.x_coefficients[c_index], keys)
        return (values % np.uint64(self.x_ranges[c_index])).astype(np.int64)

    def y_values(self, keys: np.ndarray) -> np.ndarray:
        """(s, n) 的 Y 值 (2 的幂)"""
        values = horner61(self.y_coefficients, keys)
        return np.left_shift(np.int64(1), (values % np.uint64(self.y_range)).astype(np.int64))

    def basis(self, i: int, profile: PatternProfile) -> RandomBasis:
        """取出第 i 个副本的标量随机基"""
        x_hashes = {
            c: KWiseHash(
                independence=int(self.x_coefficients[idx].shape[1]),
                coefficients=tuple(int(v) for v in self.x_coefficients[idx][i]),
                prime=MERSENNE_P,
                range=self.x_ranges[idx],
            )
            for idx, c in enumerate(profile.vertices)
        }
        y_hash = KWiseHash(
            independence=int(self.y_coefficients.shape[1]),
            coefficients=tuple(int(v) for v in self.y_coefficients[i]),
            prime=MERSENNE_P,
            range=self.y_range,
        )
        return RandomBasis(
            seed=int(self.seeds[i]),
            q_exponent=int(self.q_exponents[i]),
            x_hashes=x_hashes,
            y_hash=y_hash,
            profile_fingerprint=self.profile_fingerprint,
        )


def derive_basis_stack(profile: PatternProfile, seeds: Sequence[int]) -> BasisStack:
    """derive_basis 的批量版本，第 i 行与 derive_basis(profile, seeds[i]) 一致"""
    seed_arr = np.array([int(s) & MASK64 for s in seeds], dtype=np.uint64)
    keys = _mix64_np(seed_arr ^ np.uint64(_fingerprint_word(profile.fingerprint)))
    q_words = _prf_words_np(keys, DOMAIN_Q, 1)[:, 0]
    q_exponents = (q_words % np.uint64(profile.tau)).astype(np.int64)
    y_coefficients = _to_field_np(_prf_words_np(keys, DOMAIN_Y, y_independence(profile)))
    x_coefficients = tuple(
        _to_field_np(_prf_words_np(keys, DOMAIN_X + idx, x_independence(profile)))
        for idx in range(profile.t)
    )
    return BasisStack(
        seeds=seed_arr,
        q_exponents=q_exponents,
        x_coefficients=x_coefficients,
        x_ranges=profile.indexed_degrees,
        y_coefficients=y_coefficients,
        y_range=profile.t,
        profile_fingerprint=profile.fingerprint,
    )


def seeds_for(seed_base: int, count: int) -> Iterable[int]:
    """副本种子: seed_base + index (mod 2^64)"""
    return [(seed_base + i) & MASK64 for i in range(count)]
