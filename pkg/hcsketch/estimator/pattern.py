"""
模式超图模块
功能：超图表示、模式预处理（度、定向边、τ、自同构数、缩放系数）以及精确计数（测试用的暴力枚举）
"""

import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, lcm
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .config import Limits
from .errors import InvalidHypergraph, IsolatedVertex, SizeLimit, TooLarge


logger = logging.getLogger(__name__)

Edge = Tuple[int, ...]


def canonical_edge(vertices: Iterable[int]) -> Edge:
    """把一条边规范化为严格递增的元组"""
    edge = tuple(sorted(vertices))
    if not edge:
        raise InvalidHypergraph("边不能为空")
    for a, b in zip(edge, edge[1:]):
        if a == b:
            raise InvalidHypergraph(f"边内顶点重复: {a}")
    return edge


@dataclass(frozen=True)
class Hypergraph:
    """显式的小超图：顶点集合 + 规范化的边列表"""

    vertices: Tuple[int, ...]
    edges: Tuple[Edge, ...]

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Iterable[int]],
        vertices: Optional[Iterable[int]] = None,
    ) -> "Hypergraph":
        canonical = tuple(canonical_edge(e) for e in edges)
        vertex_set: Set[int] = set(vertices) if vertices is not None else set()
        for edge in canonical:
            vertex_set.update(edge)
        graph = cls(vertices=tuple(sorted(vertex_set)), edges=canonical)
        graph.validate()
        return graph

    def validate(self) -> None:
        vertex_set = set(self.vertices)
        if len(vertex_set) != len(self.vertices):
            raise InvalidHypergraph("顶点集合中有重复")
        seen: Set[Edge] = set()
        for edge in self.edges:
            if not edge:
                raise InvalidHypergraph("边不能为空")
            if any(a >= b for a, b in zip(edge, edge[1:])):
                raise InvalidHypergraph(f"边内顶点必须严格递增: {edge}")
            missing = [v for v in edge if v not in vertex_set]
            if missing:
                raise InvalidHypergraph(f"边 {edge} 含有不在顶点集合中的顶点 {missing}")
            if edge in seen:
                raise InvalidHypergraph(f"重复的边: {edge}")
            seen.add(edge)

    @property
    def edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self.edges)

    def degrees(self) -> Dict[int, int]:
        deg = {v: 0 for v in self.vertices}
        for edge in self.edges:
            for v in edge:
                deg[v] += 1
        return deg

    def with_edge(self, edge: Iterable[int]) -> "Hypergraph":
        return Hypergraph.from_edges(list(self.edges) + [tuple(edge)], self.vertices)


@dataclass(frozen=True)
class PatternProfile:
    """预处理后的模式H"""

    t: int
    k: int
    tau: int
    vertices: Tuple[int, ...]
    degrees: Dict[int, int] = field(hash=False, compare=False)
    oriented_edges: Tuple[Edge, ...]
    sizes: Tuple[int, ...]
    auto: int
    scale: Fraction
    degree_lcm: int
    exponent_modulus: int
    fingerprint: bytes

    @property
    def vertex_index(self) -> Dict[int, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def indexed_edges(self) -> Tuple[Tuple[int, ...], ...]:
        """定向边，顶点换成 0..t-1 的下标"""
        index = self.vertex_index
        return tuple(tuple(index[c] for c in edge) for edge in self.oriented_edges)

    @property
    def indexed_degrees(self) -> Tuple[int, ...]:
        return tuple(self.degrees[v] for v in self.vertices)

    @property
    def min_degree(self) -> int:
        return min(self.degrees.values())

    def edges_of_size(self, size: int) -> List[int]:
        return [j for j, s in enumerate(self.sizes) if s == size]

    def terms_per_edge(self) -> Dict[int, int]:
        """每种边长度下一条到达边需要计算的项数 (Σ ℓ! over size-matched pattern edges)"""
        counts = Counter(self.sizes)
        return {size: n * factorial(size) for size, n in sorted(counts.items())}


def pattern_fingerprint(h: Hypergraph) -> bytes:
    payload = json.dumps(
        {"vertices": list(h.vertices), "edges": [list(e) for e in h.edges]},
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).digest()


def _search_order(h: Hypergraph) -> List[int]:
    """回溯顺序：先放度数大的顶点，再放与已放顶点共边最多的顶点"""
    deg = h.degrees()
    remaining = set(h.vertices)
    order: List[int] = []
    while remaining:
        placed = set(order)

        def rank(v: int) -> Tuple[int, int, int]:
            links = sum(1 for e in h.edges if v in e and placed.intersection(e))
            return (links, deg[v], -v)

        best = max(remaining, key=rank)
        order.append(best)
        remaining.remove(best)
    return order


def _count_embeddings(h: Hypergraph, target_vertices: Sequence[int], target_edges: FrozenSet[Edge]) -> int:
    """
    暴力枚举 V[H] -> V[G] 的单射，要求 H 的每条边映射为 G 的一条边
    边在其最后一个顶点被赋值时检查，用于剪枝
    """
    order = _search_order(h)
    position = {v: i for i, v in enumerate(order)}
    closing: List[List[Edge]] = [[] for _ in order]
    for edge in h.edges:
        closing[max(position[v] for v in edge)].append(edge)

    h_deg = h.degrees()
    g_deg: Dict[int, int] = {v: 0 for v in target_vertices}
    for edge in target_edges:
        for v in edge:
            g_deg[v] = g_deg.get(v, 0) + 1

    assignment: Dict[int, int] = {}
    used: Set[int] = set()
    count = 0

    def extend(depth: int) -> None:
        nonlocal count
        if depth == len(order):
            count += 1
            return
        c = order[depth]
        for w in target_vertices:
            if w in used or g_deg[w] < h_deg[c]:
                continue
            assignment[c] = w
            ok = all(
                tuple(sorted(assignment[x] for x in edge)) in target_edges
                for edge in closing[depth]
            )
            if ok:
                used.add(w)
                extend(depth + 1)
                used.discard(w)
            del assignment[c]

    extend(0)
    return count


def count_automorphisms(h: Hypergraph, limits: Optional[Limits] = None) -> int:
    """统计H的自同构数（对所有顶点置换穷举，带边约束剪枝）"""
    limits = limits or Limits()
    if len(h.vertices) > limits.max_pattern_vertices:
        raise TooLarge(f"模式顶点数 {len(h.vertices)} 超过上限 {limits.max_pattern_vertices}")
    return _count_embeddings(h, h.vertices, h.edge_set)


def build_pattern_profile(h: Hypergraph, limits: Optional[Limits] = None) -> PatternProfile:
    """
    预处理模式H

    Args:
        h: 模式超图
        limits: 规模限制（默认 t<=16, 边长<=8）

    Returns:
        PatternProfile，定向边取每条边的升序顺序
    """
    limits = limits or Limits()
    h.validate()
    t = len(h.vertices)
    if t == 0 or not h.edges:
        raise InvalidHypergraph("模式至少需要一条边")
    if t > limits.max_pattern_vertices:
        raise TooLarge(f"模式顶点数 {t} 超过上限 {limits.max_pattern_vertices}")
    for edge in h.edges:
        if len(edge) > limits.max_edge_size:
            raise TooLarge(f"模式边 {edge} 长度 {len(edge)} 超过上限 {limits.max_edge_size}")

    degrees = h.degrees()
    isolated = [v for v, d in degrees.items() if d == 0]
    if isolated:
        raise IsolatedVertex(f"模式中存在孤立顶点: {isolated}")

    auto = count_automorphisms(h, limits)
    tau = (1 << t) - 1
    degree_lcm = lcm(*degrees.values())
    # q·Y·L 必须在 int64 内
    if tau * degree_lcm * (1 << (t - 1)) >= 1 << 62:
        raise TooLarge(f"度数的最小公倍数 {degree_lcm} 过大，指数超出 64 位")
    profile = PatternProfile(
        t=t,
        k=len(h.edges),
        tau=tau,
        vertices=h.vertices,
        degrees=degrees,
        oriented_edges=h.edges,
        sizes=tuple(len(e) for e in h.edges),
        auto=auto,
        scale=Fraction(t ** t, factorial(t) * auto),
        degree_lcm=degree_lcm,
        exponent_modulus=tau * degree_lcm,
        fingerprint=pattern_fingerprint(h),
    )
    if profile.min_degree < 2:
        logger.debug("模式最小度为 %d (<2)，方差界不适用", profile.min_degree)
    return profile


def check_oracle_scale(g: Hypergraph, limits: Optional[Limits] = None) -> None:
    """精确计数只接受桌面规模的G"""
    limits = limits or Limits()
    if len(g.vertices) > limits.exact_max_vertices or len(g.edges) > limits.exact_max_edges:
        raise SizeLimit(
            f"G 有 {len(g.vertices)} 个顶点 / {len(g.edges)} 条边，"
            f"超过精确计数上限 {limits.exact_max_vertices} / {limits.exact_max_edges}"
        )


def exact_count(h: Hypergraph, g: Hypergraph) -> int:
    """
    精确计数 #(H,G)：单射同态个数 / auto(H)
    非诱导子图出现次数，仅适用于小规模G
    """
    h.validate()
    g.validate()
    if len(h.vertices) > len(g.vertices):
        return 0
    embeddings = _count_embeddings(h, g.vertices, g.edge_set)
    if embeddings == 0:
        return 0
    auto = _count_embeddings(h, h.vertices, h.edge_set)
    return embeddings // auto


def final_multiset(edges: Iterable) -> Hypergraph:
    """
    把带符号的边流 (StreamEdge) 折叠成最终的边集合
    最终重数必须是0或1
    """
    multiplicity: Counter = Counter()
    for item in edges:
        multiplicity[item.vertices] += item.sign
    bad = {e: m for e, m in multiplicity.items() if m not in (0, 1)}
    if bad:
        edge, mult = next(iter(sorted(bad.items())))
        raise InvalidHypergraph(f"流结束后边 {edge} 的重数为 {mult}，不是合法超图")
    return Hypergraph.from_edges(sorted(e for e, m in multiplicity.items() if m == 1))


def exact_count_stream(h: Hypergraph, edges: Iterable) -> int:
    """对带符号边流的最终图做精确计数"""
    return exact_count(h, final_multiset(edges))
