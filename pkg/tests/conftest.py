"""共享fixture：常用模式与图"""

from itertools import combinations
from typing import Iterable, List, Sequence

import numpy as np
import pytest

from hcsketch.estimator.pattern import Hypergraph, build_pattern_profile
from hcsketch.estimator.sketch import StreamEdge


def complete_graph(n: int, start: int = 1) -> Hypergraph:
    return Hypergraph.from_edges(combinations(range(start, start + n), 2))


def inserts(edges: Iterable[Sequence[int]]) -> List[StreamEdge]:
    return [StreamEdge.make(1, e) for e in edges]


def deletes(edges: Iterable[Sequence[int]]) -> List[StreamEdge]:
    return [StreamEdge.make(-1, e) for e in edges]


def random_uniform_hypergraph(n: int, m: int, size: int, seed: int) -> Hypergraph:
    rng = np.random.default_rng(seed)
    candidates = list(combinations(range(n), size))
    chosen = rng.choice(len(candidates), size=m, replace=False)
    return Hypergraph.from_edges(candidates[i] for i in sorted(chosen))


def churn_stream(edges: Sequence[Sequence[int]], seed: int, noise: int = 10) -> List[StreamEdge]:
    """
    插入 edges，再混入 noise 条先插后删的噪声边，最终重数与 edges 相同
    """
    rng = np.random.default_rng(seed)
    stream = inserts(edges)
    universe = sorted({v for e in edges for v in e}) or [0, 1]
    for _ in range(noise):
        size = int(rng.integers(1, min(3, len(universe)) + 1))
        edge = tuple(int(v) for v in rng.choice(universe, size=size, replace=False))
        stream.insert(int(rng.integers(0, len(stream) + 1)), StreamEdge.make(1, edge))
        stream.insert(int(rng.integers(0, len(stream) + 1)), StreamEdge.make(-1, edge))
    return stream


@pytest.fixture
def triangle() -> Hypergraph:
    return Hypergraph.from_edges([(1, 2), (2, 3), (1, 3)])


@pytest.fixture
def triangle_profile(triangle):
    return build_pattern_profile(triangle)


@pytest.fixture
def path3() -> Hypergraph:
    return Hypergraph.from_edges([(1, 2), (2, 3)])


@pytest.fixture
def single_edge() -> Hypergraph:
    return Hypergraph.from_edges([(1, 2)])


@pytest.fixture
def single_edge_profile(single_edge):
    return build_pattern_profile(single_edge)


@pytest.fixture
def three_edge() -> Hypergraph:
    return Hypergraph.from_edges([(1, 2, 3)])


@pytest.fixture
def fan3() -> Hypergraph:
    """{abc},{abd},{acd}"""
    return Hypergraph.from_edges([(0, 1, 2), (0, 1, 3), (0, 2, 3)])


@pytest.fixture
def k4() -> Hypergraph:
    return complete_graph(4)


@pytest.fixture
def k5() -> Hypergraph:
    return complete_graph(5)
