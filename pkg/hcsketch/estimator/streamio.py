"""
文本格式读写
  模式文件: 每行一条边，空白分隔的非负整数顶点编号
  流文件:   每行 "+ u1 u2 ..." 或 "- u1 u2 ..."
两者都支持 # 注释与空行
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, TextIO, Tuple

from .errors import DuplicateVertexInEdge, EdgeTooLarge, InvalidHypergraph, ParseError, VertexIdOutOfRange
from .hashing import MERSENNE_P
from .pattern import Hypergraph, canonical_edge
from .sketch import StreamEdge


@dataclass(frozen=True)
class StreamRecord:
    """流文件中的一行"""

    line_number: int
    sign: str
    vertices: Tuple[int, ...]

    def to_edge(self, max_edge_size: int = 8) -> StreamEdge:
        return StreamEdge.make(
            1 if self.sign == "+" else -1,
            self.vertices,
            max_edge_size=max_edge_size,
            line=self.line_number,
        )


def _content_lines(reader: TextIO) -> Iterator[Tuple[int, List[str]]]:
    for number, raw in enumerate(reader, start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield number, text.split()


def _parse_ids(tokens: Iterable[str], line: int, path: Optional[str]) -> Tuple[int, ...]:
    ids = []
    for token in tokens:
        try:
            value = int(token, 10)
        except ValueError:
            raise ParseError(f"顶点编号不是十进制整数: {token!r}", line=line, path=path) from None
        if value < 0 or value >= MERSENNE_P:
            raise VertexIdOutOfRange(f"顶点编号超出 [0, 2^61-1): {value}", line=line, path=path)
        ids.append(value)
    return tuple(ids)


def parse_records(reader: TextIO, path: Optional[str] = None) -> Iterator[StreamRecord]:
    for number, tokens in _content_lines(reader):
        sign = tokens[0]
        if sign not in ("+", "-"):
            raise ParseError(f"行首必须是 '+' 或 '-': {sign!r}", line=number, path=path)
        if len(tokens) < 2:
            raise ParseError("边至少需要一个顶点", line=number, path=path)
        yield StreamRecord(line_number=number, sign=sign, vertices=_parse_ids(tokens[1:], number, path))


def parse_stream(reader: TextIO, path: Optional[str] = None, max_edge_size: int = 8) -> Iterator[StreamEdge]:
    """按文件顺序产生规范化后的 StreamEdge"""
    for record in parse_records(reader, path):
        try:
            yield record.to_edge(max_edge_size)
        except (DuplicateVertexInEdge, EdgeTooLarge) as exc:
            exc.path = path
            raise


def parse_pattern(reader: TextIO, path: Optional[str] = None) -> Hypergraph:
    edges = []
    seen = {}
    for number, tokens in _content_lines(reader):
        ids = _parse_ids(tokens, number, path)
        if len(set(ids)) != len(ids):
            raise DuplicateVertexInEdge(f"边内顶点重复: {' '.join(tokens)}", line=number, path=path)
        edge = canonical_edge(ids)
        if edge in seen:
            raise InvalidHypergraph(f"与第 {seen[edge]} 行的边重复", line=number, path=path)
        seen[edge] = number
        edges.append(edge)
    if not edges:
        raise InvalidHypergraph("模式文件中没有边", path=path)
    return Hypergraph.from_edges(edges)


def read_pattern_file(path) -> Hypergraph:
    with open(path, "r", encoding="utf-8") as f:
        return parse_pattern(f, str(path))


def read_stream_file(path, max_edge_size: int = 8) -> List[StreamEdge]:
    with open(path, "r", encoding="utf-8") as f:
        return list(parse_stream(f, str(path), max_edge_size))


def format_edge(edge: StreamEdge) -> str:
    sign = "+" if edge.sign > 0 else "-"
    return f"{sign} {' '.join(str(v) for v in edge.vertices)}"


def write_stream(edges: Iterable[StreamEdge], path: Path, header: Optional[str] = None) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        if header:
            for line in header.splitlines():
                f.write(f"# {line}\n")
        for edge in edges:
            f.write(format_edge(edge) + "\n")
            count += 1
    return count


def write_pattern(h: Hypergraph, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for edge in h.edges:
            f.write(" ".join(str(v) for v in edge) + "\n")
