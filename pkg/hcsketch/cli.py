#!/usr/bin/env python3
"""
hcsketch 统一CLI接口
"""

import argparse
import json
import logging
import sys
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from hcsketch.estimator.bank import (
    BANK_MAGIC,
    EstimatorBank,
    bank_estimate,
    bank_merge,
    bank_update_many,
    deserialize_bank,
    recommend_copies,
    serialize_bank,
)
from hcsketch.estimator.config import Limits, load_limits
from hcsketch.estimator.errors import ConfigMismatch, CorruptPayload, HcSketchError
from hcsketch.estimator.hashing import MASK64
from hcsketch.estimator.pattern import (
    PatternProfile,
    build_pattern_profile,
    check_oracle_scale,
    exact_count,
    final_multiset,
)
from hcsketch.estimator.sketch import SKETCH_MAGIC, StreamEdge, deserialize, merge, query, serialize
from hcsketch.estimator.streamio import read_pattern_file, read_stream_file


logger = logging.getLogger("hcsketch")

DEFAULT_COPIES = 100
MODES = ("estimate", "exact", "info", "merge", "bench")


@dataclass
class RunConfig:
    """一次运行的参数"""

    mode: str
    pattern_path: Optional[Path] = None
    stream_paths: List[Path] = field(default_factory=list)
    copies: Optional[int] = None
    seed_base: int = 0
    epsilon: Optional[float] = None
    m_bound: Optional[int] = None
    count_lower_bound: int = 1
    json_lines: bool = False
    groups: Optional[int] = None
    shards: int = 1
    save_path: Optional[Path] = None
    inputs: List[Path] = field(default_factory=list)
    out_path: Optional[Path] = None
    bench_edges: int = 100_000
    bench_edge_size: int = 2
    bench_vertices: int = 1000
    limits: Limits = field(default_factory=Limits)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigMismatch(f"未知模式: {self.mode}")
        if self.copies is not None and self.copies < 1:
            raise ConfigMismatch(f"--copies 必须 >= 1: {self.copies}")
        if self.shards < 1:
            raise ConfigMismatch(f"--shards 必须 >= 1: {self.shards}")
        if not 0 <= self.seed_base <= MASK64:
            raise ConfigMismatch(f"--seed 必须在 [0, 2^64) 内: {self.seed_base}")


def _load_profile(config: RunConfig) -> PatternProfile:
    if config.pattern_path is None:
        raise ConfigMismatch("需要 --pattern")
    return build_pattern_profile(read_pattern_file(config.pattern_path), config.limits)


def _load_edges(config: RunConfig) -> List[StreamEdge]:
    edges: List[StreamEdge] = []
    for path in config.stream_paths:
        edges.extend(read_stream_file(path, config.limits.max_edge_size))
    return edges


def _min_degree_warning(profile: PatternProfile) -> Optional[str]:
    if profile.min_degree < 2:
        low = [v for v, d in profile.degrees.items() if d < 2]
        return f"模式最小度为 {profile.min_degree} (<2)，方差上界不成立，需要更多副本: 顶点 {low}"
    return None


def _resolve_copies(config: RunConfig, profile: PatternProfile, edges: Sequence[StreamEdge]) -> int:
    if config.copies is not None:
        return config.copies
    if config.epsilon is None:
        return DEFAULT_COPIES
    m_bound = config.m_bound
    if m_bound is None:
        m_bound = max(1, sum(e.sign for e in edges))
    plan = recommend_copies(
        config.epsilon, m_bound, config.count_lower_bound, profile, config.limits.max_copies
    )
    if plan.clamped:
        print(f"警告: 推荐副本数 {plan.required} 超过上限，截断为 {plan.copies}", file=sys.stderr)
    return plan.copies


def _shard_edges(edges: Sequence[StreamEdge], shards: int) -> List[List[StreamEdge]]:
    return [list(edges[i::shards]) for i in range(shards)]


def build_bank(
    profile: PatternProfile,
    edges: Sequence[StreamEdge],
    copies: int,
    seed_base: int,
    limits: Limits,
    shards: int = 1,
) -> EstimatorBank:
    """把边流灌进估计器组；shards>1 时每个线程持有一个组，最后合并"""
    bank = EstimatorBank(profile, copies, seed_base, limits)
    if shards <= 1:
        bank_update_many(bank, edges)
        return bank

    parts = [bank.empty_like() for _ in range(shards)]
    logger.info("按 %d 个分片并行更新 %d 条边", shards, len(edges))
    with ThreadPoolExecutor(max_workers=shards) as pool:
        list(pool.map(bank_update_many, parts, _shard_edges(edges, shards)))
    for part in parts:
        bank = bank_merge(bank, part)
    return bank


# ---------------------------------------------------------------------------
# 各子命令
# ---------------------------------------------------------------------------

def cmd_info(config: RunConfig) -> Dict:
    """模式的各项常数"""
    profile = _load_profile(config)
    report = {
        "mode": "info",
        "t": profile.t,
        "k": profile.k,
        "tau": profile.tau,
        "degrees": {str(v): d for v, d in profile.degrees.items()},
        "edges": [list(e) for e in profile.oriented_edges],
        "auto": profile.auto,
        "scale": float(profile.scale),
        "scale_fraction": f"{profile.scale.numerator}/{profile.scale.denominator}",
        "degree_lcm": profile.degree_lcm,
        "exponent_modulus": profile.exponent_modulus,
        "terms_per_edge": {str(size): n for size, n in profile.terms_per_edge().items()},
        "complex_values_per_copy": profile.k,
        "warning": _min_degree_warning(profile),
    }
    if config.epsilon is not None:
        plan = recommend_copies(
            config.epsilon,
            config.m_bound or 1,
            config.count_lower_bound,
            profile,
            config.limits.max_copies,
        )
        report["recommended_copies"] = plan.copies
        report["copies_clamped"] = plan.clamped
    return report


def cmd_estimate(config: RunConfig) -> Dict:
    """流式估计"""
    profile = _load_profile(config)
    warning = _min_degree_warning(profile)
    if warning and not config.json_lines:
        print(f"警告: {warning}", file=sys.stderr)

    edges = _load_edges(config)
    copies = _resolve_copies(config, profile, edges)
    logger.info("读入 %d 条边，副本数 s=%d", len(edges), copies)
    start = time.perf_counter()
    bank = build_bank(profile, edges, copies, config.seed_base, config.limits, config.shards)
    estimate = bank_estimate(bank, config.groups)
    wall_ms = (time.perf_counter() - start) * 1000.0

    if config.save_path is not None:
        config.save_path.write_bytes(serialize_bank(bank))

    return {
        "mode": "estimate",
        "estimate": estimate,
        "s": copies,
        "seed": config.seed_base,
        "wall_ms": wall_ms,
        "edges": bank.edges_processed,
    }


def cmd_exact(config: RunConfig) -> Dict:
    """精确计数（暴力枚举，仅限小图）"""
    pattern = read_pattern_file(config.pattern_path) if config.pattern_path else None
    if pattern is None:
        raise ConfigMismatch("需要 --pattern")
    start = time.perf_counter()
    graph = final_multiset(_load_edges(config))
    check_oracle_scale(graph, config.limits)
    count = exact_count(pattern, graph)
    return {
        "mode": "exact",
        "estimate": count,
        "s": None,
        "seed": None,
        "wall_ms": (time.perf_counter() - start) * 1000.0,
        "edges": len(graph.edges),
    }


def cmd_merge(config: RunConfig) -> Dict:
    """合并多个 sketch / 估计器组文件"""
    if not config.inputs:
        raise ConfigMismatch("merge 需要至少一个输入文件")
    profile = _load_profile(config)
    start = time.perf_counter()
    payloads = [Path(p).read_bytes() for p in config.inputs]
    kinds = {data[:4] for data in payloads}
    if len(kinds) != 1 or not kinds <= {BANK_MAGIC, SKETCH_MAGIC}:
        raise CorruptPayload("输入文件必须全部是估计器组文件或全部是sketch文件")

    if len(payloads) == 1:
        merged_bytes = payloads[0]
    elif BANK_MAGIC in kinds:
        bank = deserialize_bank(payloads[0], profile, config.limits)
        for data in payloads[1:]:
            bank = bank_merge(bank, deserialize_bank(data, profile, config.limits))
        merged_bytes = serialize_bank(bank)
    else:
        sketch = deserialize(payloads[0], profile, config.limits)
        for data in payloads[1:]:
            sketch = merge(sketch, deserialize(data, profile, config.limits))
        merged_bytes = serialize(sketch)

    if config.out_path is not None:
        config.out_path.write_bytes(merged_bytes)

    if BANK_MAGIC in kinds:
        bank = deserialize_bank(merged_bytes, profile, config.limits)
        estimate, s, seed, edges = bank_estimate(bank, config.groups), bank.s, bank.seed_base, bank.edges_processed
    else:
        sketch = deserialize(merged_bytes, profile, config.limits)
        estimate, s, seed, edges = query(sketch), 1, sketch.seed, sketch.edges_processed
    return {
        "mode": "merge",
        "estimate": estimate,
        "s": s,
        "seed": seed,
        "wall_ms": (time.perf_counter() - start) * 1000.0,
        "edges": edges,
        "inputs": len(payloads),
    }


def synthetic_edges(count: int, size: int, vertices: int, seed: int) -> List[StreamEdge]:
    """随机插入流：每条边在 [0, vertices) 中取 size 个不同顶点"""
    if size > vertices:
        raise ConfigMismatch(f"边长度 {size} 大于顶点数 {vertices}")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.integers(0, vertices, size=(count, size)), axis=1)
    while size > 1:
        bad = np.any(chosen[:, 1:] == chosen[:, :-1], axis=1)
        if not bad.any():
            break
        chosen[bad] = np.sort(rng.integers(0, vertices, size=(int(bad.sum()), size)), axis=1)
    return [StreamEdge(sign=1, vertices=tuple(int(v) for v in row)) for row in chosen]


def cmd_bench(config: RunConfig) -> Dict:
    """吞吐量测试"""
    profile = _load_profile(config)
    if config.stream_paths:
        edges = _load_edges(config)
    else:
        edges = synthetic_edges(config.bench_edges, config.bench_edge_size, config.bench_vertices, config.seed_base)
    copies = config.copies or DEFAULT_COPIES
    terms = profile.terms_per_edge()
    terms_total = sum(terms.get(e.size, 0) for e in edges)

    start = time.perf_counter()
    bank = build_bank(profile, edges, copies, config.seed_base, config.limits, config.shards)
    elapsed = time.perf_counter() - start
    return {
        "mode": "bench",
        "estimate": bank_estimate(bank, config.groups),
        "s": copies,
        "seed": config.seed_base,
        "wall_ms": elapsed * 1000.0,
        "edges": len(edges),
        "edges_per_sec": len(edges) / elapsed if elapsed > 0 else float("inf"),
        "terms_per_edge": (terms_total / len(edges) * copies) if edges else 0.0,
    }


COMMANDS = {
    "info": cmd_info,
    "estimate": cmd_estimate,
    "exact": cmd_exact,
    "merge": cmd_merge,
    "bench": cmd_bench,
}


# ---------------------------------------------------------------------------
# 输出
# ---------------------------------------------------------------------------

def print_report(report: Dict, json_lines: bool) -> None:
    if json_lines:
        print(json.dumps(report, ensure_ascii=False))
        return

    mode = report["mode"]
    if mode == "info":
        print(f"t (顶点数): {report['t']}")
        print(f"k (边数): {report['k']}")
        print(f"τ: {report['tau']}")
        print(f"度数: {report['degrees']}")
        print(f"auto(H): {report['auto']}")
        print(f"缩放系数: {report['scale']:.6g} ({report['scale_fraction']})")
        print(f"指数模数 D: {report['exponent_modulus']} (L = {report['degree_lcm']})")
        print(f"每条到达边的项数: {report['terms_per_edge']}")
        if "recommended_copies" in report:
            print(f"推荐副本数: {report['recommended_copies']}")
        if report["warning"]:
            print(f"警告: {report['warning']}")
        return

    label = "精确计数" if mode == "exact" else "估计值"
    print(f"{label}: {report['estimate']}")
    if report.get("s") is not None:
        print(f"副本数 s: {report['s']}")
        print(f"种子: {report['seed']}")
    print(f"边数: {report['edges']}")
    print(f"耗时: {report['wall_ms']:.1f} ms")
    if mode == "bench":
        print(f"吞吐量: {report['edges_per_sec']:.0f} 边/秒")
        print(f"每条边的项数: {report['terms_per_edge']:.0f}")


def _config_from_args(args) -> RunConfig:
    limits = load_limits(Path(args.config) if args.config else None)
    limits = limits.override(max_edge_size=getattr(args, "max_edge_size", None))
    return RunConfig(
        mode=args.command,
        pattern_path=Path(args.pattern) if getattr(args, "pattern", None) else None,
        stream_paths=[Path(p) for p in (getattr(args, "stream", None) or [])],
        copies=getattr(args, "copies", None),
        seed_base=getattr(args, "seed", 0),
        epsilon=getattr(args, "epsilon", None),
        m_bound=getattr(args, "m_bound", None),
        count_lower_bound=getattr(args, "count_lower_bound", 1),
        json_lines=args.json,
        groups=getattr(args, "groups", None),
        shards=getattr(args, "shards", 1),
        save_path=Path(args.save) if getattr(args, "save", None) else None,
        inputs=[Path(p) for p in (getattr(args, "inputs", None) or [])],
        out_path=Path(args.out) if getattr(args, "out", None) else None,
        bench_edges=getattr(args, "bench_edges", 100_000),
        bench_edge_size=getattr(args, "edge_size", 2),
        bench_vertices=getattr(args, "bench_vertices", 1000),
        limits=limits,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcsketch",
        description="hcsketch - 超图模式出现次数的流式估计",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  # 查看模式的常数
  python -m hcsketch info --pattern triangle.txt

  # 流式估计 (100 个副本)
  python -m hcsketch estimate --pattern triangle.txt --stream k4.txt --copies 100 --seed 7

  # 两个站点各自估计后合并
  python -m hcsketch estimate --pattern triangle.txt --stream a.txt --seed 7 --save a.bank
  python -m hcsketch estimate --pattern triangle.txt --stream b.txt --seed 7 --save b.bank
  python -m hcsketch merge --pattern triangle.txt a.bank b.bank --out all.bank
        """,
    )
    parser.add_argument("--json", action="store_true", help="每个结果输出一行JSON")
    parser.add_argument("--config", help="limits.json 路径 (默认 config/limits.json)")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="日志级别 (-v INFO, -vv DEBUG)")

    subparsers = parser.add_subparsers(dest="command", help="可用命令")

    def common(sub, stream_required: bool):
        sub.add_argument("--pattern", "-p", required=True, help="模式文件路径")
        sub.add_argument("--stream", "-s", action="append", required=stream_required, help="流文件路径 (可重复)")
        sub.add_argument("--max-edge-size", type=int, help="最大边长度 (默认: 8)")

    def estimator(sub):
        sub.add_argument("--copies", "-n", type=int, help=f"副本数 s (默认: {DEFAULT_COPIES})")
        sub.add_argument("--seed", type=int, default=0, help="seed_base (默认: 0)")
        sub.add_argument("--groups", type=int, help="中位数-均值的分组数 (默认: 直接平均)")
        sub.add_argument("--shards", type=int, default=1, help="并行分片数 (默认: 1)")

    def accuracy(sub):
        sub.add_argument("--epsilon", type=float, help="目标相对误差 ε，用于推荐副本数")
        sub.add_argument("--m-bound", type=int, help="边数上界 m (默认: 流中净插入边数)")
        sub.add_argument("--count-lower-bound", type=int, default=1, help="#(H,G) 的下界 (默认: 1)")

    info_parser = subparsers.add_parser("info", help="显示模式的常数")
    info_parser.add_argument("--pattern", "-p", required=True, help="模式文件路径")
    accuracy(info_parser)

    estimate_parser = subparsers.add_parser("estimate", help="流式估计出现次数")
    common(estimate_parser, stream_required=False)
    estimator(estimate_parser)
    accuracy(estimate_parser)
    estimate_parser.add_argument("--save", help="把估计器组写入文件")

    exact_parser = subparsers.add_parser("exact", help="暴力精确计数 (小图)")
    common(exact_parser, stream_required=False)

    merge_parser = subparsers.add_parser("merge", help="合并sketch/估计器组文件")
    merge_parser.add_argument("--pattern", "-p", required=True, help="模式文件路径")
    merge_parser.add_argument("inputs", nargs="+", help="输入文件")
    merge_parser.add_argument("--out", "-o", help="合并结果输出路径")
    merge_parser.add_argument("--groups", type=int, help="中位数-均值的分组数")

    bench_parser = subparsers.add_parser("bench", help="吞吐量测试")
    common(bench_parser, stream_required=False)
    estimator(bench_parser)
    bench_parser.add_argument("--bench-edges", type=int, default=100_000, help="合成边数 (默认: 100000)")
    bench_parser.add_argument("--edge-size", type=int, default=2, help="合成边长度 (默认: 2)")
    bench_parser.add_argument("--bench-vertices", type=int, default=1000, help="合成图顶点数 (默认: 1000)")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主入口"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 2

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        config = _config_from_args(args)
        report = COMMANDS[config.mode](config)
    except HcSketchError as exc:
        if args.json:
            print(
                json.dumps(
                    {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code},
                    ensure_ascii=False,
                ),
                file=sys.stderr,
            )
        else:
            print(f"错误 ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"错误: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:
        print(f"运行失败: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 1

    print_report(report, config.json_lines)
    return 0


if __name__ == "__main__":
    sys.exit(main())
