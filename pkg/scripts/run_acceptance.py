#!/usr/bin/env python3
"""
Monte-Carlo 验收脚本
对每个小规模样例，用 N 个副本的估计器组与暴力精确计数对比，
再测量副本数 100 与 400 时 Z* 的方差比，以及 bench 吞吐量
"""

import argparse
import json
import sys
import tempfile
import time
from itertools import combinations
from pathlib import Path

import numpy as np

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from hcsketch.cli import RunConfig, cmd_bench
from hcsketch.estimator.bank import EstimatorBank, bank_query_values, bank_update_many
from hcsketch.estimator.pattern import Hypergraph, build_pattern_profile, exact_count
from hcsketch.estimator.sketch import StreamEdge


def random_uniform(n, m, size, seed):
    rng = np.random.default_rng(seed)
    candidates = list(combinations(range(n), size))
    chosen = rng.choice(len(candidates), size=m, replace=False)
    return Hypergraph.from_edges(candidates[i] for i in sorted(chosen))


def fixtures(seed):
    triangle = Hypergraph.from_edges([(1, 2), (2, 3), (1, 3)])
    k4 = Hypergraph.from_edges(combinations(range(1, 5), 2))
    k5 = Hypergraph.from_edges(combinations(range(1, 6), 2))
    single = Hypergraph.from_edges([(1, 2)])
    fan = Hypergraph.from_edges([(0, 1, 2), (0, 1, 3), (0, 2, 3)])
    return [
        ("triangle/K4", triangle, k4),
        ("triangle/K5", triangle, k5),
        ("edge/7-edge graph", single, random_uniform(6, 7, 2, seed)),
        ("fan/3-uniform G", fan, random_uniform(6, 12, 3, seed + 1)),
    ]


def query_values(profile, edges, copies, seed_base, batch):
    values = []
    for start in range(0, copies, batch):
        bank = EstimatorBank(profile, min(batch, copies - start), seed_base + start)
        bank_update_many(bank, edges)
        values.append(bank_query_values(bank))
    return np.concatenate(values)


def check_unbiased(name, h, g, copies, seed_base, batch):
    profile = build_pattern_profile(h)
    expected = exact_count(h, g)
    edges = [StreamEdge.make(1, e) for e in g.edges]
    start = time.perf_counter()
    values = query_values(profile, edges, copies, seed_base, batch)
    elapsed = time.perf_counter() - start
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(values.size))
    passed = abs(mean - expected) <= 4 * stderr
    mark = "✅" if passed else "❌"
    print(f"{mark} {name:<20} exact={expected:<4} mean={mean:9.4f}  4σ/√N={4 * stderr:.4f}  {elapsed:.1f}s")
    return {"name": name, "exact": expected, "mean": mean, "stderr": stderr, "passed": passed, "seconds": elapsed}


def check_variance(trials, seed_base, batch):
    triangle = Hypergraph.from_edges([(1, 2), (2, 3), (1, 3)])
    profile = build_pattern_profile(triangle)
    edges = [StreamEdge.make(1, e) for e in combinations(range(1, 5), 2)]
    variances = {}
    for copies in (100, 400):
        values = query_values(profile, edges, copies * trials, seed_base, batch)
        variances[copies] = float(np.var(values.reshape(trials, copies).mean(axis=1), ddof=1))
        seed_base += copies * trials
    ratio = variances[100] / variances[400]
    passed = 3.0 <= ratio <= 5.5
    mark = "✅" if passed else "❌"
    print(f"{mark} 方差比 Var(Z*_100)/Var(Z*_400) = {ratio:.3f} (理想值 4, {trials} 组)")
    return {"ratio": ratio, "trials": trials, "passed": passed}


def main():
    parser = argparse.ArgumentParser(description="Monte-Carlo 验收")
    parser.add_argument('--copies', type=int, default=100_000, help='每个样例的副本数 N (默认100000)')
    parser.add_argument('--seed', type=int, default=1, help='seed_base (默认1)')
    parser.add_argument('--batch', type=int, default=20_000, help='每个估计器组的副本数 (默认20000)')
    parser.add_argument('--trials', type=int, default=1000, help='方差比的独立组数 (默认1000)')
    parser.add_argument('--skip-variance', action='store_true', help='跳过方差比测量')
    parser.add_argument('--out', type=str, help='把结果写成JSON')
    args = parser.parse_args()

    print("\n=== 无偏性 ===")
    results = [
        check_unbiased(name, h, g, args.copies, args.seed + i * args.copies, args.batch)
        for i, (name, h, g) in enumerate(fixtures(args.seed))
    ]

    variance = None
    if not args.skip_variance:
        print("\n=== 方差随副本数缩放 ===")
        variance = check_variance(args.trials, args.seed, args.batch)

    print("\n=== 吞吐量 (仅报告) ===")
    with tempfile.TemporaryDirectory() as tmp:
        pattern_path = Path(tmp) / "edge.txt"
        pattern_path.write_text("1 2\n", encoding="utf-8")
        bench = cmd_bench(RunConfig(mode="bench", pattern_path=pattern_path, copies=100, bench_edges=100_000))
    print(f"{bench['edges_per_sec']:.0f} 边/秒 (s=100, ℓ=2)")

    passed = all(r["passed"] for r in results) and (variance is None or variance["passed"])
    if args.out:
        report = {"unbiased": results, "variance": variance, "bench_edges_per_sec": bench["edges_per_sec"]}
        Path(args.out).write_text(json.dumps(report, ensure_ascii=False, indent=2), encoding="utf-8")
        print(f"\n结果已保存到: {args.out}")

    print("\n=== 完成 ===" if passed else "\n=== 存在未通过的项目 ===")
    sys.exit(0 if passed else 1)


if __name__ == '__main__':
    main()
