#!/usr/bin/env python3
"""
生成测试用的模式文件与流文件
  complete   完全图 K_n 的插入流
  uniform    随机 ℓ-均匀超图 (n 个顶点, m 条边)
  churn      在目标图上混入先插后删的噪声边，最终图不变
可选 --shards 把流按轮转方式拆成多个文件，用于合并测试
"""

import argparse
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

# 添加项目根目录到路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from hcsketch.estimator.sketch import StreamEdge
from hcsketch.estimator.streamio import write_stream


def complete_edges(n, size):
    return [tuple(e) for e in combinations(range(1, n + 1), size)]


def uniform_edges(n, m, size, rng):
    candidates = list(combinations(range(1, n + 1), size))
    if m > len(candidates):
        print(f"错误: {n} 个顶点上最多只有 {len(candidates)} 条 {size}-边")
        sys.exit(1)
    chosen = rng.choice(len(candidates), size=m, replace=False)
    return [candidates[i] for i in sorted(chosen)]


def churn(edges, noise, n, rng):
    stream = [StreamEdge.make(1, e) for e in edges]
    for _ in range(noise):
        size = int(rng.integers(1, 4))
        edge = tuple(int(v) for v in rng.choice(np.arange(1, n + 1), size=min(size, n), replace=False))
        stream.insert(int(rng.integers(0, len(stream) + 1)), StreamEdge.make(1, edge))
        stream.insert(int(rng.integers(0, len(stream) + 1)), StreamEdge.make(-1, edge))
    return stream


def main():
    parser = argparse.ArgumentParser(description="生成超图边流文件")
    parser.add_argument('kind', choices=['complete', 'uniform', 'churn'], help='生成方式')
    parser.add_argument('--out', type=str, required=True, help='输出流文件路径')
    parser.add_argument('--n', type=int, default=4, help='顶点数 (默认4)')
    parser.add_argument('--m', type=int, default=10, help='uniform/churn 的边数 (默认10)')
    parser.add_argument('--edge-size', type=int, default=2, help='边长度 ℓ (默认2)')
    parser.add_argument('--noise', type=int, default=20, help='churn 的噪声边对数 (默认20)')
    parser.add_argument('--seed', type=int, default=0, help='随机种子 (默认0)')
    parser.add_argument('--shards', type=int, default=1, help='拆分成的文件数 (默认1)')
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    if args.kind == 'complete':
        stream = [StreamEdge.make(1, e) for e in complete_edges(args.n, args.edge_size)]
    elif args.kind == 'uniform':
        stream = [StreamEdge.make(1, e) for e in uniform_edges(args.n, args.m, args.edge_size, rng)]
    else:
        stream = churn(uniform_edges(args.n, args.m, args.edge_size, rng), args.noise, args.n, rng)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = f"{args.kind} n={args.n} edge_size={args.edge_size} seed={args.seed}"
    if args.shards <= 1:
        count = write_stream(stream, out, header=header)
        print(f"✅ 写出 {count} 条边: {out}")
        return

    for i in range(args.shards):
        shard_path = out.with_name(f"{out.stem}_{i}{out.suffix}")
        count = write_stream(stream[i::args.shards], shard_path, header=f"{header} shard={i}/{args.shards}")
        print(f"✅ 分片 {i}: {count} 条边 -> {shard_path}")


if __name__ == '__main__':
    main()
