"""Time each hot kernel under the pure-Python and compiled backends.

    python3 benchmarks/bench_kernels.py --rows 12 --cols 12 --count 300
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from press.corpus import GenConfig, gen_network, generate_paths
from press.kernels import available_backends
from press.network import _perturbation, build_sp_index
from press.spatial import fst_encode, sp_compress, train_model


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(args):
    cfg = GenConfig(seed=args.seed, rows=args.rows, cols=args.cols, count=args.count)
    net = gen_network(cfg)
    index = build_sp_index(net)
    paths = [np.asarray(p, dtype=np.int64) for p, _ in generate_paths(net, index, cfg)]
    sps = [np.asarray(sp_compress(p, index), dtype=np.int64) for p in paths]
    model = train_model(sps, index, args.theta, already_compressed=True)
    streams = [fst_encode(sp, model) for sp in sps]
    cb = model.codebook
    wu = np.asarray(net.weight_units, dtype=np.int64)
    perturb = np.array([_perturbation(e) for e in range(net.n_edges)], dtype=np.int64)
    tables = (model._child_ptr, model._child_label, model._child_node, model._link, model._depth)

    def run(mod):
        return {
            "build_sp_tables": lambda: mod.build_sp_tables(net.succ_ptr, net.succ_idx, wu, perturb, net.bbox),
            "sp_compress": lambda: [mod.sp_compress(p, index.sp_end) for p in paths],
            "sp_expand": lambda: [mod.sp_expand(s, index.sp_end) for s in sps],
            "decompose": lambda: [mod.decompose(s, *tables) for s in sps],
            "canonical_decode": lambda: [mod.canonical_decode(c.data, c.bit_count, cb._counts, cb._symbols)
                                         for c in streams],
        }

    return net, run


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rows", type=int, default=10)
    p.add_argument("--cols", type=int, default=10)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--theta", type=int, default=3)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    net, run = workloads(args)
    backends = available_backends()
    print(f"network: {net.n_edges} edges, {args.count} trajectories; backends: {', '.join(backends)}")
    timings = {name: {k: _best(fn, args.repeat) for k, fn in run(mod).items()} for name, mod in backends.items()}
    names = list(backends)
    print(f"{'kernel':<18}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for kernel in timings["python"]:
        row = f"{kernel:<18}" + "".join(f"{timings[n][kernel] * 1e3:>10.2f}ms" for n in names)
        if "cython" in timings:
            row += f"{timings['python'][kernel] / max(timings['cython'][kernel], 1e-9):>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
