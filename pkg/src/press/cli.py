"""Command-line driver: ``press gen|train|compress|decompress|query|stats``.

Exit codes: 0 success, 1 usage, 2 data error, 3 model mismatch.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

from . import kernels
from .codec import compress_trajectory, decompress_trajectory
from .corpus import GenConfig, gen_corpus, gen_network
from .errors import ModelMismatchError, PressError
from .formats import load_compressed, load_model, load_queries, model_to_bytes, save_compressed, save_model
from .network import build_sp_index, load_network, load_sp_index, save_network, save_sp_index
from .query import (build_query_index, range_query, reference_range, reference_when_at,
                    reference_where_at, when_at, where_at)
from .spatial import train_model
from .stats import GRID, bounds_sweep, compress_stats, greedy_vs_dp, theta_sweep, to_csv
from .temporal import BtcConfig
from .trajectory import load_trajectories, save_trajectories, validate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _out(path):
    return open(path, "w") if path else contextlib.nullcontext(sys.stdout)


def _index_for(net, model_path):
    """SP tables, reusing ``<model>.spx`` when it was built for this network."""
    cache = Path(str(model_path) + ".spx") if model_path else None
    if cache is not None and cache.exists():
        idx = load_sp_index(cache, net)
        if idx is not None:
            return idx
    return build_sp_index(net)


def _load_stack(args):
    net = load_network(args.network)
    model, sha = load_model(args.model)
    if model.network_digest != net.digest():
        raise ModelMismatchError(f"model {args.model} was trained on a different network")
    return net, model, sha, _index_for(net, args.model)


def _checked(trajs, net):
    for tr in trajs:
        validate(tr, net).raise_if_invalid(f"trajectory {tr.id}: ")
    return trajs


def cmd_gen(args):
    cfg = GenConfig(
        seed=args.seed, rows=args.rows, cols=args.cols, count=args.count,
        length_range=(args.min_len, args.max_len), sp_bias=args.sp_bias,
        pattern_count=args.pattern_count, pattern_reuse=args.pattern_reuse,
        stop_fraction=args.stop_fraction, sample_interval=args.interval,
    )
    net = gen_network(cfg)
    corpus = gen_corpus(net, build_sp_index(net), cfg)
    save_network(net, args.network)
    save_trajectories(corpus, args.out)
    print(f"wrote {net.n_edges} edges to {args.network} and {len(corpus)} trajectories to {args.out}")
    return EXIT_OK


def cmd_train(args):
    net = load_network(args.network)
    trajs = _checked(load_trajectories(args.corpus), net)
    if not trajs:
        raise PressError("training corpus is empty")
    if args.theta < 1:
        raise PressError("--theta must be at least 1")
    idx = build_sp_index(net)
    model = train_model([t.path for t in trajs], idx, args.theta)
    build_query_index(model, idx, net)
    save_model(model, args.out)
    save_sp_index(idx, str(args.out) + ".spx")
    print(f"trained on {len(trajs)} trajectories: theta={args.theta} nodes={model.trie.n_nodes - 1} -> {args.out}")
    return EXIT_OK


def cmd_compress(args):
    net, model, sha, idx = _load_stack(args)
    trajs = _checked(load_trajectories(args.corpus), net)
    cfg = BtcConfig(args.tsnd, args.nstd)
    records = [compress_trajectory(t, idx, model, cfg) for t in trajs]
    save_compressed(records, sha, args.out)
    st = compress_stats(trajs, idx, model, cfg)
    with _out(args.stats) as fh:
        fh.write(to_csv(st.rows(), ["metric", "value"]))
    return EXIT_OK


def cmd_decompress(args):
    net, model, sha, idx = _load_stack(args)
    records = load_compressed(args.compressed, sha)
    save_trajectories([decompress_trajectory(ct, idx, model) for ct in records], args.out)
    print(f"decompressed {len(records)} trajectories -> {args.out}")
    return EXIT_OK


def _fmt_point(p):
    return f"edge={p.edge_id} offset={p.offset!r} x={p.x!r} y={p.y!r}"


def _run_query(q, ct, qi, ref, net):
    if q.kind == "WHEREAT":
        got = where_at(ct, q.args[0], qi)
        out = _fmt_point(got)
        if ref is not None:
            want = reference_where_at(ref, q.args[0], net)
            err = abs(float(got.d_exact - want.d_exact))
            out += f"\tref={_fmt_point(want)}\terr={err!r}\tagree={int(got == want)}"
    elif q.kind == "WHENAT":
        got = when_at(ct, q.args, qi)
        out = f"t={got!r}"
        if ref is not None:
            want = reference_when_at(ref, q.args, net, snap=qi.snap)
            out += f"\tref=t={want!r}\terr={abs(got - want)!r}\tagree={int(got == want)}"
    else:
        t1, t2 = q.args[:2]
        got = range_query(ct, t1, t2, q.args[2:], qi)
        out = str(got).lower()
        if ref is not None:
            want = reference_range(ref, t1, t2, q.args[2:], net)
            out += f"\tref={str(want).lower()}\tagree={int(got == want)}"
    return out


def cmd_query(args):
    net, model, sha, idx = _load_stack(args)
    records = {ct.id: ct for ct in load_compressed(args.compressed, sha)}
    queries = load_queries(args.queries)
    refs = None
    if args.reference:
        if args.reference is True:
            refs = {i: decompress_trajectory(ct, idx, model) for i, ct in records.items()}
        else:
            refs = {t.id: t for t in load_trajectories(args.reference)}
    qi = build_query_index(model, idx, net)
    for q in queries:
        if q.traj_id not in records:
            raise PressError(f"line {q.line}: unknown trajectory id {q.traj_id!r}")
    failed = 0
    with _out(args.out) as fh:
        for q in queries:
            ref = refs.get(q.traj_id) if refs is not None else None
            try:
                res = _run_query(q, records[q.traj_id], qi, ref, net)
            except PressError as exc:
                failed += 1
                res = f"ERROR {exc}"
            fh.write(f"{q.text}\t{res}\n")
    return EXIT_DATA if failed else EXIT_OK


def cmd_stats(args):
    net, model, sha, idx = _load_stack(args)
    qi = build_query_index(model, idx, net)
    with _out(args.out) as fh:
        fh.write("# table: model\n")
        fh.write(to_csv([
            ("theta", model.trie.theta),
            ("trie_nodes", model.trie.n_nodes - 1),
            ("model_bytes", len(model_to_bytes(model))),
            ("sp_table_bytes", idx.nbytes()),
            ("trie_table_bytes", qi.nbytes()),
            ("kernel_backend", kernels.BACKEND),
        ], ["metric", "value"]))
        if args.compressed:
            records = load_compressed(args.compressed, sha)
            edges = bits = tuples = 0
            for ct in records:
                edges += len(decompress_trajectory(ct, idx, model).path)
                bits += ct.spatial.bit_count
                tuples += len(ct.temporal)
            fh.write("\n# table: compressed_file\n")
            fh.write(to_csv([
                ("trajectories", len(records)),
                ("edges", edges),
                ("bits", bits),
                ("tuples_kept", tuples),
                ("spatial_ratio", f"{32 * edges / bits:.6f}" if bits else "N/A"),
            ], ["metric", "value"]))
        if args.corpus:
            trajs = _checked(load_trajectories(args.corpus), net)
            cfg = BtcConfig(args.tsnd, args.nstd)
            fh.write("\n# table: compression\n")
            fh.write(to_csv(compress_stats(trajs, idx, model, cfg).rows(), ["metric", "value"]))
            half = max(1, len(trajs) // 2)
            train, test = trajs[:half], trajs[half:] or trajs[:half]
            fh.write("\n# table: theta_sweep\n")
            fh.write(to_csv(theta_sweep([t.path for t in train], [t.path for t in test], idx, args.thetas)))
            fh.write("\n# table: bounds_sweep\n")
            fh.write(to_csv(bounds_sweep([t.times for t in trajs], args.tsnd_grid, args.nstd_grid)))
            _, summary = greedy_vs_dp([t.path for t in trajs], idx, model)
            fh.write("\n# table: greedy_vs_dp\n")
            fh.write(to_csv([summary]))
    return EXIT_OK


def build_parser():
    p = _Parser(prog="press", description="Compress and query road-network trajectories.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        sp.add_argument("--network", required=True, help="network text file")
        if model:
            sp.add_argument("--model", required=True, help="model file from 'press train'")

    g = sub.add_parser("gen", help="generate a synthetic grid network and corpus")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--rows", type=int, default=10)
    g.add_argument("--cols", type=int, default=10)
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--min-len", type=int, default=20)
    g.add_argument("--max-len", type=int, default=60)
    g.add_argument("--sp-bias", type=float, default=0.7)
    g.add_argument("--pattern-count", type=int, default=20)
    g.add_argument("--pattern-reuse", type=float, default=0.3)
    g.add_argument("--stop-fraction", type=float, default=0.1)
    g.add_argument("--interval", type=float, default=5.0, help="sampling interval in seconds")
    g.add_argument("--network", required=True, help="output network file")
    g.add_argument("--out", required=True, help="output trajectory file")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="mine a model from a trajectory corpus")
    common(t, model=False)
    t.add_argument("corpus")
    t.add_argument("--theta", type=int, default=3)
    t.add_argument("--out", required=True, help="output model file")
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("compress", help="compress a trajectory corpus")
    common(c)
    c.add_argument("corpus")
    c.add_argument("--tsnd", type=float, default=0.0, help="distance bound in metres")
    c.add_argument("--nstd", type=float, default=0.0, help="time bound in seconds")
    c.add_argument("--out", required=True)
    c.add_argument("--stats", help="write the stats table here instead of stdout")
    c.set_defaults(func=cmd_compress)

    d = sub.add_parser("decompress", help="restore a trajectory corpus")
    common(d)
    d.add_argument("compressed")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decompress)

    q = sub.add_parser("query", help="run a query batch on a compressed corpus")
    common(q)
    q.add_argument("compressed")
    q.add_argument("queries")
    q.add_argument("--reference", nargs="?", const=True, default=None, metavar="CORPUS",
                   help="also answer on uncompressed data (decompressed, or the given corpus)")
    q.add_argument("--out")
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("stats", help="ratios, sweeps and structure sizes as CSV")
    common(s)
    s.add_argument("compressed", nargs="?")
    s.add_argument("--corpus", help="original corpus for sweeps")
    s.add_argument("--tsnd", type=float, default=0.0)
    s.add_argument("--nstd", type=float, default=0.0)
    s.add_argument("--thetas", type=_ints, default=[1, 2, 3, 4, 5, 6])
    s.add_argument("--tsnd-grid", type=_floats, default=list(GRID))
    s.add_argument("--nstd-grid", type=_floats, default=list(GRID))
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelMismatchError as exc:
        print(f"press: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (PressError, ValueError, OSError) as exc:
        print(f"press: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
