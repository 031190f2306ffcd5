"""Compression ratios, parameter sweeps and CSV tables.

Byte baseline: an uncompressed trajectory costs 4 bytes per edge id plus
16 bytes per (d, t) tuple; a compressed one costs its spatial bitstream
rounded up to whole bytes plus 16 bytes per kept tuple. The model is
accounted for separately. Element-count ratios are reported alongside:
``alpha`` = edges / SP-compressed edges, ``gamma`` = 32-bit edge ids over
Huffman bits, ``beta`` = tuples in / tuples out.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

from .network import SPIndex
from .spatial import FstModel, decompose, fst_encode, optimal_nodes, sp_compress, train_model
from .temporal import BtcConfig, btc_compress

EDGE_BYTES = 4
TUPLE_BYTES = 16
GRID = (0, 10, 20, 50, 100, 200, 400, 600, 800, 1000)


def _ratio(a, b):
    return a / b if b else None


@dataclass
class CompressionStats:
    trajectories: int = 0
    edges: int = 0
    sp_edges: int = 0
    bits: int = 0
    tuples_in: int = 0
    tuples_out: int = 0
    bytes_in: int = 0
    bytes_out: int = 0
    seconds: dict = field(default_factory=lambda: {"sp": 0.0, "fst": 0.0, "btc": 0.0})

    def add(self, n_edges, n_sp_edges, bits, n_tuples, n_kept):
        self.trajectories += 1
        self.edges += n_edges
        self.sp_edges += n_sp_edges
        self.bits += bits
        self.tuples_in += n_tuples
        self.tuples_out += n_kept
        self.bytes_in += EDGE_BYTES * n_edges + TUPLE_BYTES * n_tuples
        self.bytes_out += (bits + 7) // 8 + TUPLE_BYTES * n_kept

    @property
    def alpha(self):
        return _ratio(self.edges, self.sp_edges)

    @property
    def gamma(self):
        return _ratio(32 * self.sp_edges, self.bits)

    @property
    def spatial(self):
        return _ratio(32 * self.edges, self.bits)

    @property
    def beta(self):
        return _ratio(self.tuples_in, self.tuples_out)

    @property
    def overall(self):
        return _ratio(self.bytes_in, self.bytes_out)

    def rows(self):
        fmt = lambda v: "N/A" if v is None else f"{v:.6f}"
        return [
            ("trajectories", self.trajectories),
            ("edges", self.edges),
            ("sp_edges", self.sp_edges),
            ("bits", self.bits),
            ("tuples_in", self.tuples_in),
            ("tuples_out", self.tuples_out),
            ("bytes_in", self.bytes_in),
            ("bytes_out", self.bytes_out),
            ("alpha", fmt(self.alpha)),
            ("gamma", fmt(self.gamma)),
            ("spatial_ratio", fmt(self.spatial)),
            ("beta", fmt(self.beta)),
            ("overall_ratio", fmt(self.overall)),
            ("baseline", "4B/edge + 16B/tuple vs ceil(bits/8) + 16B/kept tuple"),
        ] + [(f"seconds_{k}", f"{v:.6f}") for k, v in self.seconds.items()]


def compress_stats(trajs, index: SPIndex, model: FstModel, cfg: BtcConfig) -> CompressionStats:
    st = CompressionStats()
    clock = time.perf_counter
    for tr in trajs:
        t0 = clock()
        sp = sp_compress(tr.path, index)
        t1 = clock()
        bits = fst_encode(sp, model).bit_count
        t2 = clock()
        kept = btc_compress(tr.times, cfg)
        t3 = clock()
        st.seconds["sp"] += t1 - t0
        st.seconds["fst"] += t2 - t1
        st.seconds["btc"] += t3 - t2
        st.add(len(tr.path), len(sp), bits, len(tr.times), len(kept))
    return st


def theta_sweep(train_paths, test_paths, index: SPIndex, thetas):
    """FST ratio per theta, trained on ``train_paths`` and measured on ``test_paths``."""
    train_sp = [sp_compress(p, index) for p in train_paths]
    test_sp = [sp_compress(p, index) for p in test_paths]
    n_sp = sum(len(p) for p in test_sp)
    rows = []
    for theta in thetas:
        model = train_model(train_sp, index, theta, already_compressed=True)
        bits = sum(fst_encode(p, model).bit_count for p in test_sp)
        rows.append({"theta": theta, "nodes": model.trie.n_nodes - 1, "bits": bits,
                     "gamma": _ratio(32 * n_sp, bits)})
    return rows


def bounds_sweep(times_list, taus=GRID, etas=GRID):
    """Temporal ratio per (tau, eta) pair."""
    n_in = sum(len(t) for t in times_list)
    rows = []
    for tau in taus:
        for eta in etas:
            cfg = BtcConfig(tau, eta)
            n_out = sum(len(btc_compress(t, cfg)) for t in times_list)
            rows.append({"tau": tau, "eta": eta, "tuples_out": n_out, "beta": _ratio(n_in, n_out)})
    return rows


def greedy_vs_dp(paths, index: SPIndex, model: FstModel):
    """Per-path greedy and optimal bit counts, plus corpus summary."""
    per = []
    for p in paths:
        sp = sp_compress(p, index)
        g = model.codebook.bit_length(decompose(model, sp))
        d = model.codebook.bit_length(optimal_nodes(sp, model))
        per.append((g, d))
    total_g = sum(g for g, _ in per)
    total_d = sum(d for _, d in per)
    summary = {
        "paths": len(per),
        "greedy_bits": total_g,
        "dp_bits": total_d,
        "equal_rate": _ratio(sum(1 for g, d in per if g == d), len(per)),
        "gap": (total_g / total_d - 1) if total_d else None,
    }
    return per, summary


def to_csv(rows, columns=None) -> str:
    buf = io.StringIO()
    if rows and isinstance(rows[0], dict):
        columns = columns or list(rows[0])
        w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: "N/A" if r[k] is None else r[k] for k in columns})
    else:
        w = csv.writer(buf, lineterminator="\n")
        if columns:
            w.writerow(columns)
        w.writerows(rows)
    return buf.getvalue()
