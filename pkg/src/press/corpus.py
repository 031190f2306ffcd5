"""Seeded synthetic grid networks and trajectory corpora.

Trajectories are chains of legs: shortest paths with probability
``sp_bias``, short random walks otherwise, and with probability
``pattern_reuse`` a splice of one sequence from a fixed pool, which gives
the trie something to find. Each trajectory draws from its own
counter-derived stream, so any subset can be regenerated independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import UNITS_PER_METER, RoadNetwork, SPIndex, reconstruct_sp
from .trajectory import Trajectory


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    rows: int = 10
    cols: int = 10
    spacing: float = 100.0
    weight_range: tuple = (110.0, 250.0)
    count: int = 100
    length_range: tuple = (20, 60)
    sp_bias: float = 0.7
    pattern_count: int = 20
    pattern_length: tuple = (3, 6)
    pattern_reuse: float = 0.3
    walk_length: tuple = (2, 6)
    stop_fraction: float = 0.1
    stop_run: tuple = (10, 40)
    sample_interval: float = 5.0
    speed_range: tuple = (5.0, 20.0)

    def __post_init__(self):
        for name in ("sp_bias", "pattern_reuse", "stop_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.stop_fraction >= 1.0:
            raise ValueError("stop_fraction must be below 1")
        for name in ("weight_range", "length_range", "pattern_length", "walk_length", "stop_run", "speed_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo} > {hi}")
        if self.rows < 1 or self.cols < 1 or self.rows * self.cols < 2:
            raise ValueError("grid needs at least two vertices")
        if self.count < 0 or self.length_range[0] < 1:
            raise ValueError("count must be >= 0 and lengths >= 1")
        if self.sample_interval <= 0 or self.speed_range[0] <= 0:
            raise ValueError("sample interval and speeds must be positive")
        if self.weight_range[0] <= 0:
            raise ValueError("weights must be positive")


def _rng(cfg: GenConfig, *stream):
    return np.random.default_rng([cfg.seed & (2**64 - 1), *stream])


def gen_network(cfg: GenConfig) -> RoadNetwork:
    """Lattice with a directed edge each way along every grid link.

    Weights are drawn per directed edge and rounded to centimetres; with the
    default range they are at least the Euclidean length of the edge.
    """
    rng = _rng(cfg, 0)
    vid = lambda r, c: r * cfg.cols + c
    vertices = [(vid(r, c), c * cfg.spacing, r * cfg.spacing) for r in range(cfg.rows) for c in range(cfg.cols)]
    links = []
    for r in range(cfg.rows):
        for c in range(cfg.cols):
            if c + 1 < cfg.cols:
                links.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < cfg.rows:
                links.append((vid(r, c), vid(r + 1, c)))
    lo, hi = cfg.weight_range
    cents = rng.integers(round(lo * 100), round(hi * 100), size=2 * len(links), endpoint=True)
    edges = []
    for k, (u, v) in enumerate(links):
        edges.append((2 * k, u, v, int(cents[2 * k]) * (UNITS_PER_METER // 100)))
        edges.append((2 * k + 1, v, u, int(cents[2 * k + 1]) * (UNITS_PER_METER // 100)))
    return RoadNetwork(vertices, edges)


def _walk(net: RoadNetwork, rng, start: int, steps: int) -> list:
    out = []
    cur = start
    for _ in range(steps):
        succ = net.successors[cur]
        if not succ:
            break
        back = [e for e in succ if net.head[e] != net.tail[cur]]
        choices = back or succ
        cur = int(choices[rng.integers(len(choices))])
        out.append(cur)
    return out


def pattern_pool(net: RoadNetwork, cfg: GenConfig) -> list:
    rng = _rng(cfg, 1)
    pool = []
    for _ in range(cfg.pattern_count):
        start = int(rng.integers(net.n_edges))
        lo, hi = cfg.pattern_length
        walk = _walk(net, rng, start, int(rng.integers(lo, hi, endpoint=True)) - 1)
        pool.append([start] + walk)
    return pool


def _reachable_target(index: SPIndex, rng, src: int):
    for _ in range(32):
        tgt = int(rng.integers(index.n_edges))
        if tgt != src and index.sp_dist_units[src, tgt] >= 0:
            return tgt
    return None


def _one_path(net, index, cfg, pool, rng):
    lo, hi = cfg.length_range
    target_len = int(rng.integers(lo, hi, endpoint=True))
    path = [int(rng.integers(net.n_edges))]
    legs = [path[0]]
    while len(path) < target_len:
        last = path[-1]
        u = rng.random()
        if pool and u < cfg.pattern_reuse:
            pat = pool[int(rng.integers(len(pool)))]
            if pat[0] != last:
                if index.sp_dist_units[last, pat[0]] < 0:
                    continue
                path.extend(reconstruct_sp(index, last, pat[0])[1:])
                legs.append(pat[0])
            path.extend(pat[1:])
        elif rng.random() < cfg.sp_bias:
            tgt = _reachable_target(index, rng, last)
            if tgt is None:
                break
            path.extend(reconstruct_sp(index, last, tgt)[1:])
        else:
            wl, wh = cfg.walk_length
            step = _walk(net, rng, last, int(rng.integers(wl, wh, endpoint=True)))
            if not step:
                break
            path.extend(step)
        if path[-1] != legs[-1]:
            legs.append(path[-1])
    return path, legs


def generate_paths(net: RoadNetwork, index: SPIndex, cfg: GenConfig) -> list:
    """``(path, leg_endpoints)`` per trajectory."""
    pool = pattern_pool(net, cfg) if cfg.pattern_count else []
    return [_one_path(net, index, cfg, pool, _rng(cfg, 2, k)) for k in range(cfg.count)]


def gen_times(net: RoadNetwork, path, cfg: GenConfig, rng) -> list:
    """Sampled (d, t) tuples along ``path`` with inserted stop runs.

    Moving samples come from a piecewise-constant speed with a little
    per-sample jitter. Stop runs (repeats of the previous distance) are then
    inserted so that they make up ``stop_fraction`` of all samples.
    """
    total = net.path_units(path) / UNITS_PER_METER
    dt = float(cfg.sample_interval)
    d = float(rng.uniform(0, 0.5)) * net.weight(path[0])
    moving = [d]
    speed = float(rng.uniform(*cfg.speed_range))
    hold = int(rng.integers(5, 30))
    last_dt = dt
    while True:
        hold -= 1
        if hold <= 0:
            speed = float(rng.uniform(*cfg.speed_range))
            hold = int(rng.integers(5, 30))
        v = speed * float(rng.uniform(0.9, 1.1))
        if d + v * dt >= total:
            last_dt = max(round((total - d) / v, 3), 0.001)
            break
        d += v * dt
        moving.append(d)
    n_stop = round(cfg.stop_fraction * (len(moving) + 1) / (1 - cfg.stop_fraction))
    runs = {}
    slo, shi = cfg.stop_run
    while n_stop > 0:
        k = min(int(rng.integers(slo, shi, endpoint=True)), n_stop)
        at = int(rng.integers(len(moving)))
        runs[at] = runs.get(at, 0) + k
        n_stop -= k
    t = float(rng.integers(0, 86400))
    out = []
    for i, dm in enumerate(moving):
        dd = min(round(dm, 3), total)
        out.append((dd, t))
        for _ in range(runs.get(i, 0)):
            t += dt
            out.append((dd, t))
        t += dt
    out.append((total, round(t - dt + last_dt, 3)))
    return out


def gen_corpus(net: RoadNetwork, index: SPIndex, cfg: GenConfig) -> list:
    pool = pattern_pool(net, cfg) if cfg.pattern_count else []
    out = []
    for k in range(cfg.count):
        rng = _rng(cfg, 2, k)
        path, _ = _one_path(net, index, cfg, pool, rng)
        times = gen_times(net, path, cfg, rng)
        out.append(Trajectory(f"t{k:05d}", path, times))
    return out
