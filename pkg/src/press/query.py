"""where_at / when_at / range on compressed trajectories.

The decoded trie nodes are walked as a stream of units: the first edge, then
for every node the shortest-path hop from the previous node's last edge to
its first edge followed by its internal hops. Per-node distances and
bounding boxes let whole units be skipped; only a unit that can hold the
answer is expanded edge by edge, walking its shortest path forward.

Positions are computed with exact rationals over integer edge weights, and
the reference scans over uncompressed trajectories share the per-edge
helpers, so both sides agree bit for bit whenever the temporal functions
are identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .codec import CompressedTrajectory
from .errors import TrajectoryError
from .network import UNITS_PER_METER, RoadNetwork, SPIndex
from .spatial import FstModel, decode_nodes
from .trajectory import Trajectory, dis_exact, tim_exact

_ENTER, _SKIP, _STOP = 0, 1, 2
DEFAULT_SNAP = 1e-6


@dataclass
class QueryStats:
    nodes_decoded: int = 0
    hops_checked: int = 0
    edges_expanded: int = 0
    edges_scanned: int = 0


@dataclass(frozen=True)
class NetworkPoint:
    edge_id: int
    offset: float
    x: float
    y: float
    distance: float
    d_exact: Fraction = field(repr=False, compare=False, default=Fraction(0))


class QueryIndex:
    """Per-node distances and boxes for one model on one network.

    ``trie_dist_units[n]`` is the weight of ``n``'s decompressed string
    after its first edge; ``trie_mbr[n]`` bounds all of its edges.
    """

    def __init__(self, model: FstModel, index: SPIndex, net: RoadNetwork,
                 trie_dist_units, trie_mbr, snap: float = DEFAULT_SNAP):
        self.model = model
        self.index = index
        self.net = net
        self.trie_dist_units = trie_dist_units
        self.trie_mbr = trie_mbr
        self.snap = snap
        self._wu = net.weight_units
        self._bbox = net.bbox

    def hop_units(self, a: int, b: int) -> int:
        return self._wu[b] if a == b else int(self.index.sp_dist_units[a, b])

    def hop_mbr(self, a: int, b: int):
        return self._bbox[b] if a == b else self.index.sp_mbr[a, b]

    def nbytes(self) -> int:
        return self.trie_dist_units.nbytes + self.trie_mbr.nbytes


def compute_trie_tables(model: FstModel, index: SPIndex, net: RoadNetwork):
    trie = model.trie
    n = trie.n_nodes
    dist = np.full(n, -1, dtype=np.int64)
    mbr = np.full((n, 4), np.nan, dtype=np.float64)
    dist[0] = 0
    wu = net.weight_units
    for node in range(1, n):
        e = trie.label[node]
        if trie.depth[node] == 1:
            dist[node] = 0
            mbr[node] = net.bbox[e]
            continue
        p = trie.parent[node]
        a = trie.label[p]
        h = wu[e] if a == e else int(index.sp_dist_units[a, e])
        if dist[p] < 0 or h < 0:
            continue
        dist[node] = dist[p] + h
        hb = net.bbox[e] if a == e else index.sp_mbr[a, e]
        pb = mbr[p]
        mbr[node] = (min(pb[0], hb[0]), min(pb[1], hb[1]), max(pb[2], hb[2]), max(pb[3], hb[3]))
    return dist, mbr


def build_query_index(model: FstModel, index: SPIndex, net: RoadNetwork, snap: float = DEFAULT_SNAP) -> QueryIndex:
    """Reuse the tables stored on ``model`` or compute and attach them."""
    if model.trie_dist is None or model.trie_mbr is None:
        model.trie_dist, model.trie_mbr = compute_trie_tables(model, index, net)
    return QueryIndex(model, index, net, model.trie_dist, model.trie_mbr, snap)


# -- unit stream ---------------------------------------------------------------


def _drive(ct: CompressedTrajectory, qi: QueryIndex, stats: QueryStats, prune, visit):
    """Walk the units of ``ct``; ``prune`` gates units, ``visit`` sees edges."""
    model, wu = qi.model, qi._wu
    sp_next = qi.index.sp_next
    strings = model.strings
    nodes = decode_nodes(ct.spatial, model)
    if not nodes:
        raise TrajectoryError(f"trajectory {ct.id} has an empty spatial stream")

    def hop(a, b, cum):
        stats.hops_checked += 1
        length = qi.hop_units(a, b)
        if length < 0:
            raise TrajectoryError(f"edges {a} and {b} are not connected")
        act = prune(cum, length, qi.hop_mbr(a, b))
        if act != _ENTER:
            return act, None, cum + length
        if a == b:
            stats.edges_expanded += 1
            return _ENTER, visit(b, cum), cum + length
        x = a
        while x != b:
            x = int(sp_next[x, b])
            stats.edges_expanded += 1
            res = visit(x, cum)
            if res is not None:
                return _ENTER, res, cum
            cum += wu[x]
        return _ENTER, None, cum

    first = strings[nodes[0]][0]
    act = prune(0, wu[first], qi._bbox[first])
    if act == _STOP:
        return None
    if act == _ENTER:
        stats.edges_expanded += 1
        res = visit(first, 0)
        if res is not None:
            return res
    cum = wu[first]
    prev = first
    for j, node in enumerate(nodes):
        stats.nodes_decoded += 1
        s = strings[node]
        if j:
            act, res, cum = hop(prev, s[0], cum)
            if res is not None:
                return res
            if act == _STOP:
                return None
        if len(s) > 1:
            total = int(qi.trie_dist_units[node])
            act = prune(cum, total, qi.trie_mbr[node])
            if act == _STOP:
                return None
            if act == _SKIP:
                cum += total
            else:
                for a, b in zip(s, s[1:]):
                    act, res, cum = hop(a, b, cum)
                    if res is not None:
                        return res
                    if act == _STOP:
                        return None
        prev = s[-1]
    return None


def _scan(traj: Trajectory, net: RoadNetwork, stats: QueryStats, visit):
    cum = 0
    wu = net.weight_units
    for e in traj.path:
        stats.edges_scanned += 1
        res = visit(e, cum)
        if res is not None:
            return res
        cum += wu[e]
    return None


def _scaled(d: Fraction) -> Fraction:
    return d * UNITS_PER_METER


def _inflate(box, pad):
    return box[0] - pad, box[1] - pad, box[2] + pad, box[3] + pad


def _span(times):
    return times[0][1], times[-1][1]


def _check_time(times, t):
    t0, t1 = _span(times)
    if not (t0 <= t <= t1):
        raise TrajectoryError(f"time {t} outside [{t0}, {t1}]")


# -- where_at ----------------------------------------------------------------------


def _where_visitor(net: RoadNetwork, target: Fraction):
    ts = _scaled(target)
    wu = net.weight_units

    def visit(e, start):
        if ts <= start + wu[e]:
            off = target - Fraction(start, UNITS_PER_METER)
            w = Fraction(wu[e], UNITS_PER_METER)
            off = min(max(off, Fraction(0)), w)
            x, y = net.point_at(e, float(off))
            return NetworkPoint(e, float(off), x, y, float(target), target)
        return None

    return ts, visit


def where_at(ct: CompressedTrajectory, t: float, qi: QueryIndex, stats: QueryStats | None = None) -> NetworkPoint:
    """Position on the network at time ``t``."""
    stats = stats if stats is not None else QueryStats()
    _check_time(ct.temporal, t)
    target = dis_exact(ct.temporal, t)
    ts, visit = _where_visitor(qi.net, target)

    def prune(start, length, _mbr):
        return _ENTER if ts <= start + length else _SKIP

    res = _drive(ct, qi, stats, prune, visit)
    if res is None:
        raise TrajectoryError(f"trajectory {ct.id}: distance {float(target)} beyond the path")
    return res


def reference_where_at(traj: Trajectory, t: float, net: RoadNetwork, stats: QueryStats | None = None) -> NetworkPoint:
    stats = stats if stats is not None else QueryStats()
    _check_time(traj.times, t)
    target = dis_exact(traj.times, t)
    _, visit = _where_visitor(net, target)
    res = _scan(traj, net, stats, visit)
    if res is None:
        raise TrajectoryError(f"trajectory {traj.id}: distance {float(target)} beyond the path")
    return res


# -- when_at -----------------------------------------------------------------------


def locate_on_segment(seg, px, py, snap):
    """Fraction along ``seg`` of the closest point to p, or None if farther than snap."""
    x0, y0, x1, y1 = seg
    dx, dy = x1 - x0, y1 - y0
    ll = dx * dx + dy * dy
    if ll == 0:
        return 0.0 if math.hypot(px - x0, py - y0) <= 0 else None
    r = ((px - x0) * dx + (py - y0) * dy) / ll
    r = min(max(r, 0.0), 1.0)
    gap = math.hypot(px - (x0 + r * dx), py - (y0 + r * dy))
    return r if gap <= snap * math.sqrt(ll) else None


def _when_visitor(net: RoadNetwork, times, px, py, snap):
    lo, hi = Fraction(times[0][0]), Fraction(times[-1][0])
    wu = net.weight_units

    def visit(e, start):
        r = locate_on_segment(net.seg[e], px, py, snap)
        if r is None:
            return None
        d = Fraction(start, UNITS_PER_METER) + Fraction(r) * Fraction(wu[e], UNITS_PER_METER)
        if lo <= d <= hi:
            return d
        return None

    return _scaled(lo), _scaled(hi), visit


def when_at(ct: CompressedTrajectory, p, qi: QueryIndex, stats: QueryStats | None = None,
            use_filters: bool = True, exact: bool = False):
    """Earliest time at which the trajectory passes point ``p``."""
    stats = stats if stats is not None else QueryStats()
    px, py = float(p[0]), float(p[1])
    lo, hi, visit = _when_visitor(qi.net, ct.temporal, px, py, qi.snap)
    pad = qi.snap * qi.net.max_segment_length

    def prune(start, length, mbr):
        if start > hi:
            return _STOP
        if start + length < lo:
            return _SKIP
        if use_filters:
            b = _inflate(mbr, pad)
            if not (b[0] <= px <= b[2] and b[1] <= py <= b[3]):
                return _SKIP
        return _ENTER

    d = _drive(ct, qi, stats, prune, visit)
    if d is None:
        raise TrajectoryError(f"point ({px}, {py}) is not on trajectory {ct.id}")
    t = tim_exact(ct.temporal, d)
    return t if exact else float(t)


def reference_when_at(traj: Trajectory, p, net: RoadNetwork, stats: QueryStats | None = None,
                      snap: float = DEFAULT_SNAP, exact: bool = False):
    stats = stats if stats is not None else QueryStats()
    px, py = float(p[0]), float(p[1])
    _, _, visit = _when_visitor(net, traj.times, px, py, snap)
    d = _scan(traj, net, stats, visit)
    if d is None:
        raise TrajectoryError(f"point ({px}, {py}) is not on trajectory {traj.id}")
    t = tim_exact(traj.times, d)
    return t if exact else float(t)


# -- range -------------------------------------------------------------------------


def segment_hits_rect(x0, y0, x1, y1, rect) -> bool:
    """Closed segment vs closed axis-aligned rectangle (Liang-Barsky clip)."""
    xmin, ymin, xmax, ymax = rect
    dx, dy = x1 - x0, y1 - y0
    u0, u1 = 0.0, 1.0
    for p, q in ((-dx, x0 - xmin), (dx, xmax - x0), (-dy, y0 - ymin), (dy, ymax - y0)):
        if p == 0:
            if q < 0:
                return False
        else:
            r = q / p
            if p < 0:
                if r > u1:
                    return False
                u0 = max(u0, r)
            else:
                if r < u0:
                    return False
                u1 = min(u1, r)
    return u0 <= u1


def _range_visitor(net: RoadNetwork, d1: Fraction, d2: Fraction, rect):
    wu = net.weight_units
    s1, s2 = _scaled(d1), _scaled(d2)

    def visit(e, start):
        end = start + wu[e]
        if end < s1 or start > s2:
            return None
        w = wu[e]
        r0 = float((max(s1, start) - start) / w)
        r1 = float((min(s2, end) - start) / w)
        x0, y0, x1, y1 = net.seg[e]
        dx, dy = x1 - x0, y1 - y0
        if segment_hits_rect(x0 + dx * r0, y0 + dy * r0, x0 + dx * r1, y0 + dy * r1, rect):
            return True
        return None

    return s1, s2, visit


def _range_bounds(times, t1, t2):
    if not t1 < t2:
        raise TrajectoryError(f"empty interval [{t1}, {t2}]")
    _check_time(times, t1)
    _check_time(times, t2)
    return dis_exact(times, t1), dis_exact(times, t2)


def _rect(rect):
    r = tuple(float(v) for v in rect)
    if len(r) != 4 or r[0] > r[2] or r[1] > r[3]:
        raise ValueError(f"bad rectangle {rect!r}")
    return r


def range_query(ct: CompressedTrajectory, t1: float, t2: float, rect, qi: QueryIndex,
                stats: QueryStats | None = None, use_filters: bool = True) -> bool:
    """True if the trajectory is inside ``rect`` at some time in ``[t1, t2]``."""
    stats = stats if stats is not None else QueryStats()
    rect = _rect(rect)
    d1, d2 = _range_bounds(ct.temporal, t1, t2)
    s1, s2, visit = _range_visitor(qi.net, d1, d2, rect)

    def prune(start, length, mbr):
        if start > s2:
            return _STOP
        if start + length < s1:
            return _SKIP
        if use_filters and (mbr[2] < rect[0] or mbr[0] > rect[2] or mbr[3] < rect[1] or mbr[1] > rect[3]):
            return _SKIP
        return _ENTER

    return bool(_drive(ct, qi, stats, prune, visit))


def reference_range(traj: Trajectory, t1: float, t2: float, rect, net: RoadNetwork,
                    stats: QueryStats | None = None) -> bool:
    stats = stats if stats is not None else QueryStats()
    rect = _rect(rect)
    d1, d2 = _range_bounds(traj.times, t1, t2)
    _, _, visit = _range_visitor(net, d1, d2, rect)
    return bool(_scan(traj, net, stats, visit))
