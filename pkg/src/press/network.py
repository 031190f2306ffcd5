"""Road networks and the all-pairs edge-to-edge shortest-path index.

Edge weights are held as integer micrometres so that every distance sum in
the library is exact; :func:`to_meters` is the single conversion back to
floating point.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from . import kernels
from .errors import FormatError, NetworkError, UnreachableError

UNITS_PER_METER = 1_000_000
NONE = -1


def to_meters(units: int) -> float:
    return units / UNITS_PER_METER


def to_units(meters) -> int:
    """Round a distance in metres to integer micrometres (half-even)."""
    try:
        q = Decimal(str(meters)) * UNITS_PER_METER
    except InvalidOperation as exc:
        raise ValueError(f"not a number: {meters!r}") from exc
    if not q.is_finite():
        raise ValueError(f"not a finite distance: {meters!r}")
    return int(q.quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


def format_units(units: int) -> str:
    whole, frac = divmod(units, UNITS_PER_METER)
    if not frac:
        return str(whole)
    return f"{whole}.{frac:06d}".rstrip("0")


def _perturbation(edge_id: int) -> int:
    # splitmix64 finaliser, top 30 bits: an additive tie-break key per edge
    z = (edge_id + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    z ^= z >> 31
    return z >> 34


class RoadNetwork:
    """Directed road graph with straight-segment edge geometry.

    ``vertices`` is an iterable of ``(vertex_id, x, y)`` and ``edges`` of
    ``(edge_id, from_vertex, to_vertex, weight_m)``; edge ids must be exactly
    ``0..len(edges)-1``. Instances are immutable.
    """

    __slots__ = (
        "_xy", "tail", "head", "weight_units", "successors", "out_edges",
        "seg", "bbox", "succ_ptr", "succ_idx", "max_segment_length", "_digest",
    )

    def __init__(self, vertices, edges):
        xy = {}
        for vid, x, y in vertices:
            vid = int(vid)
            if vid in xy:
                raise NetworkError(f"duplicate vertex {vid}")
            xy[vid] = (float(x), float(y))
        rows = sorted((int(e[0]), e) for e in edges)
        n = len(rows)
        if [r[0] for r in rows] != list(range(n)):
            raise NetworkError("edge ids must be the dense range 0..|E|-1")
        tail, head, wu = [], [], []
        for eid, (_, u, v, w) in rows:
            u, v = int(u), int(v)
            for end in (u, v):
                if end not in xy:
                    raise NetworkError(f"edge {eid} references missing vertex {end}")
            units = w if isinstance(w, int) and not isinstance(w, bool) else to_units(w)
            if units <= 0:
                raise NetworkError(f"edge {eid}: non-positive weight {w}")
            tail.append(u)
            head.append(v)
            wu.append(units)
        self._xy = xy
        self.tail = tuple(tail)
        self.head = tuple(head)
        self.weight_units = tuple(wu)
        out = {vid: [] for vid in xy}
        for e in range(n):
            out[tail[e]].append(e)
        self.out_edges = {vid: tuple(es) for vid, es in out.items()}
        self.successors = tuple(self.out_edges[head[e]] for e in range(n))
        seg = []
        for e in range(n):
            x0, y0 = xy[tail[e]]
            x1, y1 = xy[head[e]]
            seg.append((x0, y0, x1, y1))
        self.seg = tuple(seg)
        box = np.array(
            [(min(s[0], s[2]), min(s[1], s[3]), max(s[0], s[2]), max(s[1], s[3])) for s in seg],
            dtype=np.float64,
        ).reshape(n, 4)
        box.flags.writeable = False
        self.bbox = box
        ptr = np.zeros(n + 1, dtype=np.int32)
        ptr[1:] = np.cumsum([len(s) for s in self.successors], dtype=np.int64)
        idx = np.fromiter((v for s in self.successors for v in s), dtype=np.int32, count=int(ptr[-1]))
        ptr.flags.writeable = False
        idx.flags.writeable = False
        self.succ_ptr = ptr
        self.succ_idx = idx
        self.max_segment_length = max((math.hypot(s[2] - s[0], s[3] - s[1]) for s in seg), default=0.0)
        self._digest = None

    @property
    def n_edges(self) -> int:
        return len(self.tail)

    @property
    def vertices(self):
        return [(vid, x, y) for vid, (x, y) in sorted(self._xy.items())]

    def xy(self, vertex_id):
        return self._xy[vertex_id]

    def weight(self, edge_id: int) -> float:
        return to_meters(self.weight_units[edge_id])

    def check_edge(self, edge_id) -> int:
        if not isinstance(edge_id, (int, np.integer)) or not 0 <= edge_id < self.n_edges:
            raise NetworkError(f"edge {edge_id!r} is not in the network")
        return int(edge_id)

    def adjacent(self, a: int, b: int) -> bool:
        """True if edge ``b`` can directly follow edge ``a``."""
        return self.head[a] == self.tail[b]

    def path_units(self, path) -> int:
        """Total weight of ``path`` in micrometres, every edge included."""
        wu = self.weight_units
        return sum(wu[e] for e in path)

    def point_at(self, edge_id: int, offset: float):
        """Coordinates at ``offset`` metres from the edge's tail."""
        x0, y0, x1, y1 = self.seg[edge_id]
        w = self.weight(edge_id)
        return x0 + (x1 - x0) * offset / w, y0 + (y1 - y0) * offset / w

    def digest(self) -> bytes:
        if self._digest is None:
            h = hashlib.sha256()
            for vid, (x, y) in sorted(self._xy.items()):
                h.update(f"V {vid} {x!r} {y!r}\n".encode())
            for e in range(self.n_edges):
                h.update(f"E {e} {self.tail[e]} {self.head[e]} {self.weight_units[e]}\n".encode())
            self._digest = h.digest()
        return self._digest

    def __eq__(self, other):
        return isinstance(other, RoadNetwork) and self.digest() == other.digest()

    def __hash__(self):
        return hash(self.digest())

    def __repr__(self):
        return f"RoadNetwork(|V|={len(self._xy)}, |E|={self.n_edges})"


def parse_network(text: str, source=None) -> RoadNetwork:
    """Parse the ``V <id> <x> <y>`` / ``E <id> <from> <to> <weight>`` format."""
    vertices, edges = [], []
    seen_v, seen_e = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        try:
            if tag == "V" and len(parts) == 4:
                vid = int(parts[1])
                if vid in seen_v:
                    raise FormatError(f"duplicate vertex {vid}", lineno, source)
                seen_v.add(vid)
                vertices.append((vid, float(parts[2]), float(parts[3])))
            elif tag == "E" and len(parts) == 5:
                eid, u, v = int(parts[1]), int(parts[2]), int(parts[3])
                if eid in seen_e:
                    raise FormatError(f"duplicate edge {eid}", lineno, source)
                for end in (u, v):
                    if end not in seen_v:
                        raise FormatError(f"edge {eid} references missing vertex {end}", lineno, source)
                units = to_units(parts[4])
                if units <= 0:
                    raise FormatError(f"edge {eid}: non-positive weight {parts[4]}", lineno, source)
                seen_e.add(eid)
                edges.append((eid, u, v, units))
            else:
                raise FormatError(f"malformed record {raw.strip()!r}", lineno, source)
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{exc} in {raw.strip()!r}", lineno, source) from exc
    try:
        return RoadNetwork(vertices, edges)
    except NetworkError as exc:
        raise FormatError(str(exc), None, source) from exc


def load_network(path) -> RoadNetwork:
    path = Path(path)
    return parse_network(path.read_text(), source=path.name)


def format_network(net: RoadNetwork) -> str:
    lines = ["# press road network"]
    for vid, x, y in net.vertices:
        lines.append(f"V {vid} {x!r} {y!r}")
    for e in range(net.n_edges):
        lines.append(f"E {e} {net.tail[e]} {net.head[e]} {format_units(net.weight_units[e])}")
    return "\n".join(lines) + "\n"


def save_network(net: RoadNetwork, path) -> None:
    Path(path).write_text(format_network(net))


@dataclass(frozen=True, eq=False)
class SPIndex:
    """Dense all-pairs edge-to-edge shortest-path tables.

    ``sp_end[i, j]`` is the edge right before ``j`` on the recorded path from
    ``i`` (``-1`` when unreachable or ``i == j``), ``sp_next[i, j]`` the edge
    right after ``i``, ``sp_dist[i, j]`` the path weight excluding ``i``
    (micrometres, ``-1`` when unreachable) and ``sp_mbr[i, j]`` the bounding
    box ``(xmin, ymin, xmax, ymax)`` of every edge on the path.
    """

    sp_end: np.ndarray
    sp_next: np.ndarray
    sp_dist_units: np.ndarray
    sp_mbr: np.ndarray
    network_digest: bytes

    @property
    def n_edges(self) -> int:
        return self.sp_end.shape[0]

    def reachable(self, i: int, j: int) -> bool:
        return self.sp_dist_units[i, j] >= 0

    def dist_units(self, i: int, j: int) -> int:
        return int(self.sp_dist_units[i, j])

    def sp_dist(self, i: int, j: int) -> float:
        u = self.sp_dist_units[i, j]
        return math.inf if u < 0 else to_meters(int(u))

    def nbytes(self) -> int:
        return self.sp_end.nbytes + self.sp_next.nbytes + self.sp_dist_units.nbytes + self.sp_mbr.nbytes


def build_sp_index(net: RoadNetwork) -> SPIndex:
    wu = np.asarray(net.weight_units, dtype=np.int64)
    perturb = np.array([_perturbation(e) for e in range(net.n_edges)], dtype=np.int64)
    sp_end, sp_next, sp_dist, sp_mbr = kernels.build_sp_tables(
        net.succ_ptr, net.succ_idx, wu, perturb, net.bbox
    )
    for arr in (sp_end, sp_next, sp_dist, sp_mbr):
        arr.flags.writeable = False
    return SPIndex(sp_end, sp_next, sp_dist, sp_mbr, net.digest())


def reconstruct_sp(index: SPIndex, e_i: int, e_j: int) -> tuple[int, ...]:
    """Recorded shortest path ``<e_i, ..., e_j>`` via ``sp_end`` back-links."""
    if e_i == e_j:
        return (e_i,)
    if index.sp_dist_units[e_i, e_j] < 0:
        raise UnreachableError(f"edge {e_j} is not reachable from edge {e_i}")
    end = index.sp_end
    out = [e_j]
    x = e_j
    while x != e_i:
        x = int(end[e_i, x])
        out.append(x)
    out.reverse()
    return tuple(out)


def save_sp_index(index: SPIndex, path) -> None:
    with open(path, "wb") as fh:
        np.savez(
            fh,
            sp_end=index.sp_end,
            sp_next=index.sp_next,
            sp_dist=index.sp_dist_units,
            sp_mbr=index.sp_mbr,
            digest=np.frombuffer(index.network_digest, dtype=np.uint8),
        )


def load_sp_index(path, net: RoadNetwork) -> SPIndex | None:
    """Load a cached index; ``None`` if missing or built for another network."""
    try:
        with np.load(path) as data:
            if bytes(data["digest"].tobytes()) != net.digest():
                return None
            arrays = [np.array(data[k]) for k in ("sp_end", "sp_next", "sp_dist", "sp_mbr")]
    except (OSError, KeyError, ValueError):
        return None
    for arr in arrays:
        arr.flags.writeable = False
    return SPIndex(*arrays, net.digest())
