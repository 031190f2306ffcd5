"""Trajectories as a spatial path plus a (distance, time) sequence.

Distances ``d`` are cumulative network metres measured from the tail vertex
of the first edge; times ``t`` are seconds. ``dis`` and ``tim`` interpolate
linearly between tuples. The deviation metrics are evaluated at breakpoints:
floats first, then the few candidates near the maximum are recomputed with
rationals so that ``tsnd``/``nstd`` return the correctly rounded exact value.
"""

from __future__ import annotations

import math
import sys
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import FormatError, TrajectoryError
from .network import RoadNetwork, to_meters

_EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class Trajectory:
    id: str
    path: tuple
    times: tuple

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(e) for e in self.path))
        object.__setattr__(self, "times", tuple((float(d), float(t)) for d, t in self.times))

    @property
    def span(self):
        return self.times[0][1], self.times[-1][1]


def as_times(seq) -> tuple:
    return tuple((float(d), float(t)) for d, t in seq)


def _columns(times):
    arr = np.asarray(times, dtype=np.float64).reshape(-1, 2)
    if arr.shape[0] == 0:
        raise TrajectoryError("empty temporal sequence")
    return arr[:, 0].copy(), arr[:, 1].copy()


# -- piecewise-linear evaluation ---------------------------------------------
#
# xs is non-decreasing (strictly for the time axis). At a repeated x the
# earliest entry wins unless ``right`` is set, which asks for the limit from
# the right, i.e. the last entry sharing that x.


def _eval_exact(xs, ys, x, right=False):
    n = len(xs)
    if right:
        j = bisect_right(xs, x) - 1
        if j >= 0 and xs[j] == x:
            return Fraction(ys[j])
    i = bisect_left(xs, x)
    if i < n and xs[i] == x:
        return Fraction(ys[i])
    if i == 0 or i == n:
        raise TrajectoryError(f"{x} outside [{xs[0]}, {xs[-1]}]")
    x0, x1 = Fraction(xs[i - 1]), Fraction(xs[i])
    y0, y1 = Fraction(ys[i - 1]), Fraction(ys[i])
    return y0 + (y1 - y0) * (Fraction(x) - x0) / (x1 - x0)


def _eval_float(xs, ys, q, right=False):
    n = len(xs)
    i = np.searchsorted(xs, q, side="left")
    ic = np.minimum(i, n - 1)
    lo = np.maximum(i - 1, 0)
    dx = xs[ic] - xs[lo]
    safe = np.where(dx > 0, dx, 1.0)
    out = ys[lo] + (ys[ic] - ys[lo]) * (q - xs[lo]) / safe
    hit = xs[ic] == q
    out = np.where(hit, ys[ic], out)
    if right:
        j = np.searchsorted(xs, q, side="right") - 1
        jc = np.maximum(j, 0)
        rhit = xs[jc] == q
        out = np.where(rhit, ys[jc], out)
    return out


def dis(times, t_x: float) -> float:
    """Distance travelled at time ``t_x``."""
    ts = [t for _, t in times]
    ds = [d for d, _ in times]
    if not ts or not ts[0] <= t_x <= ts[-1]:
        raise TrajectoryError(f"time {t_x} outside the sequence span")
    i = bisect_left(ts, t_x)
    if ts[i] == t_x:
        return ds[i]
    t0, t1, d0, d1 = ts[i - 1], ts[i], ds[i - 1], ds[i]
    return d0 + (d1 - d0) * (t_x - t0) / (t1 - t0)


def tim(times, d_x: float) -> float:
    """Earliest time at which distance ``d_x`` is reached."""
    ds = [d for d, _ in times]
    ts = [t for _, t in times]
    if not ds or not ds[0] <= d_x <= ds[-1]:
        raise TrajectoryError(f"distance {d_x} outside the sequence range")
    i = bisect_left(ds, d_x)
    if ds[i] == d_x:
        return ts[i]
    t0, t1, d0, d1 = ts[i - 1], ts[i], ds[i - 1], ds[i]
    return t0 + (t1 - t0) * (d_x - d0) / (d1 - d0)


def dis_exact(times, t_x) -> Fraction:
    return _eval_exact([t for _, t in times], [d for d, _ in times], t_x)


def tim_exact(times, d_x, right=False) -> Fraction:
    return _eval_exact([d for d, _ in times], [t for _, t in times], d_x, right)


def _exact_max(candidates, diff_fn):
    best = Fraction(0)
    for q, right in candidates:
        v = abs(diff_fn(q, right))
        if v > best:
            best = v
    return float(best)


def tsnd(a, b) -> float:
    """Largest gap in distance travelled at a common time."""
    da, ta = _columns(a)
    db, tb = _columns(b)
    if ta[0] != tb[0] or ta[-1] != tb[-1]:
        raise TrajectoryError("sequences cover different time spans")
    q = np.union1d(ta, tb)
    diff = np.abs(_eval_float(ta, da, q) - _eval_float(tb, db, q))
    if not len(diff):
        return 0.0
    scale = max(np.abs(da).max(), np.abs(db).max(), 1.0)
    cut = diff.max() - 64 * _EPS * scale
    al, ad = ta.tolist(), da.tolist()
    bl, bd = tb.tolist(), db.tolist()

    def exact(x, _right):
        return _eval_exact(al, ad, x) - _eval_exact(bl, bd, x)

    return _exact_max(((float(x), False) for x in q[diff >= cut]), exact)


def nstd(a, b) -> float:
    """Largest gap in time needed to reach a common distance.

    Plateaus follow the earliest-time convention; both the value at each
    distance breakpoint and its right limit are taken, which yields the
    supremum over the whole distance range.
    """
    da, ta = _columns(a)
    db, tb = _columns(b)
    if da[0] != db[0] or da[-1] != db[-1]:
        raise TrajectoryError("sequences cover different distance ranges")
    q = np.union1d(da, db)
    left = np.abs(_eval_float(da, ta, q) - _eval_float(db, tb, q))
    inner = q[:-1]
    rgt = np.abs(_eval_float(da, ta, inner, right=True) - _eval_float(db, tb, inner, right=True))
    top = max(left.max(), rgt.max() if len(rgt) else 0.0)
    scale = max(np.abs(ta).max(), np.abs(tb).max(), 1.0)
    cut = top - 64 * _EPS * scale
    al, at = da.tolist(), ta.tolist()
    bl, bt = db.tolist(), tb.tolist()

    def exact(x, right):
        return _eval_exact(al, at, x, right) - _eval_exact(bl, bt, x, right)

    cands = [(float(x), False) for x in q[left >= cut]]
    cands += [(float(x), True) for x in inner[rgt >= cut]]
    return _exact_max(cands, exact)


def _path_geometry(path, net: RoadNetwork):
    cum_units = np.zeros(len(path) + 1, dtype=np.int64)
    cum_units[1:] = np.cumsum([net.weight_units[e] for e in path])
    cum = cum_units / 1e6
    seg = np.array([net.seg[e] for e in path], dtype=np.float64).reshape(-1, 4)
    w = np.array([net.weight(e) for e in path], dtype=np.float64)
    return cum, seg, w


def _positions(cum, seg, w, dvals):
    k = np.clip(np.searchsorted(cum, dvals, side="right") - 1, 0, len(w) - 1)
    r = np.clip((dvals - cum[k]) / w[k], 0.0, 1.0)
    x = seg[k, 0] + (seg[k, 2] - seg[k, 0]) * r
    y = seg[k, 1] + (seg[k, 3] - seg[k, 1]) * r
    return x, y


def tsed(a: Trajectory, b: Trajectory, net: RoadNetwork) -> float:
    """Largest Euclidean distance between the two positions at a common time."""
    if a.path != b.path:
        raise TrajectoryError("tsed needs both trajectories on the same spatial path")
    da, ta = _columns(a.times)
    db, tb = _columns(b.times)
    if ta[0] != tb[0] or ta[-1] != tb[-1]:
        raise TrajectoryError("sequences cover different time spans")
    cum, seg, w = _path_geometry(a.path, net)
    qs = [ta, tb]
    for d, t in ((da, ta), (db, tb)):
        inside = cum[(cum > d[0]) & (cum < d[-1])]
        if len(inside):
            qs.append(_eval_float(d, t, inside))
    q = np.unique(np.concatenate(qs))
    q = q[(q >= ta[0]) & (q <= ta[-1])]
    xa, ya = _positions(cum, seg, w, _eval_float(ta, da, q))
    xb, yb = _positions(cum, seg, w, _eval_float(tb, db, q))
    return float(np.hypot(xa - xb, ya - yb).max())


# -- validation ----------------------------------------------------------------


@dataclass
class ValidationReport:
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok

    def raise_if_invalid(self, prefix=""):
        if self.problems:
            raise TrajectoryError(prefix + "; ".join(self.problems))


def path_length(path, net: RoadNetwork) -> float:
    return to_meters(net.path_units(path))


def validate_times(times, total_length=None) -> list:
    problems = []
    if not times:
        return ["empty temporal sequence"]
    for k, (d, t) in enumerate(times):
        if not (math.isfinite(d) and math.isfinite(t)):
            problems.append(f"tuple {k}: non-finite value")
    if times[0][0] < 0:
        problems.append(f"first distance {times[0][0]} is negative")
    for k in range(1, len(times)):
        (d0, t0), (d1, t1) = times[k - 1], times[k]
        if not t1 > t0:
            problems.append(f"tuple {k}: time {t1} does not increase after {t0}")
        if d1 < d0:
            problems.append(f"tuple {k}: distance {d1} decreases after {d0}")
    if total_length is not None and times[-1][0] > total_length:
        problems.append(f"final distance {times[-1][0]} exceeds path length {total_length}")
    return problems


def validate(traj: Trajectory, net: RoadNetwork) -> ValidationReport:
    problems = []
    path = traj.path
    if not path:
        problems.append("empty spatial path")
    bad = [e for e in path if not 0 <= e < net.n_edges]
    if bad:
        problems.append(f"edges not in network: {bad[:5]}")
    else:
        for k in range(len(path) - 1):
            if not net.adjacent(path[k], path[k + 1]):
                problems.append(f"edges {path[k]} and {path[k + 1]} at position {k} are not adjacent")
    total = path_length(path, net) if path and not bad else None
    problems += validate_times(traj.times, total)
    return ValidationReport(problems)


# -- text format ---------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def format_trajectories(trajs) -> str:
    out = []
    for tr in trajs:
        out.append(f"T {tr.id} {len(tr.path)} {len(tr.times)}")
        out.append(" ".join(str(e) for e in tr.path))
        out.extend(f"{_fmt(d)} {_fmt(t)}" for d, t in tr.times)
    return "\n".join(out) + ("\n" if out else "")


def parse_trajectories(text: str, source=None) -> list:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    out = []
    seen = set()
    k = 0
    while k < len(lines):
        lineno, line = lines[k]
        parts = line.split()
        if parts[0] != "T" or len(parts) != 4:
            raise FormatError(f"expected 'T <id> <n_edges> <n_tuples>', got {line!r}", lineno, source)
        tid = parts[1]
        if tid in seen:
            raise FormatError(f"duplicate trajectory id {tid}", lineno, source)
        seen.add(tid)
        try:
            n_edges, n_tuples = int(parts[2]), int(parts[3])
        except ValueError as exc:
            raise FormatError(f"bad counts in {line!r}", lineno, source) from exc
        if n_edges < 1 or n_tuples < 1:
            raise FormatError("trajectory needs at least one edge and one tuple", lineno, source)
        if k + 1 + n_tuples >= len(lines):
            raise FormatError(f"trajectory {tid} is truncated", lineno, source)
        elno, eline = lines[k + 1]
        try:
            path = [int(x) for x in eline.split()]
        except ValueError as exc:
            raise FormatError(f"bad edge list {eline!r}", elno, source) from exc
        if len(path) != n_edges:
            raise FormatError(f"expected {n_edges} edges, got {len(path)}", elno, source)
        times = []
        for tlno, tline in lines[k + 2:k + 2 + n_tuples]:
            p = tline.split()
            if len(p) != 2:
                raise FormatError(f"expected '<d> <t>', got {tline!r}", tlno, source)
            try:
                times.append((float(p[0]), float(p[1])))
            except ValueError as exc:
                raise FormatError(f"bad tuple {tline!r}", tlno, source) from exc
        out.append(Trajectory(tid, path, times))
        k += 2 + n_tuples
    return out


def load_trajectories(path) -> list:
    path = Path(path)
    return parse_trajectories(path.read_text(), source=path.name)


def save_trajectories(trajs, path) -> None:
    Path(path).write_text(format_trajectories(trajs))
