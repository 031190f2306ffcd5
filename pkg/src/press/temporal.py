"""Error-bounded compression of (distance, time) sequences.

An opening window over the d-t plane keeps the interval of slopes that a
straight line from the current anchor may take so that every skipped tuple
stays within ``tau`` metres (distance at equal time) and ``eta`` seconds
(time at equal distance). Slopes are compared exactly: each one is a ratio
of short float sums, compared by cross-multiplication with a float filter
and a rational fallback.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction

from .errors import TrajectoryError
from .trajectory import validate_times

_U = sys.float_info.epsilon / 2
_FILTER = 16 * _U


def _dyadic_sum(terms):
    """Exact sum of floats as ``(n, k)`` meaning ``n / 2**k``."""
    parts = [x.as_integer_ratio() for x in terms]
    k = max(q.bit_length() - 1 for _, q in parts)
    return sum(p << (k - q.bit_length() + 1) for p, q in parts), k


class Slope:
    """Ratio ``sum(num) / sum(den)`` of floats, with ``sum(den) > 0``."""

    __slots__ = ("num", "den", "nf", "df", "na", "da", "_exact")

    def __init__(self, num, den):
        self.num = num
        self.den = den
        # fsum is correctly rounded: nf == 0 iff the exact numerator is 0
        self.nf = math.fsum(num)
        self.df = math.fsum(den)
        self.na = sum(abs(x) for x in num)
        self.da = sum(abs(x) for x in den)
        self._exact = None

    def exact_parts(self):
        if self._exact is None:
            self._exact = _dyadic_sum(self.num) + _dyadic_sum(self.den)
        return self._exact

    def exact(self) -> Fraction:
        nn, kn, nd, kd = self.exact_parts()
        return Fraction(nn * (1 << kd), nd * (1 << kn))

    def __float__(self):
        return self.nf / self.df

    def __repr__(self):
        return f"Slope({float(self):.6g})"


def compare(a: Slope, b: Slope) -> int:
    """Sign of ``a - b``."""
    if a.nf == 0 and b.nf == 0:
        return 0
    v = a.nf * b.df - b.nf * a.df
    bound = _FILTER * (a.na * b.da + b.na * a.da)
    if v > bound:
        return 1
    if v < -bound:
        return -1
    an, akn, ad, akd = a.exact_parts()
    bn, bkn, bd, bkd = b.exact_parts()
    # a - b has the sign of an*bd*2^(akd+bkn) - bn*ad*2^(bkd+akn)
    left, right = an * bd, bn * ad
    sl, sr = akd + bkn, bkd + akn
    if sl > sr:
        left <<= sl - sr
    else:
        right <<= sr - sl
    return (left > right) - (left < right)


@dataclass(frozen=True)
class BtcConfig:
    tau: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for name in ("tau", "eta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite non-negative number, got {v!r}")


@dataclass(frozen=True)
class AngularRange:
    """Closed slope interval; ``None`` marks an unbounded side."""

    lo: Slope | None = None
    hi: Slope | None = None

    @property
    def slope_min(self) -> float:
        return -math.inf if self.lo is None else float(self.lo)

    @property
    def slope_max(self) -> float:
        return math.inf if self.hi is None else float(self.hi)

    @property
    def empty(self) -> bool:
        return self.lo is not None and self.hi is not None and compare(self.lo, self.hi) > 0

    def intersect(self, other: AngularRange) -> AngularRange:
        lo, hi = self.lo, self.hi
        if other.lo is not None and (lo is None or compare(other.lo, lo) > 0):
            lo = other.lo
        if other.hi is not None and (hi is None or compare(other.hi, hi) < 0):
            hi = other.hi
        return AngularRange(lo, hi)

    def contains(self, s: Slope) -> bool:
        if self.lo is not None and compare(s, self.lo) < 0:
            return False
        if self.hi is not None and compare(s, self.hi) > 0:
            return False
        return True


FULL = AngularRange()


def _check_forward(anchor, p):
    if not p[1] > anchor[1]:
        raise TrajectoryError(f"point {p} is not after anchor {anchor} in time")


def point_slope(anchor, p) -> Slope:
    return Slope((p[0], -anchor[0]), (p[1], -anchor[1]))


def angular_range(anchor, p, cfg: BtcConfig) -> AngularRange:
    """Slopes from ``anchor`` that keep ``p`` within both bounds."""
    _check_forward(anchor, p)
    (d0, t0), (d, t) = anchor, p
    tau, eta = float(cfg.tau), float(cfg.eta)
    r1 = AngularRange(Slope((d, -d0, -tau), (t, -t0)), Slope((d, -d0, tau), (t, -t0)))
    far = Slope((d, -d0), (t, -t0, eta))
    # fsum is correctly rounded, so these signs are exact
    near = Slope((d, -d0), (t, -t0, -eta)) if math.fsum((t, -t0, -eta)) > 0 else None
    if math.fsum((d, -d0)) >= 0:
        r2 = AngularRange(far, near)
    else:
        r2 = AngularRange(near, far)
    return r1.intersect(r2)


def fall_inside(r: AngularRange, anchor, p) -> bool:
    _check_forward(anchor, p)
    return r.contains(point_slope(anchor, p))


def btc_compress(times, cfg: BtcConfig) -> tuple:
    """Subsequence of ``times`` within (``tau``, ``eta``) of the original."""
    pts = tuple((float(d), float(t)) for d, t in times)
    problems = validate_times(pts)
    if problems:
        raise TrajectoryError("; ".join(problems))
    n = len(pts)
    if n <= 2:
        return pts
    out = [pts[0]]
    anchor = pts[0]
    window = FULL
    for i in range(1, n):
        p = pts[i]
        if fall_inside(window, anchor, p):
            window = window.intersect(angular_range(anchor, p, cfg))
            continue
        anchor = pts[i - 1]
        out.append(anchor)
        window = angular_range(anchor, p, cfg)
    out.append(pts[-1])
    return tuple(out)
