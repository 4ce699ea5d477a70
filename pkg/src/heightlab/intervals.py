"""Certified interval arithmetic with exact rational endpoints.

Real intervals carry exact rational bounds; complex values are rectangles
(a pair of real intervals).  Ring operations are exact; square roots and
logarithms round outward to a requested number of dyadic bits, so every
enclosure is rigorous.  When an enclosure is too wide to decide a branch or
a comparison, a PrecisionError asks the caller to refine.
"""

from __future__ import annotations

import math

from .exactcore import QQ

__all__ = [
    "PrecisionError",
    "Interval",
    "Box",
    "log_interval",
    "log_int",
    "PREC_START",
    "PREC_CAP",
    "precisions",
]

PREC_START = 128
PREC_CAP = 8192


class PrecisionError(Exception):
    """Raised when an enclosure is too wide to decide; refine and retry."""


def precisions(start: int = PREC_START, cap: int = PREC_CAP):
    """Doubling precision schedule used by every refinement loop."""
    prec = start
    while prec <= cap:
        yield prec
        prec *= 2


def _round_down(q, prec: int):
    n, d = q.numerator, q.denominator
    return QQ((int(n) << prec) // int(d), 1 << prec)


def _round_up(q, prec: int):
    n, d = q.numerator, q.denominator
    return QQ(-((int(-n) << prec) // int(d)), 1 << prec)


def _sqrt_down(q, prec: int):
    if q < 0:
        raise ValueError("sqrt of a negative rational")
    n, d = int(q.numerator), int(q.denominator)
    m = n * d << (2 * prec)
    return QQ(math.isqrt(m) // d, 1 << prec)


def _sqrt_up(q, prec: int):
    if q < 0:
        raise ValueError("sqrt of a negative rational")
    n, d = int(q.numerator), int(q.denominator)
    m = n * d << (2 * prec)
    s = math.isqrt(m)
    if s * s < m:
        s += 1
    return QQ(-((-s) // d), 1 << prec)


class Interval:
    """Closed real interval [lo, hi] with exact rational endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = QQ(lo)
        hi = lo if hi is None else QQ(hi)
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    ZERO: "Interval"

    @staticmethod
    def point(q) -> "Interval":
        return Interval(q)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"

    # -- ring operations (exact) -------------------------------------------

    def __add__(self, other):
        other = _as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_as_interval(other))

    def __rsub__(self, other):
        return _as_interval(other) + (-self)

    def __mul__(self, other):
        other = _as_interval(other)
        cands = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(cands), max(cands))

    __rmul__ = __mul__

    def square(self) -> "Interval":
        if self.lo >= 0:
            return Interval(self.lo * self.lo, self.hi * self.hi)
        if self.hi <= 0:
            return Interval(self.hi * self.hi, self.lo * self.lo)
        m = max(-self.lo, self.hi)
        return Interval(QQ(0), m * m)

    def inverse(self) -> "Interval":
        if self.contains_zero():
            raise PrecisionError("inverse of an interval containing zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _as_interval(other).inverse()

    def __rtruediv__(self, other):
        return _as_interval(other) * self.inverse()

    # -- rounded operations --------------------------------------------------

    def round_out(self, prec: int) -> "Interval":
        return Interval(_round_down(self.lo, prec), _round_up(self.hi, prec))

    def sqrt(self, prec: int) -> "Interval":
        if self.lo < 0:
            raise ValueError("sqrt of an interval with negative lower bound")
        return Interval(_sqrt_down(self.lo, prec), _sqrt_up(self.hi, prec))

    def nonneg_clamp(self) -> "Interval":
        """Intersect with [0, inf); valid when the true value is known >= 0."""
        if self.hi < 0:
            raise ValueError("clamping an interval entirely below zero")
        return Interval(max(self.lo, QQ(0)), max(self.hi, QQ(0)))

    def pow32(self, prec: int) -> "Interval":
        """x^(3/2) for a nonnegative interval."""
        cube = self * self * self
        return cube.nonneg_clamp().sqrt(prec)

    # -- predicates ----------------------------------------------------------

    def contains(self, q) -> bool:
        q = QQ(q)
        return self.lo <= q <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def contains_interior(self, other: "Interval") -> bool:
        return self.lo < other.lo and other.hi < self.hi

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    def certainly_ge(self, other) -> bool:
        return self.lo >= _as_interval(other).hi

    def certainly_gt(self, other) -> bool:
        return self.lo > _as_interval(other).hi

    def certainly_le(self, other) -> bool:
        return self.hi <= _as_interval(other).lo

    def overlaps(self, other: "Interval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def abs_bounds(self) -> "Interval":
        """Interval of |x| over x in self."""
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(QQ(0), max(-self.lo, self.hi))

    def max_with(self, other: "Interval") -> "Interval":
        other = _as_interval(other)
        return Interval(max(self.lo, other.lo), max(self.hi, other.hi))


def _as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(QQ(x))


Interval.ZERO = Interval(QQ(0))


# ---------------------------------------------------------------------------
# Certified logarithms
# ---------------------------------------------------------------------------

_LOG2_CACHE: dict[int, tuple] = {}


def _atanh_series(t, prec: int):
    """Exact partial sum and rigorous remainder bound for 2*atanh(t), 0<=t<1/2."""
    nterms = prec // 3 + 4
    acc = QQ(0)
    tp = t
    t2 = t * t
    for k in range(nterms):
        acc += tp / (2 * k + 1)
        tp *= t2
    # remainder: 2 * sum_{k>nterms-1} t^(2k+1)/(2k+1) <= 2*tp/( (2n+1)(1-t^2) )
    rem = 2 * tp / ((2 * nterms + 1) * (1 - t2))
    return 2 * acc, rem


def _log2_bounds(prec: int):
    if prec in _LOG2_CACHE:
        return _LOG2_CACHE[prec]
    s, rem = _atanh_series(QQ(1, 3), prec)
    lo = _round_down(s, prec + 8)
    hi = _round_up(s + rem, prec + 8)
    _LOG2_CACHE[prec] = (lo, hi)
    return lo, hi


def _range_reduce(q):
    """For q > 1 return (e, m) with q = m * 2^e, m in [1, 2), e >= 0."""
    e = int(q.numerator).bit_length() - int(q.denominator).bit_length()
    if e > 0 and q < QQ(1 << e):
        e -= 1
    m = q / QQ(1 << e)
    return e, m


def _log_up(q, prec: int):
    q = QQ(q)
    if q <= 0:
        raise ValueError("log of a nonpositive rational")
    if q == 1:
        return QQ(0)
    if q < 1:
        return -_log_down(1 / q, prec)
    e, m = _range_reduce(q)
    t = (m - 1) / (m + 1)
    s, rem = _atanh_series(t, prec)
    _, l2hi = _log2_bounds(prec)
    return _round_up(e * l2hi + s + rem, prec + 8)


def _log_down(q, prec: int):
    q = QQ(q)
    if q <= 0:
        raise ValueError("log of a nonpositive rational")
    if q == 1:
        return QQ(0)
    if q < 1:
        return -_log_up(1 / q, prec)
    e, m = _range_reduce(q)
    t = (m - 1) / (m + 1)
    s, _ = _atanh_series(t, prec)
    l2lo, _ = _log2_bounds(prec)
    return _round_down(e * l2lo + s, prec + 8)


def log_interval(x: Interval, prec: int) -> Interval:
    """Rigorous enclosure of log over a positive interval."""
    if x.lo <= 0:
        raise PrecisionError("log of an interval touching zero")
    return Interval(_log_down(x.lo, prec), _log_up(x.hi, prec))


def log_int(n: int, prec: int) -> Interval:
    """Rigorous enclosure of log(n) for a positive integer."""
    return log_interval(Interval(QQ(n)), prec)


# ---------------------------------------------------------------------------
# Complex rectangles
# ---------------------------------------------------------------------------


class Box:
    """Axis-aligned complex rectangle re + i*im with interval components."""

    __slots__ = ("re", "im")

    def __init__(self, re: Interval, im: Interval | None = None):
        self.re = _as_interval(re)
        self.im = Interval.ZERO if im is None else _as_interval(im)

    @staticmethod
    def from_rational(q) -> "Box":
        return Box(Interval(QQ(q)), Interval.ZERO)

    def __repr__(self):
        return f"Box({self.re!r}, {self.im!r})"

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        other = _as_box(other)
        return Box(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return Box(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_as_box(other))

    def __rsub__(self, other):
        return _as_box(other) + (-self)

    def __mul__(self, other):
        other = _as_box(other)
        return Box(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative box power; use inverse()")
        result = Box.from_rational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> "Box":
        return Box(self.re, -self.im)

    def abs_sq(self) -> Interval:
        return self.re.square() + self.im.square()

    def abs_(self, prec: int) -> Interval:
        return self.abs_sq().sqrt(prec)

    def inverse(self) -> "Box":
        d = self.abs_sq()
        if d.contains_zero():
            raise PrecisionError("inverse of a box containing zero")
        inv = d.inverse()
        return Box(self.re * inv, -self.im * inv)

    def __truediv__(self, other):
        return self * _as_box(other).inverse()

    def round_out(self, prec: int) -> "Box":
        return Box(self.re.round_out(prec), self.im.round_out(prec))

    def is_exact_real(self) -> bool:
        return self.im.lo == 0 and self.im.hi == 0

    def contains_zero(self) -> bool:
        return self.re.contains_zero() and self.im.contains_zero()

    def contains_box(self, other: "Box") -> bool:
        return self.re.contains_interval(other.re) and self.im.contains_interval(other.im)

    def contains_interior(self, other: "Box") -> bool:
        return self.re.contains_interior(other.re) and self.im.contains_interior(other.im)

    def overlaps(self, other: "Box") -> bool:
        return self.re.overlaps(other.re) and self.im.overlaps(other.im)

    # -- principal square root ----------------------------------------------

    def sqrt(self, prec: int, sign: int = 1) -> "Box":
        """Enclosure of the principal square root, times an optional -1.

        The principal branch takes the root with positive real part, and on
        the cut (negative reals) the root with positive imaginary part.
        Raises PrecisionError when the rectangle straddles the cut without
        being exactly real.
        """
        if self.is_exact_real():
            re = self.re
            if re.lo >= 0:
                out = Box(re.sqrt(prec), Interval.ZERO)
            elif re.hi <= 0:
                out = Box(Interval.ZERO, (-re).sqrt(prec))
            else:
                out = Box(
                    Interval(QQ(0), _sqrt_up(re.hi, prec)),
                    Interval(QQ(0), _sqrt_up(-re.lo, prec)),
                )
        elif self.im.lo > 0 or self.im.hi < 0:
            m = self.abs_(prec + 4)
            u = ((m + self.re) * QQ(1, 2)).nonneg_clamp().sqrt(prec)
            v = ((m - self.re) * QQ(1, 2)).nonneg_clamp().sqrt(prec)
            out = Box(u, v if self.im.lo > 0 else -v)
        elif self.re.lo > 0:
            m = self.abs_(prec + 4)
            u = ((m + self.re) * QQ(1, 2)).nonneg_clamp().sqrt(prec)
            if u.contains_zero():
                raise PrecisionError("cannot bound sqrt real part away from zero")
            v = self.im * (Interval(QQ(2)) * u).inverse()
            out = Box(u, v)
        else:
            raise PrecisionError("square root straddles the branch cut")
        if sign == 1:
            return out
        return -out


def _as_box(x) -> Box:
    if isinstance(x, Box):
        return x
    if isinstance(x, Interval):
        return Box(x, Interval.ZERO)
    return Box.from_rational(x)
