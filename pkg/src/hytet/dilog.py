"""Complex logarithm and dilogarithm on pinned branches.

Conventions used throughout the package:

* ``clog`` is the principal logarithm with imaginary part in (-pi, pi].
  On the negative real axis it returns the limit from *above*.
* ``li2`` is the principal dilogarithm, cut along [1, inf).  On the cut it
  returns the limit from *below* (Im li2(x) = -pi log x for x > 1), which is
  the value obtained from ``-clog(1 - t)`` under the ``clog`` convention.

Away from the principal sheet, Li2 is continued as::

    Li2(w) + 2 pi i m (clog(w) + 2 pi i j) + c

with integers ``m``, ``j`` and a constant ``c``; :class:`Li2Sheet` carries that
state along a piecewise-linear path.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ContinuationError, DomainError

PI2_6 = math.pi ** 2 / 6
TWO_PI_I = 2j * math.pi

_SERIES_RADIUS = 0.5
_TERM_FLOOR = 1e-17
_MAX_TERMS = 10_000


def _bernoulli(n_max: int) -> list[Fraction]:
    """B_0..B_n_max (B_1 = -1/2) from the standard recurrence."""
    b = [Fraction(1)]
    for m in range(1, n_max + 1):
        acc = Fraction(0)
        binom = 1
        for k in range(m):
            acc += binom * b[k]
            binom = binom * (m + 1 - k) // (k + 1)
        b.append(-acc / (m + 1))
    return b


_B = _bernoulli(60)
# B_2k / (2k+1)!, k = 1..30: coefficients of u^(2k+1) in Li2 as a series in -log(1-z)
_LI2_BERN = [float(_B[2 * k] / math.factorial(2 * k + 1)) for k in range(1, 31)]
# |B_2k| / (2k (2k+1) (2k)!): Clausen expansion around 0
_CL2_COEF = [
    float(abs(_B[2 * k]) / (2 * k * (2 * k + 1) * math.factorial(2 * k))) for k in range(1, 31)
]


def clog(z: complex) -> complex:
    """Principal logarithm, Im in (-pi, pi]."""
    z = complex(z)
    if z == 0:
        raise DomainError("log of zero")
    # -0.0 + 0.0 == +0.0, so the negative axis always lands on +i pi
    return cmath.log(complex(z.real, z.imag + 0.0))


def _li2_series(z: complex) -> complex:
    total = 0j
    zk = 1 + 0j
    for k in range(1, _MAX_TERMS + 1):
        zk *= z
        term = zk / (k * k)
        total += term
        if abs(term) < _TERM_FLOOR * abs(total):
            break
    return total


def _li2_bernoulli(z: complex) -> complex:
    # |u| < 2 pi on the whole region this is called from (|z| <= 1, Re z <= 1/2)
    u = -clog(1 - z)
    u2 = u * u
    total = u - u2 / 4
    up = u
    for c in _LI2_BERN:
        up *= u2
        term = c * up
        total += term
        if abs(term) < _TERM_FLOOR * abs(total):
            break
    return total


def _li2_disk(z: complex) -> complex:
    # |z| <= 1
    if abs(z) <= _SERIES_RADIUS:
        return _li2_series(z)
    if z.real > 0.5:
        if z == 1:
            return complex(PI2_6)
        return PI2_6 - clog(z) * clog(1 - z) - _li2_disk(1 - z)
    return _li2_bernoulli(z)


def li2(z: complex) -> complex:
    """Principal dilogarithm ``-int_0^z log(1-t)/t dt``.

    Series inside |z| <= 1/2, a Bernoulli series in ``-log(1-z)`` elsewhere in
    the unit disk, reflection ``z -> 1-z`` for Re z > 1/2 and inversion
    ``z -> 1/z`` outside the disk.
    """
    z = complex(z)
    if z == 0:
        return 0j
    if z.imag == 0 and z.real > 1:
        x = z.real
        lx = math.log(x)
        return complex(2 * PI2_6 - 0.5 * lx * lx - _li2_disk(complex(1 / x)).real, -math.pi * lx)
    if abs(z) <= 1:
        return _li2_disk(z)
    lmz = clog(-z)
    return -PI2_6 - 0.5 * lmz * lmz - _li2_disk(1 / z)


@dataclass
class Li2Sheet:
    """Branch state of a continued dilogarithm (see module docstring)."""

    m: int = 0
    j: int = 0
    c: complex = 0j

    def value(self, w: complex) -> complex:
        if self.m == 0:
            return li2(w) + self.c
        return li2(w) + TWO_PI_I * self.m * (clog(w) + TWO_PI_I * self.j) + self.c

    def wdw(self, w: complex) -> complex:
        """``w * d/dw`` of the continued function, i.e. the continued ``-log(1-w)``."""
        return -clog(1 - w) + TWO_PI_I * self.m

    def advance(self, w0: complex, w1: complex, gap: float = 1e-12) -> None:
        """Update the sheet for the straight segment ``w0 -> w1``."""
        w0, w1 = complex(w0), complex(w1)
        if _segment_distance(1.0, w0, w1) < gap:
            raise ContinuationError(f"segment {w0} -> {w1} passes through the branch point 1")
        up0 = w0.imag > 0
        up1 = w1.imag > 0
        if up0 != up1:
            x = _axis_crossing(w0, w1)
            if x > 1:
                if up0:
                    self.m += 1
                    self.c += 4 * math.pi ** 2 * self.j
                else:
                    self.m -= 1
                    self.c -= 4 * math.pi ** 2 * self.j
        # the log cut (-inf, 0] belongs to the upper side
        lo0 = w0.imag >= 0
        lo1 = w1.imag >= 0
        if lo0 != lo1:
            x = _axis_crossing(w0, w1)
            if x < 0:
                self.j += 1 if lo0 else -1
            elif x == 0 and self.m != 0:
                raise ContinuationError("segment passes through 0 on a non-principal sheet")


@dataclass
class LogSheet:
    """Continued logarithm ``clog(w) + 2 pi i k``."""

    k: int = 0

    def value(self, w: complex) -> complex:
        return clog(w) + TWO_PI_I * self.k

    def advance(self, w0: complex, w1: complex, gap: float = 1e-300) -> None:
        w0, w1 = complex(w0), complex(w1)
        if _segment_distance(0.0, w0, w1) < gap:
            raise ContinuationError("segment passes through 0")
        up0 = w0.imag >= 0
        up1 = w1.imag >= 0
        if up0 != up1 and _axis_crossing(w0, w1) < 0:
            self.k += 1 if up0 else -1


def _axis_crossing(w0: complex, w1: complex) -> float:
    t = w0.imag / (w0.imag - w1.imag)
    return w0.real + t * (w1.real - w0.real)


def _segment_distance(p: float, w0: complex, w1: complex) -> float:
    d = w1 - w0
    dd = abs(d) ** 2
    if dd == 0:
        return abs(w0 - p)
    t = min(1.0, max(0.0, ((p - w0) * d.conjugate()).real / dd))
    return abs(w0 + t * d - p)


def li2_continued(z_path: Sequence[complex] | Iterable[complex]) -> complex:
    """Continue Li2 along the polyline through ``z_path``.

    Starts on the principal branch at the first point. Cut crossings are
    located exactly on each straight segment, so refining the polyline
    without changing its shape does not change the result.
    """
    pts = [complex(z) for z in z_path]
    if not pts:
        raise ContinuationError("empty path")
    sheet = Li2Sheet()
    for w0, w1 in zip(pts, pts[1:]):
        sheet.advance(w0, w1)
    return sheet.value(pts[-1])


def clausen(theta: float) -> float:
    """Clausen function Cl2 = sum sin(k theta)/k^2 (accelerated expansion)."""
    x = math.remainder(theta, 2 * math.pi)
    if x == 0:
        return 0.0
    ax = abs(x)
    total = ax - ax * math.log(ax)
    x2 = ax * ax
    xp = ax
    for c in _CL2_COEF:
        xp *= x2
        term = c * xp
        total += term
        if term < _TERM_FLOOR * abs(total):
            break
    return math.copysign(total, x)


def lobachevsky(theta: float) -> float:
    """Lobachevsky function -int_0^theta log|2 sin t| dt = Cl2(2 theta)/2."""
    if not math.isfinite(theta):
        raise DomainError("lobachevsky needs a finite angle")
    return 0.5 * clausen(2 * theta)
