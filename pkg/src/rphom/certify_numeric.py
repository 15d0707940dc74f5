"""Interval arithmetic and the Krawczyk test for a posteriori certification.

Enclosures use epsilon inflation instead of rounding-mode switches: every
elementary operation moves each endpoint outward by two ulps, which is
strictly wider than the correctly-rounded result and therefore sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .poly_core import SparseSystem, jacobian

RADIUS_LADDER = (1e-8, 1e-6, 1e-4)
ABSOLUTE_FLOOR = 1e-12
_INF = math.inf


def _down(v: float) -> float:
    return math.nextafter(math.nextafter(v, -_INF), -_INF)


def _up(v: float) -> float:
    return math.nextafter(math.nextafter(v, _INF), _INF)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(float(v), float(v))

    @classmethod
    def around(cls, v: float, r: float) -> "Interval":
        return cls(_down(v - r), _up(v + r))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, v) -> bool:
        if isinstance(v, Interval):
            return self.lo <= v.lo and v.hi <= self.hi
        return self.lo <= v <= self.hi

    def interior_contains(self, other: "Interval") -> bool:
        return self.lo < other.lo and other.hi < self.hi

    def disjoint(self, other: "Interval") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def __add__(self, other):
        other = _coerce(other)
        return Interval(_down(self.lo + other.lo), _up(self.hi + other.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        other = _coerce(other)
        return Interval(_down(self.lo - other.hi), _up(self.hi - other.lo))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        prods = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(_down(min(prods)), _up(max(prods)))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        if k == 0:
            return Interval(1.0, 1.0)
        if k == 1:
            return self
        lo_k, hi_k = self.lo**k, self.hi**k
        if k % 2:
            return Interval(_down(lo_k), _up(hi_k))
        if self.lo >= 0:
            return Interval(_down(lo_k), _up(hi_k))
        if self.hi <= 0:
            return Interval(_down(hi_k), _up(lo_k))
        return Interval(0.0, _up(max(lo_k, hi_k)))


def _coerce(v) -> Interval:
    return v if isinstance(v, Interval) else Interval.point(v)


IntervalBox = tuple  # tuple[Interval, ...]


def box_around(x: Sequence[float], radii: Sequence[float]) -> IntervalBox:
    return tuple(Interval.around(float(v), float(r)) for v, r in zip(x, radii))


def box_contains(outer: IntervalBox, inner: IntervalBox) -> bool:
    return all(o.contains(i) for o, i in zip(outer, inner))


def boxes_disjoint(a: IntervalBox, b: IntervalBox) -> bool:
    """True when the boxes share no point; a box is never disjoint from itself."""
    return any(u.disjoint(v) for u, v in zip(a, b))


def _monomial(X: IntervalBox, exps: Iterable[int]) -> Interval:
    out = Interval(1.0, 1.0)
    for xi, e in zip(X, exps):
        if e:
            out = out * xi**int(e)
    return out


def interval_eval(F: SparseSystem, X: IntervalBox) -> IntervalBox:
    """Enclosure of every polynomial of ``F`` over the box ``X``."""
    out = []
    for poly in F.polynomials:
        acc = Interval(0.0, 0.0)
        for a, c in zip(poly.support, poly.coefficients):
            acc = acc + c * _monomial(X, a)
        out.append(acc)
    return tuple(out)


def interval_jacobian(F: SparseSystem, X: IntervalBox) -> list[list[Interval]]:
    """Termwise interval enclosure of the Jacobian over ``X``."""
    n = F.n_vars
    J = []
    for poly in F.polynomials:
        row = []
        for j in range(n):
            acc = Interval(0.0, 0.0)
            for a, c in zip(poly.support, poly.coefficients):
                if a[j] == 0:
                    continue
                lowered = list(a)
                lowered[j] -= 1
                acc = acc + (c * a[j]) * _monomial(X, lowered)
            row.append(acc)
        J.append(row)
    return J


@dataclass
class CertificateOutcome:
    certified: bool
    box: IntervalBox
    shrink_factor: float
    radius: float
    krawczyk_box: IntervalBox | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "box": [[iv.lo.hex(), iv.hi.hex()] for iv in self.box],
            "shrink_factor": self.shrink_factor,
            "radius": self.radius,
            "reason": self.reason,
        }


def krawczyk_test(F: SparseSystem, x, radius: float) -> CertificateOutcome:
    """Krawczyk test on the box ``x +- max(radius*|x_j|, 1e-12)``.

    Certified iff ``K(X)`` lies in the interior of ``X``; then ``X``
    holds exactly one zero of ``F``.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    y = np.asarray(x, dtype=float)
    n = y.shape[0]
    radii = np.maximum(radius * np.abs(y), ABSOLUTE_FLOOR)
    X = box_around(y, radii)
    if not np.all(np.isfinite(y)):
        return CertificateOutcome(False, X, math.inf, radius, reason="non-finite point")

    Jy = jacobian(F, y)
    try:
        Y = np.linalg.inv(Jy)
    except np.linalg.LinAlgError:
        return CertificateOutcome(False, X, math.inf, radius, reason="singular midpoint jacobian")
    if not np.all(np.isfinite(Y)):
        return CertificateOutcome(False, X, math.inf, radius, reason="singular midpoint jacobian")

    Fy = interval_eval(F, tuple(Interval.point(v) for v in y))
    JX = interval_jacobian(F, X)
    D = tuple(Xi - float(yi) for Xi, yi in zip(X, y))
    K = []
    for i in range(n):
        acc = Interval.point(float(y[i]))
        for j in range(n):
            acc = acc - float(Y[i, j]) * Fy[j]
        for k in range(n):
            m_ik = Interval.point(1.0 if i == k else 0.0)
            for j in range(n):
                m_ik = m_ik - float(Y[i, j]) * JX[j][k]
            acc = acc + m_ik * D[k]
        K.append(acc)
    K = tuple(K)
    shrink = max(Ki.width / Xi.width for Ki, Xi in zip(K, X))
    ok = all(Xi.interior_contains(Ki) for Ki, Xi in zip(K, X))
    return CertificateOutcome(ok, X, shrink, radius, K, "" if ok else "no contraction")


def certify_point(F: SparseSystem, x, ladder: Sequence[float] = RADIUS_LADDER) -> CertificateOutcome:
    """Try each radius of the ladder in order; the first success wins."""
    outcome = None
    for r in ladder:
        outcome = krawczyk_test(F, x, r)
        if outcome.certified:
            return outcome
    return outcome


@dataclass
class SolutionSetCertificate:
    points: list[np.ndarray]
    flag: int
    outcomes: list[CertificateOutcome] = field(default_factory=list)

    def __iter__(self):
        # unpacks as (points, flag)
        return iter((self.points, self.flag))


def certify_solution_set(
    F: SparseSystem, points: Sequence, expected_count: int
) -> SolutionSetCertificate:
    """Flag 1 iff every point certifies, boxes are pairwise disjoint and the
    number of points equals ``expected_count``."""
    pts = [np.asarray(p, dtype=float) for p in points]
    outcomes = [certify_point(F, p) for p in pts]
    ok = all(o.certified for o in outcomes) and len(pts) == expected_count
    if ok:
        for i in range(len(outcomes)):
            for j in range(i + 1, len(outcomes)):
                if not boxes_disjoint(outcomes[i].box, outcomes[j].box):
                    ok = False
    return SolutionSetCertificate(pts, int(ok), outcomes)
