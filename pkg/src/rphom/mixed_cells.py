"""Cayley configurations, exact mixed-cell enumeration, mixed volume and
the facet functionals that generate the dual mixed cell cone.

Cells follow the *upper facet* convention: a mixed cell is a choice of two
points per support such that, for the cell normal ``alpha``, the pair
attains the strict maximum of ``<a, alpha> + w(a)`` over its support.  The
lower-facet convention is recovered by negating the lifting.

Every combinatorial predicate here is decided in exact integer/rational
arithmetic on an integer lifting.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DegenerateLiftingError, GenericityError, LiftingOverflowError
from .poly_core import Lifting, SparseSystem

DEFAULT_SCALE = 10**6
_EXACT_LIMIT = 2**53


@dataclass(frozen=True)
class CayleyConfiguration:
    points: tuple[tuple[int, ...], ...]
    block_offsets: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.points)

    def flat_index(self, poly: int, point: int) -> int:
        return self.block_offsets[poly][0] + point


@dataclass(frozen=True)
class IntegerLifting:
    values: tuple[tuple[int, ...], ...]
    scale: float = DEFAULT_SCALE

    def flat(self) -> list[int]:
        return [v for block in self.values for v in block]

    def scaled(self, k: int) -> "IntegerLifting":
        return IntegerLifting(
            tuple(tuple(k * v for v in block) for block in self.values), self.scale * k
        )


@dataclass(frozen=True)
class MixedCell:
    """Two support points per polynomial with the exact facet normal.

    ``pairs[i] = (p, q)`` are indices into support ``i`` with ``p < q``.
    """

    pairs: tuple[tuple[int, int], ...]
    normal: tuple[Fraction, ...]
    volume: int

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "normal": [str(a) for a in self.normal],
            "volume": self.volume,
        }


@dataclass(frozen=True)
class DualConeGenerator:
    """Primitive integer functional on lifting space (flat Cayley order)."""

    zeta: tuple[int, ...]
    origin: tuple[int, int, int]

    def l1_norm(self) -> int:
        return sum(abs(z) for z in self.zeta)

    def to_dict(self) -> dict:
        return {"zeta": list(self.zeta), "origin": list(self.origin)}


def cayley(F: SparseSystem) -> CayleyConfiguration:
    n = F.n_vars
    m = len(F)
    points = []
    offsets = []
    for i, support in enumerate(F.supports):
        start = len(points)
        tag = tuple(1 if k == i else 0 for k in range(m))
        points.extend(tuple(a) + tag for a in support)
        offsets.append((start, len(points)))
    assert all(len(p) == n + m for p in points)
    return CayleyConfiguration(tuple(points), tuple(offsets))


def _round_half_away(v: float) -> int:
    r = math.floor(abs(v) + 0.5)
    return int(r) if v >= 0 else -int(r)


def integerize(w: Lifting, scale: float = DEFAULT_SCALE) -> IntegerLifting:
    """Scale a real lifting and round every entry to the nearest integer."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    values = []
    for block in w.values:
        row = []
        for v in block:
            s = scale * v
            if not math.isfinite(s) or abs(s) >= _EXACT_LIMIT:
                raise LiftingOverflowError(f"scaled lifting value {s!r} is not exactly representable")
            row.append(_round_half_away(s))
        values.append(tuple(row))
    return IntegerLifting(tuple(values), scale)


# -- exact linear algebra ---------------------------------------------------


def det_int(M: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def inverse_fraction(M: Sequence[Sequence[int]]) -> list[list[Fraction]] | None:
    """Exact inverse by Gauss-Jordan; ``None`` when singular."""
    n = len(M)
    A = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            return None
        A[col], A[pivot] = A[pivot], A[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [row[n:] for row in A]


def _edge_matrix(F: SparseSystem, pairs) -> list[list[int]]:
    rows = []
    for support, (p, q) in zip(F.supports, pairs):
        rows.append([ap - aq for ap, aq in zip(support[p], support[q])])
    return rows


# -- enumeration ------------------------------------------------------------


def enumerate_mixed_cells(F: SparseSystem, w: IntegerLifting) -> list[MixedCell]:
    """All mixed cells of the subdivision induced by ``w`` (upper facets).

    Exhaustive over one pair per support.  Raises
    :class:`DegenerateLiftingError` if a candidate satisfies every facet
    inequality but with equality somewhere (lifting not generic).
    """
    supports = F.supports
    if len(w.values) != len(supports) or any(
        len(v) != len(s) for v, s in zip(w.values, supports)
    ):
        raise ValueError("lifting is not shape-congruent with the system")
    pair_choices = [list(itertools.combinations(range(len(s)), 2)) for s in supports]
    cells = []
    for pairs in itertools.product(*pair_choices):
        E = _edge_matrix(F, pairs)
        rhs = [w.values[i][q] - w.values[i][p] for i, (p, q) in enumerate(pairs)]
        num, den = _cramer(E, rhs)
        if den == 0:
            continue
        status = _facet_status(supports, w.values, pairs, num, den)
        if status == "cell":
            alpha = tuple(Fraction(v, den) for v in num)
            cells.append(MixedCell(tuple(pairs), alpha, den))
        elif status == "tie":
            raise DegenerateLiftingError(
                f"lifting is not generic: tie on candidate cell {list(pairs)}"
            )
    return cells


def _cramer(E: list[list[int]], rhs: list[int]) -> tuple[list[int], int]:
    """``alpha = num / den`` with ``den = |det E|`` (0 when singular)."""
    d = det_int(E)
    if d == 0:
        return [], 0
    num = []
    for r in range(len(E)):
        Er = [row[:r] + [b] + row[r + 1 :] for row, b in zip(E, rhs)]
        num.append(det_int(Er))
    if d < 0:
        return [-v for v in num], -d
    return num, d


def _facet_status(supports, values, pairs, num, den) -> str:
    """``"cell"``, ``"no"`` (a point lies strictly above), or ``"tie"``.

    Lifted values are compared after scaling by ``den > 0``.
    """
    tie = False
    for support, lift, pair in zip(supports, values, pairs):
        p = pair[0]
        top = sum(a * v for a, v in zip(support[p], num)) + lift[p] * den
        for k, a in enumerate(support):
            if k in pair:
                continue
            val = sum(ak * v for ak, v in zip(a, num)) + lift[k] * den
            if val > top:
                return "no"
            if val == top:
                tie = True
    return "tie" if tie else "cell"


def mixed_volume(
    F: SparseSystem, seed: int | None = 0, max_retries: int = 20
) -> int:
    """Mixed volume via a fine mixed subdivision from a random integer lifting."""
    rng = random.Random(seed)
    for _ in range(max_retries):
        w = IntegerLifting(
            tuple(tuple(rng.randrange(2**31) for _ in s) for s in F.supports), 1.0
        )
        try:
            cells = enumerate_mixed_cells(F, w)
        except DegenerateLiftingError:
            continue
        return sum(c.volume for c in cells)
    raise GenericityError(f"no generic lifting found in {max_retries} attempts")


# -- dual cone generators ---------------------------------------------------


def _primitive(coeffs: Sequence[Fraction]) -> tuple[int, ...]:
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return tuple(v // g for v in ints) if g else tuple(ints)


def facet_functional(
    F: SparseSystem, cell: MixedCell, poly: int, point: int
) -> list[Fraction]:
    """Exact coefficients of ``u -> v_poly(u) - (<a, alpha(u)> + u_a)``.

    ``alpha(u)`` is the cell normal for a symbolic lifting ``u`` (linear in
    ``u``) and ``a`` is support point ``point`` of polynomial ``poly``.
    """
    supports = F.supports
    cfg = cayley(F)
    n = F.n_vars
    E = _edge_matrix(F, cell.pairs)
    Einv = inverse_fraction(E)
    # alpha(u) = Einv @ D @ u with D[i] = e_{q_i} - e_{p_i}
    alpha_coeffs = [[Fraction(0)] * len(cfg) for _ in range(n)]
    for i, (p, q) in enumerate(cell.pairs):
        fp, fq = cfg.flat_index(i, p), cfg.flat_index(i, q)
        for r in range(n):
            alpha_coeffs[r][fq] += Einv[r][i]
            alpha_coeffs[r][fp] -= Einv[r][i]
    p = cell.pairs[poly][0]
    a_p = supports[poly][p]
    a = supports[poly][point]
    out = [sum((a_p[r] - a[r]) * alpha_coeffs[r][k] for r in range(n)) for k in range(len(cfg))]
    out[cfg.flat_index(poly, p)] += 1
    out[cfg.flat_index(poly, point)] -= 1
    return out


def dual_cone_generators(
    F: SparseSystem, cells: Sequence[MixedCell], w: IntegerLifting
) -> list[DualConeGenerator]:
    """Deduplicated primitive facet functionals of the mixed cell cone."""
    w_flat = w.flat()
    seen: set[tuple[int, ...]] = set()
    gens = []
    for ci, cell in enumerate(cells):
        for i, support in enumerate(F.supports):
            for k in range(len(support)):
                if k in cell.pairs[i]:
                    continue
                zeta = _primitive(facet_functional(F, cell, i, k))
                if sum(z * v for z, v in zip(zeta, w_flat)) < 0:
                    zeta = tuple(-z for z in zeta)
                if zeta in seen:
                    continue
                seen.add(zeta)
                gens.append(DualConeGenerator(zeta, (ci, i, k)))
    return gens
