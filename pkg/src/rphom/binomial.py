"""Binomial start systems from mixed cells, solved over the reals through
the Smith normal form of their exponent matrices."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularExponentError
from .mixed_cells import (
    DEFAULT_SCALE,
    MixedCell,
    det_int,
    enumerate_mixed_cells,
    integerize,
)
from .poly_core import (
    SparseSystem,
    format_polynomial,
    log_lifting,
    make_system,
)

IntMatrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class SmithDecomposition:
    """``U @ E @ V == S`` with unimodular ``U``, ``V`` and diagonal ``S``."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.S[i][i] for i in range(len(self.S)))


@dataclass(frozen=True)
class BinomialSystem:
    """``x**E[i] == rhs[i]`` for each row, i.e. ``c_p x^a_p + c_q x^a_q = 0``.

    ``display_terms[i]`` holds the two surviving ``(coefficient, exponent)``
    terms of polynomial ``i`` in source order.
    """

    exponent_matrix: IntMatrix
    rhs: tuple[float, ...]
    display_terms: tuple[tuple[tuple[float, tuple[int, ...]], ...], ...]
    source_cell: int
    variable_names: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.rhs)

    def format(self) -> list[str]:
        names = self.variable_names or tuple(f"x{i + 1}" for i in range(self.n))
        return [format_polynomial(terms, names) for terms in self.display_terms]

    def as_system(self) -> SparseSystem:
        """The two-term polynomial form as a :class:`SparseSystem`."""
        names = self.variable_names or tuple(f"x{i + 1}" for i in range(self.n))
        return make_system(
            [[(a, c) for c, a in terms] for terms in self.display_terms],
            names,
            check_dimension=False,
        )

    def to_dict(self) -> dict:
        return {
            "exponent_matrix": [list(r) for r in self.exponent_matrix],
            "rhs": list(self.rhs),
            "source_cell": self.source_cell,
            "polynomials": self.format(),
        }


def _binomial_from_cell(F: SparseSystem, cell: MixedCell, index: int) -> BinomialSystem:
    rows, rhs, display = [], [], []
    for poly, (i, j) in zip(F.polynomials, cell.pairs):
        # orient each row from the lexicographically larger exponent
        p, q = (i, j) if poly.support[i] > poly.support[j] else (j, i)
        rows.append(tuple(a - b for a, b in zip(poly.support[p], poly.support[q])))
        rhs.append(-poly.coefficients[q] / poly.coefficients[p])
        display.append(tuple((poly.coefficients[k], poly.support[k]) for k in sorted((i, j))))
    return BinomialSystem(tuple(rows), tuple(rhs), tuple(display), index, F.variable_names)


def generate_binomials(
    F: SparseSystem, scale: float = DEFAULT_SCALE
) -> list[BinomialSystem]:
    """One binomial start system per mixed cell of the log-coefficient lifting."""
    cells = enumerate_mixed_cells(F, integerize(log_lifting(F), scale))
    return [_binomial_from_cell(F, c, k) for k, c in enumerate(cells)]


# -- Smith normal form ------------------------------------------------------


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(E: Sequence[Sequence[int]]) -> SmithDecomposition:
    """Smith normal form by elimination with the smallest nonzero pivot.

    Exact integers throughout.  Diagonal entries are nonnegative, form a
    divisibility chain, and zeros (singular input) trail.
    """
    A = [[int(v) for v in row] for row in E]
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("exponent matrix must be square")
    U = _identity(n)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):
        # row_dst += f * row_src
        A[dst] = [a + f * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for M in (A, V):
            for row in M:
                row[dst] += f * row[src]

    for k in range(n):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(k, n) for j in range(k, n) if A[i][j]]
            if not nz:
                break
            _, pi, pj = min(nz)
            swap_rows(k, pi)
            swap_cols(k, pj)
            piv = A[k][k]
            for i in range(k + 1, n):
                if A[i][k]:
                    add_row(i, k, -(A[i][k] // piv))
            for j in range(k + 1, n):
                if A[k][j]:
                    add_col(j, k, -(A[k][j] // piv))
            if any(A[i][k] for i in range(k + 1, n)) or any(A[k][j] for j in range(k + 1, n)):
                continue
            bad = next(
                (i for i in range(k + 1, n) for j in range(k + 1, n) if A[i][j] % piv),
                None,
            )
            if bad is None:
                break
            add_row(k, bad, 1)
        if A[k][k] < 0:
            A[k] = [-v for v in A[k]]
            U[k] = [-v for v in U[k]]
    return SmithDecomposition(
        tuple(map(tuple, U)), tuple(map(tuple, A)), tuple(map(tuple, V))
    )


# -- real solutions ---------------------------------------------------------


def _signed_log_power(rhs: Sequence[float], M: Sequence[Sequence[int]]):
    """Sign and log-magnitude of ``prod_j rhs[j] ** M[i][j]`` for each row i."""
    logs = [math.log(abs(b)) for b in rhs]
    neg = [b < 0 for b in rhs]
    signs, mags = [], []
    for row in M:
        mags.append(math.fsum(e * l for e, l in zip(row, logs)))
        odd = sum(e for e, s in zip(row, neg) if s) % 2
        signs.append(-1 if odd else 1)
    return signs, mags


def _check_nonsingular(B: BinomialSystem) -> SmithDecomposition:
    if det_int(B.exponent_matrix) == 0:
        raise SingularExponentError("binomial exponent matrix is singular")
    return smith_normal_form(B.exponent_matrix)


def _diagonal_roots(snf: SmithDecomposition, B: BinomialSystem):
    """Real roots ``(sign, logmag)`` of each diagonal equation ``y_i**s_i = b'_i``."""
    signs, mags = _signed_log_power(B.rhs, snf.U)
    choices = []
    for s, sg, lm in zip(snf.diagonal, signs, mags):
        root = lm / s
        if s % 2:
            choices.append([(sg, root)])
        elif sg > 0:
            choices.append([(-1, root), (1, root)])
        else:
            choices.append([])
    return choices


def count_binomial_real(B: BinomialSystem) -> int:
    """Number of solutions of ``x**E = rhs`` in the real torus."""
    snf = _check_nonsingular(B)
    signs, _ = _signed_log_power(B.rhs, snf.U)
    count = 1
    for s, sg in zip(snf.diagonal, signs):
        if s % 2 == 0:
            count *= 2 if sg > 0 else 0
    return count


def solve_binomial_real(B: BinomialSystem) -> list[np.ndarray]:
    """All real torus solutions, ordered by sign pattern then value."""
    snf = _check_nonsingular(B)
    V = snf.V
    n = B.n
    sols = []
    for combo in itertools.product(*_diagonal_roots(snf, B)):
        # x_j = prod_k y_k ** V[j][k]
        x = np.empty(n)
        for j in range(n):
            lm = math.fsum(V[j][k] * combo[k][1] for k in range(n))
            neg = sum(V[j][k] for k in range(n) if combo[k][0] < 0) % 2
            x[j] = -math.exp(lm) if neg else math.exp(lm)
        sols.append(x)
    sols.sort(key=lambda x: (tuple(v > 0 for v in x), tuple(x)))
    return sols


def total_complex_count(binomials: Sequence[BinomialSystem]) -> int:
    return sum(abs(det_int(B.exponent_matrix)) for B in binomials)


def binomial_from_matrix(
    E: Sequence[Sequence[int]], rhs: Sequence[float], variable_names: Sequence[str] = ()
) -> BinomialSystem:
    """Build ``x**E = rhs`` directly; the two-term form is
    ``x**E_plus - rhs * x**E_minus`` with ``E = E_plus - E_minus``."""
    rows = tuple(tuple(int(v) for v in row) for row in E)
    display = []
    for row, b in zip(rows, rhs):
        plus = tuple(max(v, 0) for v in row)
        minus = tuple(max(-v, 0) for v in row)
        display.append(((1.0, plus), (-float(b), minus)))
    return BinomialSystem(
        rows, tuple(float(b) for b in rhs), tuple(display), -1, tuple(variable_names)
    )
