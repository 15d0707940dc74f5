"""Sparse real polynomial systems: parsing, evaluation, Jacobians, log lifting."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateSystemError, DimensionError, SystemParseError

Exponent = tuple[int, ...]


@dataclass(frozen=True)
class SparsePolynomial:
    """A real polynomial stored as parallel lists of exponents and coefficients.

    Term order is the order the terms were written in; every downstream
    index (lifting values, cell pairs, cone functionals) refers to it.
    """

    support: tuple[Exponent, ...]
    coefficients: tuple[float, ...]
    _exps: np.ndarray = field(init=False, repr=False, compare=False)
    _coefs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.support) != len(self.coefficients):
            raise ValueError("support and coefficients differ in length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("repeated exponent vector in support")
        if any(c == 0 for c in self.coefficients):
            raise ValueError("zero coefficient stored")
        if any(e < 0 for a in self.support for e in a):
            raise ValueError("negative exponent")
        exps = np.array(self.support, dtype=np.int64).reshape(len(self.support), -1)
        object.__setattr__(self, "_exps", exps)
        object.__setattr__(self, "_coefs", np.array(self.coefficients, dtype=float))

    def __len__(self) -> int:
        return len(self.support)

    @property
    def exponent_array(self) -> np.ndarray:
        return self._exps

    @property
    def coefficient_array(self) -> np.ndarray:
        return self._coefs

    def monomials(self, x: np.ndarray) -> np.ndarray:
        """Values x^a for every support point (0**0 is 1)."""
        return np.prod(np.power(x[None, :], self._exps), axis=1)

    def terms(self, x: np.ndarray) -> np.ndarray:
        return self._coefs * self.monomials(x)

    def __call__(self, x) -> float:
        return float(np.sum(self.terms(np.asarray(x, dtype=float))))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        grad = np.empty(x.shape[0])
        for j in range(x.shape[0]):
            d = self._exps[:, j]
            lowered = self._exps.copy()
            lowered[:, j] = np.maximum(d - 1, 0)
            mons = np.prod(np.power(x[None, :], lowered), axis=1)
            grad[j] = np.sum(self._coefs * d * mons)
        return grad


@dataclass(frozen=True)
class SparseSystem:
    """A square system of sparse polynomials."""

    polynomials: tuple[SparsePolynomial, ...]
    variable_names: tuple[str, ...]

    def __post_init__(self):
        n = len(self.variable_names)
        if n == 0:
            raise DimensionError("system has no variables")
        if len(self.polynomials) != n:
            raise DimensionError(
                f"{len(self.polynomials)} polynomials in {n} variables; system must be square"
            )
        for i, p in enumerate(self.polynomials):
            if len(p) < 2:
                raise DegenerateSystemError(f"polynomial {i} has fewer than 2 terms")
            if any(len(a) != n for a in p.support):
                raise DimensionError(f"polynomial {i} has exponents of the wrong length")

    @property
    def n_vars(self) -> int:
        return len(self.variable_names)

    @property
    def supports(self) -> list[tuple[Exponent, ...]]:
        return [p.support for p in self.polynomials]

    @property
    def coefficients(self) -> list[tuple[float, ...]]:
        return [p.coefficients for p in self.polynomials]

    @property
    def n_terms(self) -> int:
        """Total number of support points, i.e. the Cayley configuration size."""
        return sum(len(p) for p in self.polynomials)

    def __len__(self) -> int:
        return len(self.polynomials)


@dataclass(frozen=True)
class Lifting:
    """One real height per support point, shaped like the system's supports."""

    values: tuple[tuple[float, ...], ...]

    def flat(self) -> list:
        return [v for block in self.values for v in block]

    def check_shape(self, F: SparseSystem) -> None:
        if len(self.values) != len(F) or any(
            len(v) != len(p) for v, p in zip(self.values, F.polynomials)
        ):
            raise ValueError("lifting is not shape-congruent with the system")


def make_system(
    polynomials: Sequence[Sequence[tuple[Sequence[int], float]]],
    variable_names: Sequence[str] | None = None,
    check_dimension: bool = True,
) -> SparseSystem:
    """Build a system from ``[[(exponents, coefficient), ...], ...]``.

    Duplicate exponents within a polynomial are merged by summing their
    coefficients; terms that cancel to zero are dropped.  A warning is
    issued for supports that are not full-dimensional unless
    ``check_dimension`` is false.
    """
    if variable_names is None:
        n = len(polynomials[0][0][0]) if polynomials and polynomials[0] else 0
        variable_names = [f"x{i + 1}" for i in range(n)]
    polys = []
    for terms in polynomials:
        merged: dict[Exponent, float] = {}
        for exps, coef in terms:
            key = tuple(int(e) for e in exps)
            merged[key] = merged.get(key, 0.0) + float(coef)
        kept = [(a, c) for a, c in merged.items() if c != 0.0]
        polys.append(
            SparsePolynomial(tuple(a for a, _ in kept), tuple(c for _, c in kept))
        )
    F = SparseSystem(tuple(polys), tuple(variable_names))
    if check_dimension:
        _warn_if_not_full_dimensional(F)
    return F


def _warn_if_not_full_dimensional(F: SparseSystem) -> None:
    n = F.n_vars
    for i, p in enumerate(F.polynomials):
        diffs = p.exponent_array[1:] - p.exponent_array[0]
        if np.linalg.matrix_rank(diffs.astype(float)) < n:
            warnings.warn(
                f"support of polynomial {i} is not full-dimensional",
                stacklevel=3,
            )


def parse_system(text: str) -> SparseSystem:
    """Parse the JSON system format.

    ``{"variables": ["x", "y"], "polynomials": [[{"exponents": [0, 0],
    "coefficient": -1.0}, ...], ...]}``
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SystemParseError("top level must be an object")
    names = doc.get("variables")
    polys = doc.get("polynomials")
    if not isinstance(names, list) or not all(isinstance(v, str) for v in names):
        raise SystemParseError("'variables' must be a list of strings")
    if len(set(names)) != len(names):
        raise SystemParseError("repeated variable name")
    if not isinstance(polys, list):
        raise SystemParseError("'polynomials' must be a list")
    n = len(names)
    raw = []
    for i, poly in enumerate(polys):
        if not isinstance(poly, list):
            raise SystemParseError(f"polynomial {i} must be a list of terms")
        terms = []
        for term in poly:
            try:
                exps = term["exponents"]
                coef = term["coefficient"]
            except (TypeError, KeyError) as exc:
                raise SystemParseError(f"polynomial {i}: bad term {term!r}") from exc
            if (
                not isinstance(exps, list)
                or len(exps) != n
                or not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in exps)
            ):
                raise SystemParseError(
                    f"polynomial {i}: exponents must be {n} nonnegative integers"
                )
            if isinstance(coef, bool) or not isinstance(coef, (int, float)):
                raise SystemParseError(f"polynomial {i}: coefficient must be a number")
            if not math.isfinite(coef):
                raise SystemParseError(f"polynomial {i}: coefficient must be finite")
            terms.append((exps, float(coef)))
        raw.append(terms)
    if len(raw) != n:
        raise DimensionError(f"{len(raw)} polynomials in {n} variables; system must be square")
    return make_system(raw, names)


def system_to_dict(F: SparseSystem) -> dict:
    return {
        "variables": list(F.variable_names),
        "polynomials": [
            [
                {"exponents": list(a), "coefficient": c}
                for a, c in zip(p.support, p.coefficients)
            ]
            for p in F.polynomials
        ],
    }


def print_system(F: SparseSystem) -> str:
    """Serialize to the JSON system format (inverse of :func:`parse_system`)."""
    return json.dumps(system_to_dict(F))


def evaluate(F: SparseSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([np.sum(p.terms(x)) for p in F.polynomials])


def jacobian(F: SparseSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([p.gradient(x) for p in F.polynomials])


def monomial_scale(F: SparseSystem, x) -> float:
    """Largest absolute term value of F at x; the natural residual scale."""
    x = np.asarray(x, dtype=float)
    return float(max(np.max(np.abs(p.terms(x))) for p in F.polynomials))


def relative_residual(F: SparseSystem, x) -> float:
    return float(np.max(np.abs(evaluate(F, x)))) / max(1.0, monomial_scale(F, x))


def log_lifting(F: SparseSystem) -> Lifting:
    """Natural log of each coefficient's absolute value."""
    return Lifting(
        tuple(tuple(math.log(abs(c)) for c in p.coefficients) for p in F.polynomials)
    )


def _format_number(c: float) -> str:
    if float(c).is_integer() and abs(c) < 1e15:
        return str(int(c))
    return repr(float(c))


def format_monomial(exps: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for e, v in zip(exps, names):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts)


def format_polynomial(
    terms: Sequence[tuple[float, Sequence[int]]], names: Sequence[str]
) -> str:
    """Render terms like ``-24000*y + x^3`` in the given order."""
    out = []
    for k, (c, a) in enumerate(terms):
        mono = format_monomial(a, names)
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{_format_number(mag)}*{mono}"
        else:
            body = _format_number(mag)
        if k == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def format_system(F: SparseSystem) -> list[str]:
    return [
        format_polynomial(list(zip(p.coefficients, p.support)), F.variable_names)
        for p in F.polynomials
    ]
