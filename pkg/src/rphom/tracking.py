"""Real polyhedral homotopy construction and real path tracking.

For a mixed cell with normal ``alpha`` (computed on the real, unscaled
log-coefficient lifting ``w``) the homotopy is

    H_i(x, t) = sum_a t**m[i][a] * c_a * x**a,
    m[i][a]   = v_i - (<a, alpha> + w(a)) >= 0,

with ``v_i`` the common lifted value on the cell pair, so the pair carries
the only zero exponents.  At ``t = 0`` only the cell's binomial survives and
at ``t = 1`` ``H`` is the target system.
"""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .binomial import BinomialSystem, _binomial_from_cell, solve_binomial_real
from .certify_numeric import certify_point, certify_solution_set
from .errors import ConventionViolationError, SingularJacobianError
from .mixed_cells import DEFAULT_SCALE, MixedCell, enumerate_mixed_cells, integerize
from .patchwork import certify_patchwork
from .poly_core import Lifting, SparseSystem, evaluate, log_lifting, monomial_scale

log = logging.getLogger(__name__)

_DIVERGENCE_NORM = 1e12
_COND_LIMIT = 1e15


@dataclass(frozen=True)
class TrackerOptions:
    t_start: float = 1e-6
    initial_step: float = 1e-4
    min_step: float = 1e-14
    newton_tol: float = 1e-10
    max_newton_iters: int = 8
    max_steps: int = 100_000
    step_expand: float = 2.0
    step_shrink: float = 0.5

    def __post_init__(self):
        if not 0 < self.t_start < 1:
            raise ValueError("t_start must lie in (0, 1)")
        if not 0 < self.min_step < self.initial_step:
            raise ValueError("need 0 < min_step < initial_step")


@dataclass(frozen=True)
class RealPolyhedralHomotopy:
    target: SparseSystem
    exponents: tuple[tuple[float, ...], ...]
    source_cell: int = -1

    @property
    def is_constant(self) -> bool:
        return all(m == 0 for block in self.exponents for m in block)

    def _tpowers(self, t: float):
        return [np.power(t, np.asarray(m)) for m in self.exponents]

    def evaluate(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array(
            [np.sum(tp * p.terms(x)) for tp, p in zip(self._tpowers(t), self.target.polynomials)]
        )

    def scale(self, x, t: float) -> float:
        """Largest absolute term of ``H(x, t)``."""
        x = np.asarray(x, dtype=float)
        return float(
            max(np.max(np.abs(tp * p.terms(x))) for tp, p in zip(self._tpowers(t), self.target.polynomials))
        )

    def relative_residual(self, x, t: float) -> float:
        return float(np.max(np.abs(self.evaluate(x, t)))) / max(1.0, self.scale(x, t))

    def jacobian_x(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        J = np.empty((n, n))
        for i, (tp, p) in enumerate(zip(self._tpowers(t), self.target.polynomials)):
            exps = p.exponent_array
            for j in range(n):
                d = exps[:, j]
                lowered = exps.copy()
                lowered[:, j] = np.maximum(d - 1, 0)
                mons = np.prod(np.power(x[None, :], lowered), axis=1)
                J[i, j] = np.sum(tp * p.coefficient_array * d * mons)
        return J

    def derivative_t(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty(len(self.exponents))
        for i, (m, p) in enumerate(zip(self.exponents, self.target.polynomials)):
            m = np.asarray(m)
            dt = np.where(m > 0, m * np.power(t, m - 1.0, where=m > 0, out=np.zeros_like(m)), 0.0)
            out[i] = np.sum(dt * p.terms(x))
        return out


def cell_normal(F: SparseSystem, cell: MixedCell, w: Lifting) -> np.ndarray:
    """Cell normal for a real lifting, from the cell's equality system."""
    E = np.array(
        [[ap - aq for ap, aq in zip(s[p], s[q])] for s, (p, q) in zip(F.supports, cell.pairs)],
        dtype=float,
    )
    rhs = np.array([w.values[i][q] - w.values[i][p] for i, (p, q) in enumerate(cell.pairs)])
    return np.linalg.solve(E, rhs)


def build_homotopy(
    F: SparseSystem, cell: MixedCell, w: Lifting, source_cell: int = -1, tol: float = 1e-9
) -> RealPolyhedralHomotopy:
    alpha = cell_normal(F, cell, w)
    exps = []
    for i, (support, pair) in enumerate(zip(F.supports, cell.pairs)):
        p = pair[0]
        top = float(np.dot(support[p], alpha)) + w.values[i][p]
        row = []
        for k, a in enumerate(support):
            if k in pair:
                row.append(0.0)
                continue
            m = top - (float(np.dot(a, alpha)) + w.values[i][k])
            if m < -tol:
                raise ConventionViolationError(
                    f"negative exponent {m} for polynomial {i}, point {k}"
                )
            row.append(m)
        exps.append(tuple(row))
    return RealPolyhedralHomotopy(F, tuple(exps), source_cell)


def davidenko_velocity(H: RealPolyhedralHomotopy, x, t: float) -> np.ndarray:
    """``dx/dt = -(dH/dx)^{-1} dH/dt``."""
    if not t > 0:
        raise ValueError("velocity is only defined for t > 0")
    J = H.jacobian_x(x, t)
    if not np.all(np.isfinite(J)) or np.linalg.cond(J) > _COND_LIMIT:
        raise SingularJacobianError(f"singular Jacobian at t={t}")
    return -np.linalg.solve(J, H.derivative_t(x, t))


@dataclass
class NewtonResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    singular: bool = False


def newton_correct(
    H: RealPolyhedralHomotopy, x, t: float, opts: TrackerOptions = TrackerOptions()
) -> NewtonResult:
    x = np.array(x, dtype=float)
    res = H.relative_residual(x, t)
    for it in range(opts.max_newton_iters + 1):
        if res < opts.newton_tol:
            return NewtonResult(x, True, it, res)
        if it == opts.max_newton_iters:
            break
        J = H.jacobian_x(x, t)
        try:
            if not np.all(np.isfinite(J)) or np.linalg.cond(J) > _COND_LIMIT:
                raise np.linalg.LinAlgError
            dx = np.linalg.solve(J, H.evaluate(x, t))
        except np.linalg.LinAlgError:
            return NewtonResult(x, False, it, res, singular=True)
        x = x - dx
        if not np.all(np.isfinite(x)):
            return NewtonResult(x, False, it + 1, np.inf)
        res = H.relative_residual(x, t)
    return NewtonResult(x, False, opts.max_newton_iters, res)


def _polish(H: RealPolyhedralHomotopy, x: np.ndarray, t: float, extra: int = 3):
    res = H.relative_residual(x, t)
    for _ in range(extra):
        try:
            y = x - np.linalg.solve(H.jacobian_x(x, t), H.evaluate(x, t))
        except np.linalg.LinAlgError:
            break
        r = H.relative_residual(y, t)
        if not np.all(np.isfinite(y)) or r >= res:
            break
        x, res = y, r
    return x, res


@dataclass
class PathResult:
    status: str
    endpoint: np.ndarray
    final_residual: float
    steps_taken: int = 0
    newton_iters_total: int = 0
    start: np.ndarray | None = None
    source_cell: int = -1

    @property
    def success(self) -> bool:
        return self.status == "success"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "endpoint": [float(v) for v in self.endpoint],
            "final_residual": self.final_residual,
            "steps_taken": self.steps_taken,
            "newton_iters_total": self.newton_iters_total,
            "source_cell": self.source_cell,
        }


def _rk4(H, x, t, h):
    k1 = davidenko_velocity(H, x, t)
    k2 = davidenko_velocity(H, x + 0.5 * h * k1, t + 0.5 * h)
    k3 = davidenko_velocity(H, x + 0.5 * h * k2, t + 0.5 * h)
    k4 = davidenko_velocity(H, x + h * k3, t + h)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def track_path(
    H: RealPolyhedralHomotopy, x0, opts: TrackerOptions = TrackerOptions()
) -> PathResult:
    """Track a real start root of ``H(., 0)`` to ``t = 1``.

    The path is seeded at ``t_start`` by Newton correction of ``x0``, then
    followed with an RK4 predictor on the Davidenko field and a Newton
    corrector.  A step is accepted iff the corrector converges; the step
    halves on rejection and grows after three consecutive acceptances.
    """
    x0 = np.asarray(x0, dtype=float)

    def done(status, x, res, steps, iters):
        return PathResult(status, x, res, steps, iters, x0, H.source_cell)

    if H.is_constant:
        nr = newton_correct(H, x0, 1.0, opts)
        x, res = _polish(H, nr.x, 1.0) if nr.converged else (nr.x, nr.residual)
        return done("success" if nr.converged else "newton-failure", x, res, 1, nr.iterations)

    nr = newton_correct(H, x0, opts.t_start, opts)
    iters = nr.iterations
    if not nr.converged:
        return done("newton-failure", nr.x, nr.residual, 0, iters)
    x, t, h = nr.x, opts.t_start, opts.initial_step
    steps = 0
    streak = 0
    last_singular = False
    while t < 1.0:
        if steps >= opts.max_steps:
            return done("step-limit", x, H.relative_residual(x, t), steps, iters)
        steps += 1
        h = min(h, 1.0 - t)
        t_new = 1.0 if t + h >= 1.0 else t + h
        try:
            pred = _rk4(H, x, t, t_new - t)
            nr = newton_correct(H, pred, t_new, opts)
            iters += nr.iterations
            accepted = nr.converged
            last_singular = nr.singular
        except SingularJacobianError:
            accepted = False
            last_singular = True
        if accepted:
            x, t = nr.x, t_new
            if np.max(np.abs(x)) > _DIVERGENCE_NORM:
                return done("diverged", x, nr.residual, steps, iters)
            streak += 1
            if streak >= 3:
                h *= opts.step_expand
                streak = 0
        else:
            streak = 0
            h *= opts.step_shrink
            if h < opts.min_step:
                status = "diverged" if last_singular else "newton-failure"
                return done(status, x, H.relative_residual(x, t), steps, iters)
    x, res = _polish(H, x, 1.0)
    if res >= opts.newton_tol:
        return done("newton-failure", x, res, steps, iters)
    return done("success", x, res, steps, iters)


# -- whole-system driver ----------------------------------------------------


@dataclass
class RPHResult:
    solutions: list[np.ndarray]
    paths: list[PathResult]
    binomials: list[BinomialSystem]
    start_count: int
    certified_input: bool
    certificate_flag: int | None = None
    warnings: list[str] = field(default_factory=list)
    start_points_verified: bool | None = None

    def __iter__(self):
        # unpacks as (solutions, flag) like the certification-mode return
        return iter((self.solutions, self.certificate_flag))


def _worker_count(max_workers: int | None) -> int:
    if max_workers is None:
        env = os.environ.get("RPH_THREADS", "0")
        try:
            max_workers = int(env)
        except ValueError:
            max_workers = 0
    if max_workers <= 0:
        max_workers = os.cpu_count() or 1
    return max_workers


def dedupe_endpoints(points: Sequence[np.ndarray], rel_tol: float = 1e-8):
    """Merge endpoints closer than ``rel_tol`` (relative, max-norm)."""
    kept: list[np.ndarray] = []
    merged = 0
    for p in points:
        if any(
            np.max(np.abs(p - q)) <= rel_tol * max(1.0, np.max(np.abs(q))) for q in kept
        ):
            merged += 1
            continue
        kept.append(p)
    return kept, merged


def binomial_start_residual(B: BinomialSystem, x) -> float:
    """Max relative error of ``x**E[i]`` against ``rhs[i]``."""
    x = np.asarray(x, dtype=float)
    E = np.array(B.exponent_matrix)
    vals = np.prod(np.power(x[None, :], E.astype(float)), axis=1)
    rhs = np.array(B.rhs)
    return float(np.max(np.abs(vals - rhs) / np.abs(rhs)))


def rph_track(
    F: SparseSystem,
    opts: TrackerOptions = TrackerOptions(),
    certify: bool = False,
    scale: float = DEFAULT_SCALE,
    max_workers: int | None = None,
) -> RPHResult:
    """Track every real binomial start root to ``F`` and collect endpoints.

    With ``certify`` the start roots are checked against their binomial
    systems and the endpoints are Krawczyk-certified; the flag is 1 only if
    everything certifies and no start root was lost.
    """
    w = log_lifting(F)
    cells = enumerate_mixed_cells(F, integerize(w, scale))
    certified_input = certify_patchwork(F, scale=scale).certified
    notes = []
    if not certified_input:
        msg = "system is not certified patchworked; tracking is heuristic"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)

    binomials = [_binomial_from_cell(F, c, k) for k, c in enumerate(cells)]
    jobs = []
    for k, (cell, B) in enumerate(zip(cells, binomials)):
        H = build_homotopy(F, cell, w, k)
        for x0 in solve_binomial_real(B):
            jobs.append((H, B, x0))

    workers = min(_worker_count(max_workers), max(1, len(jobs)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            paths = list(pool.map(lambda j: track_path(j[0], j[2], opts), jobs))
    else:
        paths = [track_path(H, x0, opts) for H, _, x0 in jobs]

    for p in paths:
        if not p.success:
            msg = f"path from {p.start.tolist()} (cell {p.source_cell}) ended with {p.status}"
            log.warning(msg)
            notes.append(msg)
    ends = [p.endpoint for p in paths if p.success]
    solutions, merged = dedupe_endpoints(ends)
    if merged:
        msg = f"{merged} endpoint(s) coincided with others and were merged"
        log.warning(msg)
        notes.append(msg)

    result = RPHResult(solutions, paths, binomials, len(jobs), certified_input, None, notes)
    if certify:
        starts_ok = all(
            binomial_start_residual(B, x0) < 1e-12 and certify_point(B.as_system(), x0).certified
            for _, B, x0 in jobs
        )
        cert = certify_solution_set(F, solutions, len(jobs))
        result.start_points_verified = starts_ok
        result.certificate_flag = int(starts_ok and cert.flag == 1)
    return result


def endpoint_residual(F: SparseSystem, x) -> float:
    """``||F(x)||_inf / max(1, largest monomial term at x)``."""
    return float(np.max(np.abs(evaluate(F, x)))) / max(1.0, monomial_scale(F, x))
