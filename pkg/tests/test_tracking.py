import mpmath as mp
import numpy as np
import pytest

from rphom.binomial import count_binomial_real, generate_binomials, solve_binomial_real
from rphom.errors import ConventionViolationError
from rphom.mixed_cells import enumerate_mixed_cells, integerize
from rphom.poly_core import Lifting, evaluate, log_lifting, make_system
from rphom.tracking import (
    RealPolyhedralHomotopy,
    TrackerOptions,
    build_homotopy,
    davidenko_velocity,
    endpoint_residual,
    newton_correct,
    rph_track,
    track_path,
)

from conftest import F2_ENDPOINTS, RUNNING_ENDPOINTS, match_points
from oracles import mp_newton as _mp_newton, track_to as _track_to


def _cells(F):
    w = log_lifting(F)
    return w, enumerate_mixed_cells(F, integerize(w))


def _homotopies(F):
    w, cells = _cells(F)
    return [build_homotopy(F, c, w, k) for k, c in enumerate(cells)], generate_binomials(F)


def test_exponent_law(running):
    for H in _homotopies(running)[0]:
        for block in H.exponents:
            assert min(block) == 0
            assert sum(1 for m in block if m == 0) == 2
            assert all(m >= 0 for m in block)


def test_volume_four_cell_shape(running):
    # <-t^b1 - 24000y + x^3, -9 + 50xy - t^b2 y^2>
    w, cells = _cells(running)
    (cell,) = [c for c in cells if c.volume == 4]
    H = build_homotopy(running, cell, w)
    b1, b2 = H.exponents[0][0], H.exponents[1][2]
    assert H.exponents[0][1:] == (0.0, 0.0)
    assert H.exponents[1][:2] == (0.0, 0.0)
    assert b1 > 0 and b2 > 0


def test_homotopy_endpoints_in_t(running):
    rng = np.random.default_rng(0)
    Hs, Bs = _homotopies(running)
    for H, B in zip(Hs, Bs):
        G = B.as_system()
        for _ in range(10):
            x = rng.uniform(-3, 3, size=2)
            scale = max(1.0, H.scale(x, 1.0))
            assert np.allclose(H.evaluate(x, 1.0), evaluate(running, x), rtol=0, atol=1e-10 * scale)
            assert np.allclose(H.evaluate(x, 0.0), evaluate(G, x), rtol=0, atol=1e-10 * scale)


def test_convention_violation(running):
    w, cells = _cells(running)
    flipped = Lifting(tuple(tuple(-v for v in block) for block in w.values))
    with pytest.raises(ConventionViolationError):
        build_homotopy(running, cells[0], flipped)


def test_velocity_constant_homotopy():
    F = make_system([[((1, 0), 1.0), ((0, 0), -2.0)], [((1, 1), 1.0), ((0, 0), -3.0)]], ("x", "y"))
    H = RealPolyhedralHomotopy(F, ((0.0, 0.0), (0.0, 0.0)))
    assert np.array_equal(davidenko_velocity(H, [2.0, 1.5], 0.3), [0.0, 0.0])


@pytest.mark.parametrize("t", [1e-3, 0.2, 0.7, 1.0])
def test_velocity_linear_homotopy(t):
    # H = x - t
    F = make_system([[((1,), 1.0), ((0,), -1.0)]], ("x",))
    H = RealPolyhedralHomotopy(F, ((0.0, 1.0),))
    assert davidenko_velocity(H, [t], t) == pytest.approx([1.0], rel=1e-15)


def test_velocity_rejects_t_zero(running):
    H = _homotopies(running)[0][0]
    with pytest.raises(ValueError):
        davidenko_velocity(H, [1.0, 1.0], 0.0)


@pytest.mark.parametrize("t", [0.3, 0.6, 0.9])
def test_velocity_matches_finite_difference(running, t):
    Hs, Bs = _homotopies(running)
    h = 1e-7
    for H, B in zip(Hs, Bs):
        for x0 in solve_binomial_real(B):
            x = _track_to(H, x0, t)
            with mp.workdps(40):
                xt = _mp_newton(H, x, t)
                xth = _mp_newton(H, x, t + h)
                fd = np.array([float((xth[j] - xt[j]) / h) for j in range(len(x))])
            v = davidenko_velocity(H, np.array([float(c) for c in xt]), t)
            assert np.max(np.abs(fd - v)) <= 1e-4 * np.max(np.abs(v))


def test_newton_exact_and_perturbed(running):
    H = _homotopies(running)[0][0]
    sol = track_path(H, solve_binomial_real(generate_binomials(running)[0])[0]).endpoint
    r = newton_correct(H, sol, 1.0)
    assert r.converged and r.iterations == 0 and np.array_equal(r.x, sol)
    r = newton_correct(H, sol * (1 + 1e-4), 1.0)
    assert r.converged and r.iterations <= 4
    assert np.allclose(r.x, sol, rtol=1e-9)


def test_newton_from_origin_fails(running):
    H = _homotopies(running)[0][0]
    assert not newton_correct(H, [0.0, 0.0], 1.0).converged


def test_track_running_paths(running):
    Hs, Bs = _homotopies(running)
    ends = []
    for H, B in zip(Hs, Bs):
        for x0 in solve_binomial_real(B):
            res = track_path(H, x0)
            assert res.success, res.status
            assert res.final_residual < 1e-10
            ends.append(res.endpoint)
    assert match_points(ends, RUNNING_ENDPOINTS, 1e-6)


def test_track_constant_homotopy_one_step():
    F = make_system([[((1, 0), 1.0), ((0, 0), -2.0)], [((0, 1), 1.0), ((0, 0), -3.0)]], ("x", "y"))
    H = RealPolyhedralHomotopy(F, ((0.0, 0.0), (0.0, 0.0)))
    res = track_path(H, [2.0, 3.0])
    assert res.success and res.steps_taken == 1
    assert np.array_equal(res.endpoint, [2.0, 3.0])


def test_track_f2_heuristic(f2):
    with pytest.warns(UserWarning, match="heuristic"):
        result = rph_track(f2)
    assert not result.certified_input
    assert match_points(result.solutions, F2_ENDPOINTS, 1e-4)


def test_rph_track_running(running):
    result = rph_track(running)
    assert result.certified_input
    assert match_points(result.solutions, RUNNING_ENDPOINTS, 1e-6)
    assert result.certificate_flag is None
    for x in result.solutions:
        assert endpoint_residual(running, x) < 1e-8
    # no path loss on a certified system
    assert len(result.solutions) == sum(count_binomial_real(B) for B in generate_binomials(running))


def test_rph_track_certify(running):
    sols, flag = rph_track(running, certify=True)
    assert flag == 1 and len(sols) == 4


def test_rph_track_lines(lines):
    result = rph_track(lines, certify=True)
    assert [list(x) for x in result.solutions] == [[1.0, 1.0]]
    assert result.certificate_flag == 1


def test_determinism_and_thread_independence(running):
    a = rph_track(running, max_workers=1).solutions
    b = rph_track(running, max_workers=1).solutions
    c = rph_track(running, max_workers=4).solutions
    assert all(np.array_equal(p, q) for p, q in zip(a, b))
    assert all(np.array_equal(p, q) for p, q in zip(a, c))


def test_step_limit_status(running):
    H = _homotopies(running)[0][0]
    x0 = solve_binomial_real(generate_binomials(running)[0])[0]
    res = track_path(H, x0, TrackerOptions(max_steps=3))
    assert res.status == "step-limit"


def test_bad_start_reports_newton_failure(running):
    H = _homotopies(running)[0][0]
    res = track_path(H, [0.0, 0.0])
    assert res.status in {"newton-failure", "diverged"}
    assert not res.success


def test_options_validated():
    with pytest.raises(ValueError):
        TrackerOptions(t_start=0.0)
    with pytest.raises(ValueError):
        TrackerOptions(min_step=1e-3, initial_step=1e-4)
