from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from filippov.core import AffineField, FilippovSystem, RegionLabel, classify_point
from filippov.errors import DomainError, NoReturn
from filippov.flow import (
    FlowSegment,
    SlideSegment,
    filippov_orbit,
    first_return_to_axis,
    linear_flow,
)


def _helper_canonical_system(alpha, beta, gamma1, delta, gamma2, gamma3, eta, rho):
    right = AffineField([[2 * alpha, 1.0], [-1 - alpha * alpha, 0.0]], [0.0, beta])
    left = AffineField([[gamma1, delta], [gamma2, gamma3]], [eta, rho])
    return FilippovSystem(left=left, right=right)


def _helper_scenario_system(alpha, rho):
    return _helper_canonical_system(alpha, 1.0, 2.0, 1.0, -2.0, 0.0, 1.0, rho)


def _helper_expm_flow(field, z0, t):
    # affine flow via the augmented 3x3 exponential
    M = np.zeros((3, 3))
    M[:2, :2] = field.A
    M[:2, 2] = field.b
    out = expm(M * t) @ np.array([z0[0], z0[1], 1.0])
    return out[:2]


# ---------------------------------------------------------------------------
# linear_flow


def test_linear_flow_time_zero_is_identity():
    f = AffineField([[0.3, -1.2], [0.7, 0.1]], [0.5, -0.4])
    z = linear_flow(f, (1.1, -2.2), 0.0)
    np.testing.assert_allclose(z, [1.1, -2.2], atol=1e-15)


def test_linear_flow_center_closes_after_full_turn():
    f = AffineField([[0.0, 1.0], [-1.0, 0.0]], [0.0, 1.0])
    z = linear_flow(f, (0.0, 0.0), 2.0 * math.pi)
    np.testing.assert_allclose(z, [0.0, 0.0], atol=1e-12)
    # halfway around the circle of radius 1 about (1, 0)
    np.testing.assert_allclose(linear_flow(f, (0.0, 0.0), math.pi), [2.0, 0.0], atol=1e-12)


def test_linear_flow_matches_closed_form_left_solution():
    """Left-zone flow from (0, y0) against the explicit spiral solution."""
    gamma3, gamma2, eta, rho = 0.4, -1.5, 0.8, -0.2
    left = AffineField([[gamma3, 1.0], [gamma2, gamma3]], [eta, rho])
    Delta = gamma3 * gamma3 - gamma2
    nu = math.sqrt(-gamma2)
    xbar = (rho - gamma3 * eta) / Delta
    ybar = (eta * gamma2 - rho * gamma3) / Delta
    for y0 in (-0.7, 0.0, 1.3):
        for t in (0.0, 0.37, 1.9, 4.2):
            c, s = math.cos(nu * t), math.sin(nu * t)
            ex = math.exp(gamma3 * t)
            x_ref = ex * (-xbar * c + (y0 - ybar) * s / nu) + xbar
            y_ref = ex * (-(gamma2 * xbar / nu) * s + (y0 - ybar) * c) + ybar
            z = linear_flow(left, (0.0, y0), t)
            assert z[0] == pytest.approx(x_ref, abs=1e-12)
            assert z[1] == pytest.approx(y_ref, abs=1e-12)


def test_linear_flow_agrees_with_matrix_exponential():
    rng = np.random.default_rng(7)
    mats = [rng.uniform(-2.0, 2.0, size=(2, 2)) for _ in range(25)]
    mats.append(np.zeros((2, 2)))
    mats.append(np.array([[0.0, 1.0], [0.0, 0.0]]))  # nilpotent
    mats.append(np.array([[1.0, 1.0], [0.0, 1.0]]))  # defective
    mats.append(np.array([[2.0, 0.0], [0.0, -1.0]]))
    for A in mats:
        b = rng.uniform(-2.0, 2.0, size=2)
        f = AffineField(A, b)
        z0 = rng.uniform(-3.0, 3.0, size=2)
        for t in (-1.3, 0.7, 2.1):
            want = _helper_expm_flow(f, z0, t)
            got = linear_flow(f, z0, t)
            np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9)


def test_linear_flow_against_adaptive_integrator():
    rng = np.random.default_rng(11)
    ts = np.linspace(0.0, 10.0, 11)
    worst = 0.0
    for _ in range(100):
        A = rng.uniform(-1.0, 1.0, size=(2, 2))
        b = rng.uniform(-1.0, 1.0, size=2)
        z0 = rng.uniform(-2.0, 2.0, size=2)
        f = AffineField(A, b)
        sol = solve_ivp(
            lambda t, z: A @ z + b,
            (0.0, 10.0),
            z0,
            method="DOP853",
            t_eval=ts,
            rtol=1e-12,
            atol=1e-13,
        )
        assert sol.success
        for t, z_num in zip(sol.t, sol.y.T):
            z_cf = linear_flow(f, z0, t)
            err = np.linalg.norm(z_cf - z_num) / (1.0 + np.linalg.norm(z_num))
            worst = max(worst, err)
    assert worst < 1e-9


def test_linear_flow_semigroup_property():
    rng = np.random.default_rng(13)
    for _ in range(50):
        f = AffineField(rng.uniform(-1.5, 1.5, size=(2, 2)), rng.uniform(-1.5, 1.5, size=2))
        z0 = rng.uniform(-2.0, 2.0, size=2)
        t1, t2 = rng.uniform(-2.0, 2.0, size=2)
        direct = linear_flow(f, z0, t1 + t2)
        chained = linear_flow(f, linear_flow(f, z0, t1), t2)
        np.testing.assert_allclose(
            chained, direct, rtol=1e-10, atol=1e-10 * (1.0 + np.linalg.norm(direct))
        )


# ---------------------------------------------------------------------------
# first_return_to_axis


def test_first_return_center_full_turn():
    f = AffineField([[0.0, 1.0], [-1.0, 0.0]], [0.0, 1.0])
    t_hit, z_hit = first_return_to_axis(f, (0.0, 0.0), "right")
    assert t_hit == pytest.approx(2.0 * math.pi, abs=1e-10)
    np.testing.assert_allclose(z_hit, [0.0, 0.0], atol=1e-9)


def test_first_return_canonical_right_unstable_focus():
    # alpha = beta = 1, launch from the tangency at the origin
    f = AffineField([[2.0, 1.0], [-2.0, 0.0]], [0.0, 1.0])
    t_hit, z_hit = first_return_to_axis(f, (0.0, 0.0), "right")
    assert t_hit == pytest.approx(3.940733135692915, abs=1e-9)
    assert z_hit[1] == pytest.approx(-36.88167146980386, rel=1e-9)


def test_first_return_no_return_for_monotone_escape():
    f = AffineField(np.eye(2), [1.0, 0.0])
    with pytest.raises(NoReturn):
        first_return_to_axis(f, (0.0, 0.0), "right")


def test_first_return_rejects_wrong_side_or_interior_start():
    f = AffineField([[0.0, 1.0], [-1.0, 0.0]], [1.0, 0.0])  # vx = y + 1
    with pytest.raises(DomainError):
        first_return_to_axis(f, (0.0, 1.0), "left")  # vx(1) = 2 points right
    with pytest.raises(DomainError):
        first_return_to_axis(f, (0.5, 1.0), "right")
    with pytest.raises(ValueError):
        first_return_to_axis(f, (0.0, 1.0), "up")


def test_first_return_invisible_tangency_rejected():
    # vx = y, vy(0) = -1, so kappa < 0: contact bends into x < 0
    f = AffineField([[0.0, 1.0], [-1.0, 0.0]], [0.0, -1.0])
    with pytest.raises(DomainError):
        first_return_to_axis(f, (0.0, 0.0), "right")


def _helper_rotation_invariant(field, u):
    # quadratic form conserved by the rotational part of the flow
    a = field.trace / 2.0
    omega = math.sqrt(-field.discriminant) / 2.0
    M = (field.A - a * np.eye(2)) / omega
    S = np.eye(2) + M.T @ M
    return float(u @ S @ u)


def test_first_return_focus_dichotomy_both_time_directions():
    """From a tangency, the loop map expands by exactly exp(2 a t_hit) in the
    invariant quadratic form: neutral for centers, expanding for unstable foci
    forward, expanding for stable foci backward."""
    rng = np.random.default_rng(29)
    checked = 0
    for _ in range(350):
        a11, a12, a21, a22 = rng.uniform(-2.0, 2.0, size=4)
        if abs(a12) < 0.2:
            continue
        A = np.array([[a11, a12], [a21, a22]])
        f = AffineField(A, rng.uniform(-2.0, 2.0, size=2))
        if f.discriminant > -0.05 or f.is_degenerate:
            continue
        y_t = -f.b[0] / a12
        z_t = np.array([0.0, y_t])
        kappa = a12 * f.velocity(z_t)[1]
        if abs(kappa) < 1e-6:
            continue
        side = "right" if kappa > 0 else "left"
        a = f.trace / 2.0
        z_eq = f.equilibrium()
        for g, direction in ((f, 1.0), (f.negated(), -1.0)):
            try:
                t_hit, z_hit = first_return_to_axis(g, z_t, side)
            except NoReturn:
                # spiraling inward: only possible when this run is contracting
                assert a * direction < 0.0
                continue
            v0 = _helper_rotation_invariant(f, z_t - z_eq)
            v1 = _helper_rotation_invariant(f, np.array([0.0, z_hit[1]]) - z_eq)
            assert v1 == pytest.approx(v0 * math.exp(2.0 * a * direction * t_hit), rel=1e-7)
            if abs(a) < 1e-12:
                assert z_hit[1] == pytest.approx(y_t, abs=1e-8 * (1.0 + abs(y_t)))
            checked += 1
    assert checked > 60


# ---------------------------------------------------------------------------
# filippov_orbit


def test_orbit_starting_at_pseudo_equilibrium_terminates_immediately():
    sys = _helper_scenario_system(0.5, -1.0)
    orbit = filippov_orbit(sys, (0.0, -0.5))
    assert orbit.segments == ()
    assert orbit.terminal_event.kind == "PseudoEquilibrium"
    np.testing.assert_allclose(orbit.terminal_event.point, [0.0, -0.5], atol=1e-12)


def test_orbit_slides_up_then_flows_right():
    sys = _helper_scenario_system(0.5, -1.0)
    orbit = filippov_orbit(sys, (0.0, -0.2), budget=3)
    first, second = orbit.segments[0], orbit.segments[1]
    assert isinstance(first, SlideSegment)
    assert first.y_start == pytest.approx(-0.2)
    assert first.y_end == pytest.approx(0.0, abs=1e-14)
    assert math.isfinite(first.duration) and first.duration > 0.0
    assert isinstance(second, FlowSegment)
    assert second.side == "right"
    assert second.start == (0.0, 0.0)


def test_orbit_slide_duration_closed_form():
    # dy/dt = 2y + 1 on the sliding band, so the time from -0.2 to 0 is
    # (1/2) log(1 / 0.6)
    sys = _helper_scenario_system(0.5, -1.0)
    orbit = filippov_orbit(sys, (0.0, -0.2), budget=1)
    assert orbit.segments[0].duration == pytest.approx(0.5 * math.log(1.0 / 0.6), rel=1e-12)


def test_orbit_budget_exhaustion_from_interior_point():
    sys = _helper_scenario_system(0.5, -1.0)
    orbit = filippov_orbit(sys, (2.0, 1.0), budget=1)
    assert len(orbit.segments) == 1
    assert isinstance(orbit.segments[0], FlowSegment)
    assert orbit.segments[0].side == "right"
    assert orbit.terminal_event.kind == "BudgetExhausted"


def test_orbit_consecutive_segments_share_endpoints():
    sys = _helper_scenario_system(0.5, -1.0)
    orbit = filippov_orbit(sys, (2.0, 1.0), budget=12)
    prev_end = None
    for seg in orbit.segments:
        start = seg.start if isinstance(seg, FlowSegment) else (0.0, seg.y_start)
        end = seg.end if isinstance(seg, FlowSegment) else (0.0, seg.y_end)
        if prev_end is not None:
            assert start == prev_end
        prev_end = end


def test_orbit_closed_sliding_cycle():
    # stable cycle: right arc from the fold, then an attractive slide back up
    sys = _helper_canonical_system(0.1, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0)
    orbit = filippov_orbit(sys, (0.0, 0.0), budget=20)
    assert orbit.terminal_event.kind == "Closed"
    assert orbit.lap_start is not None
    lap = orbit.segments[orbit.lap_start :]
    kinds = [seg.kind for seg in lap]
    assert "flow" in kinds and "slide" in kinds
    total = sum(seg.duration for seg in lap)
    assert orbit.terminal_event.period == pytest.approx(total, rel=1e-9)
    flows = [seg for seg in lap if isinstance(seg, FlowSegment)]
    assert flows[0].end[1] == pytest.approx(-1.457274317748, abs=1e-6)


def test_orbit_infinite_slide_into_pseudo_equilibrium():
    right = AffineField([[0.0, 1.0], [-1.0, 0.0]], [0.0, -1.0])
    left = AffineField([[0.0, 1.0], [0.0, -2.0]], [1.0, -1.0])
    sys = FilippovSystem(left=left, right=right)
    assert classify_point(sys, -0.3) is RegionLabel.ATTRACTIVE_SLIDING
    orbit = filippov_orbit(sys, (0.0, -0.3))
    assert orbit.terminal_event.kind == "PseudoEquilibrium"
    assert orbit.terminal_event.point[1] == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-12)
    seg = orbit.segments[-1]
    assert isinstance(seg, SlideSegment)
    assert math.isinf(seg.duration)


def test_orbit_unbounded_slide_escapes():
    right = AffineField([[0.0, 1.0], [1.0, 0.0]], [0.0, -1.0])
    left = AffineField([[0.0, 0.0], [0.0, 0.0]], [1.0, 0.0])
    sys = FilippovSystem(left=left, right=right)
    orbit = filippov_orbit(sys, (0.0, -0.5))
    assert orbit.terminal_event.kind == "Escape"


def test_orbit_into_stable_admissible_focus_reports_equilibrium():
    # right zone owns a stable focus at (1, 0); orbits entering x > 0 sink into it
    A = np.array([[-0.2, 1.0], [-1.0, -0.2]])
    right = AffineField(A, -A @ np.array([1.0, 0.0]))
    left = AffineField([[0.0, 0.0], [0.0, 0.0]], [1.0, 0.0])  # pushes rightward
    sys = FilippovSystem(left=left, right=right)
    orbit = filippov_orbit(sys, (3.0, 0.0), budget=50)
    assert orbit.terminal_event.kind == "Equilibrium"
    np.testing.assert_allclose(orbit.terminal_event.point, [1.0, 0.0], atol=1e-9)


def test_orbit_never_slides_on_repulsive_points_from_interior_start():
    rng = np.random.default_rng(41)
    launched = 0
    for _ in range(40):
        sys = FilippovSystem(
            left=AffineField(rng.uniform(-2, 2, (2, 2)), rng.uniform(-2, 2, 2)),
            right=AffineField(rng.uniform(-2, 2, (2, 2)), rng.uniform(-2, 2, 2)),
        )
        z0 = rng.uniform(-2, 2, 2)
        if abs(z0[0]) < 1e-3:
            continue
        try:
            orbit = filippov_orbit(sys, z0, budget=25)
        except Exception:
            continue  # degenerate tangency configurations are out of scope here
        launched += 1
        for seg in orbit.segments:
            if isinstance(seg, SlideSegment) and math.isfinite(seg.y_end):
                mid = 0.5 * (seg.y_start + seg.y_end)
                assert classify_point(sys, mid) is not RegionLabel.REPULSIVE_SLIDING
    assert launched > 25
