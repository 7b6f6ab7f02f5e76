"""Closed-form affine flows, analytic axis returns, and full orbit construction.

Flows of planar affine fields are evaluated from eigenstructure branches (no
numerical integration).  First returns to the switching line are isolated
analytically: the x-velocity along an orbit solves the homogeneous system, so
its roots split the orbit into monotone pieces and a sign change is bracketed
on each piece.  Orbit construction concatenates flow arcs and sliding segments
under the Filippov convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .core import (
    AffineField,
    FilippovSystem,
    RegionLabel,
    SLIDING_LABELS,
    classify_point,
    equilibrium_info,
    sliding_denominator_coeffs,
    sliding_field,
    sliding_numerator_coeffs,
    tangency_points,
)
from .errors import DegenerateTangency, DomainError, NoReturn

_EIG_SPLIT_TOL = 1e-9  # relative threshold between distinct and repeated eigenvalues
_SNAP_TOL = 1e-11  # |x| below this at a critical point counts as a tangential return
_GRAZE_TOL = 1e-10  # landing this close to a tangency snaps onto it
_CLOSURE_TOL = 1e-8


class _Eigen:
    """Cached eigenstructure of one affine field with closed-form E(t), G(t).

    The flow is z(t) = E(t) z0 + G(t) b with E = exp(At) and G = int_0^t E.
    """

    def __init__(self, f: AffineField):
        self.A = f.A
        self.b = f.b
        tr = f.trace
        disc = f.discriminant
        scale = 1.0 + float(np.max(np.abs(f.A))) ** 2
        self.I = np.eye(2)
        if disc < -_EIG_SPLIT_TOL * scale:
            self.kind = "complex"
            self.a = tr / 2.0
            self.omega = math.sqrt(-disc) / 2.0
            self.N = f.A - self.a * self.I
        elif disc > _EIG_SPLIT_TOL * scale:
            self.kind = "distinct"
            s = math.sqrt(disc)
            self.l1 = (tr + s) / 2.0
            self.l2 = (tr - s) / 2.0
            self.M1 = (f.A - self.l2 * self.I) / (self.l1 - self.l2)
            self.M2 = (f.A - self.l1 * self.I) / (self.l2 - self.l1)
        else:
            self.kind = "repeated"
            self.l = tr / 2.0
            self.N = f.A - self.l * self.I

    def E(self, t: float) -> np.ndarray:
        if self.kind == "complex":
            c, s = math.cos(self.omega * t), math.sin(self.omega * t)
            return math.exp(self.a * t) * (c * self.I + (s / self.omega) * self.N)
        if self.kind == "distinct":
            return math.exp(self.l1 * t) * self.M1 + math.exp(self.l2 * t) * self.M2
        return math.exp(self.l * t) * (self.I + t * self.N)

    @staticmethod
    def _gbar(lam: float, t: float) -> float:
        # int_0^t e^{lam s} ds
        if abs(lam) * abs(t) < 1e-14:
            return t * (1.0 + lam * t / 2.0)
        return math.expm1(lam * t) / lam

    def G(self, t: float) -> np.ndarray:
        if self.kind == "complex":
            a, w = self.a, self.omega
            d = a * a + w * w
            e = math.exp(a * t)
            c, s = math.cos(w * t), math.sin(w * t)
            ic = (e * (a * c + w * s) - a) / d
            isn = (e * (a * s - w * c) + w) / d
            return ic * self.I + (isn / w) * self.N
        if self.kind == "distinct":
            return self._gbar(self.l1, t) * self.M1 + self._gbar(self.l2, t) * self.M2
        lam = self.l
        g = self._gbar(lam, t)
        if abs(lam) * abs(t) < 1e-14:
            h = t * t / 2.0
        else:
            h = (t * math.exp(lam * t) - g) / lam
        return g * self.I + h * self.N

    def point(self, z0: np.ndarray, t: float) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return self.E(t) @ z0 + self.G(t) @ self.b


def _eigen(f: AffineField) -> _Eigen:
    ev = f.__dict__.get("_flow_eigen")
    if ev is None:
        ev = _Eigen(f)
        object.__setattr__(f, "_flow_eigen", ev)
    return ev


def linear_flow(field: AffineField, z0, t: float) -> np.ndarray:
    """Exact solution of z' = Az + b at time t starting from z0."""
    z0 = np.asarray(z0, dtype=float)
    return _eigen(field).point(z0, float(t))


# ---------------------------------------------------------------------------
# First return to the axis


def _x_series_real(ev: _Eigen, z0: np.ndarray) -> list[tuple[float, float, int]]:
    """Terms (c, lam, p) with x(t) = sum c * t^p * e^(lam t), real spectrum."""
    b = ev.b
    terms: list[tuple[float, float, int]] = []
    if ev.kind == "distinct":
        for M, lam in ((ev.M1, ev.l1), (ev.M2, ev.l2)):
            cz = float((M @ z0)[0])
            cb = float((M @ b)[0])
            if lam != 0.0:
                terms.append((cz + cb / lam, lam, 0))
                terms.append((-cb / lam, 0.0, 0))
            else:
                terms.append((cz, 0.0, 0))
                terms.append((cb, 0.0, 1))
    else:
        lam = ev.l
        cz0 = float(z0[0])
        cz1 = float((ev.N @ z0)[0])
        cb0 = float(b[0])
        cb1 = float((ev.N @ b)[0])
        if lam != 0.0:
            terms.append((cz0 + cb0 / lam - cb1 / (lam * lam), lam, 0))
            terms.append((cz1 + cb1 / lam, lam, 1))
            terms.append((-cb0 / lam + cb1 / (lam * lam), 0.0, 0))
        else:
            terms.append((cz0, 0.0, 0))
            terms.append((cz1 + cb0, 0.0, 1))
            terms.append((cb1 / 2.0, 0.0, 2))
    merged: dict[tuple[float, int], float] = {}
    for c, lam, p in terms:
        merged[(lam, p)] = merged.get((lam, p), 0.0) + c
    return [(c, lam, p) for (lam, p), c in merged.items()]


def _tail_sign(terms: list[tuple[float, float, int]]) -> int:
    """Sign of x(t) as t -> +inf; 0 means x -> 0."""
    mags = [abs(c) for c, _, _ in terms]
    floor = 1e-13 * (max(mags) if mags else 0.0)
    live = [(lam, p, c) for c, lam, p in terms if abs(c) > floor]
    if not live:
        return 0
    lam, p, c = max(live, key=lambda it: (it[0], it[1]))
    if lam < 0.0:
        return 0
    return int(np.sign(c))


def _real_critical_time(ev: _Eigen, v0: np.ndarray, t_min: float) -> Optional[float]:
    """Smallest root above t_min of the x-velocity along the orbit (if any).

    The velocity solves the homogeneous system, so its first component has at
    most one sign change when the spectrum is real.
    """
    if ev.kind == "distinct":
        c1 = float((ev.M1 @ v0)[0])
        c2 = float((ev.M2 @ v0)[0])
        if c1 == 0.0 or c2 == 0.0:
            return None
        ratio = -c2 / c1
        if ratio <= 0.0:
            return None
        t = math.log(ratio) / (ev.l1 - ev.l2)
        return t if t > t_min else None
    cA = float(v0[0])
    cB = float((ev.N @ v0)[0])
    if cB == 0.0:
        return None
    t = -cA / cB
    return t if t > t_min else None


def _polish_root(xf: Callable[[float], float], vf: Callable[[float], float], t: float) -> float:
    for _ in range(3):
        v = vf(t)
        if v == 0.0:
            break
        step = xf(t) / v
        if not math.isfinite(step):
            break
        t -= step
    return t


def _first_axis_hit(
    field: AffineField, z0: np.ndarray, side: str, from_axis: bool
) -> tuple[float, np.ndarray]:
    """Smallest t > 0 with x(t) = 0 while the orbit stays in the open side.

    Raises NoReturn when the orbit provably never comes back (escape to
    infinity or convergence toward an equilibrium inside the side).
    """
    ev = _eigen(field)
    side_sign = 1.0 if side == "right" else -1.0
    scale = 1.0 + float(np.max(np.abs(field.A))) + float(np.max(np.abs(field.b)))
    def xf(t: float) -> float:
        return float(ev.point(z0, t)[0])

    def vf(t: float) -> float:
        # far-out probes can overflow to inf; downstream comparisons handle
        # that, so keep numpy quiet about it
        with np.errstate(over="ignore", invalid="ignore"):
            return float((field.A @ ev.point(z0, t) + field.b)[0])
    s0 = side_sign if from_axis else float(np.sign(z0[0]))
    v0 = field.A @ z0 + field.b
    t_eps = 1e-12

    def _finish(t: float) -> tuple[float, np.ndarray]:
        t = _polish_root(xf, vf, t)
        z = ev.point(z0, t)
        return t, np.array([0.0, z[1]])

    def _first_piece_root(t_hi: float) -> tuple[float, np.ndarray]:
        # sign change on (0, t_hi) where x leaves 0 with sign s0
        lo = t_eps
        while xf(lo) * s0 <= 0.0 and lo > 1e-300:
            lo /= 8.0
        return _finish(brentq(xf, lo, t_hi, xtol=1e-14, rtol=8.9e-16))

    if ev.kind == "complex":
        w = ev.omega
        a = ev.a
        z_eq = np.linalg.solve(field.A, -field.b)
        x_eq = float(z_eq[0])
        P = float(z0[0]) - x_eq
        Q = (float(v0[0]) - a * P) / w
        C = math.hypot(P, Q)
        if C <= 1e-15 * (1.0 + abs(x_eq)):
            raise DomainError("start point is the equilibrium; the orbit does not move")
        # x(t) - x_eq = C e^{at} cos(w t - phase); critical times step by pi/w
        phase = math.atan2(a * Q - w * P, a * P + w * Q)
        half = math.pi / w
        t1 = (phase + math.pi / 2.0) / w
        while t1 <= t_eps:
            t1 += half
        if a < -1e-13 * scale and abs(x_eq) > 0.0:
            t_limit = max(0.0, math.log(abs(x_eq) / C) / a) + 4.0 * half
        else:
            t_limit = 130.0 * half
        prev_t = 0.0
        prev_s = s0
        t_k = t1
        while prev_t < t_limit:
            x_k = xf(t_k)
            if abs(x_k) <= _SNAP_TOL * scale * max(1.0, C):
                return _finish(t_k)
            s_k = math.copysign(1.0, x_k)
            if s_k != prev_s:
                if prev_t > 0.0:
                    return _finish(brentq(xf, prev_t, t_k, xtol=1e-14, rtol=8.9e-16))
                return _first_piece_root(t_k)
            prev_t, prev_s = t_k, s_k
            t_k += half
        raise NoReturn(
            "orbit spirals toward the equilibrium on this side and never reaches the axis"
        )

    # Real spectrum: at most one critical point, at most two monotone pieces.
    terms = _x_series_real(ev, z0)
    t_c = _real_critical_time(ev, np.asarray(v0, dtype=float), t_eps)
    tail = _tail_sign(terms)

    def _bracket_and_solve(lo: float, s_lo: float) -> tuple[float, np.ndarray]:
        width = max(1.0, lo)
        for _ in range(80):
            hi = lo + width
            if xf(hi) * s_lo < 0.0:
                return _finish(brentq(xf, max(lo, t_eps), hi, xtol=1e-14, rtol=8.9e-16))
            width *= 2.0
        raise NoReturn("no axis return found within the scan horizon")

    if t_c is not None:
        x_c = xf(t_c)
        if abs(x_c) <= _SNAP_TOL * scale:
            return _finish(t_c)
        if math.copysign(1.0, x_c) != s0:
            return _first_piece_root(t_c)
        if tail == 0 or float(tail) == s0:
            raise NoReturn("orbit stays on this side (monotone tail after the turn)")
        return _bracket_and_solve(t_c, s0)
    if tail == 0 or float(tail) == s0:
        raise NoReturn("orbit is monotone in x and never recrosses the axis")
    return _bracket_and_solve(max(t_eps, 1e-6), s0)


def first_return_to_axis(field: AffineField, z0, side: str) -> tuple[float, np.ndarray]:
    """First positive-time axis intersection of the one-zone orbit from z0.

    z0 must lie on the axis and the orbit must depart into the stated side,
    either transversally or through a visible tangency.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    z0 = np.asarray(z0, dtype=float)
    if abs(z0[0]) > 1e-9 * (1.0 + abs(z0[1])):
        raise DomainError("start point must lie on the switching line")
    z0 = np.array([0.0, z0[1]])
    side_sign = 1.0 if side == "right" else -1.0
    with np.errstate(over="ignore"):
        vel = field.A @ z0 + field.b
        vx0 = float(vel[0])
        speed = float(np.hypot(*vel))
    if abs(vx0) > 1e-10 * (1.0 + speed):
        if math.copysign(1.0, vx0) != side_sign:
            raise DomainError("orbit departs into the opposite side")
    else:
        kappa = float(field.A[0, 1]) * float(vel[1])
        if kappa * side_sign <= 0.0:
            raise DomainError("tangency is not visible from the requested side")
    return _first_axis_hit(field, z0, side, from_axis=True)


# ---------------------------------------------------------------------------
# Orbit construction


@dataclass(frozen=True)
class FlowSegment:
    side: str
    start: tuple[float, float]
    end: tuple[float, float]
    duration: float

    kind = "flow"


@dataclass(frozen=True)
class SlideSegment:
    y_start: float
    y_end: float
    duration: float  # math.inf when the slide limits onto a pseudo-equilibrium

    kind = "slide"


@dataclass(frozen=True)
class TerminalEvent:
    kind: str  # Closed | PseudoEquilibrium | Equilibrium | BudgetExhausted | Escape
    point: Optional[tuple[float, float]] = None
    period: Optional[float] = None


@dataclass(frozen=True)
class Orbit:
    segments: tuple
    terminal_event: TerminalEvent
    axis_states: tuple[tuple[float, str], ...] = ()
    grazed_tangencies: tuple[float, ...] = ()
    lap_start: Optional[int] = None  # segment index where the closed lap begins


def _slide_time(sys: FilippovSystem, y0: float, y1: float) -> float:
    """Exact traversal time of the sliding flow from y0 to y1 (no zero between).

    Integrates dt = Dn(y)/N(y) dy by partial fractions; N is at most quadratic
    and Dn linear, and N has no root strictly between y0 and y1.
    """
    n2, n1, n0 = sliding_numerator_coeffs(sys)
    d1, d0 = sliding_denominator_coeffs(sys)
    scale_n = max(abs(n2), abs(n1), abs(n0), 1e-300)

    def F(y: float) -> float:
        # antiderivative of Dn/N
        if abs(n2) > 1e-13 * scale_n:
            disc = n1 * n1 - 4.0 * n2 * n0
            if disc > 1e-13 * scale_n * scale_n:
                s = math.sqrt(disc)
                r1 = (-n1 - s) / (2.0 * n2)
                r2 = (-n1 + s) / (2.0 * n2)
                a1 = (d1 * r1 + d0) / (n2 * (r1 - r2))
                a2 = (d1 * r2 + d0) / (n2 * (r2 - r1))
                return a1 * math.log(abs(y - r1)) + a2 * math.log(abs(y - r2))
            if disc < -1e-13 * scale_n * scale_n:
                p = -n1 / (2.0 * n2)
                q = math.sqrt(-disc) / (2.0 * abs(n2))
                return (d1 / (2.0 * n2)) * math.log((y - p) ** 2 + q * q) + (
                    (d1 * p + d0) / (n2 * q)
                ) * math.atan((y - p) / q)
            r = -n1 / (2.0 * n2)
            return (d1 / n2) * math.log(abs(y - r)) - (d1 * r + d0) / (n2 * (y - r))
        if abs(n1) > 1e-13 * scale_n:
            r = -n0 / n1
            return d1 * y / n1 + ((d1 * r + d0) / n1) * math.log(abs(y - r))
        return (d1 * y * y / 2.0 + d0 * y) / n0

    return abs(F(y1) - F(y0))


def _visibility_at(sys: FilippovSystem, side: str, y: float) -> str:
    f = sys.field(side)
    a12 = float(f.A[0, 1])
    vel = f.velocity((0.0, y))
    kappa = a12 * float(vel[1])
    if abs(kappa) <= 1e-10 * (1.0 + abs(a12) + float(np.hypot(*vel))):
        return "degenerate"
    if (kappa > 0.0) == (side == "right"):
        return "visible"
    return "invisible"


def _sliding_breakpoints(sys: FilippovSystem) -> list[float]:
    bps = []
    for f in (sys.left, sys.right):
        a12, b1 = f.axis_vx_coeffs()
        if a12 != 0.0:
            bps.append(-b1 / a12)
    return sorted(bps)


def _sliding_zero_ahead(sys: FilippovSystem, y: float, target: float) -> Optional[float]:
    """Zero of the sliding numerator between y (exclusive) and target (inclusive)."""
    n2, n1, n0 = sliding_numerator_coeffs(sys)
    roots: list[float] = []
    if abs(n2) > 1e-14 * (1.0 + abs(n1) + abs(n0)):
        disc = n1 * n1 - 4.0 * n2 * n0
        if disc >= 0.0:
            s = math.sqrt(disc)
            roots = [(-n1 - s) / (2.0 * n2), (-n1 + s) / (2.0 * n2)]
    elif n1 != 0.0:
        roots = [-n0 / n1]
    tol = 1e-12 * (1.0 + abs(y))
    if target >= y:
        lo, hi = y + tol, (target + tol if math.isfinite(target) else math.inf)
    else:
        lo, hi = (target - tol if math.isfinite(target) else -math.inf), y - tol
    inside = [r for r in roots if lo < r < hi]
    if not inside:
        return None
    return min(inside, key=lambda r: abs(r - y))


def _axis_mode(sys: FilippovSystem, y: float) -> tuple[str, object]:
    """Forward continuation decision at the axis point (0, y).

    Returns ("terminal", TerminalEvent), ("arc", side) or ("slide", +-1).
    """
    label = classify_point(sys, y)
    point = (0.0, float(y))
    if label in (
        RegionLabel.BOUNDARY_EQUILIBRIUM_LEFT,
        RegionLabel.BOUNDARY_EQUILIBRIUM_RIGHT,
    ):
        return "terminal", TerminalEvent("Equilibrium", point=point)
    if label is RegionLabel.SINGULAR_SLIDING:
        return "terminal", TerminalEvent("PseudoEquilibrium", point=point)

    vp = sys.vx_right(y)
    vm = sys.vx_left(y)
    if label is RegionLabel.CROSSING:
        return "arc", ("right" if vp > 0.0 else "left")

    if label in SLIDING_LABELS:
        fs = sliding_field(sys, y)
        if abs(fs) <= 1e-12 * (1.0 + abs(y)):
            return "terminal", TerminalEvent("PseudoEquilibrium", point=point)
        return "slide", (1 if fs > 0.0 else -1)

    if label is RegionLabel.TANGENCY_BOTH:
        for side in ("right", "left"):
            if _visibility_at(sys, side, y) == "visible":
                return "arc", side
        raise DegenerateTangency(f"double tangency at y={y} with no visible side")

    side = "right" if label is RegionLabel.TANGENCY_RIGHT else "left"
    vis = _visibility_at(sys, side, y)
    if vis == "degenerate":
        raise DegenerateTangency(f"{side} tangency at y={y} has vanishing curvature")
    if vis == "visible":
        return "arc", side
    # Invisible contact: the transversal field decides between sliding into
    # the adjacent band and crossing into the other zone.
    other_v = vm if side == "right" else vp
    toward_axis = other_v > 0.0 if side == "right" else other_v < 0.0
    if toward_axis:
        fs = sliding_field(sys, y)
        if abs(fs) <= 1e-12 * (1.0 + abs(y)):
            return "terminal", TerminalEvent("PseudoEquilibrium", point=point)
        return "slide", (1 if fs > 0.0 else -1)
    return "arc", ("left" if side == "right" else "right")


def _no_return_terminal(field: AffineField, side: str) -> TerminalEvent:
    try:
        info = equilibrium_info(field, side)
    except Exception:
        return TerminalEvent("Escape")
    if info.stability == "stable" and info.placement in ("admissible", "boundary"):
        return TerminalEvent("Equilibrium", point=info.location)
    return TerminalEvent("Escape")


def filippov_orbit(sys: FilippovSystem, z0, budget: int = 200) -> Orbit:
    """Forward orbit from z0 under the Filippov convention.

    Crossing points pass through, attractive entries slide, slides exit at
    visible tangencies or converge to pseudo-equilibria, and closure is
    detected on the axis with a confirmation lap.
    """
    z = np.asarray(z0, dtype=float).copy()
    segments: list = []
    axis_states: list[tuple[float, str]] = []
    grazes: list[float] = []
    anchor: Optional[tuple[int, float, int]] = None  # (state idx, time, segment idx)
    elapsed = 0.0

    tangency_ys = [t.y for t in tangency_points(sys)]
    breakpoints = _sliding_breakpoints(sys)

    def _snap_to_tangency(y: float) -> float:
        for yt in tangency_ys:
            if abs(y - yt) <= _GRAZE_TOL * (1.0 + abs(yt)) and y != yt:
                grazes.append(yt)
                return yt
        return y

    def _stop(event: TerminalEvent, lap: Optional[int] = None) -> Orbit:
        return Orbit(tuple(segments), event, tuple(axis_states), tuple(grazes), lap)

    # Interior start: ride the current zone to the axis first.
    if abs(z[0]) > 1e-9 * (1.0 + abs(z[1])):
        side = "right" if z[0] > 0.0 else "left"
        f = sys.field(side)
        try:
            t_hit, z_hit = _first_axis_hit(f, z, side, from_axis=False)
        except NoReturn:
            return _stop(_no_return_terminal(f, side))
        z_hit[1] = _snap_to_tangency(z_hit[1])
        segments.append(FlowSegment(side, tuple(z), (0.0, float(z_hit[1])), t_hit))
        elapsed += t_hit
        z = z_hit
        if len(segments) >= budget:
            return _stop(TerminalEvent("BudgetExhausted"))

    while True:
        y = float(z[1])
        what, info = _axis_mode(sys, y)
        if what == "terminal":
            return _stop(info)

        mode_key = f"{what}:{info}"
        matched_idx = None
        for i, (y_i, key_i) in enumerate(axis_states):
            if key_i == mode_key and abs(y - y_i) <= _CLOSURE_TOL * max(1.0, abs(y)):
                matched_idx = i
                break
        if anchor is not None and matched_idx == anchor[0]:
            return _stop(
                TerminalEvent("Closed", period=elapsed - anchor[1]), lap=anchor[2]
            )
        if matched_idx is not None and anchor is None:
            anchor = (matched_idx, elapsed, len(segments))
        axis_states.append((y, mode_key))

        if len(segments) >= budget:
            return _stop(TerminalEvent("BudgetExhausted"))

        if what == "arc":
            side = info
            f = sys.field(side)
            try:
                t_hit, z_hit = first_return_to_axis(f, z, side)
            except NoReturn:
                return _stop(_no_return_terminal(f, side))
            z_hit[1] = _snap_to_tangency(z_hit[1])
            segments.append(FlowSegment(side, (0.0, y), (0.0, float(z_hit[1])), t_hit))
            elapsed += t_hit
            z = z_hit
            continue

        # slide
        direction = info
        ahead = [
            bp
            for bp in breakpoints
            if (bp > y + 1e-13 if direction > 0 else bp < y - 1e-13)
        ]
        if direction > 0:
            target = min(ahead) if ahead else math.inf
        else:
            target = max(ahead) if ahead else -math.inf
        zero = _sliding_zero_ahead(sys, y, target)
        if zero is not None:
            segments.append(SlideSegment(y, zero, math.inf))
            return _stop(TerminalEvent("PseudoEquilibrium", point=(0.0, zero)))
        if not math.isfinite(target):
            # Unbounded sliding band with no zero ahead: slides away forever.
            return _stop(TerminalEvent("Escape"))
        duration = _slide_time(sys, y, target)
        segments.append(SlideSegment(y, target, duration))
        elapsed += duration
        z = np.array([0.0, target])
