"""Event-detecting integration of the two-mode switched dynamics.

The latched flow is integrated as the full 4-state field with the contact
force substituted, optionally projecting each step back onto the
constraint circle (the latched flow of the AS_PRINTED variant drifts off
it; the CONSTRAINT_CONSISTENT one stays on it up to integration error).

Release is detected by two guards watched in the latched phase:

* contact force crossing zero from above (the latch stops pushing), and
* projectile reaching the latch radius p = R (tangency: no contact force
  can act on the projectile there).

Whichever happens first switches the system to the unlatched flow; there
is no re-latching.  In the unlatched phase integration stops at ``t_end``
or when the projectile crosses the spring's natural length moving
outward, where the model stops describing the physics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import (
    NoSignChangeError,
    ProjectionFailureError,
    StepSizeUnderflowError,
)
from .model import (
    Mode,
    ModelVariant,
    SystemParams,
    SystemState,
    _field_arr,
    _tau,
    holonomic_h,
    mode_of,
)

__all__ = [
    "IntegratorConfig",
    "EventKind",
    "Event",
    "TrajectorySample",
    "Trajectory",
    "integrate_step",
    "locate_event",
    "project_to_constraint",
    "simulate",
]

_MIN_STEP = 1e-14


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = 1e-2
    event_time_tol: float = 1e-10
    constraint_projection: bool = True

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "max_step", "event_time_tol"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not self.event_time_tol < self.max_step:
            raise ValueError("event_time_tol must be smaller than max_step")


class EventKind(Enum):
    UNLATCH_TAU_ZERO = "UnlatchTauZero"
    TAKEOFF_TANGENCY = "TakeoffTangency"


@dataclass(frozen=True)
class Event:
    t: float
    state: SystemState
    kind: EventKind


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    state: SystemState
    mode: Mode
    tau: float


@dataclass
class Trajectory:
    """Time-ordered samples plus the mode-switch events that occurred.

    Samples carry the contact force while latched and tau = 0 once
    unlatched; the sample recorded at a switch event is already unlatched.
    """

    samples: list[TrajectorySample] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)

    @property
    def final(self) -> TrajectorySample:
        return self.samples[-1]

    def states(self) -> np.ndarray:
        return np.array([s.state.as_array() for s in self.samples])

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])


# Dormand-Prince 5(4) embedded pair (the fields are autonomous, so the
# stage nodes are not needed).  The fifth-order solution is propagated;
# the E row is b5 - b4 and yields the local error estimate.
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


def _step_raw(
    rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float
) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """One trial step: returns (y_new, error_norm, f_at_y, f_at_y_new)."""
    k = np.empty((7, y.size))
    k[0] = rhs(y)
    for i in range(1, 7):
        k[i] = rhs(y + dt * (_A[i] @ k[:i]))
    y_new = y + dt * (_B @ k)
    err = dt * (_E @ k)
    return y_new, float(np.linalg.norm(err)), k[0], k[6]


def integrate_step(
    params: SystemParams,
    state: SystemState,
    F_L: float,
    mode: Mode,
    dt_suggestion: float,
    config: IntegratorConfig | None = None,
    variant: ModelVariant | None = None,
) -> tuple[SystemState, float, float]:
    """Take one accepted adaptive step of the active mode's field.

    Shrinks the step until the embedded error estimate satisfies
    ``err <= max(rel_tol * |state|, abs_tol)``; raises
    StepSizeUnderflowError if that requires a step below the floor.
    Returns (new_state, dt_used, error_estimate).
    """
    cfg = config or IntegratorConfig()
    var = params.variant_or(variant)
    latched = mode is Mode.LATCHED

    def rhs(y: np.ndarray) -> np.ndarray:
        return _field_arr(params, y, F_L, latched, var)

    y = state.as_array()
    tol = max(cfg.rel_tol * float(np.linalg.norm(y)), cfg.abs_tol)
    dt = min(dt_suggestion, cfg.max_step)
    while True:
        if dt < _MIN_STEP:
            raise StepSizeUnderflowError(
                f"step size {dt:.3e} below floor {_MIN_STEP:.0e} without meeting tolerance"
            )
        y_new, err, _, _ = _step_raw(rhs, y, dt)
        if err <= tol:
            return SystemState.from_array(y_new), dt, err
        dt *= max(0.2, 0.9 * (tol / max(err, 1e-300)) ** 0.2)


def _hermite(
    t0: float,
    y0: np.ndarray,
    f0: np.ndarray,
    t1: float,
    y1: np.ndarray,
    f1: np.ndarray,
    t: float,
) -> np.ndarray:
    """Cubic Hermite dense output over one step."""
    h = t1 - t0
    s = (t - t0) / h
    s2, s3 = s * s, s * s * s
    return (
        (1 - 3 * s2 + 2 * s3) * y0
        + (3 * s2 - 2 * s3) * y1
        + h * ((s - 2 * s2 + s3) * f0 + (s3 - s2) * f1)
    )


def locate_event(
    params: SystemParams,
    F_L: float,
    bracket: tuple[float, SystemState, float, SystemState],
    event_fn: Callable[[SystemState], float],
    config: IntegratorConfig | None = None,
    mode: Mode = Mode.LATCHED,
    kind: EventKind = EventKind.UNLATCH_TAU_ZERO,
    variant: ModelVariant | None = None,
) -> Event:
    """Bisect a guard-function zero inside one integration step.

    The step is reconstructed with cubic Hermite interpolation from the
    bracket endpoints; bisection narrows the crossing time to
    ``event_time_tol``.  ``event_fn`` must change sign across the bracket.
    """
    cfg = config or IntegratorConfig()
    t_lo, s_lo, t_hi, s_hi = bracket
    t, state = _locate_zero(
        params, F_L, t_lo, s_lo.as_array(), t_hi, s_hi.as_array(),
        lambda y: event_fn(SystemState.from_array(y)),
        cfg, mode, params.variant_or(variant),
    )
    return Event(t=t, state=SystemState.from_array(state), kind=kind)


def _locate_zero(
    params: SystemParams,
    F_L: float,
    t_lo: float,
    y_lo: np.ndarray,
    t_hi: float,
    y_hi: np.ndarray,
    g: Callable[[np.ndarray], float],
    cfg: IntegratorConfig,
    mode: Mode,
    variant: ModelVariant,
) -> tuple[float, np.ndarray]:
    latched = mode is Mode.LATCHED
    f_lo = _field_arr(params, y_lo, F_L, latched, variant)
    f_hi = _field_arr(params, y_hi, F_L, latched, variant)

    g_lo = g(y_lo)
    g_hi = g(y_hi)
    if g_lo == 0.0:
        return t_lo, y_lo
    if g_hi == 0.0:
        return t_hi, y_hi
    if g_lo * g_hi > 0.0:
        raise NoSignChangeError(
            f"guard has the same sign at both bracket ends: g({t_lo})={g_lo}, g({t_hi})={g_hi}"
        )

    def interp(t: float) -> np.ndarray:
        return _hermite(t_lo, y_lo, f_lo, t_hi, y_hi, f_hi, t)

    a, b, ga = t_lo, t_hi, g_lo
    while b - a > cfg.event_time_tol:
        mid = 0.5 * (a + b)
        gm = g(interp(mid))
        if gm == 0.0:
            return mid, interp(mid)
        if ga * gm < 0.0:
            b = mid
        else:
            a, ga = mid, gm
    t_ev = 0.5 * (a + b)
    return t_ev, interp(t_ev)


def project_to_constraint(params: SystemParams, state: SystemState) -> SystemState:
    """Return the nearest state on the constraint circle with tangent velocity.

    Positions (p, l) are pulled radially onto the circle by Newton steps
    along the constraint gradient (the exact nearest-point projection for
    a circle).  The velocity is then made tangent by re-solving the
    differentiated constraint (p-R) p_dot + l l_dot = 0 for whichever
    component carries the larger gradient weight, so the generic latched
    configuration keeps p_dot and slaves l_dot = (R-p) p_dot / l.
    """
    R = params.R
    p, l = state.p, state.l
    tol = 1e-12 * max(1.0, R * R)
    for _ in range(25):
        h = holonomic_h(params, p, l)
        if abs(h) <= tol:
            break
        gp = 2.0 * (p - R)
        gl = 2.0 * l
        n2 = gp * gp + gl * gl
        if n2 == 0.0:
            raise ProjectionFailureError("constraint gradient vanished (p=R, l=0)")
        p -= h * gp / n2
        l -= h * gl / n2
    if abs(holonomic_h(params, p, l)) > tol:
        raise ProjectionFailureError(
            f"projection did not converge in 25 iterations (|h|={abs(holonomic_h(params, p, l))})"
        )

    p_dot, l_dot = state.p_dot, state.l_dot
    if abs(l) >= abs(R - p):
        l_dot = (R - p) * p_dot / l if l != 0.0 else 0.0
    else:
        p_dot = l * l_dot / (R - p) if p != R else 0.0
    return SystemState(p, p_dot, l, l_dot)


def _suggest(dt_used: float, err: float, tol: float, max_step: float) -> float:
    if err == 0.0:
        factor = 5.0
    else:
        factor = min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2))
    return min(max_step, dt_used * factor)


def simulate(
    params: SystemParams,
    x0: SystemState,
    F_L: float,
    t_end: float,
    config: IntegratorConfig | None = None,
    variant: ModelVariant | None = None,
) -> Trajectory:
    """Run the switched system from ``x0`` for at most ``t_end`` time units.

    The starting mode is inferred from the state (on the circle with
    positive contact force -> latched).  At most one latched->unlatched
    switch can occur; its event is recorded with the interpolated state.
    When both guards fire inside one step the earlier one wins and a tie
    within the event tolerance resolves to tangency takeoff.
    """
    cfg = config or IntegratorConfig()
    var = params.variant_or(variant)
    if not x0.is_finite():
        raise ValueError(f"initial state has non-finite components: {x0}")
    if t_end < 0.0:
        raise ValueError("t_end must be non-negative")

    traj = Trajectory()
    mode = mode_of(params, x0, F_L, variant=var)
    t = 0.0
    y = x0.as_array()

    def tau_of(arr: np.ndarray) -> float:
        return _tau(params, arr[0], arr[1], arr[2], arr[3], F_L, var)

    if mode is Mode.LATCHED and cfg.constraint_projection:
        y = project_to_constraint(params, SystemState.from_array(y)).as_array()
        if tau_of(y) <= 0.0:
            mode = Mode.UNLATCHED  # projection nudged a borderline tau past 0
    traj.samples.append(
        TrajectorySample(
            t,
            SystemState.from_array(y),
            mode,
            tau_of(y) if mode is Mode.LATCHED else 0.0,
        )
    )

    dt = 0.01 * cfg.max_step

    # --- latched phase -------------------------------------------------
    if mode is Mode.LATCHED:
        while t < t_end - 1e-14 * max(1.0, t_end):
            dt_try = min(dt, t_end - t, cfg.max_step)
            state = SystemState.from_array(y)
            new_state, dt_used, err = integrate_step(
                params, state, F_L, Mode.LATCHED, dt_try, cfg, var
            )
            y_new = new_state.as_array()
            t_new = t + dt_used

            tau_hi = tau_of(y_new)
            p_hi = y_new[0] - params.R
            event: Event | None = None
            candidates: list[Event] = []
            if tau_hi <= 0.0:
                candidates.append(
                    locate_event(
                        params, F_L, (t, state, t_new, new_state),
                        lambda s: _tau(params, s.p, s.p_dot, s.l, s.l_dot, F_L, var),
                        cfg, Mode.LATCHED, EventKind.UNLATCH_TAU_ZERO, var,
                    )
                )
            if p_hi >= 0.0 and y[0] - params.R < 0.0:
                candidates.append(
                    locate_event(
                        params, F_L, (t, state, t_new, new_state),
                        lambda s: s.p - params.R,
                        cfg, Mode.LATCHED, EventKind.TAKEOFF_TANGENCY, var,
                    )
                )
            if len(candidates) == 2:
                # tie inside the event tolerance means tangency: at p = R no
                # contact force can hold the projectile regardless of tau
                tau_ev, take_ev = candidates
                if take_ev.t <= tau_ev.t + cfg.event_time_tol:
                    event = take_ev
                else:
                    event = tau_ev
            elif candidates:
                event = candidates[0]

            if event is not None:
                ev_state = event.state
                if cfg.constraint_projection:
                    ev_state = project_to_constraint(params, ev_state)
                    event = Event(event.t, ev_state, event.kind)
                traj.events.append(event)
                traj.samples.append(
                    TrajectorySample(event.t, ev_state, Mode.UNLATCHED, 0.0)
                )
                t = event.t
                y = ev_state.as_array()
                mode = Mode.UNLATCHED
                break

            if cfg.constraint_projection:
                y_new = project_to_constraint(
                    params, SystemState.from_array(y_new)
                ).as_array()
            t, y = t_new, y_new
            traj.samples.append(
                TrajectorySample(t, SystemState.from_array(y), Mode.LATCHED, tau_of(y))
            )
            tol = max(cfg.rel_tol * float(np.linalg.norm(y)), cfg.abs_tol)
            dt = _suggest(dt_used, err, tol, cfg.max_step)

    # --- unlatched phase (permanent: no re-latching) ---------------------
    if mode is Mode.UNLATCHED:
        # outward crossing of the natural length ends the run immediately
        if y[0] >= params.p0 and y[1] > 0.0:
            return traj
        while t < t_end - 1e-14 * max(1.0, t_end):
            dt_try = min(dt, t_end - t, cfg.max_step)
            state = SystemState.from_array(y)
            new_state, dt_used, err = integrate_step(
                params, state, F_L, Mode.UNLATCHED, dt_try, cfg, var
            )
            y_new = new_state.as_array()
            t_new = t + dt_used

            if y_new[0] >= params.p0 and y[0] < params.p0:
                t_stop, y_stop = _locate_zero(
                    params, F_L, t, y, t_new, y_new,
                    lambda arr: arr[0] - params.p0,
                    cfg, Mode.UNLATCHED, var,
                )
                if y_stop[1] > 0.0:
                    traj.samples.append(
                        TrajectorySample(
                            t_stop, SystemState.from_array(y_stop), Mode.UNLATCHED, 0.0
                        )
                    )
                    return traj

            t, y = t_new, y_new
            traj.samples.append(
                TrajectorySample(t, SystemState.from_array(y), Mode.UNLATCHED, 0.0)
            )
            tol = max(cfg.rel_tol * float(np.linalg.norm(y)), cfg.abs_tol)
            dt = _suggest(dt_used, err, tol, cfg.max_step)

    return traj
