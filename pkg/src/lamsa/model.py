"""Physical model of a contact-latch spring actuator.

A projectile of mass ``m`` is pushed by a linear spring (stiffness ``k``,
natural length ``p0``) against a rounded latch of mass ``M`` and radius
``R``.  While projectile and latch touch, their positions are tied by the
circle constraint

    h(p, l) = l^2 + (R - p)^2 - R^2 = 0,

and a contact force ``tau`` acts along the constraint.  The system is a
two-mode switched system: latched (``tau`` substituted, 1 effective DoF)
and unlatched (``tau = 0``, two decoupled oscillators).

All quantities are plain dimensionless numbers ("model units"); no unit
conversion is performed anywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import SingularConfigurationError

__all__ = [
    "ModelVariant",
    "Mode",
    "SystemParams",
    "SystemState",
    "spring_force",
    "holonomic_h",
    "latch_from_projectile",
    "contact_force",
    "mode_of",
    "vector_field",
    "mechanical_energy",
]


class ModelVariant(Enum):
    """Which denominator the latch-force term of the contact force uses.

    The published contact-force expression divides the latch-force term by
    the projectile mass ``m``; re-deriving the force from the
    twice-differentiated constraint gives the latch mass ``M`` instead.
    ``AS_PRINTED`` reproduces the published numbers; only
    ``CONSTRAINT_CONSISTENT`` keeps the flow exactly on the constraint
    circle (and therefore conserves energy in the latched mode).
    """

    AS_PRINTED = "printed"
    CONSTRAINT_CONSISTENT = "derived"


class Mode(Enum):
    """Latched: in contact with positive contact force.  Unlatched: free."""

    LATCHED = "L"
    UNLATCHED = "U"


@dataclass(frozen=True)
class SystemParams:
    """Physical identity of one actuator instance (model units).

    ``m``: projectile mass, ``M``: latch mass, ``R``: latch radius,
    ``k``: spring stiffness, ``p0``: spring natural length (must exceed
    the latch radius).  ``variant`` selects the contact-force flavour and
    is the default for every routine that accepts a variant override.
    """

    m: float = 1.0
    M: float = 5.0
    R: float = 5.0
    k: float = 1.0
    p0: float = 10.0
    variant: ModelVariant = ModelVariant.AS_PRINTED

    def __post_init__(self) -> None:
        for name in ("m", "M", "R", "k"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.p0 > self.R:
            raise ValueError(f"p0 must exceed the latch radius R, got p0={self.p0}, R={self.R}")

    @property
    def h_tol(self) -> float:
        """Default absolute tolerance for constraint membership (scales with R^2)."""
        return 1e-9 * self.R * self.R

    def variant_or(self, variant: ModelVariant | None) -> ModelVariant:
        return self.variant if variant is None else variant


@dataclass(frozen=True)
class SystemState:
    """One point (p, p_dot, l, l_dot) of the 4-dimensional state space."""

    p: float
    p_dot: float
    l: float
    l_dot: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.p_dot, self.l, self.l_dot], dtype=float)

    @classmethod
    def from_array(cls, x: np.ndarray) -> "SystemState":
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v) for v in (self.p, self.p_dot, self.l, self.l_dot)
        )


def spring_force(params: SystemParams, p: float) -> float:
    """Hookean spring force -k (p - p0) acting on the projectile."""
    return -params.k * (p - params.p0)


def holonomic_h(params: SystemParams, p: float, l: float) -> float:
    """Contact constraint h = l^2 + (R - p)^2 - R^2 (zero while touching)."""
    rp = params.R - p
    return l * l + rp * rp - params.R * params.R


def latch_from_projectile(params: SystemParams, p: float) -> float:
    """Non-negative latch position on the constraint circle for a given p.

    Solves h(p, l) = 0 for l >= 0.  Defined for p in [0, 2R]; raises
    ValueError outside that window.
    """
    if p < 0.0 or p > 2.0 * params.R:
        raise ValueError(f"p={p} outside the contact window [0, {2.0 * params.R}]")
    rp = params.R - p
    # clamp round-off when p is within eps of 0 or 2R
    return math.sqrt(max(0.0, params.R * params.R - rp * rp))


def _tau(
    params: SystemParams,
    p: float,
    p_dot: float,
    l: float,
    l_dot: float,
    F_L: float,
    variant: ModelVariant,
) -> float:
    m, M, R = params.m, params.M, params.R
    w = (R - p) ** 2 / m + l * l / M
    if w <= 0.0:
        raise SingularConfigurationError(
            f"contact-force denominator W={w} is not positive at p={p}, l={l}"
        )
    d = m if variant is ModelVariant.AS_PRINTED else M
    fs = spring_force(params, p)
    return (-(p_dot * p_dot + l_dot * l_dot) + (R - p) * fs / m - l * F_L / d) / w


def contact_force(
    params: SystemParams,
    state: SystemState,
    F_L: float,
    variant: ModelVariant | None = None,
) -> float:
    """Constraint (contact) force between latch and projectile.

    tau = W^-1 [ -(p_dot^2 + l_dot^2) + (R - p) F_s / m - l F_L / d ]

    with W = (R - p)^2/m + l^2/M and d = m (AS_PRINTED) or d = M
    (CONSTRAINT_CONSISTENT).  The expression is even in the velocities and
    independent of F_L wherever l = 0.  Meaningful as a physical force
    only near the constraint circle, but defined for any state with W > 0.
    """
    return _tau(
        params,
        state.p,
        state.p_dot,
        state.l,
        state.l_dot,
        F_L,
        params.variant_or(variant),
    )


def mode_of(
    params: SystemParams,
    state: SystemState,
    F_L: float,
    h_tol: float | None = None,
    variant: ModelVariant | None = None,
) -> Mode:
    """Classify a state: latched iff on the constraint circle with tau > 0.

    ``tau == 0`` counts as unlatched (contact requires a strictly pushing
    force).
    """
    tol = params.h_tol if h_tol is None else h_tol
    if abs(holonomic_h(params, state.p, state.l)) > tol:
        return Mode.UNLATCHED
    if contact_force(params, state, F_L, variant) > 0.0:
        return Mode.LATCHED
    return Mode.UNLATCHED


def _field_arr(
    params: SystemParams,
    x: np.ndarray,
    F_L: float,
    latched: bool,
    variant: ModelVariant,
) -> np.ndarray:
    """Vector field on raw arrays; hot path shared by the integrator."""
    p, p_dot, l, l_dot = x
    lam = _tau(params, p, p_dot, l, l_dot, F_L, variant) if latched else 0.0
    fs = spring_force(params, p)
    return np.array(
        [
            p_dot,
            (fs + (p - params.R) * lam) / params.m,
            l_dot,
            (F_L + l * lam) / params.M,
        ]
    )


def vector_field(
    params: SystemParams,
    state: SystemState,
    F_L: float,
    mode: Mode,
    variant: ModelVariant | None = None,
) -> np.ndarray:
    """Time derivative of (p, p_dot, l, l_dot) in the given mode.

    Latched mode substitutes the contact force; unlatched mode sets it to
    zero, decoupling projectile (harmonic oscillator) and latch (constant
    force F_L).
    """
    return _field_arr(
        params,
        state.as_array(),
        F_L,
        mode is Mode.LATCHED,
        params.variant_or(variant),
    )


def mechanical_energy(params: SystemParams, state: SystemState, F_L: float) -> float:
    """Kinetic + spring potential + latch-force potential (-F_L l).

    Conserved along the unlatched flow, and along the latched flow under
    the CONSTRAINT_CONSISTENT variant (an ideal constraint does no work).
    """
    return (
        0.5 * params.m * state.p_dot**2
        + 0.5 * params.M * state.l_dot**2
        + 0.5 * params.k * (state.p - params.p0) ** 2
        - F_L * state.l
    )
