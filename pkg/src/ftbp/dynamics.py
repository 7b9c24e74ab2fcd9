"""Relative-coordinate states, continuous equations of motion, and conserved
quantities of the two rigid body problem.

The reduced state lives in the frame of the second body: X and V are the
relative position and velocity of body 1, R maps body-1 frame vectors into
the body-2 frame, Om is body 1's angular velocity expressed in the body-2
frame, and Om2 is body 2's own angular velocity.  Inertial states are
reconstructed under the zero-total-linear-momentum assumption.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bodies import PolyhedralBody
from .geometry import (
    cross3,
    euler313_to_rotation,
    hat,
    orthogonality_error,
    rot_x,
    rot_z,
    solve3,
)
from .mutual_potential import G_SI, GravityGradients

__all__ = [
    "RelativeState",
    "InertialState",
    "SystemModel",
    "DiagnosticsRecord",
    "RelativeStateDerivative",
    "eom_rhs",
    "conserved_quantities",
    "elements_to_relative_state",
    "euler313_to_rotation",
    "init_inertial",
    "G_SI",
]


@dataclass
class RelativeState:
    X: np.ndarray  # (3,) m
    V: np.ndarray  # (3,) m/s
    R: np.ndarray  # (3, 3), body-1 frame -> body-2 frame
    Om: np.ndarray  # (3,) rad/s, body-1 angular velocity in body-2 frame
    Om2: np.ndarray  # (3,) rad/s, body-2 angular velocity in its own frame

    def copy(self) -> "RelativeState":
        return RelativeState(
            self.X.copy(), self.V.copy(), self.R.copy(), self.Om.copy(), self.Om2.copy()
        )


@dataclass
class InertialState:
    x1: np.ndarray
    x2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    R1: np.ndarray  # body-1 frame -> inertial
    R2: np.ndarray  # body-2 frame -> inertial

    def copy(self) -> "InertialState":
        return InertialState(
            self.x1.copy(), self.x2.copy(), self.v1.copy(),
            self.v2.copy(), self.R1.copy(), self.R2.copy(),
        )


@dataclass
class SystemModel:
    """Both bodies plus the gravitational constant and derived mass data."""

    body1: PolyhedralBody
    body2: PolyhedralBody
    g_const: float = G_SI
    m1: float = field(init=False)
    m2: float = field(init=False)
    m: float = field(init=False)  # reduced mass m1 m2 / (m1 + m2)

    def __post_init__(self):
        self.m1 = self.body1.mass
        self.m2 = self.body2.mass
        self.m = self.m1 * self.m2 / (self.m1 + self.m2)

    @property
    def J1(self) -> np.ndarray:
        return self.body1.J

    @property
    def J2(self) -> np.ndarray:
        return self.body2.J

    @property
    def Jd1(self) -> np.ndarray:
        return self.body1.J_d

    @property
    def Jd2(self) -> np.ndarray:
        return self.body2.J_d

    @property
    def mu(self) -> float:
        """Point-mass gravitational parameter G (m1 + m2)."""
        return self.g_const * (self.m1 + self.m2)


@dataclass
class RelativeStateDerivative:
    """Momentum-form time derivative: the rotational slot carries
    d(J_R Om)/dt rather than dOm/dt."""

    X_dot: np.ndarray
    V_dot: np.ndarray
    R_dot: np.ndarray
    gamma_dot: np.ndarray  # d/dt of J_R Om
    Om2_dot: np.ndarray


@dataclass
class DiagnosticsRecord:
    t: float
    U: float
    KE: float
    E: float
    gamma: np.ndarray  # (3,) total linear momentum, inertial frame
    pi: np.ndarray  # (3,) total angular momentum, inertial frame
    errR: float  # ||I - R^T R||_F
    errR2: float


def eom_rhs(
    state: RelativeState, grads: GravityGradients, model: SystemModel
) -> RelativeStateDerivative:
    """Continuous relative equations of motion.

    Xdot = V - Om2 x X
    Rdot = S(Om) R - S(Om2) R
    Vdot = -dUdX/m - Om2 x V
    d(J_R Om)/dt = -M - Om2 x (J_R Om)
    J2 dOm2/dt = X x dUdX + M - Om2 x J2 Om2
    """
    x, v, r, om, om2 = state.X, state.V, state.R, state.Om, state.Om2
    gamma = r @ (model.J1 @ (r.T @ om))
    return RelativeStateDerivative(
        X_dot=v - cross3(om2, x),
        V_dot=-grads.dUdX / model.m - cross3(om2, v),
        R_dot=hat(om - om2) @ r,
        gamma_dot=-grads.M - cross3(om2, gamma),
        Om2_dot=solve3(
            model.J2,
            cross3(x, grads.dUdX) + grads.M - cross3(om2, model.J2 @ om2),
        ),
    )


def kinetic_energy(state: RelativeState, model: SystemModel) -> float:
    """Trace form over the nonstandard inertia matrices."""
    s_om = hat(state.Om)
    s_om2 = hat(state.Om2)
    j_dr = state.R @ model.Jd1 @ state.R.T
    return float(
        0.5 * model.m * state.V @ state.V
        + 0.5 * np.trace(s_om @ j_dr @ s_om.T)
        + 0.5 * np.trace(s_om2 @ model.Jd2 @ s_om2.T)
    )


def conserved_quantities(
    t: float,
    relative: RelativeState,
    inertial: InertialState,
    model: SystemModel,
    potential: float,
) -> DiagnosticsRecord:
    """Energy, total linear and angular momentum, and rotation-orthogonality
    errors for one sample along a trajectory."""
    ke = kinetic_energy(relative, model)
    om1 = relative.R.T @ relative.Om  # body-1 angular velocity, own frame
    gamma = model.m1 * inertial.v1 + model.m2 * inertial.v2
    pi = (
        cross3(inertial.x1, model.m1 * inertial.v1)
        + inertial.R1 @ (model.J1 @ om1)
        + cross3(inertial.x2, model.m2 * inertial.v2)
        + inertial.R2 @ (model.J2 @ relative.Om2)
    )
    return DiagnosticsRecord(
        t=t,
        U=potential,
        KE=ke,
        E=ke + potential,
        gamma=gamma,
        pi=pi,
        errR=orthogonality_error(relative.R),
        errR2=orthogonality_error(inertial.R2),
    )


def elements_to_relative_state(
    a: float, e: float, inc: float, raan: float, argp: float, nu: float, mu: float
) -> tuple[np.ndarray, np.ndarray]:
    """Classical elements to a relative position/velocity pair.

    Angles in radians.  The output is expressed in the common reference frame
    (the inertial frame at epoch); rotate by R2^T to get the body-2-frame
    state the integrators propagate.  Hyperbolic states use a < 0 with e > 1.
    """
    if e < 0.0:
        raise ValueError("eccentricity must be non-negative")
    if mu <= 0.0:
        raise ValueError("gravitational parameter must be positive")
    if e == 1.0:
        raise ValueError("parabolic orbit: semi-major axis form is undefined")
    if e < 1.0 and a <= 0.0:
        raise ValueError("elliptic orbit requires a > 0")
    if e > 1.0 and a >= 0.0:
        raise ValueError("hyperbolic orbit requires a < 0")
    p = a * (1.0 - e * e)
    denom = 1.0 + e * np.cos(nu)
    if denom <= 0.0:
        raise ValueError("true anomaly outside the hyperbolic branch")
    r = p / denom
    r_pf = r * np.array([np.cos(nu), np.sin(nu), 0.0])
    v_pf = np.sqrt(mu / p) * np.array([-np.sin(nu), e + np.cos(nu), 0.0])
    rot = rot_z(raan) @ rot_x(inc) @ rot_z(argp)
    return rot @ r_pf, rot @ v_pf


def init_inertial(
    relative: RelativeState, model: SystemModel, R2: np.ndarray
) -> InertialState:
    """Inertial states with zero total linear momentum and the system mass
    center at the origin."""
    frac = model.m1 / (model.m1 + model.m2)
    x2 = -frac * (R2 @ relative.X)
    v2 = -frac * (R2 @ relative.V)
    return InertialState(
        x1=x2 + R2 @ relative.X,
        x2=x2,
        v1=v2 + R2 @ relative.V,
        v2=v2,
        R1=R2 @ relative.R,
        R2=R2.copy(),
    )
