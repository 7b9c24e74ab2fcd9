"""Adaptive Runge-Kutta-Fehlberg 7(8) reference integrator.

Thirteen-stage embedded pair with standard step-size control.  The packed
state carries the relative variables, the body-1 angular momentum in the
body-2 frame, and body 2's inertial motion; rotation matrix entries are
integrated raw, with no reprojection, so the drift of R^T R away from the
identity that general one-step methods suffer is observable in the output.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Callable

import numpy as np

from .dynamics import (
    InertialState,
    RelativeState,
    RelativeStateDerivative,
    SystemModel,
    eom_rhs,
)
from .geometry import hat, solve3
from .mutual_potential import MutualGravity


class StepUnderflowError(RuntimeError):
    """Controller pushed the step size below the configured minimum."""


class AttitudeDriftWarning(UserWarning):
    """Integrated rotation matrix far from orthogonal."""


STATE_SIZE = 36

# Fehlberg's 13-stage 7(8) pair (NASA TR R-287).  Stage nodes, coupling
# coefficients, and the 7th/8th order weights; the error estimate reduces to
# 41/840 h (k0 + k10 - k11 - k12).
_ALPHA = [
    F(0), F(2, 27), F(1, 9), F(1, 6), F(5, 12), F(1, 2), F(5, 6), F(1, 6),
    F(2, 3), F(1, 3), F(1), F(0), F(1),
]
_BETA = [
    [],
    [F(2, 27)],
    [F(1, 36), F(1, 12)],
    [F(1, 24), F(0), F(1, 8)],
    [F(5, 12), F(0), F(-25, 16), F(25, 16)],
    [F(1, 20), F(0), F(0), F(1, 4), F(1, 5)],
    [F(-25, 108), F(0), F(0), F(125, 108), F(-65, 27), F(125, 54)],
    [F(31, 300), F(0), F(0), F(0), F(61, 225), F(-2, 9), F(13, 900)],
    [F(2), F(0), F(0), F(-53, 6), F(704, 45), F(-107, 9), F(67, 90), F(3)],
    [F(-91, 108), F(0), F(0), F(23, 108), F(-976, 135), F(311, 54), F(-19, 60),
     F(17, 6), F(-1, 12)],
    [F(2383, 4100), F(0), F(0), F(-341, 164), F(4496, 1025), F(-301, 82),
     F(2133, 4100), F(45, 82), F(45, 164), F(18, 41)],
    [F(3, 205), F(0), F(0), F(0), F(0), F(-6, 41), F(-3, 205), F(-3, 41),
     F(3, 41), F(6, 41), F(0)],
    [F(-1777, 4100), F(0), F(0), F(-341, 164), F(4496, 1025), F(-289, 82),
     F(2193, 4100), F(51, 82), F(33, 164), F(12, 41), F(0), F(1)],
]
_C8 = [
    F(0), F(0), F(0), F(0), F(0), F(34, 105), F(9, 35), F(9, 35), F(9, 280),
    F(9, 280), F(0), F(41, 840), F(41, 840),
]

ALPHA = np.array([float(a) for a in _ALPHA])
BETA = np.zeros((13, 12))
for _i, _row in enumerate(_BETA):
    BETA[_i, : len(_row)] = [float(b) for b in _row]
C8 = np.array([float(c) for c in _C8])
ERR_WEIGHT = float(F(41, 840))

N_STAGES = 13


@dataclass
class StepControl:
    tol: float
    h0: float
    h_min: float = 1e-10
    h_max: float = np.inf
    safety: float = 0.9
    min_factor: float = 0.1
    max_factor: float = 5.0

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tolerance must be positive")
        if not self.h_min <= self.h0 <= self.h_max:
            raise ValueError("h0 outside [h_min, h_max]")


def pack_state(rel: RelativeState, inertial: InertialState, model: SystemModel) -> np.ndarray:
    """Flatten to the 36-vector [X V R(9) J_R*Om Om2 x2 v2 R2(9)]."""
    j_r = rel.R @ model.J1 @ rel.R.T
    return np.concatenate(
        [rel.X, rel.V, rel.R.ravel(), j_r @ rel.Om, rel.Om2,
         inertial.x2, inertial.v2, inertial.R2.ravel()]
    )


def unpack_state(y: np.ndarray, model: SystemModel) -> tuple[RelativeState, InertialState]:
    """Inverse of :func:`pack_state`; recovers Om through (R J1 R^T)^-1."""
    x = y[0:3]
    v = y[3:6]
    r = y[6:15].reshape(3, 3)
    gamma = y[15:18]
    om2 = y[18:21]
    x2 = y[21:24]
    v2 = y[24:27]
    r2 = y[27:36].reshape(3, 3)
    om = solve3(r @ model.J1 @ r.T, gamma)
    rel = RelativeState(X=x.copy(), V=v.copy(), R=r.copy(), Om=om, Om2=om2.copy())
    inertial = InertialState(
        x1=x2 + r2 @ x, x2=x2.copy(), v1=v2 + r2 @ v, v2=v2.copy(),
        R1=r2 @ r, R2=r2.copy(),
    )
    return rel, inertial


def make_rhs(gravity: MutualGravity, model: SystemModel) -> Callable[[np.ndarray], np.ndarray]:
    """Packed-state derivative; every call performs one gradient evaluation."""
    warned = False

    def rhs(y: np.ndarray) -> np.ndarray:
        nonlocal warned
        x = y[0:3]
        v = y[3:6]
        r = y[6:15].reshape(3, 3)
        gamma = y[15:18]
        om2 = y[18:21]
        v2 = y[24:27]
        r2 = y[27:36].reshape(3, 3)

        j_r = r @ model.J1 @ r.T
        det_r = (
            r[0, 0] * (r[1, 1] * r[2, 2] - r[1, 2] * r[2, 1])
            - r[0, 1] * (r[1, 0] * r[2, 2] - r[1, 2] * r[2, 0])
            + r[0, 2] * (r[1, 0] * r[2, 1] - r[1, 1] * r[2, 0])
        )
        if not warned and abs(det_r) < 0.5:
            warnings.warn(
                "relative rotation matrix severely non-orthogonal; "
                "angular-velocity recovery is unreliable",
                AttitudeDriftWarning,
                stacklevel=2,
            )
            warned = True
        om = solve3(j_r, gamma)
        grads = gravity.evaluate(x, r)
        rel = RelativeState(X=x, V=v, R=r, Om=om, Om2=om2)
        d: RelativeStateDerivative = eom_rhs(rel, grads, model)
        return np.concatenate(
            [
                d.X_dot,
                d.V_dot,
                d.R_dot.ravel(),
                d.gamma_dot,
                d.Om2_dot,
                v2,
                (r2 @ grads.dUdX) / model.m2,
                (r2 @ hat(om2)).ravel(),
            ]
        )

    return rhs


def _error_norm(delta: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(np.abs(delta) / np.maximum(1.0, np.abs(y))))


def rkf78_step(
    y: np.ndarray, h: float, rhs: Callable[[np.ndarray], np.ndarray], ctrl: StepControl
) -> tuple[np.ndarray, float, float, bool]:
    """One attempted step: (y_next, h_next, err, accepted).

    Thirteen derivative evaluations; the eighth-order solution is propagated
    and the embedded seventh-order difference drives the controller
    h * min(5, max(0.1, 0.9 (tol/err)^(1/8))).  A rejected attempt returns the
    input state unchanged.
    """
    k = np.empty((N_STAGES, y.size))
    k[0] = rhs(y)
    for s in range(1, N_STAGES):
        k[s] = rhs(y + h * (BETA[s, :s] @ k[:s]))
    y8 = y + h * (C8 @ k)
    err_vec = ERR_WEIGHT * h * (k[0] + k[10] - k[11] - k[12])
    err = _error_norm(err_vec, y)

    if err == 0.0:
        factor = ctrl.max_factor
    else:
        factor = min(
            ctrl.max_factor,
            max(ctrl.min_factor, ctrl.safety * (ctrl.tol / err) ** 0.125),
        )
    h_next = min(max(h * factor, ctrl.h_min), ctrl.h_max)
    accepted = err <= ctrl.tol
    return (y8 if accepted else y), h_next, err, accepted


def integrate(
    y0: np.ndarray,
    t0: float,
    tf: float,
    rhs: Callable[[np.ndarray], np.ndarray],
    ctrl: StepControl,
    on_step: Callable[[float, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, float, int, int]:
    """Drive the stepper from t0 to tf.

    Returns (y_final, h_final, accepted_steps, rejected_steps); ``on_step``
    fires after every accepted step only.
    """
    t, y, h = t0, y0.copy(), ctrl.h0
    accepted = rejected = 0
    while t < tf - 1e-12 * max(abs(tf), 1.0):
        h_try = min(h, tf - t)
        y_new, h, _, ok = rkf78_step(y, h_try, rhs, ctrl)
        if ok:
            t = t + h_try
            y = y_new
            accepted += 1
            if on_step is not None:
                on_step(t, y)
        else:
            rejected += 1
            if h <= ctrl.h_min:
                raise StepUnderflowError(
                    f"step size at minimum {ctrl.h_min:g} with error above "
                    f"tolerance at t={t:g} (stiff or contact regime)"
                )
    return y, h, accepted, rejected
