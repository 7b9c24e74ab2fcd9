"""Rotation and skew-matrix helpers shared by the dynamics and integrators."""

from __future__ import annotations

import numpy as np

IDENTITY3 = np.eye(3)


def hat(x: np.ndarray) -> np.ndarray:
    """Skew matrix S(x) with S(x) @ y == cross(x, y)."""
    return np.array(
        [
            [0.0, -x[2], x[1]],
            [x[2], 0.0, -x[0]],
            [-x[1], x[0], 0.0],
        ]
    )


def unhat(w: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat` for a skew matrix (uses the lower triangle)."""
    return np.array([w[2, 1], w[0, 2], w[1, 0]])


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product of two 3-vectors (cheaper than np.cross for scalars)."""
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def solve3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a well-conditioned 3x3 system by the adjugate formula."""
    a00, a01, a02 = a[0]
    a10, a11, a12 = a[1]
    a20, a21, a22 = a[2]
    c00 = a11 * a22 - a12 * a21
    c01 = a12 * a20 - a10 * a22
    c02 = a10 * a21 - a11 * a20
    det = a00 * c00 + a01 * c01 + a02 * c02
    c10 = a02 * a21 - a01 * a22
    c11 = a00 * a22 - a02 * a20
    c12 = a01 * a20 - a00 * a21
    c20 = a01 * a12 - a02 * a11
    c21 = a02 * a10 - a00 * a12
    c22 = a00 * a11 - a01 * a10
    b0, b1, b2 = b
    return np.array(
        [
            (c00 * b0 + c10 * b1 + c20 * b2) / det,
            (c01 * b0 + c11 * b1 + c21 * b2) / det,
            (c02 * b0 + c12 * b1 + c22 * b2) / det,
        ]
    )


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def exp_so3(f: np.ndarray) -> np.ndarray:
    """Rodrigues formula, exp(S(f)).

    Uses series coefficients below theta = 1e-8 so the result stays orthogonal
    to round-off for any magnitude.
    """
    theta = np.linalg.norm(f)
    if theta < 1e-8:
        a = 1.0 - theta**2 / 6.0
        b = 0.5 - theta**2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta**2
    s = hat(f)
    return IDENTITY3 + a * s + b * (s @ s)


def euler313_to_rotation(phi1: float, phi2: float, phi3: float) -> np.ndarray:
    """Body-to-reference rotation for a 3-1-3 Euler angle triple in degrees.

    The triple (phi1, phi2, phi3) is the intrinsic z-x-z sequence carrying the
    reference frame onto the body frame; the returned matrix maps body-frame
    coordinates to reference-frame coordinates, i.e.
    ``R = Rz(-phi3) @ Rx(-phi2) @ Rz(-phi1)``.  With this convention the tilt
    direction of the body z axis is set by (phi2, phi3) while phi1 is a phase
    about the body z axis.
    """
    a1, a2, a3 = np.deg2rad([phi1, phi2, phi3])
    return rot_z(-a3) @ rot_x(-a2) @ rot_z(-a1)


def rotation_angle(r: np.ndarray) -> float:
    """Geodesic rotation angle of an (approximately) orthogonal matrix."""
    c = (np.trace(r) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def orthogonality_error(r: np.ndarray) -> float:
    """Frobenius norm of I - R^T R."""
    return float(np.linalg.norm(IDENTITY3 - r.T @ r))
