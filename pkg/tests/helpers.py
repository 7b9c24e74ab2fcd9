"""Shared fixtures-support code: mesh builders and independent oracles.

Everything here is deliberately written from first principles (no reuse of
the library's series/contraction code) so tests check against genuinely
independent computations.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from ftbp.bodies import build_body, parse_body_model
from ftbp.geometry import exp_so3

G_TEST = 6.674e-11


# -- meshes -------------------------------------------------------------------


def octahedron_texts(a, b, c, face_density=None):
    """Vertex/face texts for an octahedron with axis extents (a, b, c).

    ``face_density`` adds a fourth face-row column (same value every row).
    """
    verts = [(a, 0, 0), (-a, 0, 0), (0, b, 0), (0, -b, 0), (0, 0, c), (0, 0, -c)]
    faces = [
        (1, 3, 5), (3, 2, 5), (2, 4, 5), (4, 1, 5),
        (3, 1, 6), (2, 3, 6), (4, 2, 6), (1, 4, 6),
    ]
    vtext = "\n".join(" ".join(repr(float(x)) for x in v) for v in verts)
    rows = []
    for f in faces:
        row = " ".join(str(i) for i in f)
        if face_density is not None:
            row += f" {face_density!r}"
        rows.append(row)
    return vtext, "\n".join(rows)


def octahedron_body(a, b, c, rho=2500.0):
    vt, ft = octahedron_texts(a, b, c)
    return build_body(parse_body_model(vt, ft, rho))


def sphere_mesh_texts(radius, levels):
    """Octahedron-based geodesic sphere, ``levels`` subdivision rounds."""
    verts = [
        (1.0, 0, 0), (-1.0, 0, 0), (0, 1.0, 0), (0, -1.0, 0), (0, 0, 1.0), (0, 0, -1.0)
    ]
    verts = [np.array(v) for v in verts]
    faces = [
        (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
        (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
    ]
    for _ in range(levels):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for i, j, k in faces:
            ij, jk, ki = midpoint(i, j), midpoint(j, k), midpoint(k, i)
            new_faces += [(i, ij, ki), (ij, j, jk), (ki, jk, k), (ij, jk, ki)]
        faces = new_faces
    vtext = "\n".join(" ".join(repr(float(radius * x)) for x in v) for v in verts)
    ftext = "\n".join(f"{i+1} {j+1} {k+1}" for i, j, k in faces)
    return vtext, ftext


def random_rotation(rng):
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return exp_so3(axis * rng.uniform(0.0, np.pi))


# -- benchmark scenarios ------------------------------------------------------------

#: (attitude1, attitude2, spin1, spin2, elements-or-None, state-vector-or-None)
SCENARIOS = {
    1: (
        (100.0, 9.8, 175.0), (160.0, -5.0, 165.0),
        (0.0, 0.0, 5.0e-5), (0.0, 0.0, 9.2e-5),
        (4.0, 0.3, 5.0, 15.0, 60.0, 10.0), None,
    ),
    2: (
        (180.0, 0.0, 30.0), (270.0, 0.0, 30.0),
        (0.0, 0.0, 0.566), (0.0, 0.0, -0.566),
        None, (0.0, 6.0, 0.0, -0.006, 0.0, 0.0),
    ),
    3: (
        (-22.6, 5.0, 180.0), (50.3, 5.0, -180.0),
        (0.0, 0.0, 1.63e-4), (0.0, 0.0, 1.55e-4),
        (52.9, 0.942, 5.0, 0.0, 88.2, -107.1), None,
    ),
    4: (
        (-75.0, 30.0, 180.0), (-75.0, 30.0, 180.0),
        (0.007, 0.007, 0.05), (-0.003, 0.002, 0.004),
        None, (-0.5, 1.8, 1.1, -0.3, -0.1, 0.0),
    ),
}


def scenario_config(number, **overrides):
    """RunConfig for one of the four benchmark scenarios (both octahedra)."""
    from ftbp.simulation import RunConfig

    att1, att2, spin1, spin2, elements, state_vector = SCENARIOS[number]
    v1, f1 = octahedron_texts(1.0, 1.0 / np.e, 1.0 / np.pi)
    v2, f2 = octahedron_texts(1.0, 1.5, 0.9)
    kwargs = dict(
        body1_vertex_text=v1,
        body1_face_text=f1,
        body2_vertex_text=v2,
        body2_face_text=f2,
        g_const=G_TEST,
        attitude1_deg=att1,
        attitude2_deg=att2,
        spin1=spin1,
        spin2=spin2,
        elements_deg=elements,
        state_vector=state_vector,
    )
    kwargs.update(overrides)
    return RunConfig(**kwargs)


def system_mu():
    """Point-mass gravitational parameter of the two-octahedra system."""
    b1 = octahedron_body(1.0, 1.0 / np.e, 1.0 / np.pi)
    b2 = octahedron_body(1.0, 1.5, 0.9)
    return G_TEST * (b1.mass + b2.mass)


# -- Monte Carlo sampling -----------------------------------------------------


def sample_unit_simplex(rng, n):
    """Uniform samples of the standard 3-simplex {x >= 0, sum x <= 1}."""
    u = np.sort(rng.random((n, 3)), axis=1)
    padded = np.hstack([np.zeros((n, 1)), u, np.ones((n, 1))])
    return np.diff(padded, axis=1)[:, :3]


def sample_tetrahedron(rng, corners, n):
    """Uniform points in the tetrahedron {0, c1, c2, c3} (corners as columns)."""
    bary = sample_unit_simplex(rng, n)
    return bary @ corners.T


# -- Kepler oracle ------------------------------------------------------------


def kepler_propagate(x0, v0, mu, dt):
    """Closed-form elliptic propagation via the eccentric-anomaly Gauss f/g
    series (independent of any integrator)."""
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    r0 = float(np.linalg.norm(x0))
    a = 1.0 / (2.0 / r0 - float(v0 @ v0) / mu)
    if a <= 0:
        raise ValueError("oracle handles elliptic orbits only")
    n = np.sqrt(mu / a**3)
    sigma0 = float(x0 @ v0) / np.sqrt(mu)
    m = n * dt

    def kepler_eq(de):
        return (
            de
            + (sigma0 / np.sqrt(a)) * (1.0 - np.cos(de))
            - (1.0 - r0 / a) * np.sin(de)
            - m
        )

    de = m
    for _ in range(60):
        fprime = (
            1.0
            + (sigma0 / np.sqrt(a)) * np.sin(de)
            - (1.0 - r0 / a) * np.cos(de)
        )
        step = kepler_eq(de) / fprime
        de -= step
        if abs(step) < 1e-15 * max(1.0, abs(de)):
            break
    r = a + (r0 - a) * np.cos(de) + sigma0 * np.sqrt(a) * np.sin(de)
    f = 1.0 - (a / r0) * (1.0 - np.cos(de))
    g = dt + (np.sin(de) - de) / n
    fdot = -np.sqrt(mu * a) * np.sin(de) / (r * r0)
    gdot = 1.0 - (a / r) * (1.0 - np.cos(de))
    return f * x0 + g * v0, fdot * x0 + gdot * v0


def orbital_period(a, mu):
    return 2.0 * np.pi * np.sqrt(a**3 / mu)


# -- independent reference for the displayed series brackets -------------------


def _q_exact(counts):
    def block(ms):
        return (
            factorial(ms[0]) * factorial(ms[1]) * factorial(ms[2])
            / factorial(sum(ms) + 3)
        )

    return block(counts[:3]) * block(counts[3:])


def _q_dense(rank):
    arr = np.empty((6,) * rank)
    for idx in np.ndindex(*(6,) * rank):
        counts = [0] * 6
        for i in idx:
            counts[i] += 1
        arr[idx] = _q_exact(counts)
    return arr


def reference_series(X, R, body1, body2, g_const, order):
    """Potential, dUdX, dUdR, exactly as the displayed bracket terms (n <= 3),
    written with explicit loops and the factorial entry formula."""
    assert order <= 3
    q0 = _q_dense(0)[()]
    q1, q2, q3 = _q_dense(1), _q_dense(2), _q_dense(3)
    X = np.asarray(X, dtype=float)
    r = np.linalg.norm(X)
    u_total = 0.0
    dudx_total = np.zeros(3)
    dudr_total = np.zeros((3, 3))
    for ia in range(body1.n_faces):
        a_verts = body1.simplex_vertices[ia]
        for ib in range(body2.n_faces):
            b_verts = body2.simplex_vertices[ib]
            v = np.hstack([R @ a_verts, -b_verts])
            w = v.T @ X
            rm = v.T @ v
            coef = (
                body1.simplex_density[ia] * body1.T[ia]
                * body2.simplex_density[ib] * body2.T[ib]
            )

            u = q0 / r
            if order >= 1:
                u += -np.einsum("i,i->", q1, w) / r**3
            if order >= 2:
                u += -np.einsum("ij,ij->", q2, rm) / (2 * r**3)
                u += 3 * np.einsum("ij,i,j->", q2, w, w) / (2 * r**5)
            if order >= 3:
                u += 3 * np.einsum("ijk,ij,k->", q3, rm, w) / (2 * r**5)
                u += -5 * np.einsum("ijk,i,j,k->", q3, w, w, w) / (2 * r**7)

            dudx = -q0 * X / r**3
            if order >= 1:
                dudx += 3 * np.einsum("i,i->", q1, w) * X / r**5
                dudx += -np.einsum("i,ti->t", q1, v) / r**3
            if order >= 2:
                dudx += 3 * np.einsum("ij,ij->", q2, rm) * X / (2 * r**5)
                dudx += -15 * np.einsum("ij,i,j->", q2, w, w) * X / (2 * r**7)
                dudx += 3 * np.einsum("ij,i,tj->t", q2, w, v) / r**5
            if order >= 3:
                dudx += -15 * np.einsum("ijk,ij,k->", q3, rm, w) * X / (2 * r**7)
                dudx += 3 * np.einsum("ijk,ij,tk->t", q3, rm, v) / (2 * r**5)
                dudx += 35 * np.einsum("ijk,i,j,k->", q3, w, w, w) * X / (2 * r**9)
                dudx += -15 * np.einsum("ijk,i,j,tk->t", q3, w, w, v) / (2 * r**7)

            # attitude gradient, using dv^i_p/dR^{phi theta} = delta_{p phi}
            # (a_i)_theta for columns 1..3 and zero for columns 4..6
            dudr = np.zeros((3, 3))
            if order >= 1:
                for i in range(3):
                    dudr += -q1[i] * np.outer(X, a_verts[:, i]) / r**3
            if order >= 2:
                for i in range(6):
                    for j in range(3):
                        dudr += (
                            -q2[i, j] * np.outer(v[:, i], a_verts[:, j]) / r**3
                        )
                        dudr += (
                            3 * q2[i, j] * w[i] * np.outer(X, a_verts[:, j]) / r**5
                        )
            if order >= 3:
                for i in range(6):
                    for j in range(3):
                        for k in range(6):
                            # 2 v_p^i D_{p theta}^{phi j} w^k (j on body 1)
                            dudr += (
                                (3 * q3[i, j, k] / (2 * r**5))
                                * 2 * w[k] * np.outer(v[:, i], a_verts[:, j])
                            )
                for i in range(6):
                    for j in range(6):
                        for k in range(3):
                            # r^{ij} X^p D_{p theta}^{phi k} and the w w term
                            dudr += (
                                (3 * q3[i, j, k] / (2 * r**5))
                                * rm[i, j] * np.outer(X, a_verts[:, k])
                            )
                            dudr += (
                                (-15 * q3[i, j, k] / (2 * r**7))
                                * w[i] * w[j] * np.outer(X, a_verts[:, k])
                            )

            u_total += coef * u
            dudx_total += coef * dudx
            dudr_total += coef * dudr
    return -g_const * u_total, -g_const * dudx_total, -g_const * dudr_total
