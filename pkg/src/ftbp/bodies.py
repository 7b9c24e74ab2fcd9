"""Polyhedral body models: file parsing, simplex decomposition, mass properties.

A body is a closed triangulated surface.  Each face together with the body
centroid forms a tetrahedral simplex; simplices carry individual densities and
signed Jacobian determinants so concave (non star-shaped) meshes work too.
After preprocessing the vertex frame has its origin at the centroid and its
axes along the principal axes of inertia.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import permutations

import numpy as np

# Second moment of the standard simplex {xi >= 0, sum xi <= 1}: diagonal
# entries 1/60, off-diagonal 1/120.
_SIMPLEX_SECOND_MOMENT = (np.ones((3, 3)) + np.eye(3)) / 120.0


class BodyModelError(ValueError):
    """Base class for body-model failures."""


class ParseError(BodyModelError):
    """Malformed vertex or face row."""


class TopologyError(BodyModelError):
    """Face indices out of range, repeated, or surface not closed."""


class DegenerateBodyError(BodyModelError):
    """Non-positive volume or singular inertia."""


@dataclass(frozen=True)
class ScaleFactors:
    """Nondimensionalization divisors for length, mass, and time."""

    length: float = 1.0
    mass: float = 1.0
    time: float = 1.0

    def __post_init__(self):
        for name in ("length", "mass", "time"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"scale factor {name!r} must be positive")

    def inverse(self) -> "ScaleFactors":
        return ScaleFactors(1.0 / self.length, 1.0 / self.mass, 1.0 / self.time)


@dataclass(frozen=True, eq=False)
class RawBodyModel:
    """Vertex/face lists exactly as read from file (faces stored zero-based)."""

    vertices: np.ndarray  # (n_vertices, 3), meters, arbitrary frame
    faces: np.ndarray  # (n_faces, 3) int, zero-based, CCW from outside
    density: np.ndarray  # (n_faces,), kg/m^3


@dataclass(frozen=True, eq=False)
class PolyhedralBody:
    """Preprocessed body: centered on its centroid, axes principal."""

    vertices: np.ndarray  # (n_vertices, 3)
    faces: np.ndarray  # (n_faces, 3) int, zero-based
    simplex_density: np.ndarray  # (n_faces,)
    simplex_vertices: np.ndarray  # (n_faces, 3, 3), columns = face vertices
    T: np.ndarray  # (n_faces,) signed Jacobian determinants
    mass: float
    J: np.ndarray  # (3, 3) standard inertia
    J_d: np.ndarray  # (3, 3) nonstandard inertia, J_d = tr(J)/2 I - J
    volume: float
    surface_area: float
    equiv_radius: float
    max_radius: float  # circumscribing-sphere radius

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def rho_T(self) -> np.ndarray:
        """Per-simplex density-weighted Jacobians; sum/6 equals the mass."""
        return self.simplex_density * self.T


def _parse_rows(text: str, kind: str, min_cols: int, max_cols: int):
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.split()
        if not min_cols <= len(fields) <= max_cols:
            raise ParseError(
                f"{kind} line {lineno}: expected {min_cols}"
                + (f"-{max_cols}" if max_cols != min_cols else "")
                + f" fields, got {len(fields)}"
            )
        try:
            rows.append(([float(f) for f in fields], lineno))
        except ValueError as exc:
            raise ParseError(f"{kind} line {lineno}: {exc}") from None
    return rows


def parse_body_model(
    vertex_text: str, face_text: str, default_density: float
) -> RawBodyModel:
    """Parse whitespace-delimited vertex and face lists.

    Vertex rows hold three coordinates; face rows hold three one-based vertex
    indices and an optional fourth density column.  ``#`` starts a comment.
    Raises :class:`ParseError` with the offending line number for malformed
    rows and :class:`TopologyError` for bad indices or an open surface.
    """
    vrows = _parse_rows(vertex_text, "vertex", 3, 3)
    if not vrows:
        raise ParseError("vertex file contains no data rows")
    vertices = np.array([r for r, _ in vrows])

    frows = _parse_rows(face_text, "face", 3, 4)
    if not frows:
        raise ParseError("face file contains no data rows")
    faces = np.empty((len(frows), 3), dtype=int)
    density = np.full(len(frows), float(default_density))
    n_vert = len(vertices)
    for k, (fields, lineno) in enumerate(frows):
        idx = fields[:3]
        if any(i != int(i) for i in idx):
            raise ParseError(f"face line {lineno}: non-integer vertex index")
        idx = [int(i) for i in idx]
        if any(i < 1 or i > n_vert for i in idx):
            raise TopologyError(
                f"face line {lineno}: vertex index out of range 1..{n_vert}"
            )
        if len(set(idx)) != 3:
            raise TopologyError(f"face line {lineno}: repeated vertex index")
        faces[k] = [i - 1 for i in idx]
        if len(fields) == 4:
            density[k] = fields[3]

    _check_closed(faces)
    return RawBodyModel(vertices=vertices, faces=faces, density=density)


def _check_closed(faces: np.ndarray) -> None:
    edges: dict[tuple[int, int], int] = {}
    for tri in faces:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            edges[key] = edges.get(key, 0) + 1
    bad = [e for e, count in edges.items() if count != 2]
    if bad:
        raise TopologyError(
            f"surface not closed: {len(bad)} edges not shared by exactly 2 faces "
            f"(first: {tuple(int(i) + 1 for i in bad[0])})"
        )


def simplex_inertia(verts: np.ndarray, rho: float) -> np.ndarray:
    """Standard inertia contribution of the tetrahedron {0, v1, v2, v3}.

    ``verts`` holds the three non-centroid vertices as columns.  The Jacobian
    determinant is signed, so contributions from faces whose outward normal
    points toward the origin subtract correctly.
    """
    t = np.linalg.det(verts)
    p = rho * t * (verts @ _SIMPLEX_SECOND_MOMENT @ verts.T)
    return np.trace(p) * np.eye(3) - p


def _simplex_arrays(vertices: np.ndarray, faces: np.ndarray):
    """Per-face vertex matrices (columns = vertices) and their determinants."""
    simplex = vertices[faces].transpose(0, 2, 1)  # (n, 3, 3)
    return simplex, np.linalg.det(simplex)


def _centroid(vertices: np.ndarray, faces: np.ndarray, density: np.ndarray):
    """Fixed point of the density-weighted simplex decomposition.

    Simplices are anchored at the centroid itself, so with non-uniform
    densities the mass distribution depends on the anchor; iterate until the
    first moment about the anchor vanishes.  Uniform densities converge in a
    single step.
    """
    scale = float(np.max(np.linalg.norm(vertices, axis=1)))
    c = np.zeros(3)
    for _ in range(60):
        simplex, t = _simplex_arrays(vertices - c, faces)
        mass = float(np.sum(density * t)) / 6.0
        if mass <= 0.0:
            raise DegenerateBodyError("total signed volume is not positive")
        moment = (density * t) @ simplex.sum(axis=2) / 24.0
        step = moment / mass
        c = c + step
        if np.linalg.norm(step) <= 1e-15 * max(scale, 1e-300):
            break
    return c


def _principal_rotation(j: np.ndarray) -> np.ndarray:
    """Rotation diagonalizing J, chosen deterministically.

    Among all axis orderings and sign flips of the eigenvector basis with
    determinant +1, pick the rotation closest to the identity (maximum trace),
    so a body already in principal axes maps to itself and Table-style axis
    ordering is preserved.
    """
    off = j - np.diag(np.diag(j))
    if np.max(np.abs(off)) <= 1e-12 * max(np.trace(j), 1e-300):
        return np.eye(3)
    _, vecs = np.linalg.eigh(j)
    best, best_trace = None, -np.inf
    for perm in permutations(range(3)):
        v = vecs[:, perm]
        for signs in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
            cand = v * np.array(signs)
            if np.linalg.det(cand) < 0.0:
                cand = cand * np.array((1, 1, -1))
            r = cand.T
            tr = np.trace(r)
            if tr > best_trace + 1e-15:
                best, best_trace = r, tr
    return best


def build_body(raw: RawBodyModel) -> PolyhedralBody:
    """Center a raw model on its centroid, rotate to principal axes, and
    compute mass, inertia, volume, area, and radii."""
    centroid = _centroid(raw.vertices, raw.faces, raw.density)
    vertices = raw.vertices - centroid

    simplex, t = _simplex_arrays(vertices, raw.faces)
    j = sum(
        simplex_inertia(simplex[k], raw.density[k]) for k in range(len(raw.faces))
    )
    r_pa = _principal_rotation(j)
    if not np.array_equal(r_pa, np.eye(3)):
        vertices = vertices @ r_pa.T
        simplex, t = _simplex_arrays(vertices, raw.faces)
        j = sum(
            simplex_inertia(simplex[k], raw.density[k])
            for k in range(len(raw.faces))
        )

    volume = float(np.sum(t)) / 6.0
    if volume <= 0.0:
        raise DegenerateBodyError("total signed volume is not positive")
    mass = float(np.sum(raw.density * t)) / 6.0

    eigvals = np.linalg.eigvalsh(j)
    if eigvals[0] <= 0.0 or eigvals[0] <= 1e-14 * eigvals[-1]:
        raise DegenerateBodyError("singular inertia matrix (degenerate body)")

    edges1 = vertices[raw.faces[:, 1]] - vertices[raw.faces[:, 0]]
    edges2 = vertices[raw.faces[:, 2]] - vertices[raw.faces[:, 0]]
    area = float(np.sum(np.linalg.norm(np.cross(edges1, edges2), axis=1)) / 2.0)

    return PolyhedralBody(
        vertices=vertices,
        faces=raw.faces.copy(),
        simplex_density=raw.density.copy(),
        simplex_vertices=simplex,
        T=t,
        mass=mass,
        J=j,
        J_d=0.5 * np.trace(j) * np.eye(3) - j,
        volume=volume,
        surface_area=area,
        equiv_radius=float((3.0 * volume / (4.0 * np.pi)) ** (1.0 / 3.0)),
        max_radius=float(np.max(np.linalg.norm(vertices, axis=1))),
    )


def rebuild(body: PolyhedralBody) -> PolyhedralBody:
    """Run preprocessing again on an already-built body (idempotence check)."""
    return build_body(
        RawBodyModel(
            vertices=body.vertices, faces=body.faces, density=body.simplex_density
        )
    )


def nondimensionalize(
    body: PolyhedralBody, scales: ScaleFactors, g_const: float
) -> tuple[PolyhedralBody, float]:
    """Rescale a body and the gravitational constant by the given factors.

    Lengths divide by ``scales.length``, masses by ``scales.mass``; the
    returned constant is ``G * mass * time^2 / length^3`` so equations of
    motion keep their form in scaled units.  The round trip with
    ``scales.inverse()`` recovers the inputs to round-off.
    """
    ls, ms = scales.length, scales.mass
    inertia_scale = ms * ls**2
    scaled = replace(
        body,
        vertices=body.vertices / ls,
        simplex_vertices=body.simplex_vertices / ls,
        T=body.T / ls**3,
        mass=body.mass / ms,
        J=body.J / inertia_scale,
        J_d=body.J_d / inertia_scale,
        volume=body.volume / ls**3,
        surface_area=body.surface_area / ls**2,
        equiv_radius=body.equiv_radius / ls,
        max_radius=body.max_radius / ls,
        simplex_density=body.simplex_density * ls**3 / ms,
    )
    g_scaled = g_const * ms * scales.time**2 / ls**3
    return scaled, g_scaled
