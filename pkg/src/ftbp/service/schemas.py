"""Pydantic request/response models for the simulation service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..mutual_potential import G_SI


class BodySpec(BaseModel):
    """Inline body model: whitespace-delimited vertex and face lists."""

    vertex_text: str
    face_text: str
    density: float = 2500.0


class BodyProperties(BaseModel):
    n_vertices: int
    n_faces: int
    mass: float
    volume: float
    surface_area: float
    equiv_radius: float
    max_radius: float
    inertia_diag: list[float]
    inertia: list[float]  # row-major 3x3
    nonstandard_inertia: list[float]  # row-major 3x3


class QTensorEntry(BaseModel):
    indices: list[int]  # sorted multi-index over 0..5
    numerator: int
    denominator: int
    value: float


class QTensorRank(BaseModel):
    rank: int
    entries: list[QTensorEntry]


class QTensorResponse(BaseModel):
    max_order: int
    ranks: list[QTensorRank]


class GradientRequest(BaseModel):
    body1: BodySpec
    body2: BodySpec
    x: list[float] = Field(min_length=3, max_length=3)
    r: list[float] = Field(min_length=9, max_length=9)  # row-major rotation
    order: int = 4
    g_const: float = G_SI


class GradientResponse(BaseModel):
    potential: float
    du_dx: list[float]
    du_dr: list[float]  # row-major 3x3
    moment: list[float]
    separation: float


class ScenarioSpec(BaseModel):
    """Initial conditions: 3-1-3 attitudes (deg), body-frame spins (rad/s),
    and exactly one of orbital elements or a relative state vector."""

    attitude1_deg: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    attitude2_deg: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    spin1: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    spin2: list[float] = Field(default=[0.0, 0.0, 0.0], min_length=3, max_length=3)
    elements_deg: list[float] | None = Field(default=None, min_length=6, max_length=6)
    state_vector: list[float] | None = Field(default=None, min_length=6, max_length=6)


class SimulationRequest(BaseModel):
    body1: BodySpec
    body2: BodySpec
    scenario: ScenarioSpec
    integrator: str = "lgvi"
    h: float | None = None
    tol: float | None = None
    t0: float = 0.0
    tf: float = 86400.0
    order: int = 4
    g_const: float = G_SI
    scale_length: float = 1.0
    scale_mass: float = 1.0
    scale_time: float = 1.0
    deterministic: bool = True
    workers: int = 1
    output_every: int = 1
    diag_every: int = 1
    rkf_diag_eval: bool = True


class SummaryModel(BaseModel):
    integrator: str
    order: int
    steps: int
    rejected_steps: int
    n_evals: int
    n_diag_evals: int
    wall_time_s: float
    t_start: float
    t_final: float
    h_final: float
    mean_abs_denergy: float
    mean_dmomentum: float
    mean_errR: float
    mean_errR2: float
    energy_amplitude: float
    energy_trend_slope: float
    newton_max_iterations: int | None = None
    newton_median_iterations: float | None = None
    newton_max_residual: float | None = None


class SimulationCreated(BaseModel):
    id: str
    summary: SummaryModel


class OsculatingElements(BaseModel):
    a: float
    e: float
    inc: float
    raan: float
    argp: float
    nu: float
