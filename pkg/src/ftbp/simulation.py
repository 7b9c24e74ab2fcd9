"""End-to-end simulation runs: configuration, propagation, CSV output.

A run parses and preprocesses both body models, precomputes the coefficient
tensors, builds the initial relative and inertial states from a scenario
description (orbital elements or a state vector, 3-1-3 attitudes, body-frame
spins), propagates with the selected integrator, and streams per-step state
and diagnostics rows to CSV.  All numbers are written with 17 significant
digits so a run can be resumed bit-exactly from its own output.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from statistics import median

import numpy as np

from .bodies import ScaleFactors, build_body, nondimensionalize, parse_body_model
from .dynamics import (
    InertialState,
    RelativeState,
    SystemModel,
    conserved_quantities,
    elements_to_relative_state,
    euler313_to_rotation,
    init_inertial,
)
from .lgvi import lgvi_step, reconstruct_inertial_step
from .mutual_potential import G_SI, MutualGravity
from .qtensors import compute_q_tensors
from .rkf78 import StepControl, integrate, make_rhs, pack_state, unpack_state

INTEGRATORS = ("lgvi", "rkf78")

STATES_HEADER = (
    "t,X_x,X_y,X_z,V_x,V_y,V_z,"
    "R_xx,R_xy,R_xz,R_yx,R_yy,R_yz,R_zx,R_zy,R_zz,"
    "Om_x,Om_y,Om_z,Om2_x,Om2_y,Om2_z,"
    "x1_x,x1_y,x1_z,x2_x,x2_y,x2_z,"
    "v1_x,v1_y,v1_z,v2_x,v2_y,v2_z,"
    "R2_xx,R2_xy,R2_xz,R2_yx,R2_yy,R2_yz,R2_zx,R2_zy,R2_zz"
)
DIAG_HEADER = "t,U,KE,E,gammaT_x,gammaT_y,gammaT_z,piT_x,piT_y,piT_z,errR,errR2"


class ConfigError(ValueError):
    """Inconsistent or incomplete run configuration."""


class DegenerateOrbitError(ValueError):
    """Rectilinear or otherwise element-degenerate state."""


@dataclass
class RunConfig:
    """Everything needed to reproduce a run (body texts inline, no paths)."""

    body1_vertex_text: str
    body1_face_text: str
    body2_vertex_text: str
    body2_face_text: str
    body1_density: float = 2500.0
    body2_density: float = 2500.0
    g_const: float = G_SI
    scales: ScaleFactors = field(default_factory=ScaleFactors)
    attitude1_deg: tuple = (0.0, 0.0, 0.0)
    attitude2_deg: tuple = (0.0, 0.0, 0.0)
    spin1: tuple = (0.0, 0.0, 0.0)  # rad/s, body-1 frame
    spin2: tuple = (0.0, 0.0, 0.0)  # rad/s, body-2 frame
    elements_deg: tuple | None = None  # a(m) e i raan argp nu (angles deg)
    state_vector: tuple | None = None  # X(3) m, V(3) m/s in the common frame
    integrator: str = "lgvi"
    h: float | None = None  # fixed step (lgvi only), s
    tol: float | None = None  # truncation tolerance (rkf78 only)
    t0: float = 0.0
    tf: float = 86400.0
    order: int = 4
    deterministic: bool = True
    workers: int = 1
    output_every: int = 1
    diag_every: int = 1
    rkf_diag_eval: bool = True
    contact_margin: float = 1.05  # abort bound as multiple of radii sum (lgvi)
    out_states: str | None = None
    out_diag: str | None = None
    out_summary: str | None = None

    def validate(self) -> None:
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"integrator must be one of {INTEGRATORS}")
        has_elements = self.elements_deg is not None
        has_state = self.state_vector is not None
        if has_elements == has_state:
            raise ConfigError(
                "exactly one of orbital elements or a state vector is required"
            )
        if self.integrator == "lgvi":
            if self.h is None or self.h <= 0.0:
                raise ConfigError("lgvi requires a positive step size h")
            if self.tol is not None:
                raise ConfigError("tol applies to rkf78 only")
        else:
            if self.tol is None or self.tol <= 0.0:
                raise ConfigError("rkf78 requires a positive tolerance")
            if self.h is not None:
                raise ConfigError("fixed step h applies to lgvi only")
        if not self.tf > self.t0:
            raise ConfigError("tf must exceed t0")
        if self.order < 0:
            raise ConfigError("series order must be non-negative")
        if self.output_every < 1 or self.diag_every < 1:
            raise ConfigError("output cadences must be >= 1")
        if has_elements and len(self.elements_deg) != 6:
            raise ConfigError("elements need 6 entries: a e i raan argp nu")
        if has_state and len(self.state_vector) != 6:
            raise ConfigError("state vector needs 6 entries: X(3) V(3)")


@dataclass
class RunSummary:
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
    energy_amplitude: float  # max |E(t) - E(0)|
    energy_trend_slope: float  # least-squares slope of E(t) - E(0)
    newton_max_iterations: int | None = None
    newton_median_iterations: float | None = None
    newton_max_residual: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass
class RunResult:
    summary: RunSummary
    states: np.ndarray | None = None  # captured rows, states CSV layout
    diagnostics: np.ndarray | None = None  # captured rows, diagnostics layout


# -- configuration file ------------------------------------------------------

_VECTOR_KEYS = {
    "attitude1_deg", "attitude2_deg", "spin1", "spin2", "elements", "state_vector",
}
_BOOL_ON = {"on", "true", "1", "yes"}
_BOOL_OFF = {"off", "false", "0", "no"}


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _BOOL_ON:
        return True
    if lowered in _BOOL_OFF:
        return False
    raise ConfigError(f"{key}: expected on/off, got {value!r}")


def parse_config_text(text: str, base_dir: Path | None = None) -> RunConfig:
    """Parse ``key = value`` configuration text.

    File-path values (body files) are read relative to ``base_dir``.
    Vector-valued keys take whitespace-separated numbers.
    """
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, _, value = body.partition("=")
        entries[key.strip()] = value.strip()

    def take(key, default=None):
        return entries.pop(key, default)

    def take_float(key, default=None):
        raw = take(key)
        return default if raw is None else float(raw)

    def take_vec(key):
        raw = take(key)
        return None if raw is None else tuple(float(v) for v in raw.split())

    def read_file(key):
        raw = take(key)
        if raw is None:
            raise ConfigError(f"missing required config key {key!r}")
        return (base / raw).read_text()

    cfg = RunConfig(
        body1_vertex_text=read_file("body1_vertices"),
        body1_face_text=read_file("body1_faces"),
        body2_vertex_text=read_file("body2_vertices"),
        body2_face_text=read_file("body2_faces"),
        body1_density=take_float("body1_density", 2500.0),
        body2_density=take_float("body2_density", 2500.0),
        g_const=take_float("G", G_SI),
        scales=ScaleFactors(
            length=take_float("scale_length", 1.0),
            mass=take_float("scale_mass", 1.0),
            time=take_float("scale_time", 1.0),
        ),
        attitude1_deg=take_vec("attitude1_deg") or (0.0, 0.0, 0.0),
        attitude2_deg=take_vec("attitude2_deg") or (0.0, 0.0, 0.0),
        spin1=take_vec("spin1") or (0.0, 0.0, 0.0),
        spin2=take_vec("spin2") or (0.0, 0.0, 0.0),
        elements_deg=take_vec("elements"),
        state_vector=take_vec("state_vector"),
        integrator=take("integrator", "lgvi"),
        h=take_float("h"),
        tol=take_float("tol"),
        t0=take_float("t0", 0.0),
        tf=take_float("tf", 86400.0),
        order=int(take_float("order", 4)),
        deterministic=_parse_bool(take("deterministic", "on"), "deterministic"),
        workers=int(take_float("workers", 1)),
        output_every=int(take_float("output_every", 1)),
        diag_every=int(take_float("diag_every", 1)),
        rkf_diag_eval=_parse_bool(take("rkf_diag_eval", "on"), "rkf_diag_eval"),
        contact_margin=take_float("contact_margin", 1.05),
        out_states=take("out_states"),
        out_diag=take("out_diag"),
        out_summary=take("out_summary"),
    )
    if entries:
        raise ConfigError(f"unknown config keys: {sorted(entries)}")
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), base_dir=path.parent)


# -- initial conditions ------------------------------------------------------


@dataclass
class PreparedRun:
    """Scaled system plus initial states, ready to propagate."""

    model: SystemModel
    gravity: MutualGravity
    state: RelativeState
    inertial: InertialState
    t0: float
    tf: float
    h: float | None
    tol: float | None


def prepare_run(config: RunConfig) -> PreparedRun:
    config.validate()
    body1 = build_body(
        parse_body_model(
            config.body1_vertex_text, config.body1_face_text, config.body1_density
        )
    )
    body2 = build_body(
        parse_body_model(
            config.body2_vertex_text, config.body2_face_text, config.body2_density
        )
    )
    body1, g_scaled = nondimensionalize(body1, config.scales, config.g_const)
    body2, _ = nondimensionalize(body2, config.scales, config.g_const)
    model = SystemModel(body1, body2, g_scaled)
    gravity = MutualGravity(
        body1,
        body2,
        compute_q_tensors(max(config.order, 2)),
        order=config.order,
        g_const=g_scaled,
        deterministic=config.deterministic,
        workers=config.workers,
    )

    ls, ts = config.scales.length, config.scales.time
    r1 = euler313_to_rotation(*config.attitude1_deg)
    r2 = euler313_to_rotation(*config.attitude2_deg)
    r_rel = r2.T @ r1

    if config.elements_deg is not None:
        a, e, inc, raan, argp, nu = config.elements_deg
        x_ref, v_ref = elements_to_relative_state(
            a / ls, e, *np.deg2rad([inc, raan, argp, nu]), model.mu
        )
    else:
        sv = np.asarray(config.state_vector, dtype=float)
        x_ref = sv[:3] / ls
        v_ref = sv[3:] * ts / ls

    state = RelativeState(
        X=r2.T @ x_ref,
        V=r2.T @ v_ref,
        R=r_rel,
        Om=r_rel @ (np.asarray(config.spin1) * ts),
        Om2=np.asarray(config.spin2, dtype=float) * ts,
    )
    inertial = init_inertial(state, model, r2)
    return PreparedRun(
        model=model,
        gravity=gravity,
        state=state,
        inertial=inertial,
        t0=config.t0 / ts,
        tf=config.tf / ts,
        h=None if config.h is None else config.h / ts,
        tol=config.tol,
    )


# -- osculating elements -----------------------------------------------------


def osculating_elements(X, V, mu) -> tuple[float, float, float, float, float, float]:
    """Instantaneous Keplerian elements (a, e, i, raan, argp, nu), radians.

    Hyperbolic states return a < 0 and e > 1.  Rectilinear states (vanishing
    angular momentum) raise :class:`DegenerateOrbitError`.  For near-zero
    inclination the node is taken along +x, and for near-circular orbits
    perigee is taken at the eccentricity-vector epoch convention argp = 0.
    """
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    r = float(np.linalg.norm(X))
    if r == 0.0:
        raise DegenerateOrbitError("zero radius")
    h_vec = np.cross(X, V)
    h_norm = float(np.linalg.norm(h_vec))
    v2 = float(V @ V)
    if h_norm <= 1e-12 * max(1.0, r * np.sqrt(v2)):
        raise DegenerateOrbitError("rectilinear trajectory has no orbit plane")
    energy = 0.5 * v2 - mu / r
    if energy == 0.0:
        raise DegenerateOrbitError("parabolic state has no finite semi-major axis")
    a = -mu / (2.0 * energy)
    e_vec = np.cross(V, h_vec) / mu - X / r
    e = float(np.linalg.norm(e_vec))
    inc = float(np.arccos(np.clip(h_vec[2] / h_norm, -1.0, 1.0)))

    node = np.array([-h_vec[1], h_vec[0], 0.0])
    n_norm = float(np.linalg.norm(node))
    if n_norm < 1e-12 * h_norm:
        node = np.array([1.0, 0.0, 0.0])
        raan = 0.0
    else:
        node = node / n_norm
        raan = float(np.arctan2(node[1], node[0])) % (2.0 * np.pi)

    if e < 1e-12:
        peri = node
        argp = 0.0
    else:
        peri = e_vec / e
        y_axis = np.cross(h_vec / h_norm, node)
        argp = float(np.arctan2(peri @ y_axis, peri @ node)) % (2.0 * np.pi)

    y_peri = np.cross(h_vec / h_norm, peri)
    nu = float(np.arctan2(X @ y_peri, X @ peri))
    return a, e, inc, raan, argp, nu


# -- CSV helpers -------------------------------------------------------------


def _fmt(values) -> str:
    return ",".join(f"{v:.17g}" for v in values)


def states_row(t, rel: RelativeState, inertial: InertialState) -> np.ndarray:
    return np.concatenate(
        [
            [t], rel.X, rel.V, rel.R.ravel(), rel.Om, rel.Om2,
            inertial.x1, inertial.x2, inertial.v1, inertial.v2,
            inertial.R2.ravel(),
        ]
    )


def state_from_row(row):
    """Rebuild (t, RelativeState, InertialState) from a states-CSV row."""
    row = np.asarray(row, dtype=float)
    rel = RelativeState(
        X=row[1:4].copy(),
        V=row[4:7].copy(),
        R=row[7:16].reshape(3, 3).copy(),
        Om=row[16:19].copy(),
        Om2=row[19:22].copy(),
    )
    r2 = row[34:43].reshape(3, 3).copy()
    inertial = InertialState(
        x1=row[22:25].copy(),
        x2=row[25:28].copy(),
        v1=row[28:31].copy(),
        v2=row[31:34].copy(),
        R1=r2 @ rel.R,
        R2=r2,
    )
    return float(row[0]), rel, inertial


def read_csv(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


class _DiagnosticsTally:
    """Streaming accumulation of the summary statistics."""

    def __init__(self):
        self.n = 0
        self.e0 = None
        self.pi0 = None
        self.sum_abs_de = 0.0
        self.sum_dpi = 0.0
        self.sum_err_r = 0.0
        self.sum_err_r2 = 0.0
        self.max_abs_de = 0.0
        self.sum_t = 0.0
        self.sum_tt = 0.0
        self.sum_de = 0.0
        self.sum_tde = 0.0

    def add(self, rec):
        if self.e0 is None:
            self.e0 = rec.E
            self.pi0 = rec.pi.copy()
        de = rec.E - self.e0
        self.n += 1
        self.sum_abs_de += abs(de)
        self.sum_dpi += float(np.linalg.norm(rec.pi - self.pi0))
        self.sum_err_r += rec.errR
        self.sum_err_r2 += rec.errR2
        self.max_abs_de = max(self.max_abs_de, abs(de))
        self.sum_t += rec.t
        self.sum_tt += rec.t * rec.t
        self.sum_de += de
        self.sum_tde += rec.t * de

    def slope(self) -> float:
        if self.n < 2:
            return 0.0
        denom = self.n * self.sum_tt - self.sum_t**2
        if denom == 0.0:
            return 0.0
        return (self.n * self.sum_tde - self.sum_t * self.sum_de) / denom

    def means(self):
        n = max(self.n, 1)
        return (
            self.sum_abs_de / n,
            self.sum_dpi / n,
            self.sum_err_r / n,
            self.sum_err_r2 / n,
        )


# -- runners -----------------------------------------------------------------


def run(
    config: RunConfig,
    capture: bool = False,
    initial: tuple[float, RelativeState, InertialState] | None = None,
    rkf_h0: float | None = None,
) -> RunResult:
    """Execute a configured simulation.

    ``capture=True`` additionally returns states and diagnostics as arrays.
    ``initial`` overrides the configured initial conditions with
    (t0, relative, inertial), e.g. to resume from a states-CSV row;
    ``rkf_h0`` seeds the adaptive controller when resuming an rkf78 run.
    """
    prep = prepare_run(config)
    if initial is not None:
        prep.t0, prep.state, prep.inertial = initial

    states_file = open(config.out_states, "w") if config.out_states else None
    diag_file = open(config.out_diag, "w") if config.out_diag else None
    try:
        result = _run_prepared(config, prep, states_file, diag_file, capture, rkf_h0)
    finally:
        for f in (states_file, diag_file):
            if f:
                f.close()
    if config.out_summary:
        Path(config.out_summary).write_text(result.summary.to_json() + "\n")
    return result


def _run_prepared(config, prep, states_file, diag_file, capture, rkf_h0):
    model, gravity = prep.model, prep.gravity
    state, inertial = prep.state, prep.inertial
    t0, tf = prep.t0, prep.tf

    if states_file:
        states_file.write(STATES_HEADER + "\n")
    if diag_file:
        diag_file.write(DIAG_HEADER + "\n")

    tally = _DiagnosticsTally()
    states_rows = [] if capture else None
    diag_rows = [] if capture else None
    want_diag = diag_file is not None or capture
    n_diag_evals = 0

    def emit_states(t, rel, inert):
        row = states_row(t, rel, inert)
        if states_file:
            states_file.write(_fmt(row) + "\n")
        if capture:
            states_rows.append(row)

    def emit_diag(rec):
        tally.add(rec)
        row = np.concatenate(
            [[rec.t, rec.U, rec.KE, rec.E], rec.gamma, rec.pi, [rec.errR, rec.errR2]]
        )
        if diag_file:
            diag_file.write(_fmt(row) + "\n")
        if capture:
            diag_rows.append(row)

    if config.integrator == "lgvi":
        summary = _run_lgvi(
            config, model, gravity, state, inertial, t0, tf, prep.h,
            emit_states, emit_diag, want_diag,
        )
    else:
        summary, n_diag_evals = _run_rkf(
            config, model, gravity, state, inertial, t0, tf,
            emit_states, emit_diag, want_diag, rkf_h0,
        )

    mean_de, mean_dpi, mean_err_r, mean_err_r2 = tally.means()
    summary.mean_abs_denergy = mean_de
    summary.mean_dmomentum = mean_dpi
    summary.mean_errR = mean_err_r
    summary.mean_errR2 = mean_err_r2
    summary.energy_amplitude = tally.max_abs_de
    summary.energy_trend_slope = tally.slope()
    summary.n_diag_evals = n_diag_evals

    return RunResult(
        summary=summary,
        states=np.array(states_rows) if capture else None,
        diagnostics=np.array(diag_rows) if capture else None,
    )


def _summary_base(config, integrator, t0):
    return RunSummary(
        integrator=integrator,
        order=config.order,
        steps=0,
        rejected_steps=0,
        n_evals=0,
        n_diag_evals=0,
        wall_time_s=0.0,
        t_start=t0,
        t_final=t0,
        h_final=0.0,
        mean_abs_denergy=0.0,
        mean_dmomentum=0.0,
        mean_errR=0.0,
        mean_errR2=0.0,
        energy_amplitude=0.0,
        energy_trend_slope=0.0,
    )


def _run_lgvi(
    config, model, gravity, state, inertial, t0, tf, h,
    emit_states, emit_diag, want_diag,
):
    span = tf - t0
    n_steps = int(round(span / h))
    if n_steps < 1 or abs(n_steps * h - span) > 1e-6 * h:
        raise ConfigError(
            "tf - t0 must be a positive integer multiple of h for the "
            "fixed-step integrator"
        )

    newton_iters = []
    newton_resid = 0.0

    wall_start = time.perf_counter()
    grads = gravity.evaluate(state.X, state.R)
    emit_states(t0, state, inertial)
    if want_diag:
        emit_diag(conserved_quantities(t0, state, inertial, model, grads.U))

    for n in range(1, n_steps + 1):
        step = lgvi_step(state, grads, gravity, model, h, config.contact_margin)
        inertial = reconstruct_inertial_step(
            inertial, state, step.next, grads, step.grads_next, step.F2, model, h
        )
        state, grads = step.next, step.grads_next
        newton_iters.append(step.solve1.iterations)
        newton_iters.append(step.solve2.iterations)
        newton_resid = max(newton_resid, step.solve1.residual, step.solve2.residual)
        t = t0 + n * h
        if n % config.output_every == 0 or n == n_steps:
            emit_states(t, state, inertial)
        if want_diag and (n % config.diag_every == 0 or n == n_steps):
            emit_diag(conserved_quantities(t, state, inertial, model, grads.U))
    wall = time.perf_counter() - wall_start

    summary = _summary_base(config, "lgvi", t0)
    summary.steps = n_steps
    summary.n_evals = gravity.eval_count
    summary.wall_time_s = wall
    summary.t_final = t0 + n_steps * h
    summary.h_final = h
    summary.newton_max_iterations = max(newton_iters) if newton_iters else 0
    summary.newton_median_iterations = median(newton_iters) if newton_iters else 0.0
    summary.newton_max_residual = newton_resid
    return summary


def _run_rkf(
    config, model, gravity, state, inertial, t0, tf,
    emit_states, emit_diag, want_diag, rkf_h0,
):
    h0 = rkf_h0 if rkf_h0 is not None else (tf - t0) / 1e5
    ctrl = StepControl(tol=config.tol, h0=h0, h_min=1e-12 * (tf - t0))
    rhs = make_rhs(gravity, model)
    y0 = pack_state(state, inertial, model)
    n_diag_evals = 0
    counter = {"accepted": 0}

    def diag_record(t, rel, inert):
        nonlocal n_diag_evals
        if config.rkf_diag_eval:
            grads = gravity.evaluate(rel.X, rel.R)
            n_diag_evals += 1
            u = grads.U
        else:
            u = np.nan
        return conserved_quantities(t, rel, inert, model, u)

    def on_step(t, y):
        counter["accepted"] += 1
        n = counter["accepted"]
        last = t >= tf - 1e-12 * max(abs(tf), 1.0)
        if n % config.output_every == 0 or last:
            rel, inert = unpack_state(y, model)
            emit_states(t, rel, inert)
            if want_diag and (n % config.diag_every == 0 or last):
                emit_diag(diag_record(t, rel, inert))
        elif want_diag and (n % config.diag_every == 0 or last):
            rel, inert = unpack_state(y, model)
            emit_diag(diag_record(t, rel, inert))

    wall_start = time.perf_counter()
    emit_states(t0, state, inertial)
    if want_diag:
        emit_diag(diag_record(t0, state, inertial))
    y_final, h_final, accepted, rejected = integrate(y0, t0, tf, rhs, ctrl, on_step)
    wall = time.perf_counter() - wall_start

    summary = _summary_base(config, "rkf78", t0)
    summary.steps = accepted
    summary.rejected_steps = rejected
    summary.n_evals = gravity.eval_count
    summary.wall_time_s = wall
    summary.t_final = tf
    summary.h_final = h_final
    return summary, n_diag_evals
