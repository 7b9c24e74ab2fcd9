"""FastAPI service wrapping the simulator.

Simulations run synchronously in the request; results (summary plus the
states and diagnostics CSV texts) are kept in an in-memory store capped at a
fixed number of runs, oldest evicted first.  The CLI is a thin client of
these endpoints.
"""

from __future__ import annotations

import io
import threading
import uuid
from collections import OrderedDict
from dataclasses import asdict

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse

from .. import __version__
from ..bodies import BodyModelError, build_body, parse_body_model
from ..mutual_potential import MutualGravity, SingularConfigurationError
from ..qtensors import MAX_ORDER, QOrderError, compute_q_tensors
from ..simulation import (
    ConfigError,
    DegenerateOrbitError,
    RunConfig,
    osculating_elements,
    prepare_run,
    _run_prepared,
)
from .schemas import (
    BodyProperties,
    BodySpec,
    GradientRequest,
    GradientResponse,
    OsculatingElements,
    QTensorEntry,
    QTensorRank,
    QTensorResponse,
    SimulationCreated,
    SimulationRequest,
    SummaryModel,
)

MAX_STORED_RUNS = 20


class RunStore:
    """Thread-safe bounded store of completed runs."""

    def __init__(self, max_runs: int = MAX_STORED_RUNS):
        self._runs: OrderedDict[str, dict] = OrderedDict()
        self._lock = threading.Lock()
        self._max = max_runs

    def put(self, entry: dict) -> str:
        run_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._runs[run_id] = entry
            while len(self._runs) > self._max:
                self._runs.popitem(last=False)
        return run_id

    def get(self, run_id: str) -> dict:
        with self._lock:
            if run_id not in self._runs:
                raise KeyError(run_id)
            return self._runs[run_id]

    def delete(self, run_id: str) -> None:
        with self._lock:
            if run_id not in self._runs:
                raise KeyError(run_id)
            del self._runs[run_id]

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._runs)


def _build_body_or_422(spec: BodySpec):
    try:
        return build_body(
            parse_body_model(spec.vertex_text, spec.face_text, spec.density)
        )
    except BodyModelError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _config_from_request(req: SimulationRequest) -> RunConfig:
    from ..bodies import ScaleFactors

    sc = req.scenario
    return RunConfig(
        body1_vertex_text=req.body1.vertex_text,
        body1_face_text=req.body1.face_text,
        body2_vertex_text=req.body2.vertex_text,
        body2_face_text=req.body2.face_text,
        body1_density=req.body1.density,
        body2_density=req.body2.density,
        g_const=req.g_const,
        scales=ScaleFactors(req.scale_length, req.scale_mass, req.scale_time),
        attitude1_deg=tuple(sc.attitude1_deg),
        attitude2_deg=tuple(sc.attitude2_deg),
        spin1=tuple(sc.spin1),
        spin2=tuple(sc.spin2),
        elements_deg=tuple(sc.elements_deg) if sc.elements_deg else None,
        state_vector=tuple(sc.state_vector) if sc.state_vector else None,
        integrator=req.integrator,
        h=req.h,
        tol=req.tol,
        t0=req.t0,
        tf=req.tf,
        order=req.order,
        deterministic=req.deterministic,
        workers=req.workers,
        output_every=req.output_every,
        diag_every=req.diag_every,
        rkf_diag_eval=req.rkf_diag_eval,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="ftbp",
        version=__version__,
        description="Full two rigid body problem simulation service",
    )
    store = RunStore()
    app.state.run_store = store

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/bodies/properties", response_model=BodyProperties)
    def body_properties(spec: BodySpec):
        body = _build_body_or_422(spec)
        return BodyProperties(
            n_vertices=len(body.vertices),
            n_faces=body.n_faces,
            mass=body.mass,
            volume=body.volume,
            surface_area=body.surface_area,
            equiv_radius=body.equiv_radius,
            max_radius=body.max_radius,
            inertia_diag=list(np.diag(body.J)),
            inertia=list(body.J.ravel()),
            nonstandard_inertia=list(body.J_d.ravel()),
        )

    @app.get("/qtensors/{max_order}", response_model=QTensorResponse)
    def qtensors(max_order: int):
        if max_order > 6:
            raise HTTPException(
                status_code=422,
                detail=f"response would be too large; order capped at 6 "
                f"(library cap {MAX_ORDER})",
            )
        try:
            q = compute_q_tensors(max_order)
        except QOrderError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        ranks = []
        for rank, table in enumerate(q.exact):
            entries = [
                QTensorEntry(
                    indices=list(idx),
                    numerator=val.numerator,
                    denominator=val.denominator,
                    value=float(val),
                )
                for idx, val in sorted(table.items())
            ]
            ranks.append(QTensorRank(rank=rank, entries=entries))
        return QTensorResponse(max_order=max_order, ranks=ranks)

    @app.post("/gradients", response_model=GradientResponse)
    def gradients(req: GradientRequest):
        body1 = _build_body_or_422(req.body1)
        body2 = _build_body_or_422(req.body2)
        try:
            gravity = MutualGravity(
                body1, body2, compute_q_tensors(max(req.order, 2)),
                order=req.order, g_const=req.g_const,
            )
            grads = gravity.evaluate(
                np.array(req.x), np.array(req.r).reshape(3, 3)
            )
        except (SingularConfigurationError, QOrderError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return GradientResponse(
            potential=grads.U,
            du_dx=list(grads.dUdX),
            du_dr=list(grads.dUdR.ravel()),
            moment=list(grads.M),
            separation=float(np.linalg.norm(req.x)),
        )

    @app.post("/elements", response_model=OsculatingElements)
    def elements(x: list[float], v: list[float], mu: float):
        try:
            a, e, inc, raan, argp, nu = osculating_elements(x, v, mu)
        except DegenerateOrbitError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return OsculatingElements(a=a, e=e, inc=inc, raan=raan, argp=argp, nu=nu)

    @app.post("/simulations", response_model=SimulationCreated)
    def create_simulation(req: SimulationRequest):
        config = _config_from_request(req)
        try:
            config.validate()
            prep = prepare_run(config)
        except (ConfigError, BodyModelError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        states_io = io.StringIO()
        diag_io = io.StringIO()
        result = _run_prepared(config, prep, states_io, diag_io, False, None)
        run_id = store.put(
            {
                "summary": asdict(result.summary),
                "states_csv": states_io.getvalue(),
                "diagnostics_csv": diag_io.getvalue(),
            }
        )
        return SimulationCreated(
            id=run_id, summary=SummaryModel(**asdict(result.summary))
        )

    def _get_or_404(run_id: str) -> dict:
        try:
            return store.get(run_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no run {run_id!r}")

    @app.get("/simulations")
    def list_simulations():
        return {"runs": store.ids()}

    @app.get("/simulations/{run_id}", response_model=SummaryModel)
    def simulation_summary(run_id: str):
        return SummaryModel(**_get_or_404(run_id)["summary"])

    @app.get("/simulations/{run_id}/states.csv", response_class=PlainTextResponse)
    def simulation_states(run_id: str):
        return _get_or_404(run_id)["states_csv"]

    @app.get(
        "/simulations/{run_id}/diagnostics.csv", response_class=PlainTextResponse
    )
    def simulation_diagnostics(run_id: str):
        return _get_or_404(run_id)["diagnostics_csv"]

    @app.delete("/simulations/{run_id}")
    def delete_simulation(run_id: str):
        try:
            store.delete(run_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no run {run_id!r}")
        return {"deleted": run_id}

    return app


app = create_app()
