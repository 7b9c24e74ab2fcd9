"""Command-line client for the simulation service.

``ftbp serve`` starts the HTTP service; the other subcommands are thin
clients that talk to it.  Without ``--server`` they mount the service
in-process (same request/response path, no socket), so the CLI also works
standalone.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx

from .bodies import BodyModelError
from .simulation import ConfigError, RunConfig, load_config


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        # the sync ASGI bridge is exactly what embedded mode wants
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _fail(resp: httpx.Response) -> None:
    try:
        detail = resp.json().get("detail", resp.text)
    except Exception:
        detail = resp.text
    sys.exit(f"error ({resp.status_code}): {detail}")


def _request_payload(cfg: RunConfig) -> dict:
    return {
        "body1": {
            "vertex_text": cfg.body1_vertex_text,
            "face_text": cfg.body1_face_text,
            "density": cfg.body1_density,
        },
        "body2": {
            "vertex_text": cfg.body2_vertex_text,
            "face_text": cfg.body2_face_text,
            "density": cfg.body2_density,
        },
        "scenario": {
            "attitude1_deg": list(cfg.attitude1_deg),
            "attitude2_deg": list(cfg.attitude2_deg),
            "spin1": list(cfg.spin1),
            "spin2": list(cfg.spin2),
            "elements_deg": list(cfg.elements_deg) if cfg.elements_deg else None,
            "state_vector": list(cfg.state_vector) if cfg.state_vector else None,
        },
        "integrator": cfg.integrator,
        "h": cfg.h,
        "tol": cfg.tol,
        "t0": cfg.t0,
        "tf": cfg.tf,
        "order": cfg.order,
        "g_const": cfg.g_const,
        "scale_length": cfg.scales.length,
        "scale_mass": cfg.scales.mass,
        "scale_time": cfg.scales.time,
        "deterministic": cfg.deterministic,
        "workers": cfg.workers,
        "output_every": cfg.output_every,
        "diag_every": cfg.diag_every,
        "rkf_diag_eval": cfg.rkf_diag_eval,
    }


def _print_summary(summary: dict, out=None) -> None:
    rows = [
        ("integrator", summary["integrator"]),
        ("series order", summary["order"]),
        ("steps", summary["steps"]),
        ("rejected steps", summary["rejected_steps"]),
        ("gradient evaluations", summary["n_evals"]),
        ("wall time (s)", f"{summary['wall_time_s']:.3f}"),
        ("time span (s)", f"{summary['t_start']:g} .. {summary['t_final']:g}"),
        ("step size (s)", f"{summary['h_final']:.6g}"),
        ("mean |dE|", f"{summary['mean_abs_denergy']:.6e}"),
        ("mean |dpi_T|", f"{summary['mean_dmomentum']:.6e}"),
        ("mean |I - R^T R|", f"{summary['mean_errR']:.6e}"),
        ("mean |I - R2^T R2|", f"{summary['mean_errR2']:.6e}"),
    ]
    if summary.get("newton_max_iterations") is not None:
        rows.append(
            (
                "newton iterations (max/median)",
                f"{summary['newton_max_iterations']}"
                f"/{summary['newton_median_iterations']:g}",
            )
        )
    width = max(len(k) for k, _ in rows)
    stream = out if out is not None else sys.stdout
    for key, value in rows:
        print(f"  {key:<{width}}  {value}", file=stream)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.integrator:
        cfg.integrator = args.integrator
        if args.integrator == "lgvi":
            cfg.tol = None
        else:
            cfg.h = None
    if args.h is not None:
        cfg.h = args.h
        cfg.tol = None
    if args.tol is not None:
        cfg.tol = args.tol
        cfg.h = None
    if args.order is not None:
        cfg.order = args.order
    if args.deterministic is not None:
        cfg.deterministic = args.deterministic == "on"
    if args.out_states:
        cfg.out_states = args.out_states
    if args.out_diag:
        cfg.out_diag = args.out_diag
    cfg.validate()

    with _client(args.server) as client:
        resp = client.post("/simulations", json=_request_payload(cfg))
        if resp.status_code != 200:
            _fail(resp)
        created = resp.json()
        run_id = created["id"]
        if cfg.out_states:
            csv = client.get(f"/simulations/{run_id}/states.csv")
            Path(cfg.out_states).write_text(csv.text)
        if cfg.out_diag:
            csv = client.get(f"/simulations/{run_id}/diagnostics.csv")
            Path(cfg.out_diag).write_text(csv.text)

    print(f"run {run_id} complete")
    _print_summary(created["summary"])
    if cfg.out_states:
        print(f"states written to {cfg.out_states}")
    if cfg.out_diag:
        print(f"diagnostics written to {cfg.out_diag}")
    if cfg.out_summary:
        import json

        Path(cfg.out_summary).write_text(
            json.dumps(created["summary"], indent=2) + "\n"
        )
        print(f"summary written to {cfg.out_summary}")
    return 0


def cmd_body_info(args) -> int:
    payload = {
        "vertex_text": Path(args.vertices).read_text(),
        "face_text": Path(args.faces).read_text(),
        "density": args.density,
    }
    with _client(args.server) as client:
        resp = client.post("/bodies/properties", json=payload)
        if resp.status_code != 200:
            _fail(resp)
        props = resp.json()
    print(f"  vertices        {props['n_vertices']}")
    print(f"  faces           {props['n_faces']}")
    print(f"  mass (kg)       {props['mass']:.6g}")
    print(f"  volume (m^3)    {props['volume']:.6g}")
    print(f"  area (m^2)      {props['surface_area']:.6g}")
    print(f"  equiv radius(m) {props['equiv_radius']:.6g}")
    print(f"  max radius (m)  {props['max_radius']:.6g}")
    jd = props["inertia_diag"]
    print(f"  principal J     {jd[0]:.6g}, {jd[1]:.6g}, {jd[2]:.6g} kg m^2")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftbp",
        description="Full two rigid body problem simulator (client/server)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("--config", required=True, help="key=value config file")
    p_run.add_argument("--integrator", choices=["lgvi", "rkf78"])
    p_run.add_argument("--h", type=float, help="fixed step size (lgvi), seconds")
    p_run.add_argument("--tol", type=float, help="truncation tolerance (rkf78)")
    p_run.add_argument("--order", type=int, help="series truncation order")
    p_run.add_argument("--out-states", help="states CSV path")
    p_run.add_argument("--out-diag", help="diagnostics CSV path")
    p_run.add_argument("--deterministic", choices=["on", "off"])
    p_run.add_argument("--server", help="service URL (default: in-process)")
    p_run.set_defaults(func=cmd_run)

    p_info = sub.add_parser("body-info", help="mass properties of a body model")
    p_info.add_argument("--vertices", required=True)
    p_info.add_argument("--faces", required=True)
    p_info.add_argument("--density", type=float, default=2500.0)
    p_info.add_argument("--server", help="service URL (default: in-process)")
    p_info.set_defaults(func=cmd_body_info)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, BodyModelError, OSError) as exc:
        sys.exit(f"error: {exc}")


if __name__ == "__main__":
    sys.exit(main())
