"""HTTP service exposing the solver workflows.

Endpoints mirror the CLI subcommands; requests carry a RunConfig (or a
preset name) and responses return the result record plus all artifacts as
named text blobs, leaving file layout to the client.  Runs execute
synchronously, so clients should allow generous timeouts for the
minutes-scale 3D problems.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import RunConfig
from ..presets import PRESETS, get_preset, preset_names
from ..workflows import run_fcrit, run_propagate, run_scan, run_solve, run_validate
from .schemas import HealthResponse, PresetInfo, RunRequest, RunResponse, ValidateRequest

__all__ = ["create_app"]

_WORKFLOWS = {
    "solve": run_solve,
    "scan": run_scan,
    "propagate": run_propagate,
    "fcrit": run_fcrit,
}


def _resolve(request: RunRequest, kind: str) -> RunConfig:
    if request.config is not None:
        return request.config
    preset_kind, cfg = get_preset(request.preset)
    if preset_kind != kind:
        raise HTTPException(
            status_code=422,
            detail=f"preset {request.preset!r} is a {preset_kind} preset, not {kind}",
        )
    return cfg


def create_app() -> FastAPI:
    app = FastAPI(
        title="starkecs",
        version=__version__,
        description="Stark resonance parameters by exterior complex scaling on a finite-element basis",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=list[str])
    def presets() -> list[str]:
        return preset_names()

    @app.get("/presets/{name}", response_model=PresetInfo)
    def preset(name: str) -> PresetInfo:
        if name not in PRESETS:
            raise HTTPException(status_code=404, detail=f"unknown preset {name!r}")
        kind, cfg = get_preset(name)
        return PresetInfo(name=name, kind=kind, config=cfg)

    def _run_endpoint(kind: str):
        workflow = _WORKFLOWS[kind]

        def endpoint(request: RunRequest) -> RunResponse:
            cfg = _resolve(request, kind)
            try:
                record, artifacts = workflow(cfg)
            except (ValueError, KeyError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            return RunResponse(record=record, artifacts=artifacts)

        endpoint.__name__ = kind
        return endpoint

    for kind in _WORKFLOWS:
        app.post(f"/{kind}", response_model=RunResponse)(_run_endpoint(kind))

    @app.post("/validate", response_model=RunResponse)
    def validate(request: ValidateRequest) -> RunResponse:
        record, artifacts = run_validate(seed=request.seed)
        return RunResponse(record=record, artifacts=artifacts)

    return app


app = create_app()
