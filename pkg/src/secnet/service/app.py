"""HTTP service exposing both backends.

Thin translation layer: requests become validated library records, the
library does the work, reports come back as typed responses. Parameter
contract violations map to 422, numeric or sampling failures to 500.
"""
from __future__ import annotations

import dataclasses

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..analytic import (
    combine_throughput,
    coverage_probability,
    secrecy_probability,
)
from ..params import ConfigError, NumericError, SamplingError
from ..simulator import compare, estimate_all
from ..sweep import SweepSpec, csv_text, preset_specs, run_sweep
from .schemas import (
    AnalyticRequest,
    AnalyticResponse,
    CompareRequest,
    CompareResponse,
    EstimateBlock,
    HealthResponse,
    SimulateRequest,
    SimulateResponse,
    SweepRequest,
    SweepResponse,
    SweepRowModel,
)

__all__ = ["app", "create_app"]


def create_app() -> FastAPI:
    app = FastAPI(
        title="secnet",
        version=__version__,
        summary="Coverage and secrecy analysis for hard-core aerial networks",
    )

    def _reject(status: int):
        def handler(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=status, content={"detail": str(exc)})

        return handler

    app.add_exception_handler(ConfigError, _reject(422))
    app.add_exception_handler(NumericError, _reject(500))
    app.add_exception_handler(SamplingError, _reject(500))

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", service="secnet", version=__version__)

    @app.post("/v1/analytic", response_model=AnalyticResponse)
    def analytic(request: AnalyticRequest) -> AnalyticResponse:
        params = request.system.to_params()
        quad = request.quad.to_spec(params) if request.quad else None
        cp = coverage_probability(params, quad)
        sp = secrecy_probability(params, quad)
        return AnalyticResponse(cp=cp, sp=sp, st=combine_throughput(params, cp, sp))

    @app.post("/v1/simulate", response_model=SimulateResponse)
    def simulate(request: SimulateRequest) -> SimulateResponse:
        params = request.system.to_params()
        cfg = request.sim.to_config()
        cp, sp, st_product, st_joint = estimate_all(params, cfg, request.workers)
        return SimulateResponse(
            trials=cfg.trials,
            seed=cfg.master_seed,
            confidence_level=cfg.confidence_level,
            cp=EstimateBlock(value=cp.value, ci_low=cp.ci_low, ci_high=cp.ci_high),
            sp=EstimateBlock(value=sp.value, ci_low=sp.ci_low, ci_high=sp.ci_high),
            st_product=st_product,
            st_joint=st_joint,
        )

    @app.post("/v1/compare", response_model=CompareResponse)
    def compare_point(request: CompareRequest) -> CompareResponse:
        params = request.system.to_params()
        quad = request.quad.to_spec(params) if request.quad else None
        report = compare(
            params,
            request.sim.to_config(),
            quad=quad,
            tolerance=request.tolerance,
            workers=request.workers,
        )
        return CompareResponse(**report)

    @app.post("/v1/sweep", response_model=SweepResponse)
    def sweep(request: SweepRequest) -> SweepResponse:
        cfg = request.sim.to_config()
        if request.preset is not None:
            specs = preset_specs(request.preset, cfg, backends=request.backends)
        else:
            base = request.base.to_params()
            quad = request.quad.to_spec(base) if request.quad else None
            specs = (
                SweepSpec(
                    swept_parameter=request.swept_parameter,
                    grid=tuple(request.grid),
                    base=base,
                    cfg=cfg,
                    backends=request.backends,
                    label=request.label,
                    quad=quad,
                ),
            )
        result = run_sweep(specs, workers=request.workers)
        return SweepResponse(
            rows=[SweepRowModel(**dataclasses.asdict(row)) for row in result.rows],
            summary=result.summary,
            errors=list(result.errors),
            csv=csv_text(result.rows),
        )

    return app


app = create_app()
