"""Request and response models for the HTTP service.

The wire format mirrors the validated library records field for field, in
linear SI units, including the parent intensity lambda_p. That keeps a
request an exact transport of a resolved configuration: a client that
evaluates locally and one that posts to a server see bit-identical
numbers. Human-facing unit conversion (dB, dBm, target density) lives in
the config loader, not here.

Response field order matches the library's report dicts, so serialized
output is stable across the in-process and HTTP paths.
"""
from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..analytic import QuadratureSpec, default_quadrature
from ..params import ChannelParams, SystemParams
from ..simulator import SimConfig

__all__ = [
    "AnalyticRequest",
    "AnalyticResponse",
    "ChannelModel",
    "CompareRequest",
    "CompareResponse",
    "EstimateBlock",
    "HealthResponse",
    "QuadModel",
    "SimModel",
    "SimulateRequest",
    "SimulateResponse",
    "SweepRequest",
    "SweepResponse",
    "SweepRowModel",
    "SystemModel",
]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---- configuration payloads ---------------------------------------------


class ChannelModel(_Strict):
    a: float
    b: float
    alpha_L: float
    alpha_N: float
    eta_L: float
    eta_N: float
    xi: float
    H: float

    def to_params(self) -> ChannelParams:
        return ChannelParams(**self.model_dump())


class SystemModel(_Strict):
    M: int
    N: int
    P: float
    phi: float
    H: float
    d: float
    lambda_p: float
    lambda_e: float
    sigma: float
    channel: ChannelModel
    sigma_x2: float
    sigma_e2: float
    R_t: float
    R_e: float

    def to_params(self) -> SystemParams:
        fields = self.model_dump()
        fields["channel"] = self.channel.to_params()
        return SystemParams(**fields)

    @classmethod
    def from_params(cls, params: SystemParams) -> "SystemModel":
        channel = ChannelModel(
            **{name: getattr(params.channel, name) for name in ChannelModel.model_fields}
        )
        fields = {
            name: getattr(params, name)
            for name in cls.model_fields
            if name != "channel"
        }
        return cls(channel=channel, **fields)


class SimModel(_Strict):
    trials: int = 10000
    window_radius: float | None = Field(
        default=None, description="null selects the derived default window"
    )
    master_seed: int = 0
    confidence_level: float = 0.99

    def to_config(self) -> SimConfig:
        window = math.nan if self.window_radius is None else self.window_radius
        return SimConfig(
            trials=self.trials,
            window_radius=window,
            master_seed=self.master_seed,
            confidence_level=self.confidence_level,
        )


class QuadModel(_Strict):
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    r_max: float | None = Field(
        default=None, description="null selects the derived radial cut"
    )
    l_max_factor: float = 8.0
    max_subdivisions: int = 4

    def to_spec(self, params: SystemParams) -> QuadratureSpec:
        overrides = self.model_dump(exclude={"r_max"})
        if self.r_max is None:
            return default_quadrature(params, **overrides)
        return QuadratureSpec(r_max=self.r_max, **overrides)


# ---- endpoint payloads ----------------------------------------------------


class AnalyticRequest(_Strict):
    system: SystemModel
    quad: QuadModel | None = None


class AnalyticResponse(_Strict):
    cp: float
    sp: float
    st: float


class EstimateBlock(_Strict):
    value: float
    ci_low: float
    ci_high: float


class SimulateRequest(_Strict):
    system: SystemModel
    sim: SimModel = SimModel()
    workers: int | None = Field(default=None, ge=1)


class SimulateResponse(_Strict):
    trials: int
    seed: int
    confidence_level: float
    cp: EstimateBlock
    sp: EstimateBlock
    st_product: float
    st_joint: float


class CompareRequest(_Strict):
    system: SystemModel
    sim: SimModel = SimModel()
    quad: QuadModel | None = None
    tolerance: float = 0.05
    workers: int | None = Field(default=None, ge=1)


class AnalyticBlock(_Strict):
    cp: float
    sp: float
    st: float


class SimulatedBlock(_Strict):
    cp: EstimateBlock
    sp: EstimateBlock
    st_product: float
    st_joint: float


class GapsBlock(_Strict):
    cp: float
    sp: float


class CompareResponse(_Strict):
    trials: int
    seed: int
    confidence_level: float
    tolerance: float
    analytic: AnalyticBlock
    simulated: SimulatedBlock
    gaps: GapsBlock
    within_tolerance: bool


class SweepRequest(_Strict):
    """Either a named preset or an explicit sweep specification."""

    preset: Literal["fig2", "fig3", "fig4", "fig5"] | None = None
    swept_parameter: str | None = None
    grid: list[float] | None = None
    base: SystemModel | None = None
    label: str | None = None
    backends: Literal["analytic", "simulate", "both"] = "both"
    sim: SimModel = SimModel()
    quad: QuadModel | None = None
    workers: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _one_shape(self) -> "SweepRequest":
        explicit = [self.swept_parameter, self.grid, self.base]
        if self.preset is not None:
            if any(part is not None for part in explicit) or self.label is not None:
                raise ValueError("a preset sweep takes no explicit spec fields")
        elif any(part is None for part in explicit):
            raise ValueError(
                "an explicit sweep needs swept_parameter, grid and base "
                "(or use preset)"
            )
        return self


class SweepRowModel(_Strict):
    swept_name: str
    swept_value: float
    cp_analytic: float | None
    sp_analytic: float | None
    st_analytic: float | None
    cp_sim: float | None
    cp_ci_lo: float | None
    cp_ci_hi: float | None
    sp_sim: float | None
    sp_ci_lo: float | None
    sp_ci_hi: float | None
    st_sim_product: float | None
    st_sim_joint: float | None
    trials: int | None
    seed: int | None
    wall_ms: float
    error: str | None


class SweepResponse(_Strict):
    rows: list[SweepRowModel]
    summary: str
    errors: list[str]
    csv: str


class HealthResponse(_Strict):
    status: str
    service: str
    version: str
