"""Parameter sweeps over both backends with CSV emission.

A sweep walks one parameter over a grid while everything else stays at
the base configuration. Two couplings need care and live in
apply_parameter: changing the altitude H retunes the channel record, and
changing d or lambda_u re-derives the parent intensity so the configured
deployed-node density is what the swept network actually realizes.

Rows are written in grid order with a fixed column schema and 17
significant digits, so a written CSV re-parses to exactly the in-memory
floats and two runs with the same seed differ at most in the wall_ms
column. A backend failure is recorded on its row and the sweep continues.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .analytic import (
    QuadratureSpec,
    combine_throughput,
    coverage_probability,
    secrecy_probability,
)
from .config import DEFAULT_CONFIG, parse_config
from .params import ConfigError, SystemParams
from .point_process import parent_intensity_from_target
from .simulator import SimConfig, estimate_all

__all__ = [
    "CSV_COLUMNS",
    "SWEEPABLE",
    "SweepRow",
    "SweepResult",
    "SweepSpec",
    "apply_parameter",
    "parse_csv",
    "preset_specs",
    "run_sweep",
    "write_csv",
]

SWEEPABLE = ("phi", "H", "N", "M", "d", "lambda_e", "lambda_u", "R_t")
BACKENDS = ("analytic", "simulate", "both")

CSV_COLUMNS = (
    "swept_name",
    "swept_value",
    "cp_analytic",
    "sp_analytic",
    "st_analytic",
    "cp_sim",
    "cp_ci_lo",
    "cp_ci_hi",
    "sp_sim",
    "sp_ci_lo",
    "sp_ci_hi",
    "st_sim_product",
    "st_sim_joint",
    "trials",
    "seed",
    "wall_ms",
)


def apply_parameter(base: SystemParams, name: str, value) -> SystemParams:
    """Base configuration with one swept parameter changed."""
    if name not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {name!r}; choose one of {', '.join(SWEEPABLE)}")
    if name in ("N", "M"):
        count = int(value)
        if count != value:
            raise ConfigError(f"{name} grid values must be integers, got {value}")
        return base.with_updates(**{name: count})
    value = float(value)
    if name == "d":
        # hold the deployed density fixed while the exclusion radius moves
        hard_core = parent_intensity_from_target(base.lambda_u, value)
        return base.with_updates(d=value, lambda_p=hard_core.lambda_p)
    if name == "lambda_u":
        hard_core = parent_intensity_from_target(value, base.d)
        return base.with_updates(lambda_p=hard_core.lambda_p)
    return base.with_updates(**{name: value})


@dataclass(frozen=True, slots=True)
class SweepSpec:
    """One swept parameter over a grid, with base configuration and backends.

    label names the rows in the CSV; presets use it to keep branches apart
    (e.g. "phi[H=140]"). It defaults to the parameter name.
    """

    swept_parameter: str
    grid: tuple
    base: SystemParams
    cfg: SimConfig
    backends: str = "both"
    label: str | None = None
    quad: QuadratureSpec | None = None

    def __post_init__(self) -> None:
        if self.backends not in BACKENDS:
            raise ConfigError(
                f"backends must be one of {', '.join(BACKENDS)}, got {self.backends!r}"
            )
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise ConfigError("sweep grid must not be empty")
        for value in self.grid:
            apply_parameter(self.base, self.swept_parameter, value)

    @property
    def name(self) -> str:
        return self.swept_parameter if self.label is None else self.label


@dataclass(frozen=True, slots=True)
class SweepRow:
    """One grid point; unselected or failed backend metrics stay None."""

    swept_name: str
    swept_value: float
    cp_analytic: float | None = None
    sp_analytic: float | None = None
    st_analytic: float | None = None
    cp_sim: float | None = None
    cp_ci_lo: float | None = None
    cp_ci_hi: float | None = None
    sp_sim: float | None = None
    sp_ci_lo: float | None = None
    sp_ci_hi: float | None = None
    st_sim_product: float | None = None
    st_sim_joint: float | None = None
    trials: int | None = None
    seed: int | None = None
    wall_ms: float = 0.0
    error: str | None = None  # not a CSV column; carried for reporting


@dataclass(frozen=True, slots=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    summary: str
    errors: tuple[str, ...] = field(default=())


def _evaluate_row(spec: SweepSpec, value, workers: int | None) -> SweepRow:
    start = time.perf_counter()
    params = apply_parameter(spec.base, spec.swept_parameter, value)
    cells: dict = {}
    problems: list[str] = []

    if spec.backends in ("analytic", "both"):
        try:
            cp = coverage_probability(params, spec.quad)
            sp = secrecy_probability(params, spec.quad)
            cells.update(
                cp_analytic=cp,
                sp_analytic=sp,
                st_analytic=combine_throughput(params, cp, sp),
            )
        except Exception as exc:
            problems.append(f"analytic: {exc}")

    if spec.backends in ("simulate", "both"):
        try:
            cp_est, sp_est, st_product, st_joint = estimate_all(params, spec.cfg, workers)
            cells.update(
                cp_sim=cp_est.value,
                cp_ci_lo=cp_est.ci_low,
                cp_ci_hi=cp_est.ci_high,
                sp_sim=sp_est.value,
                sp_ci_lo=sp_est.ci_low,
                sp_ci_hi=sp_est.ci_high,
                st_sim_product=st_product,
                st_sim_joint=st_joint,
                trials=int(spec.cfg.trials),
                seed=int(spec.cfg.master_seed),
            )
        except Exception as exc:
            problems.append(f"simulate: {exc}")

    return SweepRow(
        swept_name=spec.name,
        swept_value=float(value),
        wall_ms=(time.perf_counter() - start) * 1e3,
        error="; ".join(problems) if problems else None,
        **cells,
    )


def _summarize(rows: Sequence[SweepRow], n_errors: int) -> str:
    gaps = {"cp": None, "sp": None, "st": None}
    pairs = (
        ("cp", "cp_analytic", "cp_sim"),
        ("sp", "sp_analytic", "sp_sim"),
        ("st", "st_analytic", "st_sim_product"),
    )
    for row in rows:
        for metric, a_name, s_name in pairs:
            a, s = getattr(row, a_name), getattr(row, s_name)
            if a is not None and s is not None:
                gap = abs(a - s)
                if gaps[metric] is None or gap > gaps[metric]:
                    gaps[metric] = gap
    if all(v is None for v in gaps.values()):
        body = "no cross-backend rows"
    else:
        body = "max |analytic - simulated|: " + ", ".join(
            f"{metric}={value:.6g}" if value is not None else f"{metric}=n/a"
            for metric, value in gaps.items()
        )
    tail = f"; {n_errors} row error(s)" if n_errors else ""
    return f"{len(rows)} rows; {body}{tail}"


def run_sweep(
    specs: SweepSpec | Iterable[SweepSpec],
    out_path: str | Path | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Evaluate spec grids in order; optionally write the CSV."""
    if isinstance(specs, SweepSpec):
        specs = (specs,)
    specs = tuple(specs)
    if not specs:
        raise ConfigError("need at least one sweep spec")

    rows: list[SweepRow] = []
    errors: list[str] = []
    for spec in specs:
        for value in spec.grid:
            row = _evaluate_row(spec, value, workers)
            rows.append(row)
            if row.error is not None:
                errors.append(f"{row.swept_name}={row.swept_value:g}: {row.error}")

    result = SweepResult(
        rows=tuple(rows), summary=_summarize(rows, len(errors)), errors=tuple(errors)
    )
    if out_path is not None:
        write_csv(result.rows, out_path)
    return result


# ---- CSV round trip -----------------------------------------------------


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def csv_text(rows: Iterable[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(_format_cell(getattr(row, name)) for name in CSV_COLUMNS)
    return buffer.getvalue()


def write_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    Path(path).write_text(csv_text(rows), encoding="utf-8", newline="")


_INT_COLUMNS = {"trials", "seed"}


def parse_csv(path: str | Path) -> tuple[SweepRow, ...]:
    """Read a sweep CSV back into rows (error field is not serialized)."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"{path}: not a sweep CSV (bad header)")
        rows = []
        for record in reader:
            if len(record) != len(CSV_COLUMNS):
                raise ConfigError(f"{path}: malformed row {record!r}")
            cells = {}
            for name, cell in zip(CSV_COLUMNS, record):
                if name == "swept_name":
                    cells[name] = cell
                elif cell == "":
                    cells[name] = None
                elif name in _INT_COLUMNS:
                    cells[name] = int(cell)
                else:
                    cells[name] = float(cell)
            rows.append(SweepRow(**cells))
    return tuple(rows)


# ---- published-figure presets -------------------------------------------


def _published_base() -> SystemParams:
    return parse_config(DEFAULT_CONFIG, source="<defaults>", env={}).params


def preset_specs(
    name: str,
    cfg: SimConfig,
    backends: str = "both",
    quad: QuadratureSpec | None = None,
) -> tuple[SweepSpec, ...]:
    """Grids matching the published evaluation figures.

    fig2/fig3 sweep the power split at two altitudes over the dense base
    (d=50, lambda_u=8e-6, sigma=20, M=8, N=4); fig4/fig5 sweep the number
    of served users at H=100, lambda_u=4e-6, sigma=10, phi=0.5, across
    exclusion radii (fig4) or antenna counts (fig5).
    """
    base = _published_base()

    def make(**kw) -> SweepSpec:
        return SweepSpec(cfg=cfg, backends=backends, quad=quad, **kw)

    if name in ("fig2", "fig3"):
        step = 10 if name == "fig2" else 20
        grid = tuple(i / step for i in range(1, step))
        return tuple(
            make(
                swept_parameter="phi",
                grid=grid,
                base=base.with_updates(H=h),
                label=f"phi[H={h:g}]",
            )
            for h in (100.0, 140.0)
        )

    sparse = apply_parameter(base, "lambda_u", 4e-6).with_updates(sigma=10.0)
    if name == "fig4":
        return tuple(
            make(
                swept_parameter="N",
                grid=tuple(range(1, 8)),
                base=apply_parameter(sparse, "d", d),
                label=f"N[d={d:g},M=8]",
            )
            for d in (30.0, 50.0)
        )
    if name == "fig5":
        return tuple(
            make(
                swept_parameter="N",
                grid=tuple(range(1, 8)),
                base=sparse.with_updates(M=m),
                label=f"N[d=50,M={m}]",
            )
            for m in (8, 10, 12)
        )
    raise ConfigError(f"unknown preset {name!r}; choose fig2, fig3, fig4 or fig5")
