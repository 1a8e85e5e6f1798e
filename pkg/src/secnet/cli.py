"""Command-line interface.

Every compute subcommand runs the library in-process by default and
becomes a thin HTTP client when --server is given; both paths evaluate
the same resolved configuration, so their outputs are byte-identical.
Reports go to stdout as JSON (sweeps as CSV), diagnostics to stderr.

Exit codes: 0 success, 1 cross-backend tolerance failure, 2 invalid
configuration or usage, 3 numeric or sampling failure.
"""
from __future__ import annotations

import dataclasses
import functools
import json
import math
import sys

import click
import httpx

from .analytic import combine_throughput, coverage_probability, secrecy_probability
from .config import LoadedConfig, load_config
from .params import ConfigError, NumericError, SamplingError
from .simulator import SimConfig, compare, estimate_all
from .sweep import SweepSpec, csv_text, preset_specs, run_sweep
from .service.schemas import SystemModel

__all__ = ["main"]

_PRESETS = ("fig2", "fig3", "fig4", "fig5")


def _fail(code: int, message: str) -> "SystemExit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(code)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            raise _fail(2, str(exc)) from None
        except (NumericError, SamplingError) as exc:
            raise _fail(3, str(exc)) from None
        except httpx.RequestError as exc:
            raise _fail(3, f"server unreachable: {exc}") from None

    return wrapper


# ---- shared plumbing ------------------------------------------------------


def _load(config_path, trials, seed) -> LoadedConfig:
    loaded = load_config(config_path)
    sim = loaded.sim
    if trials is not None:
        sim = dataclasses.replace(sim, trials=trials)
    if seed is not None:
        sim = dataclasses.replace(sim, master_seed=seed)
    return LoadedConfig(params=loaded.params, sim=sim, quad=loaded.quad)


def _post(server: str, path: str, payload: dict) -> dict:
    response = httpx.post(server.rstrip("/") + path, json=payload, timeout=None)
    if response.status_code == 422:
        detail = response.json().get("detail")
        raise ConfigError(detail if isinstance(detail, str) else json.dumps(detail))
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise NumericError(f"server returned {response.status_code}: {detail}")
    return response.json()


def _system_payload(loaded: LoadedConfig) -> dict:
    return SystemModel.from_params(loaded.params).model_dump()


def _sim_payload(sim: SimConfig) -> dict:
    window = None if math.isnan(sim.window_radius) else sim.window_radius
    return {
        "trials": sim.trials,
        "window_radius": window,
        "master_seed": sim.master_seed,
        "confidence_level": sim.confidence_level,
    }


def _quad_payload(loaded: LoadedConfig) -> dict:
    return dataclasses.asdict(loaded.quad)


def _emit(report: dict) -> None:
    click.echo(json.dumps(report, indent=2))


config_option = click.option(
    "--config", "config_path", type=click.Path(), default=None,
    help="INI configuration file (built-in defaults when omitted).",
)
server_option = click.option(
    "--server", default=None, metavar="URL",
    help="Evaluate on a running service instead of in-process.",
)
trials_option = click.option("--trials", type=click.IntRange(min=1), default=None)
seed_option = click.option("--seed", type=click.IntRange(min=0), default=None)
workers_option = click.option(
    "--workers", type=click.IntRange(min=1), default=None,
    help="Parallel trial workers (results are identical for any count).",
)


@click.group()
def main() -> None:
    """Coverage and secrecy analysis for hard-core aerial networks."""


# ---- subcommands -----------------------------------------------------------


@main.command()
@config_option
@server_option
@guarded
def analytic(config_path, server) -> None:
    """Closed-form coverage, secrecy, and throughput at one configuration."""
    loaded = _load(config_path, None, None)
    if server:
        report = _post(
            server, "/v1/analytic",
            {"system": _system_payload(loaded), "quad": _quad_payload(loaded)},
        )
    else:
        cp = coverage_probability(loaded.params, loaded.quad)
        sp = secrecy_probability(loaded.params, loaded.quad)
        report = {"cp": cp, "sp": sp, "st": combine_throughput(loaded.params, cp, sp)}
    _emit(report)


@main.command()
@config_option
@trials_option
@seed_option
@workers_option
@server_option
@guarded
def simulate(config_path, trials, seed, workers, server) -> None:
    """Monte Carlo estimates of the same metrics."""
    loaded = _load(config_path, trials, seed)
    if server:
        report = _post(
            server, "/v1/simulate",
            {
                "system": _system_payload(loaded),
                "sim": _sim_payload(loaded.sim),
                "workers": workers,
            },
        )
    else:
        cp, sp, st_product, st_joint = estimate_all(loaded.params, loaded.sim, workers)
        report = {
            "trials": loaded.sim.trials,
            "seed": loaded.sim.master_seed,
            "confidence_level": loaded.sim.confidence_level,
            "cp": {"value": cp.value, "ci_low": cp.ci_low, "ci_high": cp.ci_high},
            "sp": {"value": sp.value, "ci_low": sp.ci_low, "ci_high": sp.ci_high},
            "st_product": st_product,
            "st_joint": st_joint,
        }
    _emit(report)


@main.command("compare")
@config_option
@trials_option
@seed_option
@click.option("--tolerance", type=float, default=0.05, show_default=True,
              help="Maximum allowed |analytic - simulated| for CP and SP.")
@workers_option
@server_option
@guarded
def compare_command(config_path, trials, seed, tolerance, workers, server) -> None:
    """Cross-validate the backends at one configuration.

    Exits 1 when a gap exceeds the tolerance.
    """
    loaded = _load(config_path, trials, seed)
    if server:
        report = _post(
            server, "/v1/compare",
            {
                "system": _system_payload(loaded),
                "sim": _sim_payload(loaded.sim),
                "quad": _quad_payload(loaded),
                "tolerance": tolerance,
                "workers": workers,
            },
        )
    else:
        report = compare(
            loaded.params, loaded.sim, quad=loaded.quad,
            tolerance=tolerance, workers=workers,
        )
    _emit(report)
    if not report["within_tolerance"]:
        raise _fail(1, "backends disagree beyond tolerance "
                       f"(cp gap {report['gaps']['cp']:.4g}, "
                       f"sp gap {report['gaps']['sp']:.4g})")


@main.command()
@config_option
@click.option("--preset", type=click.Choice(_PRESETS), default=None,
              help="Published-figure grid; replaces --param/--grid.")
@click.option("--param", "param", default=None,
              help="Parameter to sweep (phi, H, N, M, d, lambda_e, lambda_u, R_t).")
@click.option("--grid", "grid_text", default=None, metavar="V1,V2,...",
              help="Comma-separated grid values for --param.")
@click.option("--backend", type=click.Choice(["analytic", "sim", "both"]),
              default="both", show_default=True)
@trials_option
@seed_option
@workers_option
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="CSV destination (stdout when omitted).")
@server_option
@guarded
def sweep(config_path, preset, param, grid_text, backend, trials, seed,
          workers, out_path, server) -> None:
    """Sweep one parameter across a grid and emit the results as CSV."""
    if (preset is None) == (param is None and grid_text is None):
        raise _fail(2, "choose either --preset or --param with --grid")
    if preset is None and (param is None or grid_text is None):
        raise _fail(2, "--param and --grid go together")

    loaded = _load(config_path, trials, seed)
    backends = "simulate" if backend == "sim" else backend

    grid = None
    if grid_text is not None:
        try:
            grid = tuple(float(cell) for cell in grid_text.split(",") if cell.strip())
        except ValueError:
            raise _fail(2, f"--grid must be comma-separated numbers, got {grid_text!r}")
        if not grid:
            raise _fail(2, "--grid must name at least one value")

    if server:
        payload: dict = {
            "backends": backends,
            "sim": _sim_payload(loaded.sim),
            "workers": workers,
        }
        if preset is not None:
            payload["preset"] = preset
        else:
            payload.update(
                swept_parameter=param, grid=list(grid),
                base=_system_payload(loaded), quad=_quad_payload(loaded),
            )
        response = _post(server, "/v1/sweep", payload)
        text, summary, errors = response["csv"], response["summary"], response["errors"]
    else:
        if preset is not None:
            specs = preset_specs(preset, loaded.sim, backends=backends)
        else:
            specs = (
                SweepSpec(
                    swept_parameter=param, grid=grid, base=loaded.params,
                    cfg=loaded.sim, backends=backends, quad=loaded.quad,
                ),
            )
        result = run_sweep(specs, workers=workers)
        text, summary, errors = csv_text(result.rows), result.summary, result.errors

    if out_path is None:
        click.echo(text, nl=False)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        click.echo(f"wrote {out_path}", err=True)
    click.echo(summary, err=True)
    for line in errors:
        click.echo(f"row error: {line}", err=True)


@main.command("validate-config")
@config_option
@guarded
def validate_config(config_path) -> None:
    """Parse and validate a configuration, then print the resolved record."""
    loaded = _load(config_path, None, None)
    p = loaded.params
    resolved = {
        "M": p.M, "N": p.N, "P": p.P, "phi": p.phi, "H": p.H, "d": p.d,
        "lambda_p": p.lambda_p, "lambda_u": p.lambda_u, "lambda_e": p.lambda_e,
        "beta_t": p.beta_t, "beta_e": p.beta_e, "R_s": p.R_s,
        "trials": loaded.sim.trials, "master_seed": loaded.sim.master_seed,
        "quad_r_max": loaded.quad.r_max,
    }
    _emit(resolved)
    click.echo("config ok", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@guarded
def serve(host, port) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
