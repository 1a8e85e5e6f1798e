"""INI configuration loading with explicit unit conversion.

Files carry four sections: [system], [channel], [sim], [quad]. Gains are
stated in dB and noise powers in dBm, with the unit in the key name
(eta_L_db, sigma_x2_dbm); conversion to linear units happens here and
nowhere else. Deployment density is configured as the target deployed
intensity lambda_u; the parent intensity the samplers need is derived at
load time.

Every key in the schema is required, unknown keys and sections are
rejected by name, and any key can be overridden through the environment
as SECNET_<SECTION>_<KEY> (case-insensitive match, override wins over the
file). The loader is stricter than the parameter records: a file must
keep R_e strictly below R_t and stay off other degenerate boundaries that
remain constructible through the library API.
"""
from __future__ import annotations

import math
import os
from configparser import ConfigParser, Error as IniError
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

from .analytic import QuadratureSpec, default_quadrature
from .params import (
    ChannelParams,
    ConfigError,
    SystemParams,
    db_to_linear,
    dbm_to_watts,
)
from .point_process import parent_intensity_from_target
from .simulator import SimConfig

__all__ = ["DEFAULT_CONFIG", "LoadedConfig", "load_config", "parse_config"]

ENV_PREFIX = "SECNET_"

# Dense urban deployment defaults; every CLI run starts from these.
DEFAULT_CONFIG = """\
[system]
M = 8
N = 4
P = 5.0
phi = 0.5
H = 100.0
d = 50.0
lambda_u = 8e-6
lambda_e = 8e-6
sigma = 20.0
R_t = 0.8
R_e = 0.4
sigma_x2_dbm = -100.0
sigma_e2_dbm = -100.0

[channel]
a = 11.95
b = 0.136
alpha_L = 2.5
alpha_N = 2.8
eta_L_db = -1.6
eta_N_db = -23.0
xi_db = -40.0

[sim]
trials = 10000
window_radius = auto
master_seed = 0
confidence_level = 0.99

[quad]
rel_tol = 1e-6
abs_tol = 1e-9
r_max = auto
l_max_factor = 8.0
max_subdivisions = 4
"""


def _parse_int(raw: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}") from None


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}") from None


def _parse_float_or_auto(raw: str) -> float:
    # "auto" defers to the derived default for the loaded parameters
    if raw.strip().lower() == "auto":
        return math.nan
    return _parse_float(raw)


_SCHEMA: dict[str, dict[str, Callable[[str], object]]] = {
    "system": {
        "M": _parse_int,
        "N": _parse_int,
        "P": _parse_float,
        "phi": _parse_float,
        "H": _parse_float,
        "d": _parse_float,
        "lambda_u": _parse_float,
        "lambda_e": _parse_float,
        "sigma": _parse_float,
        "R_t": _parse_float,
        "R_e": _parse_float,
        "sigma_x2_dbm": _parse_float,
        "sigma_e2_dbm": _parse_float,
    },
    "channel": {
        "a": _parse_float,
        "b": _parse_float,
        "alpha_L": _parse_float,
        "alpha_N": _parse_float,
        "eta_L_db": _parse_float,
        "eta_N_db": _parse_float,
        "xi_db": _parse_float,
    },
    "sim": {
        "trials": _parse_int,
        "window_radius": _parse_float_or_auto,
        "master_seed": _parse_int,
        "confidence_level": _parse_float,
    },
    "quad": {
        "rel_tol": _parse_float,
        "abs_tol": _parse_float,
        "r_max": _parse_float_or_auto,
        "l_max_factor": _parse_float,
        "max_subdivisions": _parse_int,
    },
}


@dataclass(frozen=True, slots=True)
class LoadedConfig:
    """Everything a run needs, already validated and in linear units."""

    params: SystemParams
    sim: SimConfig
    quad: QuadratureSpec


def _read_sections(text: str, source: str) -> dict[str, dict[str, str]]:
    parser = ConfigParser(interpolation=None, default_section="<reserved>")
    parser.optionxform = str  # keys are case-sensitive in the file
    try:
        parser.read_string(text, source=source)
    except IniError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    sections: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown config section [{section}]")
        sections[section] = dict(parser.items(section))
    return sections


def _apply_env(sections: dict[str, dict[str, str]], env: Mapping[str, str]) -> None:
    # resolve SECNET_<SECTION>_<KEY> case-insensitively against the schema;
    # a prefixed variable that matches nothing is a typo, not a no-op
    lowered = {
        section: {key.lower(): key for key in keys}
        for section, keys in _SCHEMA.items()
    }
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX):
            continue
        section, _, key = name[len(ENV_PREFIX):].lower().partition("_")
        canonical = lowered.get(section, {}).get(key)
        if canonical is None:
            raise ConfigError(f"unknown config override {name}")
        sections.setdefault(section, {})[canonical] = env[name]


def _typed_sections(
    sections: dict[str, dict[str, str]], source: str
) -> dict[str, dict[str, object]]:
    typed: dict[str, dict[str, object]] = {}
    for section, keys in _SCHEMA.items():
        raw = sections.get(section, {})
        for key in raw:
            if key not in keys:
                raise ConfigError(f"{source}: unknown config key [{section}] {key}")
        values: dict[str, object] = {}
        for key, parse in keys.items():
            if key not in raw:
                raise ConfigError(f"{source}: missing config key [{section}] {key}")
            try:
                values[key] = parse(raw[key])
            except ConfigError as exc:
                raise ConfigError(f"{source}: [{section}] {key}: {exc}") from None
        typed[section] = values
    return typed


def parse_config(
    text: str, source: str = "<config>", env: Mapping[str, str] | None = None
) -> LoadedConfig:
    """Parse INI text (plus environment overrides) into validated records."""
    sections = _read_sections(text, source)
    _apply_env(sections, os.environ if env is None else env)
    typed = _typed_sections(sections, source)

    sys_v, ch_v, sim_v, quad_v = (
        typed["system"],
        typed["channel"],
        typed["sim"],
        typed["quad"],
    )

    # file-level strictness beyond the record invariants
    if not sys_v["N"] < sys_v["M"]:
        raise ConfigError(
            f"{source}: antenna configuration needs N < M, "
            f"got M={sys_v['M']}, N={sys_v['N']}"
        )
    if not sys_v["R_e"] < sys_v["R_t"]:
        raise ConfigError(
            f"{source}: rate configuration needs R_e < R_t, "
            f"got R_t={sys_v['R_t']}, R_e={sys_v['R_e']}"
        )

    channel = ChannelParams(
        a=ch_v["a"],
        b=ch_v["b"],
        alpha_L=ch_v["alpha_L"],
        alpha_N=ch_v["alpha_N"],
        eta_L=db_to_linear(ch_v["eta_L_db"]),
        eta_N=db_to_linear(ch_v["eta_N_db"]),
        xi=db_to_linear(ch_v["xi_db"]),
        H=sys_v["H"],
    )
    hard_core = parent_intensity_from_target(sys_v["lambda_u"], sys_v["d"])
    params = SystemParams(
        M=sys_v["M"],
        N=sys_v["N"],
        P=sys_v["P"],
        phi=sys_v["phi"],
        H=sys_v["H"],
        d=sys_v["d"],
        lambda_p=hard_core.lambda_p,
        lambda_e=sys_v["lambda_e"],
        sigma=sys_v["sigma"],
        channel=channel,
        sigma_x2=dbm_to_watts(sys_v["sigma_x2_dbm"]),
        sigma_e2=dbm_to_watts(sys_v["sigma_e2_dbm"]),
        R_t=sys_v["R_t"],
        R_e=sys_v["R_e"],
    )
    sim = SimConfig(
        trials=sim_v["trials"],
        window_radius=sim_v["window_radius"],
        master_seed=sim_v["master_seed"],
        confidence_level=sim_v["confidence_level"],
    )

    overrides = {k: v for k, v in quad_v.items() if k != "r_max"}
    r_max = quad_v["r_max"]
    if math.isnan(r_max):
        quad = default_quadrature(params, **overrides)
    else:
        if r_max < 2.0 * params.d:
            raise ConfigError(
                f"{source}: [quad] r_max={r_max} must be at least 2d={2.0 * params.d}"
            )
        quad = QuadratureSpec(r_max=r_max, **overrides)
    return LoadedConfig(params=params, sim=sim, quad=quad)


def load_config(
    path: str | Path | None, env: Mapping[str, str] | None = None
) -> LoadedConfig:
    """Load a config file, or the built-in defaults when path is None."""
    if path is None:
        return parse_config(DEFAULT_CONFIG, source="<defaults>", env=env)
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {file}: {exc}") from None
    return parse_config(text, source=str(file), env=env)
