"""Validated parameter records shared by both backends.

Everything is stored in linear SI units (watts, meters, dimensionless
linear gains). Configuration files may state gains in dB and noise powers
in dBm; conversion happens exactly once, at load time (see secnet.config).

Derived quantities (hard-core mean neighbor count, deployed intensity,
SINR thresholds, secrecy rate) are exposed as properties so a record can
never carry inconsistent primitive/derived pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "ConfigError",
    "NumericError",
    "SamplingError",
    "InfeasibleTargetError",
    "DegenerateChannelError",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_watts",
    "watts_to_dbm",
    "ChannelParams",
    "SystemParams",
]


class ConfigError(ValueError):
    """A parameter or configuration value violates its contract."""


class NumericError(RuntimeError):
    """A numerical evaluation failed its accuracy or sanity contract."""


class SamplingError(RuntimeError):
    """A Monte Carlo routine exceeded a retry budget or degenerated."""


class InfeasibleTargetError(ConfigError):
    """The requested deployed intensity exceeds the hard-core saturation bound."""


class DegenerateChannelError(SamplingError):
    """A channel realization was numerically singular (condition number > 1e12)."""


def db_to_linear(value_db: float) -> float:
    """Power ratio in dB to a linear factor."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0.0:
        raise ConfigError(f"dB conversion needs a positive linear value, got {value}")
    return 10.0 * math.log10(value)


def dbm_to_watts(value_dbm: float) -> float:
    """Absolute power in dBm to watts."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    if value_w <= 0.0:
        raise ConfigError(f"dBm conversion needs a positive power, got {value_w}")
    return 10.0 * math.log10(value_w) + 30.0


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True, slots=True)
class ChannelParams:
    """Air-to-ground channel constants.

    a, b: environment constants of the elevation-angle LoS model
        (a is in degrees, matching the angle it is subtracted from;
        b is per degree).
    alpha_L, alpha_N: path-loss exponents for LoS and NLoS links.
    eta_L, eta_N: excess path-loss factors, linear (not dB).
    xi: reference path gain at 1 m, linear.
    H: transmitter altitude in meters (all nodes share one altitude).
    """

    a: float
    b: float
    alpha_L: float
    alpha_N: float
    eta_L: float
    eta_N: float
    xi: float
    H: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "alpha_L", "alpha_N", "eta_L", "eta_N", "xi", "H"):
            _require(_finite(getattr(self, name)), f"channel.{name} must be finite")
        _require(self.alpha_L > 0 and self.alpha_N > 0, "path-loss exponents must be positive")
        _require(self.eta_L > 0 and self.eta_N > 0 and self.xi > 0,
                 "gain factors must be positive linear values")
        _require(self.H > 0, "altitude H must be positive")


@dataclass(frozen=True, slots=True)
class SystemParams:
    """Every scalar of the network model in one validated record.

    M: transmit antennas per node, N: users served per node (1 <= N <= M-1).
    P: total transmit power per node, watts.
    phi: fraction of P spent on information signals, in (0,1).
    H: node altitude, meters (must equal channel.H).
    d: hard-core separation distance, meters.
    lambda_p: parent (pre-thinning) intensity, points per m^2.
    lambda_e: eavesdropper intensity, points per m^2 (0 allowed: no eves).
    sigma: user scatter scale around the serving node's ground point, meters.
    sigma_x2, sigma_e2: noise powers at users and eves, watts.
    R_t, R_e: codeword and redundancy rates, bits/s/Hz, 0 <= R_e <= R_t.

    Degenerate boundary values (R_t = 0, R_e = R_t, lambda_e = 0) are legal
    here so limiting behavior stays constructible; the configuration loader
    is stricter for files it accepts.
    """

    M: int
    N: int
    P: float
    phi: float
    H: float
    d: float
    lambda_p: float
    lambda_e: float
    sigma: float
    channel: ChannelParams
    sigma_x2: float
    sigma_e2: float
    R_t: float
    R_e: float

    def __post_init__(self) -> None:
        _require(isinstance(self.M, int) and isinstance(self.N, int),
                 "M and N must be integers")
        _require(1 <= self.N <= self.M - 1,
                 f"need 1 <= N <= M-1, got M={self.M}, N={self.N}")
        for name in ("P", "phi", "H", "d", "lambda_p", "lambda_e", "sigma",
                     "sigma_x2", "sigma_e2", "R_t", "R_e"):
            _require(_finite(getattr(self, name)), f"{name} must be finite")
        _require(self.P > 0, "P must be positive")
        _require(0.0 < self.phi < 1.0, f"phi must lie in (0,1), got {self.phi}")
        _require(self.H > 0 and self.d > 0 and self.sigma > 0,
                 "H, d and sigma must be positive")
        _require(self.lambda_p > 0, "lambda_p must be positive")
        _require(self.lambda_e >= 0, "lambda_e must be nonnegative")
        _require(self.sigma_x2 > 0 and self.sigma_e2 > 0,
                 "noise powers must be positive")
        _require(self.R_t >= 0, "R_t must be nonnegative")
        _require(0.0 <= self.R_e <= self.R_t,
                 f"need 0 <= R_e <= R_t, got R_e={self.R_e}, R_t={self.R_t}")
        _require(self.channel.H == self.H, "channel.H must equal SystemParams.H")

    # ---- derived quantities -------------------------------------------

    @property
    def k_bar(self) -> float:
        """Mean number of competitors inside a hard-core disc: lambda_p*pi*d^2."""
        return self.lambda_p * math.pi * self.d * self.d

    @property
    def lambda_u(self) -> float:
        """Deployed-node intensity after hard-core thinning."""
        return -math.expm1(-self.k_bar) / (math.pi * self.d * self.d)

    @property
    def R_s(self) -> float:
        """Secrecy rate R_t - R_e."""
        return self.R_t - self.R_e

    @property
    def beta_t(self) -> float:
        """SINR threshold a user must reach: 2^R_t - 1."""
        return 2.0 ** self.R_t - 1.0

    @property
    def beta_e(self) -> float:
        """SINR level an eavesdropper must stay below: 2^R_e - 1."""
        return 2.0 ** self.R_e - 1.0

    def with_updates(self, **changes) -> "SystemParams":
        """Copy with validated field replacements; keeps channel.H in sync."""
        if "H" in changes and "channel" not in changes:
            changes["channel"] = replace(self.channel, H=changes["H"])
        return replace(self, **changes)
