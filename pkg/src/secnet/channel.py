"""Air-to-ground channel model: LoS probability, path loss, link geometry.

A link at ground distance ``l`` from a node at altitude ``H`` sees an
elevation angle arctan(H/l). The LoS probability is a logistic curve in
that angle (in degrees); the large-scale gain then follows one of two
power laws depending on whether the link drew LoS or NLoS. Ground users
scatter around their serving node with a Rayleigh radial profile.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .params import ChannelParams, ConfigError

__all__ = [
    "LinkType",
    "link_distance",
    "los_probability",
    "path_loss",
    "sample_link_type",
    "sample_los_mask",
    "typical_user_distance_pdf",
]

_DEG = 180.0 / math.pi


class LinkType(enum.Enum):
    LOS = "los"
    NLOS = "nlos"


def link_distance(l, H):
    """Slant distance sqrt(H^2 + l^2) for ground distance ``l``."""
    return np.hypot(l, H)


def los_probability(l, params: ChannelParams):
    """Probability that the link at ground distance ``l`` is line-of-sight.

    Logistic in the elevation angle (degrees); arctan2 makes the overhead
    point l=0 give exactly 90 degrees. Accepts scalars or arrays.
    """
    angle = _DEG * np.arctan2(params.H, l)
    return 1.0 / (1.0 + params.a * np.exp(-params.b * (angle - params.a)))


def path_loss(l, link: LinkType, params: ChannelParams):
    """Large-scale channel gain eta_Q * xi * R(l)^(-alpha_Q), linear."""
    if link is LinkType.LOS:
        eta, alpha = params.eta_L, params.alpha_L
    elif link is LinkType.NLOS:
        eta, alpha = params.eta_N, params.alpha_N
    else:
        raise ConfigError(f"unknown link type {link!r}")
    return eta * params.xi * link_distance(l, params.H) ** -alpha


def sample_los_mask(l, params: ChannelParams, rng: np.random.Generator):
    """Independent LoS/NLoS draws for an array of ground distances.

    True marks LoS. One uniform per link, compared against the logistic
    elevation-angle probability; draws are independent across links.
    """
    l = np.asarray(l, dtype=float)
    return rng.random(l.shape) < los_probability(l, params)


def sample_link_type(l: float, params: ChannelParams, rng: np.random.Generator) -> LinkType:
    """Draw the LoS/NLoS state of a single link."""
    return LinkType.LOS if sample_los_mask([l], params, rng)[0] else LinkType.NLOS


def typical_user_distance_pdf(l, sigma: float):
    """Rayleigh density of the serving-link ground distance.

    f(l) = (l / sigma^2) exp(-l^2 / (2 sigma^2)) for l >= 0; the served
    user's scatter around its node is isotropic Gaussian per axis.
    """
    if not (sigma > 0.0) or not math.isfinite(sigma):
        raise ConfigError(f"sigma must be positive and finite, got {sigma}")
    l = np.asarray(l, dtype=float)
    out = (l / sigma**2) * np.exp(-(l * l) / (2.0 * sigma**2))
    return out if out.ndim else float(out)
