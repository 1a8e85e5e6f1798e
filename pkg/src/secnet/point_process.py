"""Planar point patterns: Poisson sampling, hard-core thinning, retention math.

The deployment model is a dependent thinning of a parent Poisson process:
every parent draws an independent uniform mark, and a parent survives iff
its mark is minimal among all parents within the hard-core distance d
(closed ball). Survivors therefore keep pairwise distances >= d.

The analytic side of the same construction lives here too: the survivor
intensity, its inversion (choose a parent intensity that hits a target
deployed intensity), and the second-order retention probability of a
competitor at distance r from a retained point, together with its
brute-force Monte Carlo oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

from .montecarlo import MetricEstimate, wilson_interval
from .params import ConfigError, InfeasibleTargetError, SamplingError

__all__ = [
    "Point2D",
    "MarkedPoint",
    "PointPattern",
    "HardCoreParams",
    "sample_ppp",
    "attach_marks",
    "matern_ii_thin",
    "sample_mhcpp",
    "mhcpp_intensity",
    "parent_intensity_from_target",
    "lens_area",
    "retention_probability",
    "sample_palm_mhcpp",
    "sample_cluster_users",
    "estimate_retention",
]

# Above this point count, pairwise work goes through a k-d tree instead of
# a dense distance matrix.
_TREE_THRESHOLD = 2000


@dataclass(frozen=True, slots=True)
class Point2D:
    """A planar location in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError("point coordinates must be finite")


@dataclass(frozen=True, slots=True)
class MarkedPoint:
    """A location with its thinning mark in [0, 1]."""

    point: Point2D
    mark: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.mark <= 1.0):
            raise ConfigError(f"mark must lie in [0,1], got {self.mark}")


@dataclass(frozen=True)
class PointPattern:
    """A finite point set on a disc window centered at the origin.

    xy: (n, 2) float array of coordinates in meters.
    window_radius: radius of the disc every point must lie inside.
    marks: optional (n,) array of thinning marks in [0, 1].
    palm_rejections: for conditioned samples, how many whole realizations
        were discarded before the returned one (None otherwise).

    The ``points`` property materializes Point2D / MarkedPoint objects on
    demand; bulk consumers should read ``xy`` directly.
    """

    xy: np.ndarray
    window_radius: float
    marks: np.ndarray | None = None
    palm_rejections: int | None = None

    def __post_init__(self) -> None:
        xy = np.asarray(self.xy, dtype=float)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ConfigError(f"xy must have shape (n, 2), got {xy.shape}")
        object.__setattr__(self, "xy", xy)
        if not (math.isfinite(self.window_radius) and self.window_radius > 0):
            raise ConfigError("window_radius must be positive and finite")
        if not np.all(np.isfinite(xy)):
            raise ConfigError("point coordinates must be finite")
        # Tolerate boundary round-off but nothing materially outside.
        limit = self.window_radius * (1.0 + 1e-12) + 1e-9
        if xy.size and np.max(np.hypot(xy[:, 0], xy[:, 1])) > limit:
            raise ConfigError("every point must lie inside the window disc")
        if self.marks is not None:
            marks = np.asarray(self.marks, dtype=float)
            if marks.shape != (xy.shape[0],):
                raise ConfigError("marks must be one value per point")
            if marks.size and (marks.min() < 0.0 or marks.max() > 1.0):
                raise ConfigError("marks must lie in [0,1]")
            object.__setattr__(self, "marks", marks)

    def __len__(self) -> int:
        return self.xy.shape[0]

    @property
    def points(self) -> list:
        pts = [Point2D(float(x), float(y)) for x, y in self.xy]
        if self.marks is None:
            return pts
        return [MarkedPoint(p, float(m)) for p, m in zip(pts, self.marks)]


@dataclass(frozen=True, slots=True)
class HardCoreParams:
    """Parent intensity and hard-core distance, with their product recorded.

    k_bar is the mean competitor count lambda_p * pi * d^2; it is derived
    here so the triple can never go out of sync.
    """

    lambda_p: float
    d: float
    k_bar: float = float("nan")  # filled from lambda_p and d

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lambda_p) and self.lambda_p > 0):
            raise ConfigError("lambda_p must be positive and finite")
        if not (math.isfinite(self.d) and self.d > 0):
            raise ConfigError("d must be positive and finite")
        exact = self.lambda_p * math.pi * self.d * self.d
        if math.isnan(self.k_bar):
            object.__setattr__(self, "k_bar", exact)
        elif self.k_bar != exact:
            raise ConfigError("k_bar must equal lambda_p*pi*d^2 exactly")


# --------------------------------------------------------------------------
# sampling primitives
# --------------------------------------------------------------------------

def _uniform_disc(rng, n: int, radius: float, center=(0.0, 0.0)) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    ang = 2.0 * math.pi * rng.random(n)
    out = np.empty((n, 2))
    out[:, 0] = center[0] + r * np.cos(ang)
    out[:, 1] = center[1] + r * np.sin(ang)
    return out


def sample_ppp(intensity: float, window_radius: float, rng) -> PointPattern:
    """Homogeneous Poisson pattern on the disc of the given radius.

    The count is Poisson(intensity * pi * window_radius^2) and locations
    are i.i.d. uniform on the disc.
    """
    if not (isinstance(intensity, (int, float)) and math.isfinite(intensity)):
        raise ConfigError(f"intensity must be finite, got {intensity}")
    if intensity < 0:
        raise ConfigError(f"intensity must be nonnegative, got {intensity}")
    if not (math.isfinite(window_radius) and window_radius > 0):
        raise ConfigError("window_radius must be positive")
    mean = intensity * math.pi * window_radius * window_radius
    n = int(rng.poisson(mean))
    return PointPattern(_uniform_disc(rng, n, window_radius), window_radius)


def attach_marks(pattern: PointPattern, rng) -> PointPattern:
    """Equip a pattern with i.i.d. uniform thinning marks."""
    return PointPattern(pattern.xy, pattern.window_radius,
                        marks=rng.random(len(pattern)))


def _close_pairs(xy: np.ndarray, d: float) -> np.ndarray:
    """Index pairs (i, j), i < j, at distance <= d (closed ball)."""
    n = xy.shape[0]
    if n < 2:
        return np.empty((0, 2), dtype=np.intp)
    if n <= _TREE_THRESHOLD:
        close = squareform(pdist(xy)) <= d
        iu = np.triu_indices(n, k=1)
        keep = close[iu]
        return np.stack([iu[0][keep], iu[1][keep]], axis=1)
    tree = cKDTree(xy)
    return tree.query_pairs(d, output_type="ndarray")


def _retained_mask(xy: np.ndarray, marks: np.ndarray, d: float) -> np.ndarray:
    """Survival mask of the mark-minimal thinning with closed-ball competition.

    A point survives iff no point within distance d precedes it in the
    total order (mark, x, y). The coordinate tiebreak has probability zero
    with continuous marks but keeps the rule deterministic.
    """
    pairs = _close_pairs(xy, d)
    retained = np.ones(xy.shape[0], dtype=bool)
    if pairs.size == 0:
        return retained
    i, j = pairs[:, 0], pairs[:, 1]
    mi, mj = marks[i], marks[j]
    i_first = (mi < mj) | ((mi == mj) & (
        (xy[i, 0] < xy[j, 0]) | ((xy[i, 0] == xy[j, 0]) & (xy[i, 1] < xy[j, 1]))))
    retained[np.where(i_first, j, i)] = False
    return retained


def matern_ii_thin(parents: PointPattern, d: float) -> PointPattern:
    """Dependent thinning: keep a parent iff its mark is minimal within d.

    Suppression is mutual-blind (a point with a smaller mark suppresses
    regardless of whether it survives itself), so the output is guaranteed
    hard-core: all pairwise distances >= d.
    """
    if parents.marks is None:
        raise ConfigError("matern_ii_thin needs a marked pattern")
    if not (math.isfinite(d) and d > 0):
        raise ConfigError("hard-core distance d must be positive")
    keep = _retained_mask(parents.xy, parents.marks, d)
    return PointPattern(parents.xy[keep], parents.window_radius,
                        marks=parents.marks[keep])


def _crop(pattern: PointPattern, radius: float) -> PointPattern:
    inside = np.hypot(pattern.xy[:, 0], pattern.xy[:, 1]) <= radius
    marks = None if pattern.marks is None else pattern.marks[inside]
    return PointPattern(pattern.xy[inside], radius, marks=marks)


def sample_mhcpp(params: HardCoreParams, window_radius: float, rng) -> PointPattern:
    """One unconditioned hard-core pattern on the analysis window.

    Parents are sampled on a window inflated by d and the thinned pattern
    is cropped back, so points near the rim face the same competition they
    would in the infinite process.
    """
    parents = sample_ppp(params.lambda_p, window_radius + params.d, rng)
    marked = attach_marks(parents, rng)
    return _crop(matern_ii_thin(marked, params.d), window_radius)


# --------------------------------------------------------------------------
# first- and second-order analytic properties
# --------------------------------------------------------------------------

def mhcpp_intensity(params: HardCoreParams) -> float:
    """Survivor intensity (1 - e^(-k_bar)) / (pi d^2).

    Uses expm1 so the small-k_bar limit degrades gracefully to lambda_p
    and the large-d limit saturates at 1/(pi d^2).
    """
    return -math.expm1(-params.k_bar) / (math.pi * params.d * params.d)


def parent_intensity_from_target(lambda_u: float, d: float) -> HardCoreParams:
    """Invert the survivor-intensity formula for a target deployed intensity.

    Raises InfeasibleTargetError at or above the saturation bound
    lambda_u = 1/(pi d^2), which no parent intensity can reach.
    """
    if not (math.isfinite(lambda_u) and lambda_u > 0):
        raise ConfigError(f"lambda_u must be positive, got {lambda_u}")
    if not (math.isfinite(d) and d > 0):
        raise ConfigError(f"d must be positive, got {d}")
    occupancy = lambda_u * math.pi * d * d
    if occupancy >= 1.0 or lambda_u >= 1.0 / (math.pi * d * d):
        raise InfeasibleTargetError(
            f"target intensity {lambda_u} saturates hard-core distance {d} "
            f"(bound {1.0 / (math.pi * d * d):.6e})")
    lambda_p = -math.log1p(-occupancy) / (math.pi * d * d)
    return HardCoreParams(lambda_p=lambda_p, d=d)


def lens_area(r, d: float):
    """Area of the union of two radius-d discs whose centers are r apart.

    Zero below r = d (the union never enters the retention formula there),
    the lens-corrected expression on [d, 2d), and the disjoint value
    2*pi*d^2 from r = 2d on. Continuous at r = 2d. Accepts scalars or
    arrays.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ConfigError("separation r must be nonnegative")
    if not (math.isfinite(d) and d > 0):
        raise ConfigError("d must be positive")
    ratio = np.clip(r_arr / (2.0 * d), 0.0, 1.0)
    middle = (2.0 * math.pi * d * d
              - 2.0 * d * d * np.arccos(ratio)
              + r_arr * np.sqrt(np.maximum(d * d - r_arr * r_arr / 4.0, 0.0)))
    out = np.where(r_arr < d, 0.0,
                   np.where(r_arr < 2.0 * d, middle, 2.0 * math.pi * d * d))
    return float(out) if np.isscalar(r) else out


def _retention_middle(r, params: HardCoreParams):
    """Retention expression on the closed interval [d, 2d]."""
    k = params.k_bar
    lv = params.lambda_p * lens_area(r, params.d)
    # lv >= lambda_p*V(d) = (4pi/3 + sqrt(3)/2)/pi * k_bar > k_bar: no pole.
    return (2.0 / (lv - k)) * (
        1.0 - k * (-np.expm1(-lv)) / (lv * (-np.expm1(-k))))


def retention_probability(r, params: HardCoreParams):
    """Probability a competitor at distance r from a retained point survives.

    Exact for the mark-minimal thinning: 0 inside the hard core, the
    two-disc union expression on [d, 2d), and the saturation value
    (1 - e^(-k_bar))/k_bar once the competition discs are disjoint.
    Accepts scalars or arrays.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ConfigError("separation r must be nonnegative")
    p_inf = -math.expm1(-params.k_bar) / params.k_bar
    d = params.d
    safe = np.where((r_arr >= d) & (r_arr < 2.0 * d), r_arr, 1.5 * d)
    out = np.where(r_arr < d, 0.0,
                   np.where(r_arr < 2.0 * d, _retention_middle(safe, params), p_inf))
    return float(out) if np.isscalar(r) else out


# --------------------------------------------------------------------------
# conditioned sampling and its oracle
# --------------------------------------------------------------------------

def sample_palm_mhcpp(params: HardCoreParams, window_radius: float, rng,
                      mark_rng=None, max_attempts: int = 1000) -> PointPattern:
    """Hard-core pattern conditioned on a survivor at the origin.

    The origin joins the parent process with its own uniform mark and the
    whole realization is resampled until the origin survives thinning
    (acceptance probability (1 - e^(-k_bar))/k_bar, about 0.94-0.97 at
    the densities this package targets). Exactness over reweighting.

    The returned pattern has the origin at index 0 and records how many
    realizations were rejected. Positions come from ``rng``; marks come
    from ``mark_rng`` when given, so callers can keep the two entity
    classes on separate streams.
    """
    if window_radius < 2.0 * params.d:
        raise ConfigError("window_radius must be at least 2d")
    if mark_rng is None:
        mark_rng = rng
    sample_radius = window_radius + params.d
    mean = params.lambda_p * math.pi * sample_radius * sample_radius
    for attempt in range(max_attempts):
        n = int(rng.poisson(mean))
        xy = np.vstack([np.zeros((1, 2)), _uniform_disc(rng, n, sample_radius)])
        marks = mark_rng.random(n + 1)
        keep = _retained_mask(xy, marks, params.d)
        if not keep[0]:
            continue
        keep[0] = False  # crop the rest, then put the origin back in front
        others = xy[keep]
        omarks = marks[keep]
        inside = np.hypot(others[:, 0], others[:, 1]) <= window_radius
        return PointPattern(
            np.vstack([np.zeros((1, 2)), others[inside]]),
            window_radius,
            marks=np.concatenate([[marks[0]], omarks[inside]]),
            palm_rejections=attempt,
        )
    raise SamplingError(
        f"origin survived none of {max_attempts} thinning attempts "
        f"(k_bar={params.k_bar:.4g})")


def sample_cluster_users(center: Point2D, sigma: float, n: int, rng) -> list:
    """n user positions scattered symmetrically normal around a center.

    Each coordinate offset is N(0, sigma^2), so the horizontal distance
    to the center is Rayleigh(sigma).
    """
    if not (math.isfinite(sigma) and sigma > 0):
        raise ConfigError("sigma must be positive")
    if n < 1:
        raise ConfigError("n must be at least 1")
    offsets = sigma * rng.standard_normal((n, 2))
    return [Point2D(center.x + float(dx), center.y + float(dy))
            for dx, dy in offsets]


def estimate_retention(r: float, params: HardCoreParams, trials: int, rng,
                       confidence: float = 0.99, seed: int = 0) -> MetricEstimate:
    """Brute-force oracle for the retention probability.

    Plants one point at the origin and one at distance r, joins both to a
    fresh parent realization per trial, applies the thinning, and reports
    the conditional frequency P{distant point survives | origin survives}
    with a binomial interval. The parent window is the smallest disc
    covering both competition balls, which is exact: survival depends only
    on marks within distance d.

    ``seed`` is a provenance tag recorded on the estimate; the draws come
    from the caller-owned ``rng``.
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    d = params.d
    center = (r / 2.0, 0.0)
    radius = r / 2.0 + d
    mean = params.lambda_p * math.pi * radius * radius

    counts = rng.poisson(mean, trials)
    total = int(counts.sum())
    tid = np.repeat(np.arange(trials), counts)
    xy = _uniform_disc(rng, total, radius, center)
    pmarks = rng.random(total)
    mark0 = rng.random(trials)
    marki = rng.random(trials)

    d0 = np.hypot(xy[:, 0], xy[:, 1])
    di = np.hypot(xy[:, 0] - r, xy[:, 1])

    min0 = np.full(trials, np.inf)
    near0 = d0 <= d
    np.minimum.at(min0, tid[near0], pmarks[near0])
    mini = np.full(trials, np.inf)
    neari = di <= d
    np.minimum.at(mini, tid[neari], pmarks[neari])

    origin_ok = mark0 < min0
    other_ok = marki < mini
    if r <= d:  # the two planted points compete with each other
        origin_ok &= mark0 < marki
        other_ok &= marki < mark0

    n_cond = int(origin_ok.sum())
    if n_cond == 0:
        raise SamplingError("no trial retained the origin; cannot condition")
    succ = int((origin_ok & other_ok).sum())
    low, high = wilson_interval(succ, n_cond, confidence)
    return MetricEstimate(value=succ / n_cond, ci_low=low, ci_high=high,
                          trials=n_cond, seed=seed)
