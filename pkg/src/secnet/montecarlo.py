"""Shared Monte Carlo plumbing: estimates, intervals, reproducible streams.

Every random draw in the package flows through a counter-based generator
keyed on (master_seed, trial_index, stream id). Streams are split per
entity class so that, for example, adding eavesdroppers to a scenario
cannot perturb the node layout of the same trial. Estimators reduce over
plain integer counters, which makes parallel reductions order-independent
and results bit-identical for any worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

__all__ = [
    "MetricEstimate",
    "wilson_interval",
    "substream",
    "Stream",
]

_MASK64 = (1 << 64) - 1


class Stream:
    """Stream ids for per-entity-class random substreams."""

    GEOMETRY = 0      # parent positions of the node layout
    MARKS = 1         # thinning marks
    USERS = 2         # user scatter around the serving node
    FADING = 3        # per-node user channel matrices
    USER_CHANNELS = 4 # interferer-to-typical-user channel vectors
    LOS_USER = 5      # LoS draws for links toward the typical user
    EVE_GEOMETRY = 6  # eavesdropper positions
    EVE_GAINS = 7     # eavesdropper effective gain draws
    LOS_EVE = 8       # LoS draws for links toward eavesdroppers
    GENERIC = 15      # standalone estimators outside the trial protocol


def substream(master_seed: int, trial_index: int, stream: int, attempt: int = 0):
    """Generator for one (trial, entity-class) slot.

    Distinct (trial_index, stream, attempt) triples never collide for
    trial_index < 2^44; attempt is bumped when a trial has to redo a stage
    (rejection resampling) so retries do not recycle the same numbers.
    """
    if trial_index < 0 or stream < 0 or attempt < 0:
        raise ValueError("substream indices must be nonnegative")
    lane = (trial_index << 20) | (attempt << 8) | stream
    key = np.array([master_seed & _MASK64, lane & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def wilson_interval(successes: int, trials: int, confidence: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Returns (low, high). Degenerate at the point estimate when trials
    carry no uncertainty budget (confidence 0) and never leaves [0,1].
    """
    if trials <= 0:
        raise ValueError("wilson_interval needs at least one trial")
    if not (0.0 < confidence < 1.0):
        raise ValueError(f"confidence must lie in (0,1), got {confidence}")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    n = float(trials)
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True, slots=True)
class MetricEstimate:
    """A Monte Carlo estimate with its provenance.

    value: point estimate (a frequency for proportions).
    ci_low, ci_high: confidence bounds at the level the estimator was run at.
    trials: number of independent trials behind the estimate.
    seed: master seed the trial streams were keyed on.
    """

    value: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("an estimate needs at least one trial")
        if not (self.ci_low <= self.value <= self.ci_high):
            raise ValueError(
                f"inconsistent interval: [{self.ci_low}, {self.ci_high}] "
                f"does not contain {self.value}")

    @classmethod
    def from_counts(cls, successes: int, trials: int, confidence: float,
                    seed: int) -> "MetricEstimate":
        low, high = wilson_interval(successes, trials, confidence)
        return cls(value=successes / trials, ci_low=low, ci_high=high,
                   trials=trials, seed=seed)
