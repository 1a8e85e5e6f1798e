"""Monte Carlo ground truth: full network snapshots, SINR by direct evaluation.

Each trial realizes one network snapshot around a deployed node pinned at
the origin (Palm conditioning), serves N users per node with zero-forcing
beams plus artificial noise in the null space, and evaluates the typical
user's SINR and every eavesdropper's SINR on the typical stream exactly.

Modeling notes, in sync with the closed-form backend:

- The typical user's SINR uses explicit precoders for every interfering
  node, because the beam gain of an unintended observer has no exact
  scalar law. The serving node contributes no interference terms: its
  other beams and its own noise basis are zero-forced toward the typical
  user by construction (their residuals are tracked by the diagnostics).
- Eavesdroppers see only artificial noise plus thermal noise (they are
  credited with multi-user decoding of the information beams). Against
  noise bases, the observer gains DO have exact laws: the wiretapped beam
  gain is Exp(1) and each node's noise-basis gain is Gamma(M-N, 1),
  independent because the beam and the basis are orthonormal. Those
  scalars are drawn directly instead of materializing per-eve channels.
- A node's signal and its artificial noise traverse the same physical
  link to a given receiver, so they share one LoS draw and one path loss;
  distinct links draw LoS independently.
- Co-served users of interfering nodes influence nothing observable here
  except through their channel matrices (positions enter only their own
  SINRs), so their positions are not drawn.

Randomness is split into per-entity-class substreams keyed on
(master_seed, trial_index), so e.g. adding eavesdroppers cannot perturb
the node layout of the same trial, and estimates reduce over integer
counters so any partition of the trial range yields bit-identical
results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .analytic import (
    QuadratureSpec,
    coverage_probability,
    secrecy_probability,
    secrecy_throughput,
)
from .channel import LinkType, path_loss, sample_link_type, sample_los_mask
from .mimo import DegenerateChannelError, power_split, sample_fading_batch, zf_precoder_batch
from .montecarlo import MetricEstimate, Stream, substream
from .params import ConfigError, SamplingError, SystemParams
from .point_process import HardCoreParams, Point2D, sample_cluster_users, sample_palm_mhcpp

__all__ = [
    "SimConfig",
    "TrialOutcome",
    "default_window",
    "run_trial",
    "estimate_cp",
    "estimate_sp",
    "estimate_st",
    "compare",
]

_MAX_CHANNEL_ATTEMPTS = 4


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Execution envelope of a Monte Carlo run.

    trials: number of independent snapshots.
    window_radius: disc radius holding nodes and eavesdroppers, meters;
        NaN means "derive from the deployment density" (default_window).
    master_seed: root of every random stream of the run.
    confidence_level: coverage of the reported binomial intervals.
    """

    trials: int
    window_radius: float = float("nan")
    master_seed: int = 0
    confidence_level: float = 0.99

    def __post_init__(self) -> None:
        if int(self.trials) < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if not math.isnan(self.window_radius):
            if not (math.isfinite(self.window_radius) and self.window_radius > 0.0):
                raise ConfigError(f"window_radius must be positive, got {self.window_radius}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must fit in 64 bits")
        if not 0.0 < self.confidence_level < 1.0:
            raise ConfigError(f"confidence_level must lie in (0,1), got {self.confidence_level}")


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    """What one snapshot resolved to."""

    covered: bool
    secret: bool
    sinr_user: float
    max_sinr_eve: float


def default_window(params: SystemParams) -> float:
    """Radius past which truncated interference is negligible at the
    densities this model targets: 20 hard-core distances, 20 mean parent
    spacings, and an absolute floor."""
    return max(20.0 * params.d, 10.0 / math.sqrt(math.pi * params.lambda_p), 3000.0)


def _window_for(params: SystemParams, cfg: SimConfig) -> float:
    w = cfg.window_radius
    return default_window(params) if math.isnan(w) else w


def run_trial(params: SystemParams, cfg: SimConfig, trial_index: int, diagnostics: bool = False):
    """One full snapshot; returns TrialOutcome (plus a detail dict when
    diagnostics is set)."""
    if trial_index < 0:
        raise ConfigError("trial_index must be nonnegative")
    window = _window_for(params, cfg)
    seed = cfg.master_seed
    split = power_split(params.P, params.phi, params.M, params.N)
    ch = params.channel
    mn = params.M - params.N

    # node layout under Palm conditioning: serving node at index 0
    pattern = sample_palm_mhcpp(
        HardCoreParams(params.lambda_p, params.d),
        window,
        substream(seed, trial_index, Stream.GEOMETRY),
        mark_rng=substream(seed, trial_index, Stream.MARKS),
    )
    nodes = pattern.xy
    n_other = nodes.shape[0] - 1

    # the serving node's user cluster; index 0 is the typical user
    users = sample_cluster_users(
        Point2D(0.0, 0.0), params.sigma, params.N, substream(seed, trial_index, Stream.USERS)
    )
    user_xy = np.array([users[0].x, users[0].y])
    l00 = float(np.hypot(user_xy[0], user_xy[1]))

    # channel matrices and precoders for every node; a numerically singular
    # draw is resampled on a fresh attempt-keyed stream
    resamples = 0
    for attempt in range(_MAX_CHANNEL_ATTEMPTS):
        C = sample_fading_batch(
            (n_other + 1, params.N, params.M),
            substream(seed, trial_index, Stream.FADING, attempt=attempt),
        )
        try:
            W, Q1 = zf_precoder_batch(C)
            break
        except DegenerateChannelError:
            resamples += 1
    else:
        raise SamplingError(
            f"trial {trial_index}: channels stayed degenerate over {_MAX_CHANNEL_ATTEMPTS} attempts"
        )

    # serving link: whole-row beam gain of the typical user
    own_row = C[0, 0].conj() @ W[0]
    h_gain = float(np.vdot(own_row, own_row).real)
    los_user_rng = substream(seed, trial_index, Stream.LOS_USER)
    q00 = sample_link_type(l00, ch, los_user_rng)
    signal = split.P_s * h_gain * path_loss(l00, q00, ch)

    # interfering nodes: explicit beam and noise-basis gains
    if n_other > 0:
        g = sample_fading_batch((n_other, params.M), substream(seed, trial_index, Stream.USER_CHANNELS))
        beams = np.einsum("bm,bmn->bn", g.conj(), W[1:])
        g_beam = np.einsum("bn,bn->b", beams, beams.conj()).real
        proj = np.einsum("bmn,bm->bn", Q1[1:].conj(), g)
        g_noise = np.maximum(
            np.einsum("bm,bm->b", g, g.conj()).real - np.einsum("bn,bn->b", proj, proj.conj()).real,
            0.0,
        )
        l_i0 = np.hypot(nodes[1:, 0] - user_xy[0], nodes[1:, 1] - user_xy[1])
        los_i = sample_los_mask(l_i0, ch, los_user_rng)
        loss_i = np.where(
            los_i, path_loss(l_i0, LinkType.LOS, ch), path_loss(l_i0, LinkType.NLOS, ch)
        )
        interference = float(((split.P_s * g_beam + split.P_n * g_noise) * loss_i).sum())
    else:
        interference = 0.0

    sinr_user = signal / (interference + params.sigma_x2)
    covered = sinr_user >= params.beta_t

    # eavesdroppers: exact-law gains against the wiretapped beam and every
    # node's noise basis; node 0's signal and noise share one link
    eve_rng = substream(seed, trial_index, Stream.EVE_GEOMETRY)
    n_eves = int(eve_rng.poisson(params.lambda_e * math.pi * window * window))
    if n_eves > 0:
        radii = window * np.sqrt(eve_rng.random(n_eves))
        angles = 2.0 * math.pi * eve_rng.random(n_eves)
        eve_xy = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        l_ie = np.hypot(
            eve_xy[:, 0, None] - nodes[None, :, 0], eve_xy[:, 1, None] - nodes[None, :, 1]
        )
        los_e = sample_los_mask(l_ie, ch, substream(seed, trial_index, Stream.LOS_EVE))
        loss_e = np.where(
            los_e, path_loss(l_ie, LinkType.LOS, ch), path_loss(l_ie, LinkType.NLOS, ch)
        )
        gain_rng = substream(seed, trial_index, Stream.EVE_GAINS)
        sig_gain = gain_rng.exponential(1.0, n_eves)
        an_gain = gain_rng.gamma(mn, 1.0, (n_eves, n_other + 1))
        jam = split.P_n * (an_gain * loss_e).sum(axis=1) + params.sigma_e2
        sinr_eves = split.P_s * sig_gain * loss_e[:, 0] / jam
        max_sinr_eve = float(sinr_eves.max())
    else:
        max_sinr_eve = float("-inf")
    secret = max_sinr_eve < params.beta_e

    outcome = TrialOutcome(
        covered=bool(covered),
        secret=bool(secret),
        sinr_user=float(sinr_user),
        max_sinr_eve=max_sinr_eve,
    )
    if not diagnostics:
        return outcome

    own_signal = float(abs(own_row[0]) ** 2)
    beam_leak = max(h_gain - own_signal, 0.0)
    h00 = C[0, 0]
    an_leak = max(
        float(np.vdot(h00, h00).real) - float(np.linalg.norm(Q1[0].conj().T @ h00) ** 2), 0.0
    )
    detail = {
        "n_nodes": n_other + 1,
        "n_eves": n_eves,
        "palm_rejections": pattern.palm_rejections,
        "degenerate_resamples": resamples,
        "intra_beam_leakage_ratio": beam_leak / own_signal,
        "own_an_leakage_ratio": an_leak / own_signal,
    }
    return outcome, detail


def _count_chunk(args) -> np.ndarray:
    params, cfg, start, stop = args
    counts = np.zeros(3, dtype=np.int64)
    for index in range(start, stop):
        out = run_trial(params, cfg, index)
        counts[0] += out.covered
        counts[1] += out.secret
        counts[2] += out.covered and out.secret
    return counts


def _run_counts(params: SystemParams, cfg: SimConfig, workers: int | None = None) -> tuple[int, int, int]:
    """(covered, secret, both) counters over the configured trials.

    The reduction is a plain integer sum over disjoint index ranges, so
    the totals are identical for every worker count and chunking.
    """
    trials = int(cfg.trials)
    if workers is None or int(workers) <= 1:
        counts = _count_chunk((params, cfg, 0, trials))
        return int(counts[0]), int(counts[1]), int(counts[2])
    workers = min(int(workers), trials)
    n_chunks = min(trials, workers * 4)
    edges = np.linspace(0, trials, n_chunks + 1, dtype=int)
    jobs = [(params, cfg, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with get_context("fork").Pool(workers) as pool:
        parts = pool.map(_count_chunk, jobs)
    total = np.sum(parts, axis=0)
    return int(total[0]), int(total[1]), int(total[2])


def _certain(cfg: SimConfig) -> MetricEstimate:
    return MetricEstimate(
        value=1.0, ci_low=1.0, ci_high=1.0, trials=int(cfg.trials), seed=int(cfg.master_seed)
    )


def estimate_cp(params: SystemParams, cfg: SimConfig, workers: int | None = None) -> MetricEstimate:
    """Fraction of trials whose typical user clears the rate threshold."""
    if params.beta_t == 0.0:
        # SINR is nonnegative, so a zero threshold is an identity, not a sample
        return _certain(cfg)
    covered, _, _ = _run_counts(params, cfg, workers)
    return MetricEstimate.from_counts(covered, int(cfg.trials), cfg.confidence_level, int(cfg.master_seed))


def estimate_sp(params: SystemParams, cfg: SimConfig, workers: int | None = None) -> MetricEstimate:
    """Fraction of trials where every eavesdropper stays below threshold."""
    if params.lambda_e == 0.0:
        return _certain(cfg)
    _, secret, _ = _run_counts(params, cfg, workers)
    return MetricEstimate.from_counts(secret, int(cfg.trials), cfg.confidence_level, int(cfg.master_seed))


def estimate_st(params: SystemParams, cfg: SimConfig, workers: int | None = None) -> tuple[float, float]:
    """Area secrecy throughput estimates: (independence product, joint).

    The product form multiplies the two marginal frequencies, matching how
    the closed-form backend composes its factors; the joint form uses the
    per-trial conjunction and is reported so the independence gap stays
    observable.
    """
    if params.R_s == 0.0:
        return 0.0, 0.0
    covered, secret, both = _run_counts(params, cfg, workers)
    trials = int(cfg.trials)
    scale = params.lambda_u * params.N * params.R_s
    return (
        scale * (covered / trials) * (secret / trials),
        scale * (both / trials),
    )


def estimate_all(
    params: SystemParams, cfg: SimConfig, workers: int | None = None
) -> tuple[MetricEstimate, MetricEstimate, float, float]:
    """All three metrics from one shared trial batch.

    Returns (coverage, secrecy, st_product, st_joint). The exact identity
    fast paths match the individual estimators.
    """
    covered, secret, both = _run_counts(params, cfg, workers)
    trials = int(cfg.trials)
    confidence = cfg.confidence_level
    seed = int(cfg.master_seed)
    if params.beta_t == 0.0:
        cp_s = _certain(cfg)
    else:
        cp_s = MetricEstimate.from_counts(covered, trials, confidence, seed)
    if params.lambda_e == 0.0:
        sp_s = _certain(cfg)
    else:
        sp_s = MetricEstimate.from_counts(secret, trials, confidence, seed)
    scale = params.lambda_u * params.N * params.R_s
    return cp_s, sp_s, scale * cp_s.value * sp_s.value, scale * (both / trials)


def compare(
    params: SystemParams,
    cfg: SimConfig,
    quad: QuadratureSpec | None = None,
    tolerance: float = 0.05,
    workers: int | None = None,
) -> dict:
    """Both backends at one configuration, with gaps and a verdict.

    Runs the trial batch once and derives all three simulated metrics from
    its counters. The report carries no timing, so a fixed seed makes it
    byte-identical across runs and worker counts.
    """
    if not tolerance > 0.0:
        raise ConfigError(f"tolerance must be positive, got {tolerance}")
    cp_a = coverage_probability(params, quad)
    sp_a = secrecy_probability(params, quad)
    st_a = secrecy_throughput(params, quad)

    cp_s, sp_s, st_product, st_joint = estimate_all(params, cfg, workers)
    trials = int(cfg.trials)
    confidence = cfg.confidence_level
    seed = int(cfg.master_seed)

    gap_cp = abs(cp_a - cp_s.value)
    gap_sp = abs(sp_a - sp_s.value)
    return {
        "trials": trials,
        "seed": seed,
        "confidence_level": confidence,
        "tolerance": tolerance,
        "analytic": {"cp": cp_a, "sp": sp_a, "st": st_a},
        "simulated": {
            "cp": {"value": cp_s.value, "ci_low": cp_s.ci_low, "ci_high": cp_s.ci_high},
            "sp": {"value": sp_s.value, "ci_low": sp_s.ci_low, "ci_high": sp_s.ci_high},
            "st_product": st_product,
            "st_joint": st_joint,
        },
        "gaps": {"cp": gap_cp, "sp": gap_sp},
        "within_tolerance": bool(gap_cp <= tolerance and gap_sp <= tolerance),
    }
