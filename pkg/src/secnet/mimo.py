"""Small-scale MIMO layer: Rayleigh fading, zero-forcing, AN null space.

Each transmitter with M antennas serves N single-antenna users through a
zero-forcing precoder W and radiates artificial noise through G, an
orthonormal basis of the null space of the served channels. W is built
from the row-normalized channel matrix (normalize rows, pseudo-invert,
normalize columns; the order matters and is fixed). Columns of W live in
the span of the served channels, so W and G are mutually orthogonal.

Batched variants process many clusters in one call; the scalar API is the
reference the batched path is tested against.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ConfigError, DegenerateChannelError

__all__ = [
    "FadingVector",
    "PrecoderSet",
    "PowerSplit",
    "EffectiveGains",
    "sample_fading",
    "sample_fading_batch",
    "zf_precoder",
    "zf_precoder_batch",
    "effective_gains",
    "power_split",
]

_COND_LIMIT = 1e12
_ORTHO_TOL = 1e-10


@dataclass(frozen=True, slots=True)
class FadingVector:
    """One M-antenna channel draw, entries CN(0,1)."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ConfigError(f"fading vector must be 1-D with length >= 2, got shape {arr.shape}")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ConfigError("fading vector entries must be finite")
        object.__setattr__(self, "entries", arr)

    def __len__(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, slots=True)
class PrecoderSet:
    """Beamforming matrix W (M x N, unit columns) and AN basis G (M x M-N)."""

    W: np.ndarray
    G: np.ndarray

    def __post_init__(self) -> None:
        W = np.asarray(self.W, dtype=complex)
        G = np.asarray(self.G, dtype=complex)
        if W.ndim != 2 or G.ndim != 2 or W.shape[0] != G.shape[0]:
            raise ConfigError("W and G must be 2-D with a shared antenna dimension")
        M, N = W.shape
        if G.shape[1] != M - N or not 1 <= N <= M - 1:
            raise ConfigError(f"precoder shapes inconsistent: W {W.shape}, G {G.shape}")
        if np.max(np.abs(np.linalg.norm(W, axis=0) - 1.0)) > _ORTHO_TOL:
            raise ConfigError("columns of W must be unit norm")
        if np.max(np.abs(G.conj().T @ G - np.eye(M - N))) > _ORTHO_TOL:
            raise ConfigError("G must have orthonormal columns")
        if np.max(np.abs(G.conj().T @ W)) > _ORTHO_TOL:
            raise ConfigError("G must be orthogonal to the beamforming columns")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "G", G)


@dataclass(frozen=True, slots=True)
class PowerSplit:
    """Per-stream signal power P_s and per-dimension AN power P_n."""

    P: float
    phi: float
    M: int
    N: int
    P_s: float
    P_n: float

    def __post_init__(self) -> None:
        if not 1 <= int(self.N) <= int(self.M) - 1:
            raise ConfigError(f"need 1 <= N <= M-1, got M={self.M}, N={self.N}")
        if not 0.0 < self.phi < 1.0:
            raise ConfigError(f"phi must lie strictly inside (0, 1), got {self.phi}")
        if not self.P > 0.0:
            raise ConfigError(f"total power must be positive, got {self.P}")
        for name, got, want in (
            ("P_s", self.P_s, self.phi * self.P / self.N),
            ("P_n", self.P_n, (1.0 - self.phi) * self.P / (self.M - self.N)),
        ):
            if abs(got - want) > 1e-12 * want:
                raise ConfigError(f"{name}={got} inconsistent with P={self.P}, phi={self.phi}")

    @property
    def zeta(self) -> float:
        """1/P_s - 1/P_n; zero exactly when phi = N/M."""
        return 1.0 / self.P_s - 1.0 / self.P_n


@dataclass(frozen=True, slots=True)
class EffectiveGains:
    """Scalar gains after precoding, for one cluster and one observer."""

    h: float  # own-signal gain of the first served user
    g_I: float  # observer's total gain through the N beams
    g_N: float  # observer's total gain through the AN basis
    eve_stream: float  # observer's gain on the first beam alone


def power_split(P: float, phi: float, M: int, N: int) -> PowerSplit:
    """Split total power P into N signal streams and M-N noise dimensions."""
    if not 1 <= int(N) <= int(M) - 1:
        raise ConfigError(f"need 1 <= N <= M-1, got M={M}, N={N}")
    if not 0.0 < phi < 1.0:
        raise ConfigError(f"phi must lie strictly inside (0, 1), got {phi}")
    if not P > 0.0:
        raise ConfigError(f"total power must be positive, got {P}")
    return PowerSplit(P=P, phi=phi, M=int(M), N=int(N), P_s=phi * P / N, P_n=(1.0 - phi) * P / (M - N))


def sample_fading_batch(shape, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. CN(0,1) array of the given shape (real/imag variance 1/2 each)."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def sample_fading(M: int, rng: np.random.Generator) -> FadingVector:
    """One M-antenna Rayleigh fading vector."""
    if int(M) < 2:
        raise ConfigError(f"need at least 2 antennas, got {M}")
    return FadingVector(sample_fading_batch((int(M),), rng))


def _as_matrix(channels) -> np.ndarray:
    rows = [c.entries if isinstance(c, FadingVector) else np.asarray(c, dtype=complex) for c in channels]
    C = np.stack(rows)
    if C.ndim != 2:
        raise ConfigError("channels must be a sequence of 1-D vectors")
    return C


def zf_precoder_batch(C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Zero-forcing precoders for a stack of clusters.

    C has shape (B, N, M), one row per served channel. Returns W with
    shape (B, M, N) (unit columns) and Q1 with shape (B, M, N), an
    orthonormal basis of each cluster's channel span. The AN basis is the
    complement of Q1, so an observer g has AN gain ||g||^2 - ||Q1^H g||^2
    without materializing the complement.
    """
    C = np.asarray(C, dtype=complex)
    if C.ndim != 3:
        raise ConfigError(f"expected a (clusters, N, M) stack, got shape {C.shape}")
    B, N, M = C.shape
    if not 1 <= N <= M - 1:
        raise ConfigError(f"need 1 <= N <= M-1, got M={M}, N={N}")
    norms = np.linalg.norm(C, axis=2, keepdims=True)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise DegenerateChannelError("zero or non-finite channel vector")
    Hbar = C.conj() / norms
    gram = Hbar @ Hbar.conj().transpose(0, 2, 1)
    cond = np.linalg.cond(gram)
    if np.any(cond > _COND_LIMIT) or not np.all(np.isfinite(cond)):
        worst = int(np.nanargmax(cond))
        raise DegenerateChannelError(f"channel set {worst} is numerically singular (cond={cond[worst]:.3e})")
    # Hbar^H gram^{-1} == (gram^{-1} Hbar)^H because gram is Hermitian
    W = np.linalg.solve(gram, Hbar).conj().transpose(0, 2, 1)
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    Q1 = np.linalg.qr(C.transpose(0, 2, 1), mode="reduced")[0]
    return W, Q1


def zf_precoder(channels) -> PrecoderSet:
    """Reference single-cluster precoder with an explicit AN basis."""
    C = _as_matrix(channels)
    W, _ = zf_precoder_batch(C[None])
    Q = np.linalg.qr(C.T, mode="complete")[0]
    out = PrecoderSet(W=W[0], G=Q[:, C.shape[0]:])
    # the type checks W and G against each other; nulling needs the channels
    nulls = C.conj() @ out.W
    np.fill_diagonal(nulls, 0.0)
    if np.max(np.abs(nulls)) > _ORTHO_TOL or np.max(np.abs(C.conj() @ out.G)) > _ORTHO_TOL:
        raise DegenerateChannelError("precoder failed its nulling tolerance")
    return out


def effective_gains(channels, eve_channel, precoders: PrecoderSet) -> EffectiveGains:
    """Post-precoding scalar gains for the first served user and one observer."""
    C = _as_matrix(channels)
    g = eve_channel.entries if isinstance(eve_channel, FadingVector) else np.asarray(eve_channel, dtype=complex)
    if C.shape[1] != precoders.W.shape[0] or g.shape != (precoders.W.shape[0],):
        raise ConfigError("channel / precoder dimensions disagree")
    own = C[0].conj() @ precoders.W
    beams = g.conj() @ precoders.W
    return EffectiveGains(
        h=float(np.vdot(own, own).real),
        g_I=float(np.vdot(beams, beams).real),
        g_N=float(np.linalg.norm(g.conj() @ precoders.G) ** 2),
        eve_stream=float(abs(beams[0]) ** 2),
    )
