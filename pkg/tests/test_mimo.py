"""MIMO layer tests.

Distribution checks use scipy.stats CDFs as the reference. The beam-sum
gain is checked on moments only: the N per-beam gains are individually
unit-exponential but positively correlated (the beam columns are not
mutually orthogonal), so the sum's variance exceeds N. The Gamma(N,1)
approximation the closed forms rely on is exercised where the tolerance
budget for it lives, in the acceptance suite.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import expon, gamma, kstest

from secnet.mimo import (
    EffectiveGains,
    FadingVector,
    PrecoderSet,
    effective_gains,
    power_split,
    sample_fading,
    sample_fading_batch,
    zf_precoder,
    zf_precoder_batch,
)
from secnet.montecarlo import Stream, substream
from secnet.params import ConfigError, DegenerateChannelError


def rng_for(test_id: int):
    return substream(9_0817, test_id, Stream.GENERIC)


def beam_gains(C, g, W):
    """||g^H W||^2 per batch entry, and the first-beam term alone."""
    amp = np.einsum("bm,bmn->bn", g.conj(), W)
    return np.einsum("bn,bn->b", amp, amp.conj()).real, np.abs(amp[:, 0]) ** 2


def test_sample_fading_api():
    h = sample_fading(6, rng_for(0))
    assert isinstance(h, FadingVector)
    assert len(h) == 6
    assert h.entries.dtype == complex
    again = sample_fading(6, rng_for(0))
    assert np.array_equal(h.entries, again.entries)


def test_sample_fading_rejects_single_antenna():
    with pytest.raises(ConfigError):
        sample_fading(1, rng_for(1))


def test_fading_moments():
    n, M = 40_000, 6
    z = sample_fading_batch((n, M), rng_for(2))
    parts = np.concatenate([z.real, z.imag], axis=1)
    cov = np.cov(parts.T)
    assert np.max(np.abs(cov - 0.5 * np.eye(2 * M))) < 4.0 / np.sqrt(n)
    norms = np.einsum("ij,ij->i", z, z.conj()).real
    se = np.sqrt(M / n)
    assert abs(norms.mean() - M) < 3.0 * se


def test_fading_norm_law():
    n, M = 20_000, 8
    z = sample_fading_batch((n, M), rng_for(3))
    norms = np.einsum("ij,ij->i", z, z.conj()).real
    assert kstest(norms, gamma(M).cdf).pvalue > 0.01


def test_zf_single_user_closed_form():
    h = sample_fading(2, rng_for(4))
    pre = zf_precoder([h])
    expected = h.entries / np.linalg.norm(h.entries)
    assert np.allclose(pre.W[:, 0], expected, atol=1e-12)
    gains = effective_gains([h], sample_fading(2, rng_for(5)), pre)
    assert gains.h == pytest.approx(np.linalg.norm(h.entries) ** 2, rel=1e-10)
    assert pre.G.shape == (2, 1)
    assert abs(h.entries.conj() @ pre.G[:, 0]) < 1e-10 * np.linalg.norm(h.entries)


def test_zf_invariants_random_cluster():
    M, N = 8, 4
    C = sample_fading_batch((N, M), rng_for(6))
    pre = zf_precoder(C)
    norms = np.linalg.norm(C, axis=1, keepdims=True)
    nulls = (C.conj() / norms) @ pre.W
    diag = np.diagonal(nulls).copy()
    np.fill_diagonal(nulls, 0.0)
    assert np.max(np.abs(nulls)) < 1e-10
    assert np.all(diag.real > 0.0) and np.max(np.abs(diag.imag)) < 1e-10
    assert np.max(np.abs(C.conj() @ pre.G)) < 1e-10
    assert np.max(np.abs(pre.G.conj().T @ pre.G - np.eye(M - N))) < 1e-10
    assert np.linalg.norm(pre.W, axis=0) == pytest.approx(np.ones(N), abs=1e-12)


def test_zf_rejects_rank_deficient_cluster():
    h = sample_fading_batch((4,), rng_for(7))
    other = sample_fading_batch((4,), rng_for(8))
    with pytest.raises(DegenerateChannelError):
        zf_precoder([h, h, other])
    with pytest.raises(DegenerateChannelError):
        zf_precoder([h, h * (1.0 + 1e-14), other])


def test_zf_rejects_bad_dimensions():
    C = sample_fading_batch((4, 4), rng_for(9))
    with pytest.raises(ConfigError):
        zf_precoder(C)  # N == M leaves no AN dimensions
    with pytest.raises(ConfigError):
        zf_precoder_batch(C)


def test_precoder_set_validation():
    C = sample_fading_batch((3, 6), rng_for(10))
    pre = zf_precoder(C)
    with pytest.raises(ConfigError):
        PrecoderSet(W=2.0 * pre.W, G=pre.G)
    with pytest.raises(ConfigError):
        PrecoderSet(W=pre.W, G=0.5 * pre.G)
    with pytest.raises(ConfigError):
        PrecoderSet(W=pre.W, G=np.roll(pre.W, 1, axis=1))


def test_effective_gains_consistency():
    M, N = 8, 4
    C = sample_fading_batch((N, M), rng_for(11))
    g = sample_fading(M, rng_for(12))
    pre = zf_precoder(C)
    gains = effective_gains(C, g, pre)
    assert isinstance(gains, EffectiveGains)
    own = C[0].conj() @ pre.W
    assert gains.h == pytest.approx(np.linalg.norm(own) ** 2, rel=1e-12)
    assert gains.h == pytest.approx(abs(own[0]) ** 2, rel=1e-8)  # other beams are nulled
    beams = g.entries.conj() @ pre.W
    assert gains.g_I == pytest.approx(np.linalg.norm(beams) ** 2, rel=1e-12)
    assert gains.eve_stream == pytest.approx(abs(beams[0]) ** 2, rel=1e-12)
    assert gains.eve_stream <= gains.g_I + 1e-15
    assert min(gains.h, gains.g_I, gains.g_N) >= 0.0


def test_effective_gains_phase_invariance():
    M, N = 6, 3
    C = sample_fading_batch((N, M), rng_for(13))
    g = sample_fading_batch((M,), rng_for(14))
    rng = rng_for(15)
    phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, N))
    base = effective_gains(C, g, zf_precoder(C))
    spun = effective_gains(C * phases[:, None], g * np.exp(1j * 0.7), zf_precoder(C * phases[:, None]))
    for field in ("h", "g_I", "g_N", "eve_stream"):
        assert getattr(spun, field) == pytest.approx(getattr(base, field), rel=1e-10)


def test_batch_matches_scalar_reference():
    B, M, N = 5, 6, 3
    C = sample_fading_batch((B, N, M), rng_for(16))
    g = sample_fading_batch((B, M), rng_for(17))
    W, Q1 = zf_precoder_batch(C)
    g_I, first = beam_gains(C, g, W)
    proj = np.einsum("bm,bmn->bn", g.conj(), Q1)
    g_N = np.einsum("bm,bm->b", g, g.conj()).real - np.einsum("bn,bn->b", proj, proj.conj()).real
    for b in range(B):
        ref = effective_gains(C[b], g[b], zf_precoder(C[b]))
        assert np.allclose(W[b], zf_precoder(C[b]).W, atol=1e-12)
        assert g_I[b] == pytest.approx(ref.g_I, rel=1e-10)
        assert first[b] == pytest.approx(ref.eve_stream, rel=1e-10)
        assert g_N[b] == pytest.approx(ref.g_N, rel=1e-9, abs=1e-12)


def test_own_gain_law():
    B, M, N = 20_000, 4, 2
    C = sample_fading_batch((B, N, M), rng_for(18))
    W, _ = zf_precoder_batch(C)
    own = np.einsum("bm,bmn->bn", C[:, 0].conj(), W)
    h = np.einsum("bn,bn->b", own, own.conj()).real
    assert kstest(h, gamma(M - N + 1).cdf).pvalue > 0.01


def test_an_and_first_beam_laws():
    B, M, N = 20_000, 8, 4
    C = sample_fading_batch((B, N, M), rng_for(19))
    g = sample_fading_batch((B, M), rng_for(20))
    W, Q1 = zf_precoder_batch(C)
    proj = np.einsum("bm,bmn->bn", g.conj(), Q1)
    g_N = np.einsum("bm,bm->b", g, g.conj()).real - np.einsum("bn,bn->b", proj, proj.conj()).real
    _, first = beam_gains(C, g, W)
    assert kstest(g_N, gamma(M - N).cdf).pvalue > 0.01
    assert kstest(first, expon.cdf).pvalue > 0.01


def test_beam_sum_moments():
    B, M, N = 20_000, 8, 4
    C = sample_fading_batch((B, N, M), rng_for(21))
    g = sample_fading_batch((B, M), rng_for(22))
    W, _ = zf_precoder_batch(C)
    g_I, _ = beam_gains(C, g, W)
    assert abs(g_I.mean() - N) < 3.0 * g_I.std() / np.sqrt(B)
    assert g_I.var() > N + 0.8  # correlated beams push the variance above N


def test_power_split_equal_point():
    ps = power_split(5.0, 0.5, 8, 4)
    assert ps.P_s == 0.625 and ps.P_n == 0.625
    assert ps.N * ps.P_s + (ps.M - ps.N) * ps.P_n == 5.0
    assert ps.zeta == 0.0


@settings(max_examples=60, deadline=None)
@given(
    phi=st.floats(1e-6, 1.0 - 1e-6),
    P=st.floats(1e-3, 1e3),
    M=st.integers(2, 16),
    data=st.data(),
)
def test_power_split_identity(phi, P, M, data):
    N = data.draw(st.integers(1, M - 1))
    ps = power_split(P, phi, M, N)
    assert ps.N * ps.P_s + (ps.M - ps.N) * ps.P_n == pytest.approx(P, rel=1e-12)
    assert ps.P_s > 0.0 and ps.P_n > 0.0


def test_power_split_rejects_bad_arguments():
    for phi in (0.0, 1.0, -0.1, 1.3):
        with pytest.raises(ConfigError):
            power_split(5.0, phi, 8, 4)
    with pytest.raises(ConfigError):
        power_split(0.0, 0.5, 8, 4)
    with pytest.raises(ConfigError):
        power_split(5.0, 0.5, 8, 8)
    with pytest.raises(ConfigError):
        power_split(5.0, 0.5, 8, 0)


def test_fading_vector_validation():
    with pytest.raises(ConfigError):
        FadingVector(np.zeros((2, 2), dtype=complex))
    with pytest.raises(ConfigError):
        FadingVector(np.array([1.0 + 0j]))
    with pytest.raises(ConfigError):
        FadingVector(np.array([np.nan + 0j, 1.0 + 0j]))
