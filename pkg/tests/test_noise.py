"""Statistical and exactness tests for the Langevin field generator."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from scipy import fft

from qreadout.noise import (
    LangevinConfig,
    init_stationary,
    ou_decay,
    ou_kick_std,
    ou_step,
    sample_path,
    stationary_std,
    theoretical_autocorrelation,
    white_field_std,
)

FIG_NOISE = LangevinConfig(s_x=1 / 4096, s_y=1 / 4096, s_z=1 / 4096, alpha=1 / 16)


def autocovariance(x, max_lag):
    """Biased sample autocovariance at lags 0..max_lag via FFT."""
    x = x - x.mean()
    n = len(x)
    m = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(x, m)
    acov = fft.irfft(spectrum * spectrum.conj(), m)[: max_lag + 1]
    return acov / n


class TestConfig:
    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            LangevinConfig(s_x=-1e-9, s_y=0, s_z=0, alpha=1.0)
        with pytest.raises(ValueError):
            LangevinConfig(s_x=0, s_y=0, s_z=0, alpha=0.0)
        with pytest.raises(ValueError):
            LangevinConfig(s_x=math.inf, s_y=0, s_z=0, alpha=1.0)

    def test_marginal_variance_formula(self):
        assert_allclose(stationary_std(FIG_NOISE)[0] ** 2, 1 / 131072, rtol=1e-12)
        assert_allclose(1 / 131072, 7.63e-6, rtol=1e-3)


class TestStationaryInit:
    def test_zero_psd_gives_zero_fields(self):
        config = LangevinConfig(s_x=0, s_y=0, s_z=0, alpha=0.5)
        state = init_stationary(config, np.random.default_rng(0))
        assert np.all(state.h == 0.0)

    def test_same_seed_same_state(self):
        a = init_stationary(FIG_NOISE, np.random.default_rng(42))
        b = init_stationary(FIG_NOISE, np.random.default_rng(42))
        assert np.array_equal(a.h, b.h)

    def test_marginal_variance_sampled(self):
        rng = np.random.default_rng(7)
        draws = np.array([init_stationary(FIG_NOISE, rng).h for _ in range(20000)])
        assert_allclose(draws.var(), 1 / 131072, rtol=0.03)
        assert abs(draws.mean()) < 3 * math.sqrt(1 / 131072 / draws.size)


class TestOuStep:
    def test_zero_dt_is_identity(self):
        state = init_stationary(FIG_NOISE, np.random.default_rng(3))
        h_before = state.h.copy()
        after = ou_step(state, FIG_NOISE, 0.0)
        assert np.array_equal(after.h, h_before)

    def test_half_steps_compose_exactly(self):
        # Deterministic decay and innovation variance must agree to
        # rounding between one dt step and two dt/2 steps.
        for alpha, dt in [(1 / 16, 1.0), (3.7, 0.01), (1 / 256, 128.0)]:
            config = LangevinConfig(s_x=0.2, s_y=0.1, s_z=0.05, alpha=alpha)
            d_half = ou_decay(alpha, dt / 2)
            assert_allclose(d_half * d_half, ou_decay(alpha, dt), rtol=1e-12)
            k_half = ou_kick_std(config, dt / 2) ** 2
            composed = k_half * ou_decay(alpha, dt) + k_half
            assert_allclose(composed, ou_kick_std(config, dt) ** 2, rtol=1e-12)

    @given(
        alpha=st.floats(min_value=1e-4, max_value=1e3),
        dt=st.floats(min_value=1e-6, max_value=1e3),
    )
    def test_kick_variance_interpolates_to_stationary(self, alpha, dt):
        config = LangevinConfig(s_x=1.0, s_y=0.5, s_z=0.0, alpha=alpha)
        kick = ou_kick_std(config, dt)
        sigma = stationary_std(config)
        assert np.all(kick <= sigma + 1e-15)
        target = sigma**2 * -math.expm1(-2 * alpha * dt)
        assert_allclose(kick**2, target, rtol=1e-12, atol=1e-300)

    def test_full_decorrelation_limit(self):
        # alpha*dt huge: the memory factor underflows to exactly zero
        # and the innovation is a fresh stationary sample.
        config = LangevinConfig(s_x=0.3, s_y=0.3, s_z=0.3, alpha=1.0)
        assert ou_decay(1.0, 1e4) == 0.0
        assert_allclose(ou_kick_std(config, 1e4), stationary_std(config), rtol=1e-15)

    def test_rejects_negative_dt(self):
        state = init_stationary(FIG_NOISE, np.random.default_rng(1))
        with pytest.raises(ValueError):
            ou_step(state, FIG_NOISE, -1.0)

    def test_axes_stay_independent(self):
        # Near-independent successive samples (alpha*dt = 8) so plain
        # Pearson bounds apply.
        config = LangevinConfig(s_x=1.0, s_y=1.0, s_z=1.0, alpha=1.0)
        state = init_stationary(config, np.random.default_rng(11))
        n = 20000
        samples = np.empty((n, 3))
        for i in range(n):
            state = ou_step(state, config, 8.0)
            samples[i] = state.h
        corr = np.corrcoef(samples.T)
        off_diagonal = corr[~np.eye(3, dtype=bool)]
        assert np.all(np.abs(off_diagonal) < 3.0 / math.sqrt(n))


class TestAutocorrelation:
    def test_theoretical_values(self):
        config = LangevinConfig(s_x=1 / 4096, s_y=0.5, s_z=0.0, alpha=1 / 16)
        at_zero = theoretical_autocorrelation(config, "x", 0.0)
        assert_allclose(at_zero, 1 / 131072, rtol=1e-12)
        assert_allclose(
            theoretical_autocorrelation(config, "x", 16.0), at_zero * math.exp(-1), rtol=1e-12
        )
        assert theoretical_autocorrelation(config, "z", 5.0) == 0.0
        assert_allclose(
            theoretical_autocorrelation(config, 1, 2.0),
            0.5 * (1 / 32) * math.exp(-2 / 16),
            rtol=1e-12,
        )

    def test_long_path_matches_kernel(self):
        # 1e7 steps at alpha = 1/256, dt = 1; the sampled autocovariance
        # must track S (alpha/2) e^{-alpha k} within 2% of the lag-0
        # value out to k = 3/alpha.
        alpha = 1 / 256
        config = LangevinConfig(s_x=1.0, s_y=0.0, s_z=0.0, alpha=alpha)
        path = sample_path(config, "x", 10**7, 1.0, np.random.default_rng(2024))
        max_lag = int(3 / alpha)
        measured = autocovariance(path, max_lag)
        lags = np.arange(max_lag + 1)
        expected = 0.5 * alpha * np.exp(-alpha * lags)
        scale = 0.5 * alpha
        assert np.max(np.abs(measured - expected)) < 0.02 * scale


class TestSamplePath:
    def test_matches_manual_recursion(self):
        config = LangevinConfig(s_x=0.7, s_y=0.0, s_z=0.0, alpha=0.3)
        n, dt = 50, 0.8
        path = sample_path(config, "x", n, dt, np.random.default_rng(5))
        rng = np.random.default_rng(5)
        h = math.sqrt(0.7 * 0.15) * rng.standard_normal()
        decay = math.exp(-0.3 * dt)
        kick = math.sqrt(0.7 * 0.15 * -math.expm1(-2 * 0.3 * dt))
        innovations = kick * rng.standard_normal(n)
        expected = np.empty(n)
        for i in range(n):
            h = h * decay + innovations[i]
            expected[i] = h
        assert_allclose(path, expected, rtol=1e-12)

    def test_stationary_variance_large_sample(self):
        # alpha*dt = 8 decorrelates successive samples, so the sample
        # variance over 1e6 points resolves S alpha / 2 to the 1% level.
        config = LangevinConfig(s_x=1 / 4096, s_y=0, s_z=0, alpha=1 / 16)
        path = sample_path(config, "x", 10**6, 128.0, np.random.default_rng(77))
        assert_allclose(path.var(), 1 / 131072, rtol=0.01)


class TestWhiteMode:
    def test_per_step_scale(self):
        config = LangevinConfig(s_x=0.5, s_y=0.125, s_z=0.0, alpha=1.0, white=True)
        assert_allclose(white_field_std(config, 0.25), [math.sqrt(2.0), math.sqrt(0.5), 0.0])

    def test_steps_are_memoryless(self):
        config = LangevinConfig(s_x=1.0, s_y=1.0, s_z=1.0, alpha=1.0, white=True)
        state = init_stationary(config, np.random.default_rng(9))
        assert np.all(state.h == 0.0)
        n, dt = 50000, 0.5
        samples = np.empty(n)
        for i in range(n):
            state = ou_step(state, config, dt)
            samples[i] = state.h[0]
        assert_allclose(samples.var(), 1.0 / dt, rtol=0.03)
        lag1 = np.mean(samples[1:] * samples[:-1]) / samples.var()
        assert abs(lag1) < 3.0 / math.sqrt(n)

    def test_path_variance(self):
        config = LangevinConfig(s_x=2.0, s_y=0, s_z=0, alpha=1.0, white=True)
        path = sample_path(config, "x", 10**6, 0.1, np.random.default_rng(13))
        assert_allclose(path.var(), 20.0, rtol=0.01)
