import math

import numpy as np
import pytest

from ecg_nlwt.config import NlmParams
from ecg_nlwt.errors import InvalidParameter, OutOfBounds, SignalTooShort
from ecg_nlwt.nlm import denoise_nlm, nlm_weight, patch_distance
from ecg_nlwt.signal_model import NoiseSpec, Signal, add_awgn, snr_improvement


def brute_force_nlm(x, P, S, mu, exclude_center=False):
    """Direct double loop over every (i, j) pair."""
    N = x.size
    out = np.empty(N)
    for i in range(N):
        weights, values = [], []
        for j in range(max(0, i - S), min(N, i + S + 1)):
            if j == i:
                continue
            dist, count = patch_distance(x, i, j, P)
            weights.append(math.exp(-dist / (2.0 * count * mu * mu)))
            values.append(x[j])
        self_weight = max(weights) if exclude_center else 1.0
        num = self_weight * x[i] + sum(w * v for w, v in zip(weights, values))
        den = self_weight + sum(weights)
        out[i] = num / den if den > 0 else x[i]
    return out


class TestWeights:
    def test_self_weight_is_one(self, rng):
        x = rng.normal(size=50)
        assert nlm_weight(x, 20, 20, NlmParams(mu=0.3)) == 1.0

    def test_symmetric(self, rng):
        x = rng.normal(size=80)
        p = NlmParams(patch_half_width=4, mu=0.5)
        for i, j in [(10, 40), (0, 79), (3, 77), (50, 51)]:
            assert nlm_weight(x, i, j, p) == pytest.approx(nlm_weight(x, j, i, p), rel=1e-15)

    def test_unit_exponent(self):
        # patches of 3 samples, each pair differing by sqrt(2)·mu
        mu = 0.5
        x = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, mu * math.sqrt(2.0), mu * math.sqrt(2.0), mu * math.sqrt(2.0), 0.0])
        dist, count = patch_distance(x, 1, 7, 1)
        assert count == 3 and dist == pytest.approx(6.0 * mu * mu)
        assert nlm_weight(x, 1, 7, NlmParams(patch_half_width=1, mu=mu)) == pytest.approx(math.exp(-1.0))

    def test_flat_kernel(self):
        x = np.array([0.0, 0.0, 0.0, 1.0, 2.0, 3.0])
        assert patch_distance(x, 1, 4, 1) == (pytest.approx(1.0 + 4.0 + 9.0), 3)

    def test_clamped_at_the_edges(self):
        x = np.arange(10.0)
        dist, count = patch_distance(x, 0, 9, 3)
        assert count == 1 and dist == 81.0
        dist, count = patch_distance(x, 1, 5, 3)
        assert count == 5

    def test_out_of_bounds(self):
        with pytest.raises(OutOfBounds):
            patch_distance(np.zeros(5), 0, 5, 1)
        with pytest.raises(OutOfBounds):
            nlm_weight(np.zeros(5), -1, 2, NlmParams(mu=1.0))

    def test_bandwidth_is_required_or_estimated(self, rng):
        x = rng.normal(size=200)
        assert 0.0 < nlm_weight(x, 30, 60, NlmParams(patch_half_width=3)) < 1.0
        with pytest.raises(InvalidParameter):
            nlm_weight(x, 1, 2, NlmParams(mu=0.0))


class TestDenoiseNlm:
    def test_matches_brute_force(self, rng):
        x = rng.normal(size=60)
        for P, S, mu in [(2, 5, 0.7), (3, 10, 1.5), (1, 20, 0.4)]:
            fast = denoise_nlm(Signal(x, 360.0), NlmParams(patch_half_width=P, search_half_width=S, mu=mu)).samples
            np.testing.assert_allclose(fast, brute_force_nlm(x, P, S, mu), atol=1e-10)

    def test_matches_brute_force_without_the_center(self, rng):
        x = rng.normal(size=40)
        p = NlmParams(patch_half_width=2, search_half_width=6, mu=0.8, exclude_center=True)
        fast = denoise_nlm(Signal(x, 360.0), p).samples
        np.testing.assert_allclose(fast, brute_force_nlm(x, 2, 6, 0.8, exclude_center=True), atol=1e-10)

    def test_constant_is_a_fixed_point(self):
        x = Signal(np.full(300, 0.37), 360.0)
        out = denoise_nlm(x, NlmParams(patch_half_width=5, search_half_width=40, mu=0.1))
        assert np.all(out.samples == 0.37)

    def test_stays_inside_the_window_range(self, rng):
        x = rng.normal(size=10_000) * rng.uniform(0.1, 3.0, size=10_000)
        S = 25
        out = denoise_nlm(Signal(x, 360.0), NlmParams(patch_half_width=4, search_half_width=S, mu=0.5)).samples
        for i in range(x.size):
            window = x[max(0, i - S):i + S + 1]
            assert window.min() - 1e-12 <= out[i] <= window.max() + 1e-12

    def test_vanishing_weights_keep_the_sample(self):
        x = np.zeros(30)
        x[15] = 1e6
        p = NlmParams(patch_half_width=1, search_half_width=3, mu=1e-3, exclude_center=True)
        out = denoise_nlm(Signal(x, 360.0), p).samples
        assert out[15] == 1e6

    def test_periodic_signal_improves(self):
        t = np.arange(3000)
        clean = Signal(np.sin(2 * np.pi * t / 150.0), 360.0)
        noisy, sigma = add_awgn(clean, NoiseSpec(10.0, 8))
        out = denoise_nlm(noisy, NlmParams(patch_half_width=5, search_half_width=300), sigma=sigma)
        assert snr_improvement(clean, noisy, out) > 3.0

    def test_sigma_is_estimated_when_missing(self, noisy_synth, small_nlm):
        noisy, sigma = noisy_synth
        assert len(denoise_nlm(noisy, small_nlm)) == len(noisy)

    def test_short_signal(self):
        with pytest.raises(SignalTooShort):
            denoise_nlm(Signal(np.ones(30), 360.0), NlmParams(patch_half_width=5, search_half_width=10, mu=1.0))
        assert len(denoise_nlm(Signal(np.ones(31), 360.0), NlmParams(patch_half_width=5, search_half_width=10, mu=1.0))) == 31
