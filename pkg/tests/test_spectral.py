import numpy as np
import pytest
from hypothesis import given, strategies as st

from earbreath import (DegenerateWindowError, InsufficientDataError,
                       ParameterError, SampleBlock)
from earbreath.spectral import (FeatureSeries, Spectrogram,
                                average_breath_spectrum, breathing_feature,
                                combine_features, estimate_rr,
                                log_spectral_energy, prepare_feature,
                                quantile_mask, spectral_dissimilarity, stft)


def spec_from(mags, frame_rate=125.0):
    mags = np.atleast_2d(np.asarray(mags, dtype=float))
    return Spectrogram(mags, frame_rate, 15.625, 128, 16)


class TestStft:
    def test_zero_signal(self):
        out = stft(SampleBlock(np.zeros(2000), 2000), 128, 16)
        assert np.all(out.magnitudes == 0)
        assert out.n_bins == 65
        assert out.frame_rate_hz == pytest.approx(125.0)

    def test_tone_lands_on_bin_16(self):
        t = np.arange(2000) / 2000
        out = stft(SampleBlock(np.sin(2 * np.pi * 250 * t), 2000), 128, 16)
        # 250 Hz / (2000/128) Hz per bin = bin 16, every frame
        assert np.all(np.argmax(out.magnitudes, axis=1) == 16)

    def test_impulse_gives_flat_spectrum(self):
        x = np.zeros(128)
        x[40] = 1.0
        out = stft(SampleBlock(x, 2000), 128, 128)
        expected = np.hamming(128)[40]
        assert np.allclose(out.magnitudes[0], expected, rtol=1e-12)

    def test_frame_coverage(self):
        out = stft(SampleBlock(np.zeros(128 + 16 * 9), 2000), 128, 16)
        assert out.n_frames == 10

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            stft(SampleBlock(np.zeros(100), 2000), 128, 16)


class TestLogSpectralEnergy:
    def test_single_unit_bin(self):
        mags = np.zeros((1, 65))
        mags[0, 3] = 1.0
        p = log_spectral_energy(spec_from(mags))
        assert p.values[0] == pytest.approx(0.0)

    def test_all_unit_bins(self):
        p = log_spectral_energy(spec_from(np.ones((1, 65))))
        assert p.values[0] == pytest.approx(np.log(65) / 65)
        assert p.values[0] == pytest.approx(0.0642, abs=1e-4)

    def test_zero_frame_floored(self):
        p = log_spectral_energy(spec_from(np.zeros((1, 65))), floor=1e-12)
        assert p.values[0] == pytest.approx(np.log(1e-12) / 65)
        assert p.values[0] == pytest.approx(-0.425, abs=1e-3)


class TestQuantileMask:
    def test_constant_series_keeps_all(self):
        idx = quantile_mask(np.full(10, 3.3), 0.85)
        assert np.array_equal(idx, np.arange(10))

    def test_ramp_retains_top_15(self):
        idx = quantile_mask(np.arange(100.0), 0.85)
        assert np.array_equal(idx, np.arange(85, 100))

    def test_single_element(self):
        assert np.array_equal(quantile_mask(np.array([2.0]), 0.85), [0])

    def test_never_empty(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            vals = rng.standard_normal(rng.integers(1, 40))
            assert len(quantile_mask(vals, 0.99)) >= 1

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50),
           st.floats(0.05, 0.95), st.floats(0.05, 0.95))
    def test_monotone_in_q(self, values, q1, q2):
        lo, hi = sorted((q1, q2))
        vals = np.asarray(values)
        set_hi = set(quantile_mask(vals, hi).tolist())
        set_lo = set(quantile_mask(vals, lo).tolist())
        assert set_hi <= set_lo


class TestAverageBreathSpectrum:
    def test_single_frame(self):
        mags = np.array([[3.0, 4.0]])
        avg = average_breath_spectrum(spec_from(mags), [0], p_norm=8)
        norm = (3.0 ** 8 + 4.0 ** 8) ** (1 / 8)
        assert np.allclose(avg, mags[0] / norm)

    def test_two_identical_frames(self):
        mags = np.array([[1.0, 2.0], [1.0, 2.0]])
        avg = average_breath_spectrum(spec_from(mags), [0, 1])
        norm = (1.0 + 2.0 ** 8) ** (1 / 8)
        assert np.allclose(avg, mags[0] / norm)

    def test_unit_basis_frames(self):
        mags = np.array([[1.0, 0.0], [0.0, 1.0]])
        avg = average_breath_spectrum(spec_from(mags), [0, 1], p_norm=8)
        assert np.allclose(avg, [0.5, 0.5])

    def test_zero_frames_skipped(self):
        mags = np.array([[1.0, 0.0], [0.0, 0.0]])
        avg = average_breath_spectrum(spec_from(mags), [0, 1])
        assert np.allclose(avg, [1.0, 0.0])

    def test_all_zero_degenerate(self):
        with pytest.raises(DegenerateWindowError):
            average_breath_spectrum(spec_from(np.zeros((2, 2))), [0, 1])

    def test_empty_mask_rejected(self):
        with pytest.raises(ParameterError):
            average_breath_spectrum(spec_from(np.ones((2, 2))), [])


class TestSpectralDissimilarity:
    def test_matching_frame_hits_floor(self):
        mags = np.array([[1.0, 0.0]])
        avg = np.array([1.0, 0.0])
        d = spectral_dissimilarity(spec_from(mags), avg, floor=1e-12)
        assert d.values[0] == pytest.approx(np.log(1e-12) / 2)

    def test_two_bin_example(self):
        mags = np.array([[1.0, 0.0]])
        d = spectral_dissimilarity(spec_from(mags), np.array([0.5, 0.5]))
        assert d.values[0] == pytest.approx(0.5 * np.log(0.5))
        assert d.values[0] == pytest.approx(-0.3466, abs=1e-4)

    def test_gain_invariance_exact(self):
        rng = np.random.default_rng(3)
        mags = np.abs(rng.standard_normal((12, 65)))
        avg = average_breath_spectrum(spec_from(mags), np.arange(12))
        d1 = spectral_dissimilarity(spec_from(mags), avg)
        d4 = spectral_dissimilarity(spec_from(mags * 4.0), avg)
        assert np.allclose(d1.values, d4.values, rtol=1e-12, atol=0)

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            spectral_dissimilarity(spec_from(np.ones((1, 3))), np.ones(2))


class TestCombineFeatures:
    def test_identical_series_cancel(self):
        p = FeatureSeries(np.array([1.0, 2.0, 3.0]), 125.0)
        c = combine_features(p, FeatureSeries(p.values.copy(), 125.0))
        assert np.allclose(c.values, 0.0)

    def test_worked_example(self):
        p = FeatureSeries(np.array([3.0, 4.0]), 125.0)
        d = FeatureSeries(np.array([0.0, 5.0]), 125.0)
        c = combine_features(p, d, 0.5, 0.5)
        assert np.allclose(c.values, [0.3, -0.1])

    def test_ad_zero(self):
        p = FeatureSeries(np.array([3.0, 4.0]), 125.0)
        d = FeatureSeries(np.array([1.0, 1.0]), 125.0)
        c = combine_features(p, d, a_p=0.5, a_d=0.0)
        assert np.allclose(c.values, 0.5 * p.values / 5.0)

    def test_zero_norm_degenerate(self):
        p = FeatureSeries(np.zeros(4), 125.0)
        d = FeatureSeries(np.ones(4), 125.0)
        with pytest.raises(DegenerateWindowError):
            combine_features(p, d)


class TestPrepareFeature:
    def test_constant_becomes_zero(self):
        c = FeatureSeries(np.full(2500, 7.7), 125.0)
        out = prepare_feature(c)
        assert np.allclose(out.values, 0.0, atol=1e-12)
        assert out.rate_hz == pytest.approx(125.0 / 32)

    def test_inband_tone_survives(self):
        t = np.arange(125 * 60) / 125.0
        c = FeatureSeries(np.sin(2 * np.pi * 0.3 * t), 125.0)
        out = prepare_feature(c)
        tail = out.values[len(out) // 2:]
        rms = np.sqrt(np.mean(tail ** 2))
        assert abs(20 * np.log10(rms / np.sqrt(0.5))) <= 1.0

    def test_out_of_band_tone_suppressed(self):
        t = np.arange(125 * 60) / 125.0
        c = FeatureSeries(np.sin(2 * np.pi * 10.0 * t), 125.0)
        out = prepare_feature(c)
        rms = np.sqrt(np.mean(out.values[len(out) // 2:] ** 2))
        assert 20 * np.log10(rms / np.sqrt(0.5)) <= -20.0


class TestEstimateRr:
    def rate(self):
        return 125.0 / 32

    def series(self, freq_hz, n=78, amp=1.0, harmonics=()):
        t = np.arange(n) / self.rate()
        v = amp * np.cos(2 * np.pi * freq_hz * t)
        for mult, a in harmonics:
            v = v + a * np.cos(2 * np.pi * freq_hz * mult * t)
        return FeatureSeries(v, self.rate())

    def test_quarter_hz_is_15cpm(self):
        est = estimate_rr(self.series(0.25))
        assert est.rate_cpm == pytest.approx(15.0, abs=0.12)
        assert est.peak_magnitude > 0

    def test_harmonic_sum_prefers_fundamental(self):
        # 0.2 Hz fundamental with a stronger 0.4 Hz harmonic: C*(f)+|C(2f)|
        # still peaks at 12 CPM
        est = estimate_rr(self.series(0.2, amp=1.0, harmonics=((2, 1.5),)))
        assert est.rate_cpm == pytest.approx(12.0, abs=0.2)

    def test_zero_series_degenerate(self):
        with pytest.raises(DegenerateWindowError):
            estimate_rr(FeatureSeries(np.zeros(78), self.rate()))

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            estimate_rr(FeatureSeries(np.ones(20), self.rate()))

    def test_resolution_bound(self):
        # peak within one padded bin of the true rate across the band
        n = 78
        nfft = 4096
        bin_cpm = 60.0 * self.rate() / nfft
        for f0 in np.arange(0.14, 0.49, 0.029):
            est = estimate_rr(self.series(f0, n=n))
            assert abs(est.rate_cpm - 60 * f0) <= 60 * self.rate() / nfft + 1e-9, f0
        assert bin_cpm == pytest.approx(0.0572, abs=0.0005)

    def test_band_restriction(self):
        est = estimate_rr(self.series(0.25), search_band_cpm=(20.0, 30.0))
        # true peak at 15 CPM is outside; the estimator stays in band
        assert 20.0 <= est.rate_cpm <= 30.0

    def test_bad_band(self):
        with pytest.raises(ParameterError):
            estimate_rr(self.series(0.25), search_band_cpm=(30.0, 7.5))


class TestGainInvariance:
    def test_estimate_invariant_to_audio_gain(self):
        rng = np.random.default_rng(12)
        fs = 2000
        t = np.arange(20 * fs) / fs
        burst = (np.sin(2 * np.pi * 400 * t)
                 * (1 + np.sign(np.sin(2 * np.pi * 0.25 * t))) / 2)
        audio = burst + 0.01 * rng.standard_normal(len(t))
        est1 = estimate_rr(breathing_feature(SampleBlock(audio, fs)))
        est2 = estimate_rr(breathing_feature(SampleBlock(audio * 2.0, fs)))
        assert est1.rate_cpm == est2.rate_cpm
