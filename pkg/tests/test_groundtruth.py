import numpy as np
import pytest

from earbreath import BeltSignal, ParameterError, SampleBlock
from earbreath.groundtruth import (belt_readings, gt_rr, segment_windows,
                                   validity_filter)


def sine_belt(rate_cpm, duration_s=20.0, fs=400.0, amp=1.0):
    t = np.arange(int(round(duration_s * fs))) / fs
    return BeltSignal(amp * np.sin(2 * np.pi * rate_cpm / 60.0 * t), fs)


class TestSegmentWindows:
    def test_60s_gives_5_windows(self):
        sig = SampleBlock(np.zeros(60 * 2000), 2000)
        wins = segment_windows(sig, 20, 0.5)
        assert [s for s, _ in wins] == [0, 20000, 40000, 60000, 80000]
        assert all(len(w) == 40000 for _, w in wins)

    def test_exactly_one_window(self):
        wins = segment_windows(SampleBlock(np.zeros(8000), 400), 20, 0.5)
        assert len(wins) == 1

    def test_partial_discarded(self):
        with pytest.warns(UserWarning):
            wins = segment_windows(SampleBlock(np.zeros(7960), 400), 20, 0.5)
        assert wins == []

    def test_type_preserved(self):
        wins = segment_windows(sine_belt(15, 40.0), 20, 0.5)
        assert all(isinstance(w, BeltSignal) for _, w in wins)

    def test_invalid_overlap(self):
        with pytest.raises(ParameterError):
            segment_windows(SampleBlock(np.zeros(100), 10), 5, 1.0)

    def test_reconstructible(self):
        sig = SampleBlock(np.arange(100.0), 10.0)
        wins = segment_windows(sig, 4.0, 0.25)
        stride = int(4.0 * 0.75 * 10)
        for k, (start, w) in enumerate(wins):
            assert start == k * stride
            assert np.array_equal(w.samples, sig.samples[start:start + 40])


class TestGtRr:
    def test_18cpm_within_padded_resolution(self):
        reading = gt_rr(sine_belt(18.0), pad_factor=32)
        assert reading.valid
        assert reading.rate_cpm == pytest.approx(18.0, abs=0.1)

    def test_unpadded_resolution_is_3cpm(self):
        # 20 s window: 3 CPM bins without padding
        reading = gt_rr(sine_belt(18.0), pad_factor=1)
        assert abs(reading.rate_cpm - 18.0) <= 3.0
        off_bin = gt_rr(sine_belt(18.8), pad_factor=1)
        assert abs(off_bin.rate_cpm - 18.8) >= 0.5  # quantized to the 3 CPM grid
        padded = gt_rr(sine_belt(18.8), pad_factor=32)
        assert padded.rate_cpm == pytest.approx(18.8, abs=0.1)

    def test_dc_window_invalid(self):
        reading = gt_rr(BeltSignal(np.full(8000, 2.5), 400))
        assert not reading.valid

    def test_white_noise_invalid_by_prominence(self):
        rng = np.random.default_rng(0)
        for seed in range(5):
            belt = BeltSignal(np.random.default_rng(seed).standard_normal(8000), 400)
            reading = gt_rr(belt)
            assert not reading.valid
            assert reading.prominence < 3.0

    def test_amplitude_invariance(self):
        small = gt_rr(sine_belt(22.0, amp=1e-3))
        big = gt_rr(sine_belt(22.0, amp=1e3))
        assert small.rate_cpm == big.rate_cpm
        assert small.prominence == pytest.approx(big.prominence, rel=1e-9)

    def test_padding_keeps_peak_within_one_bin(self):
        for pad in (1, 4, 32):
            reading = gt_rr(sine_belt(21.0), pad_factor=pad)
            bin_cpm = 60.0 * 400.0 / (pad * 8000)
            assert abs(reading.rate_cpm - 21.0) <= bin_cpm / 2 + 1e-9


class TestValidityFilter:
    def make(self, rate, prominence=10.0):
        belt = sine_belt(rate) if 6 <= rate <= 35 else sine_belt(15)
        r = gt_rr(belt)
        r.rate_cpm = rate
        r.prominence = prominence
        return r

    def test_bounds(self):
        readings = [self.make(6.9), self.make(18.0), self.make(31.0)]
        out, excluded = validity_filter(readings)
        assert [r.valid for r in out] == [False, True, False]
        assert excluded == pytest.approx(2 / 3)

    def test_prominence_rule(self):
        out, _ = validity_filter([self.make(18.0, prominence=1.2)])
        assert not out[0].valid

    def test_belt_readings_indexes(self):
        belt = sine_belt(15.0, duration_s=60.0)
        readings = belt_readings(belt)
        assert [r.window_index for r in readings] == [0, 1, 2, 3, 4]
        assert readings[1].start_s == pytest.approx(10.0)
        assert all(r.valid for r in readings)
