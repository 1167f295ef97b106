import numpy as np
import pytest

from earbreath import BeltSignal, ParameterError, SampleBlock


class TestSampleBlock:
    def test_basic(self):
        b = SampleBlock([0.0, 0.5, -0.5], 8000)
        assert len(b) == 3
        assert b.duration_s == pytest.approx(3 / 8000)

    def test_rejects_empty(self):
        with pytest.raises(ParameterError):
            SampleBlock([], 8000)

    def test_rejects_nonfinite(self):
        with pytest.raises(ParameterError):
            SampleBlock([0.0, np.nan], 8000)
        with pytest.raises(ParameterError):
            SampleBlock([np.inf], 8000)

    def test_rejects_bad_rate(self):
        with pytest.raises(ParameterError):
            SampleBlock([0.0], 0)

    def test_rejects_multichannel(self):
        with pytest.raises(ParameterError):
            SampleBlock(np.zeros((2, 10)), 8000)

    def test_split_covers_signal(self):
        b = SampleBlock(np.arange(10.0), 1000)
        parts = b.split(4)
        assert [len(p) for p in parts] == [4, 4, 2]
        assert np.array_equal(np.concatenate([p.samples for p in parts]), b.samples)


class TestBeltSignal:
    def test_default_rate(self):
        belt = BeltSignal(np.zeros(400))
        assert belt.sample_rate_hz == 400.0
        assert belt.duration_s == pytest.approx(1.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ParameterError):
            BeltSignal([np.nan])
