import numpy as np
import pytest
from hypothesis import given, strategies as st

from earbreath import FusionUnavailableError, ParameterError, WindowRecord
from earbreath.fusion import (discrepancy, fuse, make_record, reject_outliers,
                              retained_fraction)

rates = st.floats(0.1, 100.0)


class TestFuse:
    @pytest.mark.parametrize("a,b,expected", [
        (15.0, 15.0, 15.0),
        (14.0, 16.0, 15.0),
        (12.3, 18.9, 15.6),
    ])
    def test_examples(self, a, b, expected):
        assert fuse(a, b) == pytest.approx(expected)

    def test_missing_channel(self):
        with pytest.raises(FusionUnavailableError):
            fuse(None, 15.0)

    def test_nonpositive_rejected(self):
        with pytest.raises(ParameterError):
            fuse(-1.0, 15.0)
        with pytest.raises(ParameterError):
            fuse(np.nan, 15.0)

    @given(rates, rates)
    def test_symmetric_and_bounded(self, a, b):
        f = fuse(a, b)
        assert f == fuse(b, a)
        assert min(a, b) <= f <= max(a, b)


class TestDiscrepancy:
    @pytest.mark.parametrize("a,b,expected", [
        (15.0, 15.0, 0.0), (14.0, 16.0, 2.0), (16.0, 14.0, 2.0)])
    def test_examples(self, a, b, expected):
        assert discrepancy(a, b) == expected

    @given(rates, rates)
    def test_zero_iff_equal(self, a, b):
        d = discrepancy(a, b)
        assert d == discrepancy(b, a)
        assert (d == 0) == (a == b)


class TestRejectOutliers:
    def records(self, discrepancies):
        return [make_record(i, 10.0 * i, 15.0, 15.0 + d, tau_cpm=0.52)
                for i, d in enumerate(discrepancies)]

    def test_paper_threshold(self):
        recs = self.records([0.0, 0.60])
        out = reject_outliers(recs, 0.52)
        assert out[0].accepted
        assert not out[1].accepted

    def test_boundary_taus(self):
        recs = self.records([0.0, 0.3, 2.0])
        assert all(r.accepted for r in reject_outliers(recs, np.inf))
        out = reject_outliers(recs, 0.0)
        assert [r.accepted for r in out] == [False, False, False]  # strict <

    def test_records_preserved(self):
        recs = self.records([1.0, 2.0])
        out = reject_outliers(recs, 0.5)
        assert len(out) == 2
        assert [r.rr_fused for r in out] == [r.rr_fused for r in recs]

    def test_missing_channel_never_accepted(self):
        rec = make_record(0, 0.0, 15.0, None, tau_cpm=10.0)
        assert rec.rr_fused is None and rec.discrepancy_cpm is None
        out = reject_outliers([rec], 10.0)
        assert not out[0].accepted

    def test_negative_tau_rejected(self):
        with pytest.raises(ParameterError):
            reject_outliers([], -0.1)

    @given(st.lists(st.floats(0, 5), max_size=30), st.floats(0, 6), st.floats(0, 6))
    def test_retained_monotone_in_tau(self, discs, t1, t2):
        lo, hi = sorted((t1, t2))
        recs = self.records(discs)
        kept_lo = {r.window_index for r in reject_outliers(recs, lo) if r.accepted}
        kept_hi = {r.window_index for r in reject_outliers(recs, hi) if r.accepted}
        assert kept_lo <= kept_hi

    def test_retained_fraction(self):
        recs = self.records([0.0, 0.1, 1.0, 2.0])
        out = reject_outliers(recs, 0.52)
        assert retained_fraction(out) == pytest.approx(0.5)
        assert retained_fraction([]) == 0.0


class TestMakeRecord:
    def test_full_record(self):
        rec = make_record(3, 30.0, 14.0, 16.0, tau_cpm=2.5)
        assert rec.rr_fused == 15.0
        assert rec.discrepancy_cpm == 2.0
        assert rec.accepted
        assert rec.window_index == 3 and rec.start_s == 30.0

    def test_single_channel(self):
        rec = make_record(0, 0.0, None, 16.0, tau_cpm=2.5)
        assert rec.rr_left is None and rec.rr_right == 16.0
        assert rec.rr_fused is None and not rec.accepted

    def test_invariant_fused_iff_both(self):
        for left, right in [(14.0, 16.0), (None, 16.0), (14.0, None), (None, None)]:
            rec = make_record(0, 0.0, left, right, 1.0)
            both = left is not None and right is not None
            assert (rec.rr_fused is not None) == both
            assert (rec.discrepancy_cpm is not None) == both
            if both:
                assert rec.discrepancy_cpm == abs(left - right)
                assert rec.rr_fused == (left + right) / 2
