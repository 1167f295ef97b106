"""Reference respiration rates from a respiration-belt signal.

Each 20 s window is mean-removed, Hamming-windowed, zero-padded to
``pad_factor`` times its length and Fourier-transformed; the dominant in-band
peak gives the reference rate. Windows without a clear dominant peak, or with
rates outside the plausible range, are flagged invalid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .blocks import BeltSignal, SampleBlock
from .errors import ParameterError

DEFAULT_WINDOW_S = 20.0
DEFAULT_OVERLAP = 0.5
DEFAULT_PAD_FACTOR = 32
DEFAULT_RATE_RANGE_CPM = (7.5, 30.0)
# A peak counts as "clear" when it exceeds this multiple of the median
# in-band magnitude. Scale-free stand-in criterion; exposed in config.
DEFAULT_PROMINENCE_MIN = 3.0


@dataclass
class GtReading:
    """Ground-truth rate for one analysis window."""

    window_index: int
    start_s: float
    rate_cpm: float  # nan when no in-band peak exists
    prominence: float
    valid: bool


def segment_windows(signal, window_s: float = DEFAULT_WINDOW_S,
                    overlap: float = DEFAULT_OVERLAP):
    """Cut a signal into fixed windows; returns ``(start_sample, window)`` pairs.

    Works on any container with ``samples`` and ``sample_rate_hz``
    (``SampleBlock``, ``BeltSignal``); windows are returned as the same type.
    Trailing partial windows are discarded.
    """
    if not 0 <= overlap < 1:
        raise ParameterError("overlap must be in [0, 1)")
    if window_s <= 0:
        raise ParameterError("window_s must be positive")
    rate = signal.sample_rate_hz
    win_n = int(round(window_s * rate))
    stride_n = int(round(window_s * (1.0 - overlap) * rate))
    if stride_n < 1:
        raise ParameterError("window stride is below one sample")
    n = len(signal.samples)
    if n < win_n:
        warnings.warn(
            f"signal ({n / rate:.1f} s) is shorter than one {window_s:.0f} s window",
            stacklevel=2)
        return []
    cls = type(signal)
    out = []
    start = 0
    while start + win_n <= n:
        out.append((start, cls(signal.samples[start:start + win_n], rate)))
        start += stride_n
    return out


def gt_rr(window: BeltSignal, pad_factor: int = DEFAULT_PAD_FACTOR,
          rate_range_cpm: tuple[float, float] = DEFAULT_RATE_RANGE_CPM,
          prominence_min: float = DEFAULT_PROMINENCE_MIN,
          window_index: int = 0, start_s: float = 0.0) -> GtReading:
    """Dominant spectral peak of one belt window.

    Returns an invalid reading when no in-band peak exists or the peak is not
    prominent enough (peak below ``prominence_min`` times the median in-band
    magnitude).
    """
    if pad_factor < 1:
        raise ParameterError("pad_factor must be >= 1")
    x = np.asarray(window.samples, dtype=np.float64)
    rate = window.sample_rate_hz
    x = (x - np.mean(x)) * np.hamming(len(x))
    n_fft = pad_factor * len(x)
    mags = np.abs(np.fft.rfft(x, n=n_fft))
    freqs_cpm = 60.0 * rate * np.arange(len(mags)) / n_fft
    low, high = rate_range_cpm
    in_band = np.nonzero((freqs_cpm >= low) & (freqs_cpm <= high))[0]
    if len(in_band) == 0:
        return GtReading(window_index, start_s, float("nan"), 0.0, False)
    band = mags[in_band]
    peak_rel = int(np.argmax(band))
    peak_mag = float(band[peak_rel])
    if peak_mag == 0.0:
        return GtReading(window_index, start_s, float("nan"), 0.0, False)
    median = float(np.median(band))
    prominence = peak_mag / median if median > 0 else float("inf")
    rate_cpm = float(freqs_cpm[in_band[peak_rel]])
    valid = prominence >= prominence_min and low <= rate_cpm <= high
    return GtReading(window_index, start_s, rate_cpm, prominence, valid)


def belt_readings(belt: BeltSignal, window_s: float = DEFAULT_WINDOW_S,
                  overlap: float = DEFAULT_OVERLAP,
                  pad_factor: int = DEFAULT_PAD_FACTOR,
                  rate_range_cpm: tuple[float, float] = DEFAULT_RATE_RANGE_CPM,
                  prominence_min: float = DEFAULT_PROMINENCE_MIN) -> list[GtReading]:
    """Segment a belt recording and derive one reading per window."""
    readings = []
    for idx, (start, win) in enumerate(segment_windows(belt, window_s, overlap)):
        readings.append(gt_rr(win, pad_factor, rate_range_cpm, prominence_min,
                              window_index=idx, start_s=start / belt.sample_rate_hz))
    return readings


def validity_filter(readings: list[GtReading],
                    rate_range_cpm: tuple[float, float] = DEFAULT_RATE_RANGE_CPM,
                    prominence_min: float = DEFAULT_PROMINENCE_MIN):
    """Re-apply the validity rule; returns ``(readings, excluded_fraction)``."""
    low, high = rate_range_cpm
    out = []
    for r in readings:
        valid = (np.isfinite(r.rate_cpm) and low <= r.rate_cpm <= high
                 and r.prominence >= prominence_min)
        out.append(GtReading(r.window_index, r.start_s, r.rate_cpm,
                             r.prominence, valid))
    excluded = sum(1 for r in out if not r.valid) / len(out) if out else 0.0
    return out, excluded
