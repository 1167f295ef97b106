"""Butterworth filtering and anti-aliased decimation.

Filters are realized as cascades of second-order sections with explicit
per-section state, so a signal can be processed block-by-block with results
identical to one-shot processing.
"""

from __future__ import annotations

import numpy as np
from scipy import signal as sps

from .blocks import SampleBlock
from .errors import ParameterError

# Anti-alias filter used before each downsampling stage: 4th-order Butterworth
# low-pass at 0.45x the output Nyquist (-24 dB at 0.9x Nyquist).
ANTIALIAS_ORDER = 4
ANTIALIAS_CUTOFF_FRACTION = 0.45


class BiquadCascade:
    """Stateful cascade of second-order sections (scipy ``sos`` layout)."""

    def __init__(self, sos: np.ndarray):
        sos = np.atleast_2d(np.asarray(sos, dtype=np.float64))
        if sos.ndim != 2 or sos.shape[1] != 6:
            raise ParameterError(f"sos must have shape (n, 6), got {sos.shape}")
        for k, section in enumerate(sos):
            poles = np.roots(section[3:])
            if np.any(np.abs(poles) >= 1.0):
                raise ParameterError(f"section {k} is unstable (|pole| >= 1)")
        self.sos = sos
        self._zi = np.zeros((sos.shape[0], 2))

    @property
    def n_sections(self) -> int:
        return self.sos.shape[0]

    def reset(self) -> None:
        self._zi[:] = 0.0

    def copy(self) -> "BiquadCascade":
        dup = BiquadCascade(self.sos.copy())
        dup._zi = self._zi.copy()
        return dup

    def process(self, samples: np.ndarray) -> np.ndarray:
        """Filter one block, carrying state to the next call."""
        samples = np.asarray(samples, dtype=np.float64)
        out, self._zi = sps.sosfilt(self.sos, samples, zi=self._zi)
        return out

    def process_block(self, block: SampleBlock) -> SampleBlock:
        return SampleBlock(self.process(block.samples), block.sample_rate_hz)

    def response_at(self, freqs_hz, sample_rate_hz: float) -> np.ndarray:
        """Magnitude response at the given frequencies."""
        _, h = sps.sosfreqz(self.sos, worN=np.atleast_1d(freqs_hz), fs=sample_rate_hz)
        return np.abs(h)


def design_bandpass(low_hz: float, high_hz: float, sample_rate_hz: float,
                    order: int = 4) -> BiquadCascade:
    """Butterworth band-pass with -3 dB points at ``low_hz`` and ``high_hz``.

    ``order`` counts poles of the band-pass (must be even); order 4 yields two
    biquad sections.
    """
    if not 0 < low_hz < high_hz < sample_rate_hz / 2:
        raise ParameterError(
            f"band edges must satisfy 0 < {low_hz} < {high_hz} < "
            f"{sample_rate_hz / 2} (Nyquist)")
    if order < 2 or order % 2:
        raise ParameterError("band-pass order must be a positive even integer")
    sos = sps.butter(order // 2, [low_hz, high_hz], btype="bandpass",
                     output="sos", fs=sample_rate_hz)
    return BiquadCascade(sos)


def design_lowpass(cutoff_hz: float, sample_rate_hz: float, order: int = 2) -> BiquadCascade:
    if not 0 < cutoff_hz < sample_rate_hz / 2:
        raise ParameterError(f"cutoff {cutoff_hz} outside (0, Nyquist)")
    sos = sps.butter(order, cutoff_hz, btype="lowpass", output="sos", fs=sample_rate_hz)
    return BiquadCascade(sos)


def design_highpass(cutoff_hz: float, sample_rate_hz: float, order: int = 2) -> BiquadCascade:
    if not 0 < cutoff_hz < sample_rate_hz / 2:
        raise ParameterError(f"cutoff {cutoff_hz} outside (0, Nyquist)")
    sos = sps.butter(order, cutoff_hz, btype="highpass", output="sos", fs=sample_rate_hz)
    return BiquadCascade(sos)


def _stage_factors(factor: int) -> list[int]:
    """Prime factorization, smallest first; one decimation stage per factor."""
    stages = []
    f = factor
    p = 2
    while f > 1:
        while f % p == 0:
            stages.append(p)
            f //= p
        p += 1 if p == 2 else 2
        if p * p > f and f > 1:
            stages.append(f)
            break
    return stages


def decimate(block: SampleBlock, factor: int) -> SampleBlock:
    """Anti-aliased downsampling by an integer factor.

    Composite factors are applied as a cascade of prime-factor stages, each
    with its own Butterworth anti-alias low-pass.
    """
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ParameterError("decimation factor must be a positive integer")
    if factor == 1:
        return SampleBlock(block.samples.copy(), block.sample_rate_hz)
    x = block.samples
    rate = block.sample_rate_hz
    for p in _stage_factors(int(factor)):
        out_rate = rate / p
        aa = design_lowpass(ANTIALIAS_CUTOFF_FRACTION * out_rate / 2.0, rate,
                            order=ANTIALIAS_ORDER)
        x = aa.process(x)[::p]
        rate = out_rate
    return SampleBlock(x, rate)
