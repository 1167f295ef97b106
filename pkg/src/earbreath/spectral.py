"""Spectral breathing features and the respiration-rate estimator.

The per-window chain is::

    stft -> log_spectral_energy p(t)
         -> quantile_mask / average_breath_spectrum / spectral_dissimilarity d(t)
         -> combine_features c(t)
         -> prepare_feature (respiration band-pass + decimation)
         -> estimate_rr (harmonic spectrum peak)

p(t) rises at every inspiration and expiration; d(t) dips when the frame
matches the window's average breath spectrum. Both carry the breathing
periodicity, which the harmonic spectrum |C(f)| + |C(2f)| turns into a single
dominant peak at the respiration rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import SampleBlock
from .errors import DegenerateWindowError, InsufficientDataError, ParameterError
from .filters import design_highpass, design_lowpass

# Floor inside both logarithms; far below any physical signal level.
LOG_FLOOR = 1e-12

DEFAULT_QUANTILE = 0.85
DEFAULT_P_NORM = 8.0
DEFAULT_FEATURE_BAND_HZ = (0.05, 1.9)
DEFAULT_FEATURE_DECIMATION = 32
DEFAULT_SEARCH_BAND_CPM = (7.5, 30.0)
DEFAULT_PAD_MULTIPLE = 32
# A candidate rate must itself be a visible spectral peak: at least this
# fraction of the in-band maximum of |C|. Rules out leakage dust at f/2 that
# would otherwise ride the |C(2f)| term of a pure tone to a spurious win.
DEFAULT_MIN_PEAK_FRACTION = 0.05


@dataclass
class Spectrogram:
    """One-sided magnitude spectrogram, frames along axis 0."""

    magnitudes: np.ndarray  # (n_frames, n_bins)
    frame_rate_hz: float
    bin_spacing_hz: float
    window_size: int
    hop: int

    @property
    def n_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def n_bins(self) -> int:
        return self.magnitudes.shape[1]


@dataclass
class FeatureSeries:
    """A scalar feature sampled at a fixed rate."""

    values: np.ndarray
    rate_hz: float
    window_span_s: float = 20.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class RrEstimate:
    """One respiration-rate reading."""

    rate_cpm: float
    channel: str = "mono"
    window_index: int = 0
    peak_magnitude: float = 0.0


def stft(signal: SampleBlock, window_size: int = 128, hop: int = 16) -> Spectrogram:
    """Hamming-windowed magnitude STFT; frame t covers [t*hop, t*hop+window_size)."""
    if window_size < 2 or hop < 1:
        raise ParameterError("window_size must be >= 2 and hop >= 1")
    x = signal.samples
    if len(x) < window_size:
        raise InsufficientDataError(
            f"signal has {len(x)} samples, STFT window needs {window_size}")
    n_frames = (len(x) - window_size) // hop + 1
    frames = np.lib.stride_tricks.as_strided(
        x, shape=(n_frames, window_size),
        strides=(x.strides[0] * hop, x.strides[0]))
    win = np.hamming(window_size)
    mags = np.abs(np.fft.rfft(frames * win, axis=1))
    return Spectrogram(
        magnitudes=mags,
        frame_rate_hz=signal.sample_rate_hz / hop,
        bin_spacing_hz=signal.sample_rate_hz / window_size,
        window_size=window_size,
        hop=hop,
    )


def log_spectral_energy(spec: Spectrogram, floor: float = LOG_FLOOR) -> FeatureSeries:
    """Per-frame log spectral energy, normalized by the bin count."""
    if spec.n_frames == 0:
        raise ParameterError("empty spectrogram")
    energy = np.sum(spec.magnitudes ** 2, axis=1)
    p = np.log(np.maximum(energy, floor)) / spec.n_bins
    return FeatureSeries(p, spec.frame_rate_hz)


def quantile_mask(p: FeatureSeries | np.ndarray, q: float = DEFAULT_QUANTILE) -> np.ndarray:
    """Indices of frames at or above the empirical q-quantile of the window.

    Uses the upper order statistic (no interpolation), so at least one frame
    is always retained and raising q never grows the set.
    """
    values = p.values if isinstance(p, FeatureSeries) else np.asarray(p, dtype=np.float64)
    if len(values) == 0:
        raise ParameterError("empty feature series")
    if not 0 < q < 1:
        raise ParameterError("q must be in (0, 1)")
    threshold = np.quantile(values, q, method="higher")
    return np.nonzero(values >= threshold)[0]


def _p_norms(mags: np.ndarray, p_norm: float) -> np.ndarray:
    return np.sum(mags ** p_norm, axis=1) ** (1.0 / p_norm)


def average_breath_spectrum(spec: Spectrogram, mask: np.ndarray,
                            p_norm: float = DEFAULT_P_NORM) -> np.ndarray:
    """Mean of p-norm-normalized masked frames; zero-norm frames are skipped."""
    mask = np.asarray(mask, dtype=np.intp)
    if len(mask) == 0:
        raise ParameterError("mask must retain at least one frame")
    frames = spec.magnitudes[mask]
    norms = _p_norms(frames, p_norm)
    keep = norms > 0
    if not np.any(keep):
        raise DegenerateWindowError("all masked frames have zero norm")
    normalized = frames[keep] / norms[keep, None]
    return normalized.sum(axis=0) / keep.sum()


def spectral_dissimilarity(spec: Spectrogram, avg: np.ndarray,
                           p_norm: float = DEFAULT_P_NORM,
                           floor: float = LOG_FLOOR) -> FeatureSeries:
    """Log squared distance of each normalized frame from the average spectrum."""
    avg = np.asarray(avg, dtype=np.float64)
    if avg.shape != (spec.n_bins,):
        raise ParameterError(
            f"average spectrum has {avg.shape} entries, expected {spec.n_bins}")
    norms = _p_norms(spec.magnitudes, p_norm)
    safe = np.where(norms > 0, norms, 1.0)
    normalized = spec.magnitudes / safe[:, None]  # zero-norm frames stay zero
    resid = np.sum((normalized - avg) ** 2, axis=1)
    d = np.log(np.maximum(resid, floor)) / spec.n_bins
    return FeatureSeries(d, spec.frame_rate_hz)


def combine_features(p: FeatureSeries, d: FeatureSeries,
                     a_p: float = 0.5, a_d: float = 0.5) -> FeatureSeries:
    """c(t) = a_p*p/||p||2 - a_d*d/||d||2.

    The sign flip on d is required: d has minima at breath events where p has
    maxima.
    """
    if len(p) != len(d):
        raise ParameterError(f"feature lengths differ: {len(p)} vs {len(d)}")
    pn = np.linalg.norm(p.values)
    dn = np.linalg.norm(d.values)
    if pn == 0 or dn == 0:
        raise DegenerateWindowError("zero-norm feature series")
    c = a_p * p.values / pn - a_d * d.values / dn
    return FeatureSeries(c, p.rate_hz)


def prepare_feature(c: FeatureSeries, frame_rate_hz: float | None = None,
                    band_hz: tuple[float, float] = DEFAULT_FEATURE_BAND_HZ,
                    decimation: int = DEFAULT_FEATURE_DECIMATION) -> FeatureSeries:
    """Restrict the feature to the respiration band and decimate it.

    Mean removal, then a high-pass/low-pass Butterworth pair (2nd order per
    edge; the low edge removes drift, the high edge anti-aliases the decimated
    rate), then every ``decimation``-th sample, then mean removal again.
    """
    rate = frame_rate_hz if frame_rate_hz is not None else c.rate_hz
    x = c.values - np.mean(c.values) if len(c) else c.values
    hp = design_highpass(band_hz[0], rate, order=2)
    lp = design_lowpass(band_hz[1], rate, order=2)
    y = lp.process(hp.process(x))[::decimation]
    if len(y):
        y = y - np.mean(y)
    return FeatureSeries(y, rate / decimation, window_span_s=c.window_span_s)


def _harmonic_spectrum(values: np.ndarray, pad_multiple: int):
    """Hamming-window, zero-pad to the next power of two >= pad_multiple*N, FFT,
    and fold in the first harmonic: C*(f) = |C(f)| + |C(2f)|.

    Returns (cstar, base magnitudes over the same index range, fft size).
    """
    n = len(values)
    n_fft = 1 << int(np.ceil(np.log2(max(2, pad_multiple * n))))
    mags = np.abs(np.fft.rfft(values * np.hamming(n), n=n_fft))
    half = (len(mags) - 1) // 2
    cstar = mags[: half + 1] + mags[: 2 * half + 1 : 2]
    return cstar, mags[: half + 1], n_fft


def estimate_rr(c: FeatureSeries,
                search_band_cpm: tuple[float, float] = DEFAULT_SEARCH_BAND_CPM,
                pad_multiple: int = DEFAULT_PAD_MULTIPLE,
                min_peak_fraction: float = DEFAULT_MIN_PEAK_FRACTION,
                channel: str = "mono", window_index: int = 0) -> RrEstimate:
    """Pick the in-band candidate with the largest harmonic-spectrum value.

    Candidates are local maxima of |C(f)| at or above ``min_peak_fraction`` of
    the in-band maximum; leakage floors between real peaks are not eligible
    even where |C(2f)| is large. The series must span at least two cycles of
    the slowest searched rate. Ties resolve to the lowest frequency.
    """
    low, high = search_band_cpm
    if not 0 < low < high:
        raise ParameterError("search band must satisfy 0 < low < high")
    rate = c.rate_hz
    min_samples = int(np.floor(2 * 60.0 / low * rate))
    if len(c) < min_samples:
        raise InsufficientDataError(
            f"feature series has {len(c)} samples; need >= {min_samples} "
            f"({2 * 60.0 / low:.1f} s at {rate:.3f} Hz) for a {low}-{high} CPM search")
    cstar, base, n_fft = _harmonic_spectrum(c.values, pad_multiple)
    freqs_cpm = 60.0 * rate * np.arange(len(cstar)) / n_fft
    in_band = (freqs_cpm >= low) & (freqs_cpm <= high)
    if not np.any(in_band):
        raise ParameterError("search band contains no spectral bins")
    if np.max(cstar[in_band]) == 0.0:
        raise DegenerateWindowError("no spectral energy inside the search band")
    local_max = np.zeros(len(base), dtype=bool)
    local_max[1:-1] = (base[1:-1] >= base[:-2]) & (base[1:-1] >= base[2:])
    visible = base >= min_peak_fraction * np.max(base[in_band])
    candidates = np.nonzero(in_band & local_max & visible)[0]
    if len(candidates) == 0:
        candidates = np.nonzero(in_band)[0]
    peak = candidates[np.argmax(cstar[candidates])]
    return RrEstimate(rate_cpm=float(freqs_cpm[peak]), channel=channel,
                      window_index=window_index,
                      peak_magnitude=float(cstar[peak]))


def breathing_feature(audio: SampleBlock, stft_window: int = 128, hop: int = 16,
                      quantile: float = DEFAULT_QUANTILE,
                      p_norm: float = DEFAULT_P_NORM,
                      a_p: float = 0.5, a_d: float = 0.5,
                      band_hz: tuple[float, float] = DEFAULT_FEATURE_BAND_HZ,
                      decimation: int = DEFAULT_FEATURE_DECIMATION,
                      floor: float = LOG_FLOOR) -> FeatureSeries:
    """Full feature chain for one analysis window of cleaned audio."""
    spec = stft(audio, stft_window, hop)
    p = log_spectral_energy(spec, floor)
    mask = quantile_mask(p, quantile)
    avg = average_breath_spectrum(spec, mask, p_norm)
    d = spectral_dissimilarity(spec, avg, p_norm, floor)
    c = combine_features(p, d, a_p, a_d)
    c.window_span_s = audio.duration_s
    return prepare_feature(c, band_hz=band_hz, decimation=decimation)
