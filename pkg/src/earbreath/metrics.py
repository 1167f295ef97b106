"""Evaluation metrics for respiration-rate estimates and noise suppression."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import BeltSignal, SampleBlock
from .errors import UndefinedMetricError
from .fusion import WindowRecord

MAD_TO_SIGMA = 1.4826
LOA_MULTIPLIER = 1.96


def _as_array(x) -> np.ndarray:
    if isinstance(x, (SampleBlock, BeltSignal)):
        return x.samples
    return np.asarray(x, dtype=np.float64)


def error_metrics(estimates, truth) -> tuple[float, float]:
    """(MAE, RMSE) between estimates and ground truth, in CPM."""
    e = _as_array(estimates)
    g = _as_array(truth)
    if len(e) != len(g):
        raise UndefinedMetricError(f"length mismatch: {len(e)} vs {len(g)}")
    if len(e) == 0:
        raise UndefinedMetricError("error metrics need at least one pair")
    diff = e - g
    return float(np.mean(np.abs(diff))), float(np.sqrt(np.mean(diff ** 2)))


def noise_reduction_db(cleaned, original) -> float:
    """Energy ratio of cleaned to original signal in dB (negative = suppression)."""
    e = _as_array(cleaned)
    d = _as_array(original)
    if len(e) != len(d):
        raise UndefinedMetricError(f"length mismatch: {len(e)} vs {len(d)}")
    denom = float(np.sum(d ** 2))
    if denom <= 0:
        raise UndefinedMetricError("original signal has zero energy")
    return float(10.0 * np.log10(np.sum(e ** 2) / denom))


# ---------------------------------------------------------------------------
# Respiratory-information index
# ---------------------------------------------------------------------------


def energy_envelope(samples, window: int) -> np.ndarray:
    """Causal moving average of the squared signal (zeros before the start)."""
    x = _as_array(samples)
    if window < 1:
        raise UndefinedMetricError("envelope window must be >= 1")
    c = np.cumsum(x ** 2)
    out = c.copy()
    out[window:] = c[window:] - c[:-window]
    return out / window


def belt_slope(samples, lag: int) -> np.ndarray:
    """Absolute secant slope |g(t) - g(t-lag)|, defined from t = lag."""
    g = _as_array(samples)
    if lag < 1 or lag >= len(g):
        raise UndefinedMetricError("slope lag must be in [1, len)")
    return np.abs(g[lag:] - g[:-lag])


def pearson(x, y) -> float:
    x = _as_array(x)
    y = _as_array(y)
    if len(x) != len(y) or len(x) < 2:
        raise UndefinedMetricError("correlation needs two equal series of length >= 2")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = float(np.sqrt(np.sum(xd ** 2)))
    sy = float(np.sqrt(np.sum(yd ** 2)))
    if sx == 0 or sy == 0:
        raise UndefinedMetricError("correlation undefined for zero-variance input")
    return float(np.dot(xd, yd) / (sx * sy))


def ri_index(audio: SampleBlock, belt: BeltSignal, k: int = 100) -> float:
    """Correlation between the audio energy envelope and the belt slope.

    ``k`` counts samples on each signal's own timeline: a k-sample energy
    window on the audio and a k-sample secant lag on the belt (0.25 s at
    400 Hz). The envelope is sampled onto the belt timeline by nearest sample.
    """
    env = energy_envelope(audio.samples, k)
    slope = belt_slope(belt.samples, k)
    t_end = min(audio.duration_s, belt.duration_s)
    n_belt = int(t_end * belt.sample_rate_hz)
    idx_belt = np.arange(k, n_belt)
    if len(idx_belt) < 2:
        raise UndefinedMetricError("signals too short for the RI index")
    idx_audio = np.minimum(
        np.round(idx_belt / belt.sample_rate_hz * audio.sample_rate_hz).astype(np.intp),
        len(env) - 1)
    return pearson(env[idx_audio], slope[idx_belt - k])


# ---------------------------------------------------------------------------
# Robust interval, cohort variance, agreement
# ---------------------------------------------------------------------------


@dataclass
class MadInterval:
    """Robust three-sigma interval around the median error."""

    sigma_hat: float
    low: float
    high: float
    inlier_fraction: float
    inlier_mae: float

    @property
    def interval(self) -> tuple[float, float]:
        return (self.low, self.high)


def mad_interval(errors) -> MadInterval:
    x = _as_array(errors)
    if len(x) == 0:
        raise UndefinedMetricError("mad_interval needs at least one value")
    med = float(np.median(x))
    sigma = MAD_TO_SIGMA * float(np.median(np.abs(x - med)))
    low, high = med - 3.0 * sigma, med + 3.0 * sigma
    inliers = x[(x >= low) & (x <= high)]
    return MadInterval(sigma_hat=sigma, low=low, high=high,
                       inlier_fraction=len(inliers) / len(x),
                       inlier_mae=float(np.mean(np.abs(inliers))))


def g_ratio_from_variances(var_between: float, var_within: float) -> float:
    total = var_between + var_within
    if total <= 0:
        raise UndefinedMetricError("total variance must be positive")
    return var_between / total


def generalizability_ratio(errors_by_subject) -> float:
    """Between-subject share of the total error variance.

    Between: sample variance of per-subject mean errors. Within: unweighted
    mean of the per-subject sample variances.
    """
    groups = [np.asarray(v, dtype=np.float64) for v in errors_by_subject.values()]
    if len(groups) < 2 or any(len(g) < 2 for g in groups):
        raise UndefinedMetricError(
            "generalizability ratio needs >= 2 subjects with >= 2 values each")
    means = np.array([g.mean() for g in groups])
    var_between = float(np.var(means, ddof=1))
    var_within = float(np.mean([np.var(g, ddof=1) for g in groups]))
    return g_ratio_from_variances(var_between, var_within)


def bland_altman(estimates, truth) -> tuple[float, float, float]:
    """(bias, LoA low, LoA high); LoA = bias +- 1.96 * sample SD of differences."""
    e = _as_array(estimates)
    g = _as_array(truth)
    if len(e) != len(g) or len(e) < 2:
        raise UndefinedMetricError("bland_altman needs two equal series of length >= 2")
    diffs = e - g
    bias = float(np.mean(diffs))
    sd = float(np.std(diffs, ddof=1))
    return bias, bias - LOA_MULTIPLIER * sd, bias + LOA_MULTIPLIER * sd


# ---------------------------------------------------------------------------
# Threshold sweep and reports
# ---------------------------------------------------------------------------


@dataclass
class SweepPoint:
    tau_cpm: float
    mae_cpm: float
    rmse_cpm: float
    retained_fraction: float


def _fused_pairs(records: list[WindowRecord]):
    return [(r.rr_fused, r.gt_cpm, r.discrepancy_cpm) for r in records
            if r.rr_fused is not None and r.discrepancy_cpm is not None
            and r.gt_cpm is not None and r.gt_valid]


def threshold_sweep(records: list[WindowRecord], tau_grid) -> list[SweepPoint]:
    """Accuracy/yield trade-off of discrepancy-based rejection over a tau grid."""
    pairs = _fused_pairs(records)
    points = []
    for tau in np.asarray(tau_grid, dtype=np.float64):
        kept = [(f, g) for f, g, disc in pairs if disc < tau]
        if kept:
            est, gt = zip(*kept)
            mae, rmse = error_metrics(est, gt)
        else:
            mae = rmse = float("nan")
        frac = len(kept) / len(pairs) if pairs else 0.0
        points.append(SweepPoint(float(tau), mae, rmse, frac))
    return points


@dataclass
class EvalReport:
    """All evaluation metrics for one set of window records."""

    mae_cpm: float
    rmse_cpm: float
    bias_cpm: float
    loa_cpm: tuple[float, float]
    nr_db: float
    ri: float
    mad_sigma: float
    mad_interval_cpm: tuple[float, float]
    g_ratio: float
    retained_fraction: float
    per_condition: dict = field(default_factory=dict)
    per_subject: dict = field(default_factory=dict)


def build_report(records: list[WindowRecord], *, nr_db: float = float("nan"),
                 ri: float = float("nan"), condition: str = "",
                 subject: str = "") -> EvalReport:
    """Evaluate fused estimates against attached ground truth.

    Top-level metrics cover every window with a valid reference and a fused
    estimate; ``retained_fraction`` reflects the accepted flags already on the
    records. ``g_ratio`` needs a multi-subject cohort and is NaN here.
    """
    pairs = [(r.rr_fused, r.gt_cpm) for r in records
             if r.rr_fused is not None and r.gt_cpm is not None and r.gt_valid]
    if not pairs:
        raise UndefinedMetricError("no windows with fused estimate and valid reference")
    est, gt = (np.array(v) for v in zip(*pairs))
    mae, rmse = error_metrics(est, gt)
    if len(est) >= 2:
        bias, loa_low, loa_high = bland_altman(est, gt)
    else:
        bias = float(est[0] - gt[0])
        loa_low = loa_high = bias
    mad = mad_interval(est - gt)
    eligible = [r for r in records if r.discrepancy_cpm is not None and r.gt_valid]
    retained = (sum(1 for r in eligible if r.accepted) / len(eligible)
                if eligible else 0.0)
    return EvalReport(
        mae_cpm=mae, rmse_cpm=rmse, bias_cpm=bias, loa_cpm=(loa_low, loa_high),
        nr_db=nr_db, ri=ri, mad_sigma=mad.sigma_hat,
        mad_interval_cpm=mad.interval, g_ratio=float("nan"),
        retained_fraction=retained,
        per_condition={condition: mae} if condition else {},
        per_subject={subject: mae} if subject else {},
    )
