"""Session-level orchestration: denoise, per-window estimation, fusion, truth.

Rate topology: suppression runs at 8 kHz on band-passed signals, estimation at
2 kHz, features at the 125 Hz STFT frame rate decimated by 32. Left and right
ears are independent pipelines joined only at the fusion step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .adaptive import AnsStage, LmsConfig
from .blocks import BeltSignal, SampleBlock
from .config import PipelineConfig
from .errors import AlignmentError, DegenerateWindowError, ParameterError
from .filters import decimate, design_bandpass
from .fusion import WindowRecord, make_record
from .groundtruth import belt_readings, segment_windows
from .spectral import RrEstimate, breathing_feature, estimate_rr

SUPPRESSORS = ("ans", "nlms", "plain", "bypass")
_MODE_BY_SUPPRESSOR = {"ans": "delayed-leaky-clipped", "nlms": "nlms",
                       "plain": "plain"}
DEFAULT_BLOCK_SIZE = 8192


def lms_config_from(cfg: PipelineConfig, suppressor: str = "ans") -> LmsConfig:
    if suppressor not in _MODE_BY_SUPPRESSOR:
        raise ParameterError(f"suppressor must be one of {SUPPRESSORS}")
    return LmsConfig(taps=cfg.lms_taps, delay=cfg.lms_delay, step=cfg.lms_step,
                     leakage=cfg.lms_leakage,
                     clip_threshold=cfg.lms_clip_threshold, eps=cfg.lms_eps,
                     mode=_MODE_BY_SUPPRESSOR[suppressor])


def to_rate(block: SampleBlock, target_hz: float) -> SampleBlock:
    """Decimate to the target rate (must divide the block's rate)."""
    if block.sample_rate_hz == target_hz:
        return block
    ratio = block.sample_rate_hz / target_hz
    factor = int(round(ratio))
    if abs(ratio - factor) > 1e-9 or factor < 1:
        raise AlignmentError(
            f"cannot reach {target_hz} Hz from {block.sample_rate_hz} Hz "
            f"by integer decimation")
    return decimate(block, factor)


@dataclass
class DenoiseResult:
    cleaned: SampleBlock
    bandpassed_input: SampleBlock  # band-passed IEM, the suppression baseline
    delay_samples: int


def denoise(iem: SampleBlock, oem: SampleBlock, cfg: PipelineConfig | None = None,
            suppressor: str = "ans",
            block_size: int = DEFAULT_BLOCK_SIZE) -> DenoiseResult:
    """Band-pass both microphones and run the selected suppressor.

    ``bypass`` skips adaptation entirely (band-pass-only baseline). The
    cleaned stream lags the band-passed input by ``delay_samples``.
    """
    cfg = cfg or PipelineConfig()
    if suppressor not in SUPPRESSORS:
        raise ParameterError(f"suppressor must be one of {SUPPRESSORS}")
    iem8 = to_rate(iem, cfg.ans_rate_hz)
    oem8 = to_rate(oem, cfg.ans_rate_hz)
    if len(iem8) != len(oem8):
        raise AlignmentError(
            f"IEM/OEM length mismatch after rate alignment: "
            f"{len(iem8)} vs {len(oem8)}")
    band = (cfg.band_low_hz, cfg.band_high_hz)
    bpf = design_bandpass(band[0], band[1], cfg.ans_rate_hz, cfg.band_order)
    bandpassed = SampleBlock(bpf.process(iem8.samples), cfg.ans_rate_hz)
    if suppressor == "bypass":
        return DenoiseResult(cleaned=bandpassed, bandpassed_input=bandpassed,
                             delay_samples=0)
    stage = AnsStage(lms_config_from(cfg, suppressor), cfg.ans_rate_hz,
                     band_hz=band, band_order=cfg.band_order)
    outputs = [stage.push(ib, ob)
               for ib, ob in zip(iem8.split(block_size), oem8.split(block_size))]
    cleaned = SampleBlock(np.concatenate([b.samples for b in outputs]),
                          cfg.ans_rate_hz)
    return DenoiseResult(cleaned=cleaned, bandpassed_input=bandpassed,
                         delay_samples=stage.delay_samples)


def estimate_channel(cleaned: SampleBlock, cfg: PipelineConfig | None = None,
                     channel: str = "mono") -> list[tuple[int, float, RrEstimate | None]]:
    """Per-window estimates from a cleaned stream.

    Returns ``(window_index, start_s, estimate)`` triples; degenerate windows
    yield ``None`` instead of a fabricated rate.
    """
    cfg = cfg or PipelineConfig()
    audio = to_rate(cleaned, cfg.feature_rate_hz)
    out = []
    for idx, (start, win) in enumerate(
            segment_windows(audio, cfg.window_s, cfg.overlap)):
        try:
            feature = breathing_feature(
                win, cfg.stft_window, cfg.stft_hop, cfg.quantile, cfg.p_norm,
                cfg.a_p, cfg.a_d,
                (cfg.feature_band_low_hz, cfg.feature_band_high_hz),
                cfg.feature_decimation, cfg.log_floor)
            est = estimate_rr(feature,
                              (cfg.search_low_cpm, cfg.search_high_cpm),
                              cfg.pad_multiple, cfg.min_peak_fraction,
                              channel=channel, window_index=idx)
        except DegenerateWindowError:
            est = None
        out.append((idx, start / audio.sample_rate_hz, est))
    return out


def records_from_estimates(left, right, tau_cpm: float) -> list[WindowRecord]:
    """Join per-ear estimate lists (same windowing) into fusion records."""
    records = []
    for (idx, start_s, le), (_, _, re_) in zip(left, right):
        records.append(make_record(
            idx, start_s,
            le.rate_cpm if le is not None else None,
            re_.rate_cpm if re_ is not None else None,
            tau_cpm))
    return records


def run_binaural(iem_left: SampleBlock, oem_left: SampleBlock,
                 iem_right: SampleBlock, oem_right: SampleBlock,
                 cfg: PipelineConfig | None = None,
                 suppressor: str = "ans") -> list[WindowRecord]:
    """Full two-ear pipeline: denoise, estimate per window, fuse."""
    cfg = cfg or PipelineConfig()
    left = estimate_channel(
        denoise(iem_left, oem_left, cfg, suppressor).cleaned, cfg, "left")
    right = estimate_channel(
        denoise(iem_right, oem_right, cfg, suppressor).cleaned, cfg, "right")
    return records_from_estimates(left, right, cfg.tau_cpm)


def single_channel_records(estimates) -> list[WindowRecord]:
    """Records for a mono stream; the estimate is stored as the left channel."""
    return [WindowRecord(window_index=idx, start_s=start_s,
                         rr_left=est.rate_cpm if est is not None else None)
            for idx, start_s, est in estimates]


def attach_ground_truth(records: list[WindowRecord], belt: BeltSignal,
                        cfg: PipelineConfig | None = None) -> list[WindowRecord]:
    """Fill gt fields from a belt recording segmented with the same windowing."""
    cfg = cfg or PipelineConfig()
    readings = belt_readings(belt, cfg.window_s, cfg.overlap, cfg.gt_pad_factor,
                             (cfg.search_low_cpm, cfg.search_high_cpm),
                             cfg.gt_prominence_min)
    by_index = {r.window_index: r for r in readings}
    out = []
    for rec in records:
        gt = by_index.get(rec.window_index)
        if gt is None:
            out.append(replace(rec, gt_cpm=None, gt_valid=False))
        else:
            out.append(replace(rec,
                               gt_cpm=gt.rate_cpm if np.isfinite(gt.rate_cpm) else None,
                               gt_valid=gt.valid))
    return out
