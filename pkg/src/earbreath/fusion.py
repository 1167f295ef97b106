"""Binaural fusion, channel discrepancy, and discrepancy-based rejection."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import FusionUnavailableError, ParameterError


@dataclass
class WindowRecord:
    """Per-window join of channel estimates, fusion, and ground truth."""

    window_index: int
    start_s: float = 0.0
    rr_left: float | None = None
    rr_right: float | None = None
    rr_fused: float | None = None
    discrepancy_cpm: float | None = None
    accepted: bool = False
    gt_cpm: float | None = None
    gt_valid: bool = False


def fuse(rr_left: float, rr_right: float) -> float:
    """Equal-weight fusion of the two per-ear estimates."""
    if rr_left is None or rr_right is None:
        raise FusionUnavailableError("both channels are required for fusion")
    if not (math.isfinite(rr_left) and math.isfinite(rr_right)):
        raise ParameterError("channel estimates must be finite")
    if rr_left <= 0 or rr_right <= 0:
        raise ParameterError("channel estimates must be positive")
    return rr_left / 2.0 + rr_right / 2.0


def discrepancy(rr_left: float, rr_right: float) -> float:
    """Absolute inter-channel difference, the confidence proxy."""
    if rr_left is None or rr_right is None:
        raise FusionUnavailableError("both channels are required for discrepancy")
    if not (math.isfinite(rr_left) and math.isfinite(rr_right)):
        raise ParameterError("channel estimates must be finite")
    return abs(rr_left - rr_right)


def make_record(window_index: int, start_s: float,
                rr_left: float | None, rr_right: float | None,
                tau_cpm: float) -> WindowRecord:
    """Build one record; fusion fields are present only with both channels."""
    rec = WindowRecord(window_index=window_index, start_s=start_s,
                       rr_left=rr_left, rr_right=rr_right)
    if rr_left is not None and rr_right is not None:
        rec.rr_fused = fuse(rr_left, rr_right)
        rec.discrepancy_cpm = discrepancy(rr_left, rr_right)
        rec.accepted = rec.discrepancy_cpm < tau_cpm
    return rec


def reject_outliers(records: list[WindowRecord], tau_cpm: float) -> list[WindowRecord]:
    """Flag records by the strict rule ``discrepancy < tau``; none are dropped.

    Records without a discrepancy (missing channel) are never accepted.
    """
    if tau_cpm < 0:
        raise ParameterError("tau_cpm must be >= 0")
    out = []
    for rec in records:
        accepted = rec.discrepancy_cpm is not None and rec.discrepancy_cpm < tau_cpm
        out.append(replace(rec, accepted=accepted))
    return out


def retained_fraction(records: list[WindowRecord]) -> float:
    """Accepted share among records that carry a discrepancy."""
    eligible = [r for r in records if r.discrepancy_cpm is not None]
    if not eligible:
        return 0.0
    return sum(1 for r in eligible if r.accepted) / len(eligible)
