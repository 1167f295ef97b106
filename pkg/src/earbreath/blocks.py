"""Sample containers shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


def _as_signal(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1:
        raise ParameterError(f"expected a mono 1-D signal, got shape {arr.shape}")
    return arr


@dataclass
class SampleBlock:
    """A fixed-length mono buffer, the unit of streaming.

    Samples are full-scale normalized to [-1, 1] for audio use; the container
    itself only enforces finiteness and a positive length.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        self.samples = _as_signal(self.samples)
        if len(self.samples) == 0:
            raise ParameterError("SampleBlock must contain at least one sample")
        if not np.all(np.isfinite(self.samples)):
            raise ParameterError("SampleBlock samples must be finite")
        if not (self.sample_rate_hz > 0):
            raise ParameterError("sample_rate_hz must be positive")
        self.sample_rate_hz = float(self.sample_rate_hz)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def split(self, block_size: int) -> list["SampleBlock"]:
        """Cut into consecutive blocks of ``block_size`` (last one may be short)."""
        if block_size <= 0:
            raise ParameterError("block_size must be positive")
        return [
            SampleBlock(self.samples[i : i + block_size], self.sample_rate_hz)
            for i in range(0, len(self.samples), block_size)
        ]


@dataclass
class BeltSignal:
    """Chest-expansion reference signal (arbitrary units)."""

    samples: np.ndarray
    sample_rate_hz: float = 400.0

    def __post_init__(self):
        self.samples = _as_signal(self.samples)
        if not np.all(np.isfinite(self.samples)):
            raise ParameterError("BeltSignal samples must be finite")
        if not (self.sample_rate_hz > 0):
            raise ParameterError("sample_rate_hz must be positive")
        self.sample_rate_hz = float(self.sample_rate_hz)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz
