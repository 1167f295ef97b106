"""LMS adaptive filters and the two-microphone noise-suppression stage.

Three update rules share one sample-sequential kernel:

* ``plain``      -- h += mu * e * x
* ``nlms``       -- h += mu * e * x / (eps + x.x)
* ``delayed-leaky-clipped`` -- h = (1-nu)*h + mu*s*e*x with the desired signal
  delayed by K samples and s capping the update once e*(x.x) exceeds the clip
  threshold.

``plain`` and ``nlms`` always run with zero delay; only the delayed variant
uses the configured K. Processing is strictly per-sample, so any block
segmentation of the same input produces bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .blocks import SampleBlock
from .errors import AlignmentError, DivergenceError, ParameterError
from .filters import BiquadCascade, design_bandpass

MODES = ("plain", "nlms", "delayed-leaky-clipped")
_MODE_IDS = {name: i for i, name in enumerate(MODES)}

DEFAULT_BAND_HZ = (200.0, 1000.0)
DEFAULT_BAND_ORDER = 4


@dataclass
class LmsConfig:
    """Adaptive filter parameters.

    ``leakage`` is the gamma of the leaky update; the effective per-sample
    decay is nu = gamma * step. Defaults give nu = 1e-6.
    """

    taps: int = 256
    delay: int = 64
    step: float = 0.05
    leakage: float = 2e-5
    clip_threshold: float = 1.0
    eps: float = 1e-8
    mode: str = "delayed-leaky-clipped"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.taps < 1:
            raise ParameterError("taps must be >= 1")
        if self.delay < 0:
            raise ParameterError("delay must be >= 0")
        if not self.step > 0:
            raise ParameterError("step must be positive")
        if self.leakage < 0:
            raise ParameterError("leakage must be >= 0")
        if not 0 <= self.nu < 1:
            raise ParameterError("effective leak nu = leakage*step must be in [0, 1)")
        if not self.clip_threshold > 0:
            raise ParameterError("clip_threshold must be positive")
        if not self.eps > 0:
            raise ParameterError("eps must be positive")

    @property
    def nu(self) -> float:
        return self.leakage * self.step

    @property
    def effective_delay(self) -> int:
        """Desired-signal delay actually applied (0 for plain/nlms)."""
        return self.delay if self.mode == "delayed-leaky-clipped" else 0


class LmsState:
    """Weights plus reference/desired delay lines for one adaptive filter."""

    def __init__(self, config: LmsConfig):
        self.config = config
        self.weights = np.zeros(config.taps)
        self._xbuf = np.zeros(config.taps)
        self._dbuf = np.zeros(config.effective_delay + 1)
        self._pos = np.zeros(2, dtype=np.int64)  # ring positions: x, d
        self.n_processed = 0

    def reference_vector(self) -> np.ndarray:
        """Current x(n) vector, newest sample first."""
        m = len(self._xbuf)
        order = (self._pos[0] - np.arange(m)) % m
        return self._xbuf[order]


@njit(cache=True)
def clip_factor(q: float, tau: float, eps: float) -> float:
    """Update scale s for the clipped mode, q = e * (x.x).

    Equals 1 whenever q <= tau - eps (no clipping; covers all negative q and
    tau = inf), otherwise tau / (eps + q), so s is always in (0, 1].
    """
    if q <= tau - eps:
        return 1.0
    return tau / (eps + q)


@njit(cache=True)
def _lms_kernel(x, d, e_out, h, xbuf, dbuf, pos, mode, mu, nu, tau, eps):
    m = h.shape[0]
    nd = dbuf.shape[0]
    xpos = pos[0]
    dpos = pos[1]
    bad = -1
    for j in range(x.shape[0]):
        xpos += 1
        if xpos == m:
            xpos = 0
        xbuf[xpos] = x[j]

        y = 0.0
        xx = 0.0
        idx = xpos
        for i in range(m):
            v = xbuf[idx]
            y += h[i] * v
            xx += v * v
            idx -= 1
            if idx < 0:
                idx = m - 1

        dpos += 1
        if dpos == nd:
            dpos = 0
        dbuf[dpos] = d[j]
        e = dbuf[(dpos + 1) % nd] - y  # slot written K samples ago
        e_out[j] = e
        if not np.isfinite(e):
            bad = j
            break

        if mode == 0:
            c = mu * e
            g = 1.0
        elif mode == 1:
            c = mu * e / (eps + xx)
            g = 1.0
        else:
            s = clip_factor(e * xx, tau, eps)
            c = (mu * s) * e
            g = 1.0 - nu

        idx = xpos
        for i in range(m):
            h[i] = h[i] * g + c * xbuf[idx]
            idx -= 1
            if idx < 0:
                idx = m - 1

    pos[0] = xpos
    pos[1] = dpos
    return bad


def lms_run(state: LmsState, x: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Run the adaptive filter over one block; returns the error signal e."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    if x.shape != d.shape:
        raise AlignmentError(f"reference/desired length mismatch: {len(x)} vs {len(d)}")
    cfg = state.config
    e = np.empty_like(x)
    bad = _lms_kernel(x, d, e, state.weights, state._xbuf, state._dbuf,
                      state._pos, _MODE_IDS[cfg.mode], cfg.step, cfg.nu,
                      cfg.clip_threshold, cfg.eps)
    if bad >= 0:
        raise DivergenceError(state.n_processed + int(bad))
    state.n_processed += len(x)
    if not np.all(np.isfinite(state.weights)):
        raise DivergenceError(state.n_processed - 1)
    return e


def lms_step(state: LmsState, config: LmsConfig, x_n: float, d_n: float):
    """Advance the filter by one sample; returns ``(e_n, state)``.

    ``config`` must be the one the state was built with (sanity-checked);
    the state is updated in place.
    """
    if config is not state.config and config != state.config:
        raise ParameterError("config does not match the state's config")
    e = lms_run(state, np.array([x_n]), np.array([d_n]))
    return float(e[0]), state


def warm_up() -> None:
    """Trigger JIT compilation of the kernel with a tiny run."""
    st = LmsState(LmsConfig(taps=4, delay=1))
    lms_run(st, np.zeros(2), np.zeros(2))


# ---------------------------------------------------------------------------
# Two-microphone noise suppression
# ---------------------------------------------------------------------------


class AnsStage:
    """Streaming noise suppressor: band-pass both mics, adapt on the pair.

    The output is the error signal e(n); relative to the band-passed primary
    input it is delayed by ``delay_samples`` (the configured K, zero for the
    plain/nlms modes).
    """

    def __init__(self, config: LmsConfig | None = None,
                 sample_rate_hz: float = 8000.0,
                 band_hz: tuple[float, float] = DEFAULT_BAND_HZ,
                 band_order: int = DEFAULT_BAND_ORDER):
        self.config = config or LmsConfig()
        self.sample_rate_hz = float(sample_rate_hz)
        self._bpf_primary = design_bandpass(band_hz[0], band_hz[1],
                                            sample_rate_hz, band_order)
        self._bpf_reference = design_bandpass(band_hz[0], band_hz[1],
                                              sample_rate_hz, band_order)
        self.state = LmsState(self.config)
        self.delay_samples = self.config.effective_delay

    def bandpass_copy(self) -> BiquadCascade:
        """Fresh zero-state copy of the band-pass used on both channels."""
        cascade = BiquadCascade(self._bpf_primary.sos.copy())
        return cascade

    def push(self, iem: SampleBlock, oem: SampleBlock) -> SampleBlock:
        """Process one lockstep block pair (IEM is desired, OEM is reference)."""
        if iem.sample_rate_hz != oem.sample_rate_hz:
            raise AlignmentError("IEM and OEM sample rates differ")
        if iem.sample_rate_hz != self.sample_rate_hz:
            raise AlignmentError(
                f"expected {self.sample_rate_hz} Hz blocks, got {iem.sample_rate_hz}")
        if len(iem) != len(oem):
            raise AlignmentError(f"block length mismatch: {len(iem)} vs {len(oem)}")
        d = self._bpf_primary.process(iem.samples)
        x = self._bpf_reference.process(oem.samples)
        e = lms_run(self.state, x, d)
        return SampleBlock(e, self.sample_rate_hz)


def ans_process(iem, oem, config: LmsConfig | None = None,
                sample_rate_hz: float | None = None,
                band_hz: tuple[float, float] = DEFAULT_BAND_HZ):
    """Run the suppression stage over paired streams.

    Accepts either two ``SampleBlock``s or two equal-length sequences of
    lockstep blocks; returns output in the same shape.
    """
    single = isinstance(iem, SampleBlock)
    iem_blocks = [iem] if single else list(iem)
    oem_blocks = [oem] if isinstance(oem, SampleBlock) else list(oem)
    if len(iem_blocks) != len(oem_blocks):
        raise AlignmentError(
            f"stream length mismatch: {len(iem_blocks)} vs {len(oem_blocks)} blocks")
    if not iem_blocks:
        return []
    rate = sample_rate_hz or iem_blocks[0].sample_rate_hz
    stage = AnsStage(config, rate, band_hz)
    out = [stage.push(ib, ob) for ib, ob in zip(iem_blocks, oem_blocks)]
    return out[0] if single else out
