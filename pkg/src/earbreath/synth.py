"""Synthetic dual-microphone breathing scenarios with known ground truth.

The signal model mirrors the deployment geometry: the outer mic hears only
ambient noise, the inner mic hears breathing plus that noise filtered through
a linear transfer path. Because the in-ear noise is exactly linear in the
outer signal, an adaptive filter with enough taps can cancel it, and every
generated component is returned so tests can measure against the truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .blocks import BeltSignal, SampleBlock
from .errors import ParameterError
from .filters import design_bandpass, design_lowpass

NOISE_KINDS = ("white", "bandlimited", "cafeteria", "music")

# Ambient level per kind (OEM RMS, full scale). The modulated kinds are louder,
# matching the spread of acoustic conditions the pipeline must survive.
_NOISE_RMS = {"white": 0.05, "bandlimited": 0.06, "cafeteria": 0.08, "music": 0.08}

BREATH_BAND_HZ = (200.0, 1000.0)
_BREATH_PEAK = 0.25
# Inspiration/expiration burst timing at a 4 s cycle (15 CPM), scaled with
# rate. Expiration follows inspiration at 3/8 of the cycle; the rest is the
# breathing pause. The asymmetric spacing puts a strong component at the cycle
# rate itself (a 0.5 spacing would leave only even harmonics), and 3/8 nulls
# the 4th harmonic, which otherwise ties the harmonic spectrum at f and 2f.
_INSP_DUR_S, _INSP_GAIN = 0.8, 1.0
_EXP_START_FRACTION = 0.375
_EXP_DUR_S, _EXP_GAIN = 1.0, 0.7
BELT_RATE_HZ = 400.0


@dataclass
class SynthScenario:
    """Parameters of one synthetic recording."""

    breath_rate_cpm: float = 15.0
    duration_s: float = 60.0
    fs_hz: float = 8000.0
    noise_kind: str = "white"
    snr_db: float = -10.0
    path_taps: np.ndarray | None = None
    path_len: int = 128
    seed: int = 0

    def __post_init__(self):
        if not 4.0 < self.breath_rate_cpm < 60.0:
            raise ParameterError("breath_rate_cpm must be in (4, 60)")
        if self.noise_kind not in NOISE_KINDS:
            raise ParameterError(f"noise_kind must be one of {NOISE_KINDS}")
        if self.duration_s < 0:
            raise ParameterError("duration_s must be >= 0")


@dataclass
class BreathSignals:
    """Breathing audio plus its exact envelope and the belt reference."""

    audio: SampleBlock | None
    envelope: np.ndarray
    belt: BeltSignal | None


@dataclass
class ScenarioData:
    """Everything a generated scenario knows about itself."""

    scenario: SynthScenario
    iem: SampleBlock
    oem: SampleBlock
    clean_breath: SampleBlock
    noise_component: np.ndarray  # the OEM-linear part of the IEM signal
    envelope: np.ndarray
    belt: BeltSignal
    truth: list = field(default_factory=list)  # (window_index, rate_cpm) pairs

    def truth_for(self, window_s: float = 20.0, overlap: float = 0.5) -> list:
        n = len(self.iem)
        rate = self.iem.sample_rate_hz
        win = int(round(window_s * rate))
        stride = int(round(window_s * (1.0 - overlap) * rate))
        count = 0 if n < win else (n - win) // stride + 1
        return [(i, self.scenario.breath_rate_cpm) for i in range(count)]


def _burst_slots(rate_cpm: float):
    """(offset_s, duration_s, gain) of the two bursts within one cycle."""
    cycle_s = 60.0 / rate_cpm
    scale = cycle_s / 4.0
    return cycle_s, ((0.0, _INSP_DUR_S * scale, _INSP_GAIN),
                     (_EXP_START_FRACTION * cycle_s, _EXP_DUR_S * scale, _EXP_GAIN))


def _burst_envelope(rate_cpm: float, n: int, fs_hz: float,
                    signed: bool = False) -> np.ndarray:
    """Two Hann bursts per respiration cycle (inspiration then expiration).

    With ``signed=True`` the expiration burst is negative and area-balanced
    against the inspiration, giving a zero-drift airflow trace.
    """
    env = np.zeros(n)
    cycle_s, bursts = _burst_slots(rate_cpm)
    n_cycles = int(math.ceil(n / (cycle_s * fs_hz)))
    insp_area = _INSP_DUR_S * _INSP_GAIN
    exp_area = _EXP_DUR_S * _EXP_GAIN
    for c in range(n_cycles):
        for k, (offset_s, dur_s, gain) in enumerate(bursts):
            if signed and k == 1:
                gain = -gain * insp_area / exp_area
            start = int(round((c * cycle_s + offset_s) * fs_hz))
            length = max(2, int(round(dur_s * fs_hz)))
            stop = min(start + length, n)
            if start >= n:
                continue
            shape = gain * np.hanning(length)[: stop - start]
            if signed:
                env[start:stop] += shape
            else:
                env[start:stop] = np.maximum(env[start:stop], shape)
    return env


def _band_noise(n: int, fs_hz: float, rng: np.random.Generator,
                band_hz: tuple[float, float]) -> np.ndarray:
    low = band_hz[0]
    high = min(band_hz[1], 0.45 * fs_hz)
    if not low < high:
        raise ParameterError(f"sample rate {fs_hz} too low for band {band_hz}")
    x = design_bandpass(low, high, fs_hz).process(rng.standard_normal(n))
    rms = np.sqrt(np.mean(x ** 2))
    return x / rms if rms > 0 else x


def _belt_wave(rate_cpm: float, duration_s: float) -> np.ndarray:
    """Chest-expansion trace: integral of the signed airflow envelope.

    Rises during inspiration, falls during expiration, flat over the pause;
    unit peak amplitude.
    """
    n = int(round(duration_s * BELT_RATE_HZ))
    flow = _burst_envelope(rate_cpm, n, BELT_RATE_HZ, signed=True)
    belt = np.cumsum(flow) / BELT_RATE_HZ
    belt -= np.mean(belt)
    peak = np.max(np.abs(belt))
    return belt / peak if peak > 0 else belt


def gen_breathing(rate_cpm: float, duration_s: float, fs_hz: float,
                  seed: int = 0) -> BreathSignals:
    """Band-limited breathing bursts, their envelope, and a belt sinusoid."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * fs_hz))
    if n == 0:
        return BreathSignals(None, np.zeros(0), None)
    env = _burst_envelope(rate_cpm, n, fs_hz)
    audio = _band_noise(n, fs_hz, rng, BREATH_BAND_HZ) * env
    peak = np.max(np.abs(audio))
    if peak > 0:
        audio *= _BREATH_PEAK / peak
    return BreathSignals(SampleBlock(audio, fs_hz), env,
                         BeltSignal(_belt_wave(rate_cpm, duration_s), BELT_RATE_HZ))


def random_path(n_taps: int = 128, seed=0) -> np.ndarray:
    """Random slowly-decaying FIR path, unit energy.

    The slow decay yields the sharp resonances of an occluded canal, so the
    in-ear noise is strongly colored even for a white ambient source.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    taps = rng.standard_normal(n_taps) * np.exp(-np.arange(n_taps) / (n_taps / 2.0))
    return taps / np.linalg.norm(taps)


def _ambient_noise(kind: str, n: int, fs_hz: float,
                   rng: np.random.Generator) -> np.ndarray:
    if kind == "white":
        x = rng.standard_normal(n)
    elif kind == "bandlimited":
        x = _band_noise(n, fs_hz, rng, (150.0, 1200.0))
    elif kind == "cafeteria":
        slow = design_lowpass(1.5, fs_hz).process(rng.standard_normal(n))
        srms = np.sqrt(np.mean(slow ** 2))
        if srms > 0:
            slow /= srms
        x = rng.standard_normal(n) * np.clip(1.0 + 0.6 * slow, 0.25, None)
    elif kind == "music":
        t = np.arange(n) / fs_hz
        freqs = np.geomspace(150.0, 1600.0, 8) * rng.uniform(0.95, 1.05, 8)
        x = np.zeros(n)
        for f in freqs:
            am_rate = rng.uniform(0.5, 2.0)
            am_phase = rng.uniform(0.0, 2.0 * np.pi)
            # deep slow gating: partials all but vanish during their lulls
            am = 0.05 + 0.95 * (0.5 + 0.5 * np.sin(2 * np.pi * am_rate * t + am_phase)) ** 3
            x += rng.uniform(0.5, 1.0) * np.sin(2 * np.pi * f * t
                                                + rng.uniform(0, 2 * np.pi)) * am
        # bar-level dynamics: the whole mixture nearly dies away between beats
        # (rate kept above the respiration search band)
        notch_rate = rng.uniform(0.55, 0.75)
        phrase = 1.0 - 0.997 * (0.5 + 0.5 * np.sin(
            2 * np.pi * notch_rate * t + rng.uniform(0, 2 * np.pi))) ** 2
        x *= phrase
        x += 0.01 * rng.standard_normal(n)
    else:
        raise ParameterError(f"unknown noise kind {kind!r}")
    rms = np.sqrt(np.mean(x ** 2))
    return x / rms if rms > 0 else x


def _in_band_energy(x: np.ndarray, fs_hz: float) -> float:
    bpf = design_bandpass(BREATH_BAND_HZ[0], min(BREATH_BAND_HZ[1], 0.45 * fs_hz), fs_hz)
    return float(np.sum(bpf.process(x) ** 2))


def _assemble(scenario: SynthScenario, breath: BreathSignals,
              rng_noise: np.random.Generator,
              rng_path: np.random.Generator) -> ScenarioData:
    fs = scenario.fs_hz
    clean = breath.audio.samples
    n = len(clean)
    oem = _ambient_noise(scenario.noise_kind, n, fs, rng_noise)
    oem = oem * _NOISE_RMS[scenario.noise_kind]
    path = (np.asarray(scenario.path_taps, dtype=np.float64)
            if scenario.path_taps is not None
            else random_path(scenario.path_len, rng_path))
    noise_in = sps.lfilter(path, [1.0], oem)
    if math.isinf(scenario.snr_db) and scenario.snr_db > 0:
        alpha = 0.0
    else:
        e_breath = _in_band_energy(clean, fs)
        e_noise = _in_band_energy(noise_in, fs)
        if e_noise <= 0:
            raise ParameterError("generated noise has no in-band energy")
        alpha = math.sqrt(e_breath / (e_noise * 10.0 ** (scenario.snr_db / 10.0)))
    noise_component = alpha * noise_in
    iem = clean + noise_component
    # keep everything full scale; a common factor preserves SNR and linearity
    peak = max(np.max(np.abs(iem)), np.max(np.abs(oem)))
    if peak > 0.99:
        scale = 0.99 / peak
        iem = iem * scale
        oem = oem * scale
        clean = clean * scale
        noise_component = noise_component * scale
    data = ScenarioData(scenario=scenario,
                        iem=SampleBlock(iem, fs),
                        oem=SampleBlock(oem, fs),
                        clean_breath=SampleBlock(clean, fs),
                        noise_component=noise_component,
                        envelope=breath.envelope,
                        belt=breath.belt)
    data.truth = data.truth_for()
    return data


def gen_scenario(scenario: SynthScenario) -> ScenarioData:
    """Generate one single-ear scenario, deterministic in the seed."""
    if scenario.duration_s <= 0:
        raise ParameterError("scenario duration must be positive")
    ss = np.random.SeedSequence(scenario.seed)
    carrier_ss, noise_ss, path_ss = ss.spawn(3)
    breath = gen_breathing(scenario.breath_rate_cpm, scenario.duration_s,
                           scenario.fs_hz,
                           seed=np.random.default_rng(carrier_ss))
    return _assemble(scenario, breath,
                     np.random.default_rng(noise_ss),
                     np.random.default_rng(path_ss))


def gen_binaural_scenario(scenario: SynthScenario) -> tuple[ScenarioData, ScenarioData]:
    """Left/right scenarios sharing breath timing and belt, with independent
    carriers, noise realizations and transfer paths per ear."""
    if scenario.duration_s <= 0:
        raise ParameterError("scenario duration must be positive")
    ss = np.random.SeedSequence(scenario.seed)
    children = ss.spawn(6)
    ears = []
    for k in range(2):
        breath = gen_breathing(scenario.breath_rate_cpm, scenario.duration_s,
                               scenario.fs_hz,
                               seed=np.random.default_rng(children[3 * k]))
        ears.append(_assemble(scenario, breath,
                              np.random.default_rng(children[3 * k + 1]),
                              np.random.default_rng(children[3 * k + 2])))
    return ears[0], ears[1]
