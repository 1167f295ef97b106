"""Pipeline configuration with INI-style persistence.

Every tunable named by the processing stages lives here; the CLI loads a file
with ``--config`` and individual flags override single values.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

from .errors import ParameterError


@dataclass
class PipelineConfig:
    # [lms]
    lms_mode: str = "delayed-leaky-clipped"
    lms_taps: int = 256
    lms_delay: int = 64
    lms_step: float = 0.05
    lms_leakage: float = 2e-5
    lms_clip_threshold: float = 1.0
    lms_eps: float = 1e-8
    # [bandpass]
    band_low_hz: float = 200.0
    band_high_hz: float = 1000.0
    band_order: int = 4
    # [rates]
    ans_rate_hz: float = 8000.0
    feature_rate_hz: float = 2000.0
    # [stft]
    stft_window: int = 128
    stft_hop: int = 16
    # [features]
    quantile: float = 0.85
    p_norm: float = 8.0
    a_p: float = 0.5
    a_d: float = 0.5
    feature_band_low_hz: float = 0.05
    feature_band_high_hz: float = 1.9
    feature_decimation: int = 32
    log_floor: float = 1e-12
    # [windows]
    window_s: float = 20.0
    overlap: float = 0.5
    # [search]
    search_low_cpm: float = 7.5
    search_high_cpm: float = 30.0
    pad_multiple: int = 32
    min_peak_fraction: float = 0.05
    # [ground_truth]
    gt_pad_factor: int = 32
    gt_prominence_min: float = 3.0
    belt_rate_hz: float = 400.0
    # [fusion]
    tau_cpm: float = 0.52


_SECTIONS = {
    "lms": ("lms_mode", "lms_taps", "lms_delay", "lms_step", "lms_leakage",
            "lms_clip_threshold", "lms_eps"),
    "bandpass": ("band_low_hz", "band_high_hz", "band_order"),
    "rates": ("ans_rate_hz", "feature_rate_hz"),
    "stft": ("stft_window", "stft_hop"),
    "features": ("quantile", "p_norm", "a_p", "a_d", "feature_band_low_hz",
                 "feature_band_high_hz", "feature_decimation", "log_floor"),
    "windows": ("window_s", "overlap"),
    "search": ("search_low_cpm", "search_high_cpm", "pad_multiple",
               "min_peak_fraction"),
    "ground_truth": ("gt_pad_factor", "gt_prominence_min", "belt_rate_hz"),
    "fusion": ("tau_cpm",),
}

_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _parse(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def load_config(path) -> PipelineConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ParameterError(f"config file not found: {path}")
    cfg = PipelineConfig()
    for section, names in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key in parser[section]:
            if key not in names:
                raise ParameterError(f"unknown config key [{section}] {key}")
            setattr(cfg, key, _parse(key, parser[section][key]))
    return cfg


def save_config(cfg: PipelineConfig, path) -> None:
    parser = configparser.ConfigParser()
    for section, names in _SECTIONS.items():
        parser[section] = {name: str(getattr(cfg, name)) for name in names}
    with open(path, "w") as fh:
        parser.write(fh)
