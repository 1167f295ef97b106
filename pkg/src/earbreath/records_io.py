"""Window-record CSV, evaluation reports, sweep tables, and session manifests.

Records and sweep tables are comma-separated text with a fixed header; reports
are key=value text with sections. All reals are written with 4 decimal places,
optionals as empty fields. Every writer has a matching reader so outputs
round-trip through the package's own parsers.
"""

from __future__ import annotations

import configparser
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, ParameterError
from .fusion import WindowRecord
from .metrics import EvalReport, SweepPoint

RECORD_HEADER = ["window_index", "start_s", "rr_left", "rr_right", "rr_fused",
                 "discrepancy", "accepted", "gt_cpm", "gt_valid"]
SWEEP_HEADER = ["tau", "mae", "rmse", "retained_fraction"]


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.4f}"


def _parse_opt(raw: str) -> float | None:
    return None if raw == "" else float(raw)


def _parse_bool(raw: str) -> bool:
    if raw not in ("true", "false"):
        raise FormatError(f"expected true/false, got {raw!r}")
    return raw == "true"


def write_records(records: list[WindowRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_HEADER)
        for r in records:
            writer.writerow([
                r.window_index, _fmt(r.start_s), _fmt(r.rr_left), _fmt(r.rr_right),
                _fmt(r.rr_fused), _fmt(r.discrepancy_cpm),
                "true" if r.accepted else "false",
                _fmt(r.gt_cpm), "true" if r.gt_valid else "false",
            ])


def read_records(path) -> list[WindowRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORD_HEADER:
            raise FormatError(f"unexpected records header: {header}")
        out = []
        for row in reader:
            if len(row) != len(RECORD_HEADER):
                raise FormatError(f"row has {len(row)} fields, "
                                  f"expected {len(RECORD_HEADER)}")
            out.append(WindowRecord(
                window_index=int(row[0]),
                start_s=float(row[1]),
                rr_left=_parse_opt(row[2]),
                rr_right=_parse_opt(row[3]),
                rr_fused=_parse_opt(row[4]),
                discrepancy_cpm=_parse_opt(row[5]),
                accepted=_parse_bool(row[6]),
                gt_cpm=_parse_opt(row[7]),
                gt_valid=_parse_bool(row[8]),
            ))
    return out


TRUTH_HEADER = ["window_index", "rate_cpm"]


def write_truth(truth, path) -> None:
    """Sidecar table of known per-window rates for a synthetic scenario."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRUTH_HEADER)
        for idx, rate in truth:
            writer.writerow([idx, f"{rate:.4f}"])


def read_truth(path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRUTH_HEADER:
            raise FormatError(f"unexpected truth header: {header}")
        return [(int(r[0]), float(r[1])) for r in reader]


def write_sweep(points: list[SweepPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for p in points:
            writer.writerow([_fmt(p.tau_cpm), _fmt(p.mae_cpm), _fmt(p.rmse_cpm),
                             _fmt(p.retained_fraction)])


def read_sweep(path) -> list[SweepPoint]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_HEADER:
            raise FormatError(f"unexpected sweep header: {header}")
        return [SweepPoint(float(r[0]), float(r[1]), float(r[2]), float(r[3]))
                for r in reader]


def write_report(report: EvalReport, path) -> None:
    parser = configparser.ConfigParser()
    parser["metrics"] = {
        "mae_cpm": _fmt(report.mae_cpm),
        "rmse_cpm": _fmt(report.rmse_cpm),
        "bias_cpm": _fmt(report.bias_cpm),
        "loa_low_cpm": _fmt(report.loa_cpm[0]),
        "loa_high_cpm": _fmt(report.loa_cpm[1]),
        "nr_db": _fmt(report.nr_db),
        "ri": _fmt(report.ri),
        "mad_sigma": _fmt(report.mad_sigma),
        "mad_low_cpm": _fmt(report.mad_interval_cpm[0]),
        "mad_high_cpm": _fmt(report.mad_interval_cpm[1]),
        "g_ratio": _fmt(report.g_ratio),
        "retained_fraction": _fmt(report.retained_fraction),
    }
    parser["per_condition"] = {k: _fmt(v) for k, v in report.per_condition.items()}
    parser["per_subject"] = {k: _fmt(v) for k, v in report.per_subject.items()}
    with open(path, "w") as fh:
        parser.write(fh)


def read_report(path) -> EvalReport:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FormatError(f"report file not found: {path}")
    m = parser["metrics"]
    return EvalReport(
        mae_cpm=float(m["mae_cpm"]), rmse_cpm=float(m["rmse_cpm"]),
        bias_cpm=float(m["bias_cpm"]),
        loa_cpm=(float(m["loa_low_cpm"]), float(m["loa_high_cpm"])),
        nr_db=float(m["nr_db"]), ri=float(m["ri"]),
        mad_sigma=float(m["mad_sigma"]),
        mad_interval_cpm=(float(m["mad_low_cpm"]), float(m["mad_high_cpm"])),
        g_ratio=float(m["g_ratio"]),
        retained_fraction=float(m["retained_fraction"]),
        per_condition={k: float(v) for k, v in parser["per_condition"].items()},
        per_subject={k: float(v) for k, v in parser["per_subject"].items()},
    )


# ---------------------------------------------------------------------------
# Session manifest
# ---------------------------------------------------------------------------


@dataclass
class SessionManifest:
    """Paths and labels of one binaural recording session."""

    iem_left: Path
    oem_left: Path
    iem_right: Path
    oem_right: Path
    belt: Path | None = None
    sample_rate_hz: float = 8000.0
    belt_rate_hz: float = 400.0
    condition: str = ""
    subject: str = ""
    config_overrides: dict = field(default_factory=dict)


def load_manifest(path) -> SessionManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}") from exc
    required = ["iem_left", "oem_left", "iem_right", "oem_right"]
    missing = [k for k in required if k not in raw]
    if missing:
        raise FormatError(f"manifest missing keys: {missing}")
    base = path.parent

    def resolve(key):
        if raw.get(key) is None:
            return None
        p = base / raw[key]
        if not p.exists():
            raise ParameterError(f"manifest references missing file: {p}")
        return p

    return SessionManifest(
        iem_left=resolve("iem_left"), oem_left=resolve("oem_left"),
        iem_right=resolve("iem_right"), oem_right=resolve("oem_right"),
        belt=resolve("belt"),
        sample_rate_hz=float(raw.get("sample_rate_hz", 8000.0)),
        belt_rate_hz=float(raw.get("belt_rate_hz", 400.0)),
        condition=raw.get("condition", ""),
        subject=raw.get("subject", ""),
        config_overrides=raw.get("config_overrides", {}),
    )


def save_manifest(manifest: SessionManifest, path) -> None:
    path = Path(path)
    base = path.parent

    def rel(p):
        if p is None:
            return None
        try:
            return str(Path(p).relative_to(base))
        except ValueError:
            return str(p)

    payload = {
        "iem_left": rel(manifest.iem_left), "oem_left": rel(manifest.oem_left),
        "iem_right": rel(manifest.iem_right), "oem_right": rel(manifest.oem_right),
        "belt": rel(manifest.belt),
        "sample_rate_hz": manifest.sample_rate_hz,
        "belt_rate_hz": manifest.belt_rate_hz,
        "condition": manifest.condition,
        "subject": manifest.subject,
        "config_overrides": manifest.config_overrides,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
