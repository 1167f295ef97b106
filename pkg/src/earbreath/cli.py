"""Command-line interface.

Subcommands::

    synth      generate a synthetic scenario into WAV files + truth sidecar
    denoise    IEM+OEM -> cleaned audio (optionally a noise-reduction report)
    estimate   audio or manifest -> per-window record CSV
    evaluate   records (+belt) -> evaluation report
    sweep      records + tau grid -> threshold sweep table

Exit codes: 0 success, 1 processing error, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import audio_io, records_io
from .blocks import BeltSignal, SampleBlock
from .config import PipelineConfig, load_config
from .errors import PipelineError
from .fusion import reject_outliers
from .metrics import build_report, noise_reduction_db, threshold_sweep
from .pipeline import (SUPPRESSORS, attach_ground_truth, denoise,
                       estimate_channel, records_from_estimates,
                       single_channel_records)
from .records_io import SessionManifest, load_manifest, save_manifest, write_truth
from .synth import NOISE_KINDS, SynthScenario, gen_binaural_scenario, gen_scenario


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI config file")
    p.add_argument("--tau", type=float, help="discrepancy threshold in CPM")
    p.add_argument("--mode", choices=SUPPRESSORS, help="suppressor variant")
    p.add_argument("--window-s", type=float, help="analysis window length")
    p.add_argument("--overlap", type=float, help="window overlap fraction")
    p.add_argument("--search-band", type=str,
                   help="rate search band, LOW:HIGH in CPM")
    p.add_argument("--seed", type=int, default=0)


def _config_from(args) -> PipelineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "tau", None) is not None:
        cfg.tau_cpm = args.tau
    if getattr(args, "window_s", None) is not None:
        cfg.window_s = args.window_s
    if getattr(args, "overlap", None) is not None:
        cfg.overlap = args.overlap
    if getattr(args, "search_band", None):
        low, high = (float(v) for v in args.search_band.split(":"))
        cfg.search_low_cpm, cfg.search_high_cpm = low, high
    return cfg


def _read_belt(path) -> BeltSignal:
    block = audio_io.read_wav(path)
    return BeltSignal(block.samples, block.sample_rate_hz)


def _cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = SynthScenario(
        breath_rate_cpm=args.rate, duration_s=args.duration, fs_hz=args.fs,
        noise_kind=args.noise, snr_db=args.snr, path_len=args.path_taps,
        seed=args.seed)
    if args.mono:
        data = gen_scenario(scenario)
        audio_io.write_wav(out_dir / "iem.wav", data.iem)
        audio_io.write_wav(out_dir / "oem.wav", data.oem)
        audio_io.write_wav(out_dir / "belt.wav", _belt_block(data.belt))
        write_truth(data.truth, out_dir / "truth.csv")
    else:
        left, right = gen_binaural_scenario(scenario)
        audio_io.write_wav(out_dir / "iem_left.wav", left.iem)
        audio_io.write_wav(out_dir / "oem_left.wav", left.oem)
        audio_io.write_wav(out_dir / "iem_right.wav", right.iem)
        audio_io.write_wav(out_dir / "oem_right.wav", right.oem)
        audio_io.write_wav(out_dir / "belt.wav", _belt_block(left.belt))
        write_truth(left.truth, out_dir / "truth.csv")
        save_manifest(SessionManifest(
            iem_left=out_dir / "iem_left.wav", oem_left=out_dir / "oem_left.wav",
            iem_right=out_dir / "iem_right.wav",
            oem_right=out_dir / "oem_right.wav",
            belt=out_dir / "belt.wav", sample_rate_hz=scenario.fs_hz,
            condition=scenario.noise_kind, subject=f"seed{scenario.seed}",
        ), out_dir / "manifest.json")
    print(f"wrote scenario to {out_dir}")
    return 0


def _belt_block(belt: BeltSignal) -> SampleBlock:
    return SampleBlock(belt.samples, belt.sample_rate_hz)


def _cmd_denoise(args) -> int:
    cfg = _config_from(args)
    suppressor = args.mode or "ans"
    iem = audio_io.read_wav(args.iem)
    oem = audio_io.read_wav(args.oem)
    result = denoise(iem, oem, cfg, suppressor)
    audio_io.write_wav(args.out, result.cleaned)
    if args.nr_report:
        nr = noise_reduction_db(result.cleaned, result.bandpassed_input)
        parser = configparser.ConfigParser()
        parser["noise"] = {"nr_db": f"{nr:.4f}",
                           "delay_samples": str(result.delay_samples),
                           "suppressor": suppressor}
        with open(args.nr_report, "w") as fh:
            parser.write(fh)
    print(f"wrote cleaned audio to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    cfg = _config_from(args)
    suppressor = args.mode or "ans"
    if args.manifest:
        manifest = load_manifest(args.manifest)
        left_clean = denoise(audio_io.read_wav(manifest.iem_left),
                             audio_io.read_wav(manifest.oem_left),
                             cfg, suppressor).cleaned
        right_clean = denoise(audio_io.read_wav(manifest.iem_right),
                              audio_io.read_wav(manifest.oem_right),
                              cfg, suppressor).cleaned
        records = records_from_estimates(
            estimate_channel(left_clean, cfg, "left"),
            estimate_channel(right_clean, cfg, "right"), cfg.tau_cpm)
        if manifest.belt is not None:
            records = attach_ground_truth(
                records, _read_belt(manifest.belt), cfg)
    elif args.iem and args.oem:
        cleaned = denoise(audio_io.read_wav(args.iem),
                          audio_io.read_wav(args.oem), cfg, suppressor).cleaned
        records = single_channel_records(estimate_channel(cleaned, cfg, "left"))
    elif args.audio:
        cleaned = audio_io.read_wav(args.audio)
        records = single_channel_records(estimate_channel(cleaned, cfg, "left"))
    else:
        raise PipelineError(
            "estimate needs --manifest, --iem/--oem, or --audio")
    if not records:
        raise PipelineError(
            f"input shorter than one analysis window "
            f"(minimum {cfg.window_s:.0f} s at {cfg.feature_rate_hz:.0f} Hz)")
    records_io.write_records(records, args.out)
    print(f"wrote {len(records)} window records to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _config_from(args)
    records = records_io.read_records(args.records)
    if args.belt:
        records = attach_ground_truth(records,
                                      _read_belt(args.belt), cfg)
    records = reject_outliers(records, cfg.tau_cpm)
    report = build_report(records, condition=args.condition or "",
                          subject=args.subject or "")
    records_io.write_report(report, args.out)
    print(f"wrote report to {args.out} "
          f"(MAE {report.mae_cpm:.3f} CPM over valid windows)")
    return 0


def _parse_grid(text: str) -> np.ndarray:
    parts = [float(v) for v in text.split(":")]
    if len(parts) != 3:
        raise PipelineError("tau grid must be START:STEP:STOP")
    start, step, stop = parts
    if step <= 0 or stop < start:
        raise PipelineError("tau grid must have positive step and stop >= start")
    return np.arange(start, stop + step / 2, step)


def _cmd_sweep(args) -> int:
    records = records_io.read_records(args.records)
    points = threshold_sweep(records, _parse_grid(args.tau_grid))
    records_io.write_sweep(points, args.out)
    print(f"wrote {len(points)} sweep rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="earbreath",
        description="Dual-microphone noise suppression and respiration-rate "
                    "estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scenario")
    p.add_argument("--rate", type=float, default=15.0, help="breathing rate in CPM")
    p.add_argument("--duration", type=float, default=60.0, help="seconds")
    p.add_argument("--snr", type=float, default=-10.0,
                   help="in-band breathing SNR in dB (inf for clean)")
    p.add_argument("--noise", choices=NOISE_KINDS, default="white")
    p.add_argument("--fs", type=float, default=8000.0)
    p.add_argument("--path-taps", type=int, default=128)
    p.add_argument("--mono", action="store_true",
                   help="single ear instead of binaural")
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("denoise", help="suppress ambient noise in an IEM recording")
    p.add_argument("--iem", required=True)
    p.add_argument("--oem", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--nr-report", help="write a noise-reduction report here")
    _add_common(p)
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("estimate", help="per-window respiration-rate records")
    p.add_argument("--manifest", help="binaural session manifest (JSON)")
    p.add_argument("--iem")
    p.add_argument("--oem")
    p.add_argument("--audio", help="already-cleaned mono audio")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("evaluate", help="metrics report from records (+ belt)")
    p.add_argument("--records", required=True)
    p.add_argument("--belt", help="belt WAV for ground truth")
    p.add_argument("--condition", default="")
    p.add_argument("--subject", default="")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="threshold sweep over a tau grid")
    p.add_argument("--records", required=True)
    p.add_argument("--tau", required=True, dest="tau_grid",
                   help="grid START:STEP:STOP in CPM")
    p.add_argument("--out", required=True)
    p.add_argument("--config", type=Path, help="INI config file")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
