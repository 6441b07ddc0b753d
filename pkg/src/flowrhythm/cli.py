"""Command-line front end.

Subcommands mirror the pipeline stages: simulate, ingest, profile,
periodogram, track. Every run writes its artifacts plus one manifest.json
into --out, recording config and input digests so reruns are auditable.
Exit codes: 0 success, 2 usage or config error, 3 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from datetime import date, datetime, timezone
from importlib import resources
from pathlib import Path
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

from . import __version__
from .binning import DEFAULT_MIN_VALID_SLOTS, GROUPS, profile, write_profile_csv
from .errors import ConfigError, DataError, FlowRhythmError, InvalidConfig
from .exclusions import DayClass, ExclusionCalendar, load_calendar
from .pipeline import readings_to_days
from .readings import read_stream, write_stream_csv, write_stream_jsonl
from .spectral import write_periodogram_csv, write_periodogram_sidecar
from .synth import demo_scenario, generate, load_scenario, scenario_to_json
from .tracking import (
    WindowConfig,
    compute_window_periodograms,
    track_intensity,
    write_intensity_csv,
    write_overlay_csv,
)


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH makes the manifest itself reproducible.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        when = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        when = datetime.now(tz=timezone.utc)
    return when.isoformat(timespec="seconds")


def _sha256_file(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _sha256_config(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


def _write_manifest(out_dir: Path, command: str, config: dict, inputs: list[Path], **extra) -> None:
    manifest = {
        "tool": "flowrhythm",
        "tool_version": __version__,
        "command": command,
        "timestamp": _timestamp(),
        "config": config,
        "config_digest": _sha256_config(config),
        "inputs": {str(p): _sha256_file(p) for p in inputs},
        **extra,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _timezone_of(args) -> ZoneInfo:
    try:
        return ZoneInfo(args.timezone)
    except (ZoneInfoNotFoundError, ValueError) as exc:
        raise InvalidConfig(f"unknown timezone {args.timezone!r}") from exc


def _parse_periods(text: str) -> tuple[float, ...]:
    try:
        periods = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise InvalidConfig(f"bad --periods value {text!r}: {exc}") from exc
    if not periods:
        raise InvalidConfig(f"bad --periods value {text!r}: no periods")
    return periods


def _window_config(args) -> WindowConfig:
    return WindowConfig(
        window_days=args.window_days,
        stride_days=args.stride_days,
        min_valid_days=args.min_valid_days,
        target_periods=_parse_periods(args.periods),
    )


def _load_calendar_arg(args) -> ExclusionCalendar | None:
    if args.calendar is None:
        return None
    path = Path(args.calendar)
    if not path.exists():
        raise InvalidConfig(f"calendar file not found: {path}")
    return load_calendar(path)


def _load_days(args, tz):
    path = Path(args.readings)
    if not path.exists():
        raise InvalidConfig(f"readings file not found: {path}")
    stream = read_stream(path)
    return path, stream, readings_to_days(stream, tz=tz, min_valid_slots=args.min_valid_slots)


def cmd_simulate(args) -> int:
    if args.scenario is None:
        cfg = demo_scenario()
        scenario_path = None
    else:
        scenario_path = Path(args.scenario)
        cfg = load_scenario(scenario_path)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    stream = generate(cfg)
    out = _out_dir(args)
    name = "readings.jsonl" if args.format == "jsonl" else "readings.csv"
    target = out / name
    if args.format == "jsonl":
        write_stream_jsonl(stream, target)
    else:
        write_stream_csv(stream, target)
    written = [target.name]
    if scenario_path is None:
        # The packaged demo has a matching exclusion calendar; emit it so the
        # profile/track walkthrough is self-contained.
        calendar_text = resources.files("flowrhythm.data").joinpath("study_calendar.txt").read_text()
        (out / "calendar.txt").write_text(calendar_text, encoding="utf-8")
        written.append("calendar.txt")
    config = {
        "scenario": scenario_to_json(cfg),
        "scenario_file": str(scenario_path) if scenario_path else "packaged demo",
        "format": args.format,
    }
    _write_manifest(out, "simulate", config, [scenario_path] if scenario_path else [])
    print(f"wrote {len(stream)} readings to {target}" + (" (+ calendar.txt)" if len(written) > 1 else ""))
    return 0


def cmd_ingest(args) -> int:
    tz = _timezone_of(args)
    path, stream, days = _load_days(args, tz)
    out = _out_dir(args)
    write_stream_csv(stream, out / "readings.csv")
    total = float(stream.litres[-1] - stream.litres[0])
    summary = {
        "n_readings": len(stream),
        "first": stream[0].timestamp.isoformat(),
        "last": stream[-1].timestamp.isoformat(),
        "total_litres": total,
        "n_binned_days": len(days),
        "timezone": args.timezone,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    config = {"timezone": args.timezone, "min_valid_slots": args.min_valid_slots}
    _write_manifest(out, "ingest", config, [path])
    print(f"ingested {len(stream)} readings covering {len(days)} day(s)")
    return 0


def _normal_days(days, calendar):
    if calendar is None:
        return days
    return [d for d in days if calendar.classify(d.day) is DayClass.NORMAL]


def cmd_profile(args) -> int:
    tz = _timezone_of(args)
    path, _, days = _load_days(args, tz)
    calendar = _load_calendar_arg(args)
    kept = _normal_days(days, calendar)
    out = _out_dir(args)
    written = []
    for group in GROUPS:
        p = profile(kept, group, std_kind=args.std)
        target = out / f"profile_{group}.csv"
        write_profile_csv(p, target)
        written.append(target.name)
    config = {
        "timezone": args.timezone,
        "min_valid_slots": args.min_valid_slots,
        "std": args.std,
        "calendar": str(args.calendar) if args.calendar else None,
    }
    inputs = [path] + ([Path(args.calendar)] if args.calendar else [])
    _write_manifest(out, "profile", config, inputs)
    print(f"wrote {', '.join(written)} from {len(kept)} day(s)")
    return 0


def cmd_periodogram(args) -> int:
    cfg = _window_config(args)
    tz = _timezone_of(args)
    path, _, days = _load_days(args, tz)
    calendar = _load_calendar_arg(args)
    pairs = compute_window_periodograms(
        days, calendar, cfg,
        estimator=args.estimator, normalization=args.normalization,
        keep_skipped=False,
    )
    if args.start is not None:
        try:
            wanted = date.fromisoformat(args.start)
        except ValueError as exc:
            raise InvalidConfig(f"bad --start date {args.start!r}: {exc}") from exc
        pairs = [(w, pg) for w, pg in pairs if w.start_date == wanted]
        if not pairs:
            raise DataError(f"no emitted window starts at {wanted}")
    elif not pairs:
        raise DataError("no window has enough valid days")
    window, pg = pairs[0]
    out = _out_dir(args)
    write_periodogram_csv(pg, out / "periodogram.csv")
    write_periodogram_sidecar(pg, out / "periodogram.meta.json")
    config = {
        "timezone": args.timezone,
        "min_valid_slots": args.min_valid_slots,
        "window_days": cfg.window_days,
        "stride_days": cfg.stride_days,
        "min_valid_days": cfg.min_valid_days,
        "periods": list(cfg.target_periods),
        "estimator": args.estimator,
        "normalization": args.normalization,
        "start": window.start_date.isoformat(),
        "calendar": str(args.calendar) if args.calendar else None,
    }
    inputs = [path] + ([Path(args.calendar)] if args.calendar else [])
    _write_manifest(
        out, "periodogram", config, inputs,
        estimator=args.estimator, normalization=args.normalization,
    )
    print(f"wrote periodogram.csv for window starting {window.start_date}")
    return 0


def cmd_track(args) -> int:
    cfg = _window_config(args)
    tz = _timezone_of(args)
    path, _, days = _load_days(args, tz)
    calendar = _load_calendar_arg(args)
    series = track_intensity(
        days, calendar, cfg,
        estimator=args.estimator, normalization=args.normalization,
        keep_skipped=True,
    )
    pairs = compute_window_periodograms(
        days, calendar, cfg,
        estimator=args.estimator, normalization=args.normalization,
        keep_skipped=False,
    )
    out = _out_dir(args)
    write_intensity_csv(series, out / "intensity.csv")
    write_overlay_csv(pairs, out / "overlay.csv")
    vacations = calendar.vacation_ranges() if calendar is not None else []
    config = {
        "timezone": args.timezone,
        "min_valid_slots": args.min_valid_slots,
        "window_days": cfg.window_days,
        "stride_days": cfg.stride_days,
        "min_valid_days": cfg.min_valid_days,
        "periods": list(cfg.target_periods),
        "estimator": args.estimator,
        "normalization": args.normalization,
        "calendar": str(args.calendar) if args.calendar else None,
    }
    inputs = [path] + ([Path(args.calendar)] if args.calendar else [])
    _write_manifest(
        out, "track", config, inputs,
        estimator=args.estimator, normalization=args.normalization,
        vacation_ranges=[[a.isoformat(), b.isoformat()] for a, b in vacations],
    )
    n_emitted = sum(1 for p in series.points if not p.skipped) // max(len(cfg.target_periods), 1)
    print(f"wrote intensity.csv ({n_emitted} emitted window(s)) and overlay.csv")
    return 0


def _add_common_io(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("readings", help="readings file (CSV or JSONL)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--timezone", default="UTC", help="IANA timezone for binning (default UTC)")
    parser.add_argument(
        "--min-valid-slots", type=int, default=DEFAULT_MIN_VALID_SLOTS,
        help="observed slots needed to keep a day (default %(default)s)",
    )


def _add_calendar(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--calendar", help="exclusion calendar file")


def _add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window-days", type=int, default=10, help="window length in days")
    parser.add_argument("--stride-days", type=int, default=1, help="window step in days")
    parser.add_argument(
        "--min-valid-days", type=int, default=8,
        help="valid days needed to emit a window (default %(default)s)",
    )
    parser.add_argument("--periods", default="12,24", help="target periods in hours (default 12,24)")
    parser.add_argument("--estimator", choices=("classic", "ls"), default="ls")
    parser.add_argument("--normalization", choices=("raw", "variance"), default="raw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowrhythm",
        description="Interval usage, day profiles, and periodicity tracking "
        "for cumulative water-meter readings.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--json-errors", action="store_true",
        help="emit machine-parsable error JSON on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic household stream")
    p.add_argument("--scenario", help="scenario JSON (default: packaged demo)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="parse, validate, and normalize a readings file")
    _add_common_io(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("profile", help="weekday/saturday/sunday usage profiles")
    _add_common_io(p)
    _add_calendar(p)
    p.add_argument("--std", choices=("population", "sample"), default="population")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("periodogram", help="periodogram of one analysis window")
    _add_common_io(p)
    _add_calendar(p)
    _add_window_flags(p)
    p.add_argument("--start", help="window start date (default: first emitted window)")
    p.set_defaults(func=cmd_periodogram)

    p = sub.add_parser("track", help="periodicity intensity over sliding windows")
    _add_common_io(p)
    _add_calendar(p)
    _add_window_flags(p)
    p.set_defaults(func=cmd_track)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FlowRhythmError as exc:
        code = 2 if isinstance(exc, ConfigError) else 3
        if args.json_errors:
            payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
            print(json.dumps(payload), file=sys.stderr)
        else:
            print(f"flowrhythm: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
