"""Cumulative meter readings: parsing, validation, and first differencing.

A reading stream is a strictly time-ordered sequence of (timestamp,
cumulative litres) pairs from one meter. The expected cadence is one reading
every 15 minutes plus a small transmission delay, so consecutive readings are
never closer than 15 minutes; streams that violate that are accepted with a
warning because the defect lives in the data, not the parser.

Differencing turns n readings into n-1 usage intervals. The cumulative
counter never decreases on a healthy meter; a decrease is either rejected
(difference_cumulative) or used as a split point (split_on_counter_decrease)
so the surrounding data survive a counter reset.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    CounterDecrease,
    EmptyInput,
    MalformedRow,
    NonMonotonicTimestamp,
    TooFewReadings,
)

__all__ = [
    "NOMINAL_PERIOD",
    "DEFAULT_MAX_GAP",
    "RawReading",
    "IntervalUsage",
    "ReadingStream",
    "parse_stream",
    "read_stream",
    "difference_cumulative",
    "split_on_counter_decrease",
    "drop_long_gaps",
    "write_stream_csv",
    "write_stream_jsonl",
]

log = logging.getLogger(__name__)

NOMINAL_PERIOD = timedelta(minutes=15)
# Gaps longer than three nominal periods are treated as outages: the volume
# accumulated across the gap is discarded rather than attributed to one bin.
DEFAULT_MAX_GAP = timedelta(minutes=45)


@dataclass(frozen=True, slots=True)
class RawReading:
    """One transmitted meter sample, at second resolution, in UTC."""

    timestamp: datetime
    cumulative_litres: float

    def __post_init__(self):
        if self.timestamp.tzinfo is None:
            raise ValueError("reading timestamps must be timezone-aware")
        if not self.cumulative_litres >= 0.0:
            raise ValueError(f"cumulative litres must be >= 0, got {self.cumulative_litres}")
        object.__setattr__(
            self, "timestamp", self.timestamp.astimezone(timezone.utc)
        )


@dataclass(frozen=True, slots=True)
class IntervalUsage:
    """Litres consumed between two consecutive readings.

    `end` is the instant of the reading that closes the interval; downstream
    binning assigns the whole interval to the day and slot containing `end`.
    """

    start: datetime
    end: datetime
    litres: float

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError("interval must end after it starts")
        if not self.litres >= 0.0:
            raise ValueError(f"interval litres must be >= 0, got {self.litres}")

    @property
    def duration(self) -> timedelta:
        return self.end - self.start


@dataclass(frozen=True)
class ReadingStream:
    """Immutable, strictly time-ordered readings from one source.

    Stored as parallel arrays (epoch seconds, litres) so million-reading
    streams stay cheap; items materialize as RawReading on access.
    """

    epoch_s: np.ndarray
    litres: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        epoch = np.asarray(self.epoch_s, dtype=np.int64)
        litres = np.asarray(self.litres, dtype=np.float64)
        if epoch.shape != litres.shape or epoch.ndim != 1:
            raise ValueError("epoch_s and litres must be 1-d arrays of equal length")
        if len(epoch) and np.any(np.diff(epoch) <= 0):
            bad = int(np.argmax(np.diff(epoch) <= 0)) + 1
            raise NonMonotonicTimestamp(bad, "timestamps must strictly increase")
        if np.any(litres < 0) or not np.all(np.isfinite(litres)):
            raise ValueError("cumulative litres must be finite and >= 0")
        epoch.setflags(write=False)
        litres.setflags(write=False)
        object.__setattr__(self, "epoch_s", epoch)
        object.__setattr__(self, "litres", litres)

    @classmethod
    def from_readings(
        cls, readings: Sequence[RawReading], source_id: str = ""
    ) -> "ReadingStream":
        epoch = np.array(
            [int(round(r.timestamp.timestamp())) for r in readings], dtype=np.int64
        )
        litres = np.array([r.cumulative_litres for r in readings], dtype=np.float64)
        return cls(epoch, litres, source_id)

    def __len__(self) -> int:
        return len(self.epoch_s)

    def __getitem__(self, i: int) -> RawReading:
        return RawReading(
            datetime.fromtimestamp(int(self.epoch_s[i]), tz=timezone.utc),
            float(self.litres[i]),
        )

    def __iter__(self) -> Iterator[RawReading]:
        for i in range(len(self)):
            yield self[i]

    def timestamps(self) -> list[datetime]:
        return [r.timestamp for r in self]


def _parse_timestamp(text: str) -> datetime:
    """ISO-8601 with offset; 'Z' accepted. Sub-second digits are rounded."""
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    dt = datetime.fromisoformat(cleaned)
    if dt.tzinfo is None:
        raise ValueError("timestamp lacks a UTC offset")
    return dt


def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _looks_like_header(fields: list[str]) -> bool:
    return bool(fields) and not any(ch.isdigit() for ch in fields[0])


def parse_stream(source, fmt: str = "csv", source_id: str = "") -> ReadingStream:
    """Parse a byte or text stream of readings.

    fmt="csv": rows of `timestamp,cumulative_litres`, optional header row.
    fmt="jsonl": one object per line with keys `ts` and `litres_total`.

    Raises MalformedRow / NonMonotonicTimestamp / EmptyInput with 1-based
    physical line numbers in the diagnostics.
    """
    text = _as_text(source)
    if fmt == "csv":
        rows = list(_parse_csv_rows(text))
    elif fmt == "jsonl":
        rows = list(_parse_jsonl_rows(text))
    else:
        raise ValueError(f"unknown stream format {fmt!r}")
    if not rows:
        raise EmptyInput("no readings found")

    last_line, last_dt = rows[0][0], rows[0][1]
    sub_nominal = 0
    for line_no, dt, _ in rows[1:]:
        if dt <= last_dt:
            raise NonMonotonicTimestamp(line_no)
        if dt - last_dt < NOMINAL_PERIOD:
            sub_nominal += 1
        last_line, last_dt = line_no, dt
    if sub_nominal:
        log.warning(
            "%d reading pair(s) closer than the 15-minute nominal period "
            "(source %r); the sampling contract says this should not happen",
            sub_nominal,
            source_id,
        )

    epoch = np.array([int(round(dt.timestamp())) for _, dt, _ in rows], dtype=np.int64)
    litres = np.array([v for _, _, v in rows], dtype=np.float64)
    return ReadingStream(epoch, litres, source_id)


def _parse_csv_rows(text: str) -> Iterator[tuple[int, datetime, float]]:
    first_data_row = True
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        fields = next(csv.reader(io.StringIO(raw)))
        if first_data_row and _looks_like_header(fields):
            first_data_row = False
            continue
        if len(fields) != 2:
            raise MalformedRow(line_no, f"expected 2 columns, got {len(fields)}")
        try:
            dt = _parse_timestamp(fields[0])
        except ValueError as exc:
            raise MalformedRow(line_no, f"bad timestamp {fields[0]!r}: {exc}")
        try:
            value = float(fields[1])
        except ValueError:
            raise MalformedRow(line_no, f"bad cumulative value {fields[1]!r}")
        if not np.isfinite(value) or value < 0:
            raise MalformedRow(line_no, f"cumulative value {value!r} out of range")
        first_data_row = False
        yield line_no, dt, value


def _parse_jsonl_rows(text: str) -> Iterator[tuple[int, datetime, float]]:
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedRow(line_no, f"bad JSON: {exc}")
        if not isinstance(obj, dict) or "ts" not in obj or "litres_total" not in obj:
            raise MalformedRow(line_no, "object must have keys 'ts' and 'litres_total'")
        try:
            dt = _parse_timestamp(str(obj["ts"]))
        except ValueError as exc:
            raise MalformedRow(line_no, f"bad timestamp {obj['ts']!r}: {exc}")
        value = obj["litres_total"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise MalformedRow(line_no, f"litres_total must be a number, got {value!r}")
        value = float(value)
        if not np.isfinite(value) or value < 0:
            raise MalformedRow(line_no, f"litres_total {value!r} out of range")
        yield line_no, dt, value


def read_stream(path: str | Path, fmt: str | None = None) -> ReadingStream:
    """Read a stream file; the format defaults from the file extension."""
    p = Path(path)
    if fmt is None:
        fmt = "jsonl" if p.suffix.lower() in {".jsonl", ".ndjson"} else "csv"
    return parse_stream(p.read_text(encoding="utf-8"), fmt, source_id=str(p))


def difference_cumulative(stream: ReadingStream) -> list[IntervalUsage]:
    """First-difference a stream into usage intervals.

    The sum of the returned litres telescopes to last - first exactly (each
    pairwise difference of nearby same-sign doubles is exact), so no volume
    is created or lost. Raises CounterDecrease at the first drop rather than
    emitting a negative usage.
    """
    if len(stream) < 2:
        raise TooFewReadings(f"need at least 2 readings, got {len(stream)}")
    diffs = np.diff(stream.litres)
    if np.any(diffs < 0):
        raise CounterDecrease(int(np.argmax(diffs < 0)) + 1)
    times = stream.timestamps()
    return [
        IntervalUsage(times[i], times[i + 1], float(diffs[i]))
        for i in range(len(diffs))
    ]


def split_on_counter_decrease(stream: ReadingStream) -> list[ReadingStream]:
    """Split at every counter drop, keeping all maximal clean segments.

    A meter swap or register reset shows up as one decrease; everything on
    either side is still usable. Segments may be as short as one reading;
    callers that difference them should skip those.
    """
    diffs = np.diff(stream.litres)
    drops = np.flatnonzero(diffs < 0)
    if len(drops) == 0:
        return [stream]
    log.warning(
        "cumulative counter decreases at reading index(es) %s (source %r); "
        "splitting into %d segments",
        [int(i) + 1 for i in drops],
        stream.source_id,
        len(drops) + 1,
    )
    bounds = [0, *(int(i) + 1 for i in drops), len(stream)]
    return [
        ReadingStream(
            stream.epoch_s[a:b].copy(), stream.litres[a:b].copy(), stream.source_id
        )
        for a, b in zip(bounds[:-1], bounds[1:])
    ]


def drop_long_gaps(
    intervals: Sequence[IntervalUsage], max_gap: timedelta = DEFAULT_MAX_GAP
) -> list[IntervalUsage]:
    """Discard intervals longer than max_gap.

    The volume accumulated across an outage cannot be placed within it, so it
    is dropped (with a warning) and the covered slots stay Missing instead of
    absorbing a bogus spike.
    """
    kept = [iv for iv in intervals if iv.duration <= max_gap]
    dropped = len(intervals) - len(kept)
    if dropped:
        litres = sum(iv.litres for iv in intervals if iv.duration > max_gap)
        log.warning(
            "discarded %d interval(s) longer than %s covering %.3f litres; "
            "the affected slots stay missing",
            dropped,
            max_gap,
            litres,
        )
    return kept


def _format_litres(value: float) -> str:
    # repr round-trips exactly, so downstream parsing reproduces the float.
    return repr(float(value))


def write_stream_csv(stream: ReadingStream, path: str | Path) -> None:
    lines = ["timestamp,cumulative_litres"]
    lines += [
        f"{r.timestamp.isoformat()},{_format_litres(r.cumulative_litres)}"
        for r in stream
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_stream_jsonl(stream: ReadingStream, path: str | Path) -> None:
    lines = [
        json.dumps(
            {"ts": r.timestamp.isoformat(), "litres_total": r.cumulative_litres}
        )
        for r in stream
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
