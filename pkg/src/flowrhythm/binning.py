"""Daily 15-minute binning and day-of-week usage profiles.

A day is a grid of 96 quarter-hour slots in local civil time; slot k covers
[15k, 15(k+1)) minutes after local midnight, so slot 28 is always 07:00
wall-clock regardless of DST. An interval's litres land in the slot (and
day) containing the reading that closes the interval. Slots no interval
closed in are Missing, represented as NaN and never as zero: with the
nominal 15-minute cadence plus transmission delay, roughly one slot per
hour-of-drift gets skipped, and a skipped slot means "not observed", not
"no water used".

On the clock-change days themselves civil time does odd things: the four
slots inside a spring-forward hour can never be observed (they stay
Missing), and during a fall-back hour two intervals can close in the same
wall-clock slot, in which case their litres add.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date, tzinfo
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .errors import IntervalOutsideDay, NoMatchingDays
from .readings import IntervalUsage

__all__ = [
    "SLOTS_PER_DAY",
    "SLOT_MINUTES",
    "DEFAULT_MIN_VALID_SLOTS",
    "GROUPS",
    "BinnedDay",
    "DayProfile",
    "bin_day",
    "bin_intervals",
    "profile",
    "write_profile_csv",
]

log = logging.getLogger(__name__)

SLOTS_PER_DAY = 96
SLOT_MINUTES = 15
# A day kept for analysis needs at least this many observed slots.
DEFAULT_MIN_VALID_SLOTS = 92

UTC = ZoneInfo("UTC")

# Day-of-week groups for profiles; datetime convention, Monday == 0.
GROUPS: Mapping[str, tuple[int, ...]] = {
    "weekday": (0, 1, 2, 3, 4),
    "saturday": (5,),
    "sunday": (6,),
}


@dataclass(frozen=True)
class BinnedDay:
    """One local calendar day of binned usage; NaN marks Missing slots."""

    day: date
    bins: np.ndarray

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.float64)
        if bins.shape != (SLOTS_PER_DAY,):
            raise ValueError(f"bins must have shape ({SLOTS_PER_DAY},)")
        with np.errstate(invalid="ignore"):
            if np.any(bins < 0):
                raise ValueError("binned litres must be >= 0")
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)

    @property
    def weekday(self) -> int:
        return self.day.weekday()

    @property
    def valid_mask(self) -> np.ndarray:
        return ~np.isnan(self.bins)

    @property
    def valid_count(self) -> int:
        return int(np.count_nonzero(self.valid_mask))


def _local_slot(interval: IntervalUsage, tz: tzinfo) -> tuple[date, int]:
    local = interval.end.astimezone(tz)
    seconds = local.hour * 3600 + local.minute * 60 + local.second
    return local.date(), seconds // (SLOT_MINUTES * 60)


def bin_day(
    intervals: Iterable[IntervalUsage], day: date, tz: tzinfo = UTC
) -> BinnedDay:
    """Bin the intervals that close on one local calendar day.

    Every interval's closing instant must fall on `day` in `tz`, otherwise
    IntervalOutsideDay is raised. An empty iterable yields an all-Missing
    day.
    """
    bins = np.full(SLOTS_PER_DAY, np.nan)
    for interval in intervals:
        local_day, slot = _local_slot(interval, tz)
        if local_day != day:
            raise IntervalOutsideDay(
                f"interval closing {interval.end.isoformat()} falls on "
                f"{local_day}, not {day}"
            )
        if np.isnan(bins[slot]):
            bins[slot] = interval.litres
        else:
            bins[slot] += interval.litres
    return BinnedDay(day, bins)


def bin_intervals(
    intervals: Sequence[IntervalUsage],
    tz: tzinfo = UTC,
    min_valid_slots: int = DEFAULT_MIN_VALID_SLOTS,
) -> list[BinnedDay]:
    """Group intervals by local closing day, bin each, drop sparse days.

    Days with fewer than min_valid_slots observed slots (outages, stream
    edges) are dropped with a warning; they would distort profiles and
    windows more than their few observations are worth.
    """
    by_day: dict[date, list[IntervalUsage]] = {}
    for interval in intervals:
        local_day, _ = _local_slot(interval, tz)
        by_day.setdefault(local_day, []).append(interval)
    days = [bin_day(items, d, tz) for d, items in sorted(by_day.items())]
    kept = [d for d in days if d.valid_count >= min_valid_slots]
    if len(kept) < len(days):
        dropped = [d.day.isoformat() for d in days if d.valid_count < min_valid_slots]
        log.warning(
            "dropped %d day(s) with fewer than %d observed slots: %s",
            len(dropped),
            min_valid_slots,
            ", ".join(dropped),
        )
    return kept


@dataclass(frozen=True)
class DayProfile:
    """Per-slot mean and spread across the days of one group."""

    group: str
    mean: np.ndarray
    std: np.ndarray
    bin_counts: np.ndarray
    n_days: int
    std_kind: str = "population"

    def __post_init__(self):
        for name in ("mean", "std"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (SLOTS_PER_DAY,):
                raise ValueError(f"{name} must have shape ({SLOTS_PER_DAY},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        counts = np.asarray(self.bin_counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_counts", counts)


def _resolve_group(group) -> tuple[str, tuple[int, ...]]:
    if isinstance(group, str):
        key = group.lower()
        if key not in GROUPS:
            raise ValueError(f"unknown group {group!r}; expected one of {sorted(GROUPS)}")
        return key, GROUPS[key]
    if isinstance(group, int):
        return f"weekday-{group}", (group,)
    weekdays = tuple(int(w) for w in group)
    return "+".join(str(w) for w in weekdays), weekdays


def profile(
    days: Sequence[BinnedDay], group, std_kind: str = "population"
) -> DayProfile:
    """Per-slot mean and std over the non-Missing values of matching days.

    `group` is "weekday" / "saturday" / "sunday", a single weekday int, or an
    iterable of weekday ints (Monday == 0). Slots Missing on every matching
    day stay Missing (NaN) in the profile; they are never coerced to zero.
    std_kind "population" divides by n, "sample" by n-1 (0.0 when n == 1).
    """
    if std_kind not in ("population", "sample"):
        raise ValueError(f"std_kind must be 'population' or 'sample', got {std_kind!r}")
    label, weekdays = _resolve_group(group)
    matching = [d for d in days if d.weekday in weekdays]
    if not matching:
        raise NoMatchingDays(f"no days match group {label!r}")
    # Canonical date order makes the result exactly permutation-invariant.
    matching.sort(key=lambda d: d.day)

    stacked = np.vstack([d.bins for d in matching])
    valid = ~np.isnan(stacked)
    counts = valid.sum(axis=0)
    mean = np.full(SLOTS_PER_DAY, np.nan)
    std = np.full(SLOTS_PER_DAY, np.nan)
    for k in range(SLOTS_PER_DAY):
        if counts[k] == 0:
            continue
        values = stacked[valid[:, k], k]
        m = np.add.reduce(values) / counts[k]
        mean[k] = m
        squares = np.add.reduce((values - m) ** 2)
        if std_kind == "population":
            std[k] = np.sqrt(squares / counts[k])
        else:
            std[k] = 0.0 if counts[k] == 1 else np.sqrt(squares / (counts[k] - 1))
    return DayProfile(label, mean, std, counts, len(matching), std_kind)


def _slot_clock(k: int) -> str:
    minutes = k * SLOT_MINUTES
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def write_profile_csv(p: DayProfile, path: str | Path) -> None:
    """CSV with one row per slot; Missing slots leave mean/std cells empty."""
    lines = ["bin_index,local_time,mean_litres,std_litres,n_days"]
    for k in range(SLOTS_PER_DAY):
        if p.bin_counts[k] == 0:
            mean_s = std_s = ""
        else:
            mean_s = repr(float(p.mean[k]))
            std_s = repr(float(p.std[k]))
        lines.append(f"{k},{_slot_clock(k)},{mean_s},{std_s},{int(p.bin_counts[k])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
