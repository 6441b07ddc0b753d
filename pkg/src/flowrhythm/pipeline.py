"""End-to-end glue from raw cumulative readings to binned days.

Cleaning order matters: counter decreases split the stream first so no
interval straddles a meter reset, then differencing yields per-interval
usage, then outage-length intervals are dropped so their accumulated
volume cannot masquerade as a burst.
"""

from __future__ import annotations

from datetime import timedelta, tzinfo
from typing import Sequence

from .binning import DEFAULT_MIN_VALID_SLOTS, UTC, BinnedDay, bin_intervals
from .readings import (
    DEFAULT_MAX_GAP,
    IntervalUsage,
    ReadingStream,
    difference_cumulative,
    drop_long_gaps,
    split_on_counter_decrease,
)


def clean_intervals(
    stream: ReadingStream, max_gap: timedelta = DEFAULT_MAX_GAP
) -> list[IntervalUsage]:
    """Difference a raw stream into usage intervals, dropping outage spans."""
    intervals: list[IntervalUsage] = []
    for segment in split_on_counter_decrease(stream):
        if len(segment) < 2:
            continue
        intervals.extend(difference_cumulative(segment))
    return drop_long_gaps(intervals, max_gap)


def readings_to_days(
    stream: ReadingStream,
    tz: tzinfo = UTC,
    max_gap: timedelta = DEFAULT_MAX_GAP,
    min_valid_slots: int = DEFAULT_MIN_VALID_SLOTS,
) -> list[BinnedDay]:
    """Full cleaning and binning chain for one household stream."""
    return bin_intervals(clean_intervals(stream, max_gap), tz, min_valid_slots)
