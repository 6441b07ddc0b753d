"""Day classification against an exclusion calendar.

A calendar file lists date ranges that should not count as normal household
behaviour: vacations, public holidays, severe weather, and metering-hardware
faults. Every date not listed is Normal. Lines look like

    2018-03-01..2018-03-04,weather
    2017-12-25,holiday
    # comments and blank lines are ignored

Ranges are inclusive on both ends. Overlapping ranges are allowed only when
they agree on the label; conflicting overlaps are rejected.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import CalendarError

__all__ = [
    "DayClass",
    "ExclusionCalendar",
    "classify_day",
    "count_normal_days",
    "load_calendar",
    "parse_calendar",
]


class DayClass(enum.Enum):
    NORMAL = "normal"
    VACATION = "vacation"
    PUBLIC_HOLIDAY = "holiday"
    WEATHER_EVENT = "weather"
    HARDWARE_FAULT = "hardware"


# Labels accepted in calendar files, mapped to their class.
_LABELS: Mapping[str, DayClass] = {
    "vacation": DayClass.VACATION,
    "holiday": DayClass.PUBLIC_HOLIDAY,
    "weather": DayClass.WEATHER_EVENT,
    "hardware": DayClass.HARDWARE_FAULT,
}


def _iter_span(start: date, end: date) -> Iterator[date]:
    d = start
    one = timedelta(days=1)
    while d <= end:
        yield d
        d += one


@dataclass(frozen=True)
class ExclusionCalendar:
    """Immutable mapping from dates to their non-Normal classification."""

    entries: Mapping[date, DayClass] = field(default_factory=dict)

    def __post_init__(self):
        for d, cls in self.entries.items():
            if not isinstance(d, date):
                raise CalendarError(f"calendar key {d!r} is not a date")
            if cls is DayClass.NORMAL:
                raise CalendarError(f"{d}: Normal days are implicit, not listed")
        # freeze against later mutation of the mapping passed in
        object.__setattr__(self, "entries", dict(self.entries))

    @classmethod
    def from_ranges(
        cls, ranges: Iterable[tuple[date, date, DayClass]]
    ) -> "ExclusionCalendar":
        entries: dict[date, DayClass] = {}
        for start, end, day_class in ranges:
            if end < start:
                raise CalendarError(f"range {start}..{end} ends before it starts")
            for d in _iter_span(start, end):
                previous = entries.get(d)
                if previous is not None and previous is not day_class:
                    raise CalendarError(
                        f"{d}: conflicting labels "
                        f"{previous.value!r} and {day_class.value!r}"
                    )
                entries[d] = day_class
        return cls(entries)

    def classify(self, d: date) -> DayClass:
        return self.entries.get(d, DayClass.NORMAL)

    def vacation_ranges(self) -> list[tuple[date, date]]:
        """Maximal runs of consecutive vacation days, for plot annotation."""
        days = sorted(d for d, c in self.entries.items() if c is DayClass.VACATION)
        ranges: list[tuple[date, date]] = []
        for d in days:
            if ranges and d - ranges[-1][1] == timedelta(days=1):
                ranges[-1] = (ranges[-1][0], d)
            else:
                ranges.append((d, d))
        return ranges

    def __len__(self) -> int:
        return len(self.entries)


def classify_day(calendar: ExclusionCalendar, d: date) -> DayClass:
    """Classify one date; any date the calendar does not list is Normal."""
    return calendar.classify(d)


def count_normal_days(
    calendar: ExclusionCalendar, start: date, end: date, weekday: int
) -> int:
    """Count Normal days with the given weekday in [start, end] inclusive.

    weekday follows the datetime convention: Monday is 0, Sunday is 6.
    """
    if not 0 <= weekday <= 6:
        raise ValueError(f"weekday must be 0..6, got {weekday}")
    if end < start:
        raise ValueError(f"span {start}..{end} ends before it starts")
    return sum(
        1
        for d in _iter_span(start, end)
        if d.weekday() == weekday and calendar.classify(d) is DayClass.NORMAL
    )


def parse_calendar(text: str) -> ExclusionCalendar:
    """Parse calendar text; see the module docstring for the line format."""
    ranges: list[tuple[date, date, DayClass]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            span_part, label_part = line.rsplit(",", 1)
        except ValueError:
            raise CalendarError(f"line {lineno}: expected 'DATE[..DATE],LABEL'")
        label = label_part.strip().lower()
        if label not in _LABELS:
            raise CalendarError(
                f"line {lineno}: unknown label {label!r}; "
                f"expected one of {sorted(_LABELS)}"
            )
        span = span_part.strip()
        first, sep, last = span.partition("..")
        try:
            start = date.fromisoformat(first.strip())
            end = date.fromisoformat(last.strip()) if sep else start
        except ValueError as exc:
            raise CalendarError(f"line {lineno}: {exc}")
        if end < start:
            raise CalendarError(f"line {lineno}: range {span} ends before it starts")
        ranges.append((start, end, _LABELS[label]))
    try:
        return ExclusionCalendar.from_ranges(ranges)
    except CalendarError as exc:
        raise CalendarError(f"calendar: {exc}")


def load_calendar(path: str | Path) -> ExclusionCalendar:
    return parse_calendar(Path(path).read_text(encoding="utf-8"))
