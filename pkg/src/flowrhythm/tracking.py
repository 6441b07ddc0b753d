"""Sliding-window periodicity tracking.

Slides a fixed-length window over the binned day series, computes one
periodogram per window, and reads off the intensity at the target periods
(24 h and 12 h by default). Windows advance in calendar time, so excluded
or missing days thin a window out rather than stretching it; windows with
too few valid days become explicit skip markers, never silent zeros.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Sequence

from .binning import SLOT_MINUTES, BinnedDay
from .errors import DataError, EmptyInput, InvalidConfig, PeriodNotOnGrid
from .exclusions import DayClass, ExclusionCalendar
from .spectral import (
    FrequencyGrid,
    Periodogram,
    Samples,
    classic_periodogram,
    intensity_at,
    lomb_scargle,
)

log = logging.getLogger(__name__)

DEFAULT_WINDOW_DAYS = 10
DEFAULT_STRIDE_DAYS = 1
DEFAULT_MIN_VALID_DAYS = 8
DEFAULT_TARGET_PERIODS = (24.0, 12.0)

ESTIMATORS = ("ls", "classic")


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window geometry and the periods to track."""

    window_days: int = DEFAULT_WINDOW_DAYS
    stride_days: int = DEFAULT_STRIDE_DAYS
    min_valid_days: int = DEFAULT_MIN_VALID_DAYS
    target_periods: tuple[float, ...] = DEFAULT_TARGET_PERIODS

    def __post_init__(self) -> None:
        if not (isinstance(self.window_days, int) and self.window_days >= 2):
            raise InvalidConfig(f"window_days must be an integer >= 2, got {self.window_days}")
        if not (isinstance(self.stride_days, int) and 1 <= self.stride_days <= self.window_days):
            raise InvalidConfig(
                f"stride_days must be a positive integer <= window_days, got {self.stride_days}"
            )
        if not (isinstance(self.min_valid_days, int) and 1 <= self.min_valid_days <= self.window_days):
            raise InvalidConfig(
                f"min_valid_days must be in [1, window_days], got {self.min_valid_days}"
            )
        periods = tuple(float(p) for p in self.target_periods)
        if not periods:
            raise InvalidConfig("target_periods must not be empty")
        if not all(math.isfinite(p) and p > 0 for p in periods):
            raise InvalidConfig(f"target_periods must be positive, got {periods}")
        object.__setattr__(self, "target_periods", periods)

    @property
    def window_hours(self) -> float:
        return 24.0 * self.window_days

    def grid(self) -> FrequencyGrid:
        """The analysis grid shared by every window of this geometry."""
        grid = FrequencyGrid.for_window(self.window_hours)
        for period in self.target_periods:
            try:
                grid.index_of_period(period)
            except PeriodNotOnGrid as exc:
                raise InvalidConfig(
                    f"target period {period} h is not on the {self.window_days}-day "
                    f"window grid: {exc}"
                ) from exc
        return grid


@dataclass(frozen=True)
class AnalysisWindow:
    """One window position: its valid days, or a skip marker with the reason."""

    start_date: date
    window_days: int
    days: tuple[BinnedDay, ...]
    skipped: bool = False
    reason: str | None = None

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=self.window_days - 1)

    @property
    def valid_day_count(self) -> int:
        return len(self.days)


def make_windows(
    days: Sequence[BinnedDay],
    calendar: ExclusionCalendar | None,
    cfg: WindowConfig,
    keep_skipped: bool = False,
) -> list[AnalysisWindow]:
    """Slide the window over calendar time and collect valid days per position.

    A day is valid when it was retained by binning and the calendar (if any)
    classifies it normal. Window starts run from the first retained day to the
    last position still fully inside the observed span, advancing by the
    stride; positions with fewer than min_valid_days valid days become skip
    markers, dropped unless keep_skipped is set.
    """
    if not days:
        raise EmptyInput("no binned days to window")
    by_date: dict[date, BinnedDay] = {}
    for d in days:
        if d.day in by_date:
            raise DataError(f"duplicate binned day {d.day}")
        by_date[d.day] = d
    first = min(by_date)
    last = max(by_date)
    out: list[AnalysisWindow] = []
    start = first
    while start + timedelta(days=cfg.window_days - 1) <= last:
        valid = []
        for offset in range(cfg.window_days):
            d = start + timedelta(days=offset)
            day = by_date.get(d)
            if day is None:
                continue
            if calendar is not None and calendar.classify(d) is not DayClass.NORMAL:
                continue
            valid.append(day)
        if len(valid) >= cfg.min_valid_days:
            out.append(AnalysisWindow(start, cfg.window_days, tuple(valid)))
        elif keep_skipped:
            out.append(
                AnalysisWindow(
                    start,
                    cfg.window_days,
                    (),
                    skipped=True,
                    reason=f"{len(valid)} valid day(s) < {cfg.min_valid_days}",
                )
            )
        start += timedelta(days=cfg.stride_days)
    return out


def window_samples(window: AnalysisWindow) -> Samples:
    """Flatten a window's valid days into irregular samples.

    Sample times are bin midpoints in nominal civil hours since window-start
    midnight, so a complete window is evenly spaced and day gaps appear as
    missing stretches rather than compressed time.
    """
    times = []
    values = []
    slot_hours = SLOT_MINUTES / 60.0
    for day in window.days:
        day_offset = 24.0 * (day.day - window.start_date).days
        mask = day.valid_mask
        for k in mask.nonzero()[0]:
            times.append(day_offset + slot_hours * (k + 0.5))
            values.append(float(day.bins[k]))
    return Samples(times, values)


def _estimate(samples: Samples, grid: FrequencyGrid, estimator: str, normalization: str) -> Periodogram:
    if estimator == "ls":
        return lomb_scargle(samples, grid, normalization=normalization)
    return classic_periodogram(samples, grid, normalization=normalization)


def compute_window_periodograms(
    days: Sequence[BinnedDay],
    calendar: ExclusionCalendar | None,
    cfg: WindowConfig,
    estimator: str = "ls",
    normalization: str = "raw",
    keep_skipped: bool = True,
) -> list[tuple[AnalysisWindow, Periodogram | None]]:
    """One periodogram per window position; None where the window is skipped.

    A window whose samples defeat the estimator (for example the classic
    estimator on gapped data) is demoted to a skip marker carrying the
    estimator's complaint, so downstream output never holds a silent hole.
    """
    if estimator not in ESTIMATORS:
        raise InvalidConfig(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
    grid = cfg.grid()
    windows = make_windows(days, calendar, cfg, keep_skipped=keep_skipped)
    out: list[tuple[AnalysisWindow, Periodogram | None]] = []
    for window in windows:
        if window.skipped:
            out.append((window, None))
            continue
        samples = window_samples(window)
        try:
            pg = _estimate(samples, grid, estimator, normalization)
        except DataError as exc:
            log.warning("window %s skipped: %s", window.start_date, exc)
            marker = AnalysisWindow(
                window.start_date, window.window_days, (), skipped=True, reason=str(exc)
            )
            out.append((marker, None))
            continue
        pg = Periodogram(
            grid=pg.grid,
            power=pg.power,
            estimator=pg.estimator,
            normalization=pg.normalization,
            n_samples=pg.n_samples,
            window_id=window.start_date.isoformat(),
            window_start=window.start_date.isoformat(),
            window_hours=cfg.window_hours,
        )
        out.append((window, pg))
    return out


@dataclass(frozen=True)
class IntensityPoint:
    """Tracked intensity at one target period for one window position."""

    window_start: date
    period_hours: float
    power: float | None
    valid_days: int
    skipped: bool
    reason: str | None = None


@dataclass(frozen=True)
class IntensitySeries:
    """All intensity points for a run, window-major then period order."""

    points: tuple[IntensityPoint, ...]
    config: WindowConfig
    estimator: str
    normalization: str

    def at_period(self, period_hours: float) -> list[IntensityPoint]:
        matches = [p for p in self.points if p.period_hours == period_hours]
        if not matches:
            raise PeriodNotOnGrid(f"no tracked points at period {period_hours} h")
        return matches


def track_intensity(
    days: Sequence[BinnedDay],
    calendar: ExclusionCalendar | None = None,
    cfg: WindowConfig | None = None,
    estimator: str = "ls",
    normalization: str = "raw",
    keep_skipped: bool = True,
) -> IntensitySeries:
    """Track periodicity intensity at the configured target periods.

    Parameters
    ----------
    days : sequence of BinnedDay
        Retained binned days, as produced by the binning stage.
    calendar : ExclusionCalendar, optional
        Excluded dates; days classified other than normal never enter a
        window. Omit to treat every retained day as valid.
    cfg : WindowConfig, optional
        Window geometry; defaults to 10-day windows, stride 1, at least
        8 valid days, tracking 24 h and 12 h.
    estimator : {"ls", "classic"}
        Spectral estimator; "ls" handles the gapped windows real data
        produces, "classic" requires complete evenly spaced windows.
    normalization : {"raw", "variance"}
        Power scale passed through to the estimator.
    keep_skipped : bool
        Keep skip markers (with power None) in the output series.

    Returns
    -------
    IntensitySeries
    """
    cfg = cfg or WindowConfig()
    pairs = compute_window_periodograms(
        days, calendar, cfg, estimator, normalization, keep_skipped=keep_skipped
    )
    points = []
    for window, pg in pairs:
        for period in cfg.target_periods:
            if pg is None:
                points.append(
                    IntensityPoint(
                        window.start_date, period, None, window.valid_day_count,
                        skipped=True, reason=window.reason,
                    )
                )
            else:
                points.append(
                    IntensityPoint(
                        window.start_date, period, intensity_at(pg, period),
                        window.valid_day_count, skipped=False,
                    )
                )
    return IntensitySeries(tuple(points), cfg, estimator, normalization)


def write_intensity_csv(series: IntensitySeries, path: str | Path) -> None:
    """Write the intensity track as a long-format CSV, skip markers included."""
    lines = ["window_start,period_hours,power,valid_days,skipped"]
    for p in series.points:
        power = "" if p.power is None else repr(p.power)
        lines.append(
            f"{p.window_start.isoformat()},{repr(p.period_hours)},{power},"
            f"{p.valid_days},{str(p.skipped).lower()}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_overlay_csv(
    pairs: Sequence[tuple[AnalysisWindow, Periodogram | None]], path: str | Path
) -> None:
    """Write every window's full periodogram as one long-format CSV."""
    lines = ["window_start,frequency_cph,period_hours,power"]
    for window, pg in pairs:
        if pg is None:
            continue
        freqs = pg.grid.frequencies_cph
        for f, power in zip(freqs, pg.power):
            lines.append(
                f"{window.start_date.isoformat()},{repr(float(f))},"
                f"{repr(1.0 / float(f))},{repr(float(power))}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
