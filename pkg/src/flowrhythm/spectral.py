"""Periodogram estimators for binned usage series.

Two estimators share one frequency-grid convention:

``classic_periodogram``
    The Schuster form, P(f) = (1/n) * [(sum x cos 2 pi f t)^2 +
    (sum x sin 2 pi f t)^2] on mean-subtracted values. Valid only for
    complete, evenly spaced series.

``lomb_scargle``
    The floating-mean (generalised) least-squares periodogram after
    Zechmeister & Kuerster (2009, A&A 496, 577): at each frequency a
    sinusoid plus a constant offset is fit by weighted least squares, and
    the power is the chi-squared reduction relative to the constant-only
    fit. Tolerates arbitrary gaps, which is the normal state of binned
    meter data.

Raw power is reported in litres^2 * samples, scaled so that on complete,
evenly spaced data the two estimators agree exactly at every grid frequency
that is an integer multiple of the window fundamental 1/T (the default grid
uses exactly those). normalization="variance" divides raw power by
(n/2) * Var(y), which for the floating-mean estimator is the dimensionless
p in [0, 1] of the reference above.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateTimes,
    InvalidConfig,
    PeriodNotOnGrid,
    TooFewSamples,
    UnevenSpacing,
)

__all__ = [
    "NYQUIST_CPH",
    "TARGET_PERIODS_HOURS",
    "Samples",
    "FrequencyGrid",
    "Periodogram",
    "classic_periodogram",
    "lomb_scargle",
    "intensity_at",
    "write_periodogram_csv",
    "write_periodogram_sidecar",
]

# 15-minute sampling supports nothing above 2 cycles/hour.
NYQUIST_CPH = 2.0
# The two behavioural periodicities tracked by default.
TARGET_PERIODS_HOURS = (24.0, 12.0)

_NORMALIZATIONS = ("raw", "variance")


@dataclass(frozen=True)
class Samples:
    """Usage samples on a common window clock.

    times are hours since the window start (strictly increasing, gaps
    allowed); values are litres per slot.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("times and values must be finite")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must strictly increase")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing analysis frequencies in cycles/hour.

    Every grid contains exactly 1/24 and 1/12 cycles/hour (the tracked
    periods are read off the grid, never interpolated) and stays at or
    below the 2 cycles/hour Nyquist limit of 15-minute sampling.
    """

    frequencies_cph: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies_cph, dtype=np.float64)
        if f.ndim != 1 or len(f) == 0:
            raise ValueError("frequency grid must be a non-empty 1-d array")
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ValueError("frequencies must be finite and > 0")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must strictly increase")
        if f[-1] > NYQUIST_CPH * (1 + 1e-12):
            raise ValueError(
                f"max frequency {f[-1]} exceeds the Nyquist limit {NYQUIST_CPH} cph"
            )
        f.setflags(write=False)
        object.__setattr__(self, "frequencies_cph", f)
        for period in TARGET_PERIODS_HOURS:
            self.index_of_period(period)

    @classmethod
    def for_window(
        cls,
        window_hours: float,
        min_period_hours: float = 4.0,
        max_period_hours: float = 120.0,
        oversample: int = 1,
    ) -> "FrequencyGrid":
        """Fundamental-aligned grid for a window of the given length.

        Frequencies are k / (oversample * window_hours) covering periods
        [min_period_hours, max_period_hours]. With oversample=1 (the
        default) every frequency is an integer multiple of the window
        fundamental 1/T; on complete even data the two estimators then
        agree exactly at every grid point. Larger oversample gives a denser
        display grid but the off-fundamental points lose that identity.

        oversample * window_hours must be a multiple of 12 hours so that
        1/24 and 1/12 cycles/hour land exactly on the grid.
        """
        if window_hours <= 0 or oversample < 1:
            raise InvalidConfig("window_hours must be > 0 and oversample >= 1")
        if not 0 < min_period_hours < max_period_hours:
            raise InvalidConfig("need 0 < min_period_hours < max_period_hours")
        if not (min_period_hours <= 12.0 and max_period_hours >= 24.0):
            raise InvalidConfig(
                "period range must bracket the 12 h and 24 h targets"
            )
        span = oversample * window_hours
        if abs(span / 12.0 - round(span / 12.0)) > 1e-9:
            raise InvalidConfig(
                f"oversample * window_hours = {span} h is not a multiple of "
                "12 h, so 1/24 and 1/12 cycles/hour would miss the grid"
            )
        k_min = int(np.ceil(span / max_period_hours - 1e-9))
        k_max = int(np.floor(span / min_period_hours + 1e-9))
        k_max = min(k_max, int(np.floor(NYQUIST_CPH * span + 1e-9)))
        if k_min < 1 or k_max < k_min:
            raise InvalidConfig(
                f"period range [{min_period_hours}, {max_period_hours}] h "
                f"yields an empty grid for a {window_hours} h window"
            )
        return cls(np.arange(k_min, k_max + 1) / span)

    @property
    def periods_hours(self) -> np.ndarray:
        return 1.0 / self.frequencies_cph

    def index_of_period(self, period_hours: float) -> int:
        """Index whose frequency is exactly 1/period_hours, else raise.

        Intensities are read off the grid with no interpolation, so the
        period must match a grid point (to within float rounding).
        """
        if period_hours <= 0:
            raise PeriodNotOnGrid(f"period must be > 0, got {period_hours}")
        matches = np.flatnonzero(
            np.abs(self.frequencies_cph * period_hours - 1.0) <= 1e-9
        )
        if len(matches) == 0:
            raise PeriodNotOnGrid(
                f"period {period_hours} h has no exact grid frequency; grid "
                f"covers {1 / self.frequencies_cph[-1]:.6g} h to "
                f"{1 / self.frequencies_cph[0]:.6g} h"
            )
        return int(matches[0])

    def __len__(self) -> int:
        return len(self.frequencies_cph)


@dataclass(frozen=True)
class Periodogram:
    """Power at each grid frequency, tagged with how it was estimated."""

    grid: FrequencyGrid
    power: np.ndarray
    estimator: str
    normalization: str = "raw"
    n_samples: int = 0
    window_id: str | None = None
    window_start: str | None = None
    window_hours: float | None = None

    def __post_init__(self):
        power = np.asarray(self.power, dtype=np.float64)
        if power.shape != self.grid.frequencies_cph.shape:
            raise ValueError("power and grid must have the same length")
        if not np.all(np.isfinite(power)) or np.any(power < 0):
            raise ValueError("power must be finite and >= 0")
        power.setflags(write=False)
        object.__setattr__(self, "power", power)


def _check_normalization(normalization: str) -> None:
    if normalization not in _NORMALIZATIONS:
        raise InvalidConfig(
            f"normalization must be one of {_NORMALIZATIONS}, got {normalization!r}"
        )


def classic_periodogram(
    samples: Samples, grid: FrequencyGrid, normalization: str = "raw"
) -> Periodogram:
    """Schuster periodogram of a complete, evenly spaced series.

    Parameters
    ----------
    samples : Samples
        Evenly spaced samples; spacing must be uniform to 1e-9 relative
        (for binned days that means no Missing slots).
    grid : FrequencyGrid
        Frequencies to evaluate, cycles/hour.
    normalization : {"raw", "variance"}
        "raw" is litres^2 * samples; "variance" divides by (n/2) * Var(y).

    Returns
    -------
    Periodogram

    Raises
    ------
    TooFewSamples
        Fewer than two samples.
    UnevenSpacing
        Sample spacing is not uniform; use lomb_scargle instead.
    """
    _check_normalization(normalization)
    if samples.n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {samples.n}")
    steps = np.diff(samples.times)
    step = steps[0]
    if np.any(np.abs(steps - step) > 1e-9 * step):
        raise UnevenSpacing(
            "sample spacing varies; the classic periodogram requires a "
            "complete evenly spaced series"
        )
    x = samples.values - samples.values.mean()
    omega_t = 2.0 * np.pi * np.outer(grid.frequencies_cph, samples.times)
    a = np.cos(omega_t) @ x
    b = np.sin(omega_t) @ x
    power = (a * a + b * b) / samples.n
    if normalization == "variance":
        variance = float(np.mean(x * x))
        power = np.zeros_like(power) if variance == 0.0 else power * 2.0 / (samples.n * variance)
    return Periodogram(grid, np.maximum(power, 0.0), "classic", normalization, samples.n)


def lomb_scargle(
    samples: Samples,
    grid: FrequencyGrid,
    weights: np.ndarray | None = None,
    normalization: str = "raw",
) -> Periodogram:
    """Floating-mean least-squares periodogram (generalised Lomb-Scargle).

    At each grid frequency the model a*cos(w t) + b*sin(w t) + c is fit by
    weighted least squares; the power is the weighted chi-squared reduction
    relative to the best constant fit, evaluated in closed form from the
    weighted moments (Zechmeister & Kuerster 2009, eqs. 5-14). Fitting the
    offset c jointly, rather than subtracting the sample mean up front,
    keeps the estimate unbiased when gaps make the sampled mean drift.

    Parameters
    ----------
    samples : Samples
        Arbitrarily gapped samples, at least three of them.
    grid : FrequencyGrid
        Frequencies to evaluate, cycles/hour.
    weights : array, optional
        Per-sample positive weights; equal weights by default. Normalised
        internally to sum to one.
    normalization : {"raw", "variance"}
        "raw" is (n/2) * chi-squared reduction, litres^2 * samples, chosen
        so complete even data reproduce the classic estimator exactly on
        fundamental-aligned grids. "variance" is the dimensionless p in
        [0, 1].

    Returns
    -------
    Periodogram

    Raises
    ------
    TooFewSamples
        Fewer than three samples (two parameters plus an offset).
    DegenerateTimes
        Zero time span.
    """
    _check_normalization(normalization)
    if samples.n < 3:
        raise TooFewSamples(f"need at least 3 samples, got {samples.n}")
    t = samples.times
    y = samples.values
    if t[-1] - t[0] <= 0:
        raise DegenerateTimes("sample times span zero duration")
    if weights is None:
        w = np.full(samples.n, 1.0 / samples.n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != t.shape:
            raise ValueError("weights must match the number of samples")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and > 0")
        w = w / w.sum()

    mean_y = float(w @ y)
    yy = float(w @ (y * y)) - mean_y * mean_y

    omega_t = 2.0 * np.pi * np.outer(grid.frequencies_cph, t)
    cos_t = np.cos(omega_t)
    sin_t = np.sin(omega_t)
    wy = w * y

    c_mean = cos_t @ w
    s_mean = sin_t @ w
    yc = cos_t @ wy - mean_y * c_mean
    ys = sin_t @ wy - mean_y * s_mean
    cc = (cos_t * cos_t) @ w - c_mean * c_mean
    ss = (sin_t * sin_t) @ w - s_mean * s_mean
    cs = (cos_t * sin_t) @ w - c_mean * s_mean

    det = cc * ss - cs * cs
    num = ss * yc * yc + cc * ys * ys - 2.0 * cs * yc * ys
    # det -> 0 means the sinusoid is indistinguishable from the offset at
    # this frequency (pathological sampling); report zero power there.
    with np.errstate(divide="ignore", invalid="ignore"):
        reduction = np.where(det > 1e-13, num / np.where(det > 1e-13, det, 1.0), 0.0)
    reduction = np.maximum(reduction, 0.0)

    if normalization == "variance":
        power = np.zeros_like(reduction) if yy <= 0 else reduction / yy
        power = np.minimum(power, 1.0)
    else:
        power = reduction * (samples.n / 2.0)
    return Periodogram(
        grid, np.maximum(power, 0.0), "lomb_scargle", normalization, samples.n
    )


def intensity_at(periodogram: Periodogram, period_hours: float) -> float:
    """Power at exactly 1/period_hours; PeriodNotOnGrid if absent."""
    return float(periodogram.power[periodogram.grid.index_of_period(period_hours)])


def write_periodogram_csv(periodogram: Periodogram, path: str | Path) -> None:
    lines = ["frequency_cph,period_hours,power"]
    freqs = periodogram.grid.frequencies_cph
    periods = periodogram.grid.periods_hours
    for i in range(len(freqs)):
        lines.append(
            f"{float(freqs[i])!r},{float(periods[i])!r},{float(periodogram.power[i])!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_periodogram_sidecar(periodogram: Periodogram, path: str | Path) -> None:
    """JSON sidecar recording how the matching CSV was produced."""
    sidecar = {
        "estimator": periodogram.estimator,
        "normalization": periodogram.normalization,
        "n_samples": periodogram.n_samples,
        "window_id": periodogram.window_id,
        "window_start": periodogram.window_start,
        "window_hours": periodogram.window_hours,
        "n_frequencies": len(periodogram.grid),
        "min_frequency_cph": float(periodogram.grid.frequencies_cph[0]),
        "max_frequency_cph": float(periodogram.grid.frequencies_cph[-1]),
    }
    Path(path).write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
