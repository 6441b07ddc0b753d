import math
from datetime import date, datetime, timedelta, timezone
from zoneinfo import ZoneInfo

import numpy as np
import pytest

from flowrhythm.binning import (
    SLOTS_PER_DAY,
    BinnedDay,
    bin_day,
    bin_intervals,
    profile,
    write_profile_csv,
)
from flowrhythm.errors import IntervalOutsideDay, NoMatchingDays
from flowrhythm.readings import IntervalUsage

UTC = timezone.utc
DUBLIN = ZoneInfo("Europe/Dublin")
MON = date(2021, 3, 1)


def interval(day: date, end_minutes: float, litres: float, tz=UTC) -> IntervalUsage:
    base = datetime(day.year, day.month, day.day, tzinfo=tz)
    end = base + timedelta(minutes=end_minutes)
    return IntervalUsage(end - timedelta(minutes=15), end, litres)


def complete_day(day: date, litres=1.0) -> list[IntervalUsage]:
    # One interval closing inside each slot (at slot start + 5 min).
    return [interval(day, 15 * k + 5, litres) for k in range(SLOTS_PER_DAY)]


def test_bin_day_complete_no_missing():
    b = bin_day(complete_day(MON), MON, UTC)
    assert b.valid_count == SLOTS_PER_DAY
    assert np.all(b.bins == 1.0)
    assert b.weekday == 0


def test_bin_day_92_intervals_4_missing():
    items = [interval(MON, 15 * k + 5, 1.0) for k in range(92)]
    b = bin_day(items, MON, UTC)
    assert b.valid_count == 92
    assert np.isnan(b.bins[92:]).all()


def test_bin_day_empty_all_missing():
    b = bin_day([], MON, UTC)
    assert b.valid_count == 0
    assert np.isnan(b.bins).all()


def test_bin_day_end_instant_decides_slot():
    # 00:14:59 closes in slot 0; exactly 00:15:00 belongs to slot 1.
    just_before = interval(MON, 14 + 59 / 60, 2.0)
    at_boundary = interval(MON, 15.0, 3.0)
    b = bin_day([just_before, at_boundary], MON, UTC)
    assert b.bins[0] == 2.0
    assert b.bins[1] == 3.0


def test_bin_day_accumulates_same_slot():
    a = interval(MON, 7.0, 1.25)
    b = interval(MON, 12.0, 2.5)
    binned = bin_day([a, b], MON, UTC)
    assert binned.bins[0] == 3.75


def test_bin_day_rejects_interval_from_other_day():
    stray = interval(MON + timedelta(days=1), 30.0, 1.0)
    with pytest.raises(IntervalOutsideDay):
        bin_day([stray], MON, UTC)


def test_bin_day_midnight_close_belongs_to_next_day():
    at_midnight = interval(MON, 24 * 60.0, 1.0)
    with pytest.raises(IntervalOutsideDay):
        bin_day([at_midnight], MON, UTC)
    b = bin_day([at_midnight], MON + timedelta(days=1), UTC)
    assert b.bins[0] == 1.0


def epoch_intervals(local_midnight: datetime, n: int) -> list[IntervalUsage]:
    # Step real instants (not wall clocks): ends at midnight + 5min + 15min*k.
    base = local_midnight.timestamp()
    items = []
    for k in range(n):
        end = datetime.fromtimestamp(base + 300 + 900 * k, tz=UTC)
        items.append(IntervalUsage(end - timedelta(minutes=15), end, 1.0))
    return items


def test_bin_day_dst_spring_forward_slots_stay_missing():
    # Dublin 2018-03-25: 01:00 local jumps to 02:00. The day is 23 h (92
    # slots of wall time) and no instant can close in slots 4..7.
    day = date(2018, 3, 25)
    items = epoch_intervals(datetime(2018, 3, 25, 0, 0, tzinfo=DUBLIN), 92)
    b = bin_day(items, day, DUBLIN)
    assert np.isnan(b.bins[4:8]).all()
    assert b.valid_count == 92


def test_bin_day_dst_fall_back_accumulates():
    # Dublin 2017-10-29: 01:00-02:00 local happens twice; the 25 h day holds
    # 100 closing instants and both passes sum into the same civil slots.
    day = date(2017, 10, 29)
    items = epoch_intervals(datetime(2017, 10, 29, 0, 0, tzinfo=DUBLIN), 100)
    b = bin_day(items, day, DUBLIN)
    assert b.valid_count == SLOTS_PER_DAY
    assert b.bins[4:8].sum() == 8.0  # the repeated hour counts twice
    assert float(np.nansum(b.bins)) == 100.0


def test_bin_intervals_groups_and_drops_sparse_days():
    full = complete_day(MON)
    sparse = [interval(MON + timedelta(days=1), 15 * k + 5, 1.0) for k in range(20)]
    days = bin_intervals(full + sparse, UTC, min_valid_slots=92)
    assert [d.day for d in days] == [MON]
    both = bin_intervals(full + sparse, UTC, min_valid_slots=10)
    assert [d.day for d in both] == [MON, MON + timedelta(days=1)]


def brute_force_profile(days, weekdays, std_kind="population"):
    matching = [d for d in days if d.day.weekday() in weekdays]
    mean = [math.nan] * SLOTS_PER_DAY
    std = [math.nan] * SLOTS_PER_DAY
    for k in range(SLOTS_PER_DAY):
        values = [float(d.bins[k]) for d in matching if not math.isnan(d.bins[k])]
        if not values:
            continue
        m = sum(values) / len(values)
        mean[k] = m
        squares = sum((v - m) ** 2 for v in values)
        if std_kind == "population":
            std[k] = math.sqrt(squares / len(values))
        else:
            std[k] = 0.0 if len(values) == 1 else math.sqrt(squares / (len(values) - 1))
    return mean, std


def dyadic_days(seed, n_days, start=MON):
    # Values on a 1/8-litre lattice keep every sum and mean exact in binary
    # floating point, so the oracle comparison can demand equality.
    rng = np.random.default_rng(seed)
    days = []
    for i in range(n_days):
        bins = rng.integers(0, 64, SLOTS_PER_DAY) / 8.0
        missing = rng.random(SLOTS_PER_DAY) < 0.15
        bins[missing] = np.nan
        bins[90] = np.nan  # one slot Missing on every day
        days.append(BinnedDay(start + timedelta(days=i * 7), bins))
    return days


@pytest.mark.parametrize("std_kind", ["population", "sample"])
def test_profile_matches_brute_force_exactly(std_kind):
    days = dyadic_days(3, 8)
    p = profile(days, 0, std_kind=std_kind)
    mean, std = brute_force_profile(days, (0,), std_kind)
    assert np.array_equal(p.mean, np.asarray(mean), equal_nan=True)
    assert np.array_equal(p.std, np.asarray(std), equal_nan=True)
    assert p.n_days == 8


def test_profile_all_missing_slot_stays_missing_never_zero():
    days = dyadic_days(4, 6)
    p = profile(days, 0)
    assert math.isnan(p.mean[90])
    assert math.isnan(p.std[90])
    assert p.bin_counts[90] == 0


def test_profile_single_day_mean_is_bins_std_zero(day_factory):
    d = day_factory(MON, np.linspace(0, 5, SLOTS_PER_DAY))
    p = profile([d], "weekday")
    assert np.array_equal(p.mean, d.bins)
    assert np.all(p.std == 0.0)
    assert p.n_days == 1


def test_profile_two_values_population_sigma(day_factory):
    a = day_factory(MON, 2.0)
    b = day_factory(MON + timedelta(days=7), 4.0)
    p = profile([a, b], "weekday")
    assert np.all(p.mean == 3.0)
    assert np.all(p.std == 1.0)
    q = profile([a, b], "weekday", std_kind="sample")
    assert q.std[0] == pytest.approx(math.sqrt(2.0))


def test_profile_sample_sigma_single_day_is_zero(day_factory):
    p = profile([day_factory(MON, 2.0)], "weekday", std_kind="sample")
    assert np.all(p.std == 0.0)


def test_profile_permutation_invariant():
    days = dyadic_days(9, 10)
    forward = profile(days, 0)
    backward = profile(list(reversed(days)), 0)
    assert np.array_equal(forward.mean, backward.mean, equal_nan=True)
    assert np.array_equal(forward.std, backward.std, equal_nan=True)


def test_profile_group_selection(day_factory):
    mon = day_factory(date(2021, 3, 1), 1.0)
    sat = day_factory(date(2021, 3, 6), 2.0)
    sun = day_factory(date(2021, 3, 7), 3.0)
    assert profile([mon, sat, sun], "weekday").n_days == 1
    assert profile([mon, sat, sun], "saturday").mean[0] == 2.0
    assert profile([mon, sat, sun], "sunday").mean[0] == 3.0
    with pytest.raises(NoMatchingDays):
        profile([sat], "weekday")


def test_template_ensemble_peak_bins(day_run_factory):
    # Days built from the packaged templates peak where the templates do:
    # 07:00 (bin 28) on weekdays, 10:00 (bin 40) on Saturday and Sunday.
    from flowrhythm.synth import default_templates

    t = default_templates()
    days = []
    for k in range(14):
        d = MON + timedelta(days=k)
        kind = "weekday" if d.weekday() < 5 else ("saturday" if d.weekday() == 5 else "sunday")
        days.append(BinnedDay(d, np.asarray(t[kind], dtype=np.float64)))
    assert abs(int(np.argmax(profile(days, "weekday").mean)) - 28) <= 1
    assert abs(int(np.argmax(profile(days, "saturday").mean)) - 40) <= 1
    assert abs(int(np.argmax(profile(days, "sunday").mean)) - 40) <= 1


def test_write_profile_csv_missing_cells_empty(tmp_path):
    days = dyadic_days(13, 4)
    p = profile(days, 0)
    path = tmp_path / "p.csv"
    write_profile_csv(p, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "bin_index,local_time,mean_litres,std_litres,n_days"
    assert len(lines) == 1 + SLOTS_PER_DAY
    row90 = lines[1 + 90].split(",")
    assert row90[2] == "" and row90[3] == "" and row90[4] == "0"
    # A present bin round-trips its mean exactly through repr.
    for k in range(SLOTS_PER_DAY):
        cells = lines[1 + k].split(",")
        if cells[2]:
            assert float(cells[2]) == p.mean[k]
