from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from flowrhythm.errors import (
    CounterDecrease,
    EmptyInput,
    MalformedRow,
    NonMonotonicTimestamp,
    TooFewReadings,
)
from flowrhythm.readings import (
    ReadingStream,
    difference_cumulative,
    drop_long_gaps,
    parse_stream,
    split_on_counter_decrease,
    write_stream_csv,
    write_stream_jsonl,
)

CSV = """timestamp,cumulative_litres
2021-03-01T00:00:00+00:00,100.0
2021-03-01T00:15:10+00:00,101.5
2021-03-01T00:30:20+00:00,101.5
2021-03-01T00:45:30+00:00,104.25
"""


def make_stream(epochs, litres):
    return ReadingStream(np.asarray(epochs, np.int64), np.asarray(litres, np.float64), "t")


def test_parse_csv_with_header():
    s = parse_stream(CSV, fmt="csv")
    assert len(s) == 4
    assert s[0].cumulative_litres == 100.0
    assert s[0].timestamp == datetime(2021, 3, 1, tzinfo=timezone.utc)


def test_parse_csv_without_header():
    s = parse_stream("2021-03-01T00:00:00Z,1.0\n2021-03-01T00:15:00Z,2.0\n")
    assert len(s) == 2
    assert s[1].cumulative_litres == 2.0


def test_parse_csv_z_suffix_and_offset_agree():
    a = parse_stream("2021-03-01T05:00:00Z,1.0\n")
    b = parse_stream("2021-03-01T06:00:00+01:00,1.0\n")
    assert a[0].timestamp == b[0].timestamp


def test_parse_csv_requires_timezone():
    with pytest.raises(MalformedRow, match="row 1"):
        parse_stream("2021-03-01T00:00:00,1.0\n")


def test_parse_csv_malformed_row_reports_physical_line():
    text = "timestamp,cumulative_litres\n2021-03-01T00:00:00Z,1.0\nnot-a-row\n"
    with pytest.raises(MalformedRow, match="row 3"):
        parse_stream(text)


def test_parse_csv_wrong_column_count():
    with pytest.raises(MalformedRow):
        parse_stream("2021-03-01T00:00:00Z,1.0,extra\n")


def test_parse_rejects_non_monotone_timestamps():
    text = "2021-03-01T00:15:00Z,1.0\n2021-03-01T00:15:00Z,2.0\n"
    with pytest.raises(NonMonotonicTimestamp):
        parse_stream(text)


def test_parse_empty_input():
    with pytest.raises(EmptyInput):
        parse_stream("")
    with pytest.raises(EmptyInput):
        parse_stream("timestamp,cumulative_litres\n")


def test_parse_jsonl():
    text = (
        '{"ts": "2021-03-01T00:00:00Z", "litres_total": 5.5}\n'
        '{"ts": "2021-03-01T00:15:00Z", "litres_total": 6.0}\n'
    )
    s = parse_stream(text, fmt="jsonl")
    assert len(s) == 2
    assert s[1].cumulative_litres == 6.0


def test_parse_jsonl_rejects_bool_litres():
    with pytest.raises(MalformedRow):
        parse_stream('{"ts": "2021-03-01T00:00:00Z", "litres_total": true}\n', fmt="jsonl")


def test_parse_jsonl_rejects_missing_keys():
    with pytest.raises(MalformedRow, match="row 1"):
        parse_stream('{"ts": "2021-03-01T00:00:00Z"}\n', fmt="jsonl")


def test_difference_cumulative_values_and_bounds():
    s = parse_stream(CSV)
    intervals = difference_cumulative(s)
    assert [iv.litres for iv in intervals] == [1.5, 0.0, 2.75]
    assert intervals[0].start == s[0].timestamp
    assert intervals[0].end == s[1].timestamp


def test_difference_requires_two_readings():
    with pytest.raises(TooFewReadings):
        difference_cumulative(make_stream([0], [1.0]))


def test_difference_raises_on_counter_decrease_with_index():
    s = make_stream([0, 900, 1800], [5.0, 4.0, 6.0])
    with pytest.raises(CounterDecrease) as err:
        difference_cumulative(s)
    assert err.value.index == 1


def test_conservation_sum_of_intervals(demo_stream):
    intervals = difference_cumulative(demo_stream)
    total = sum(iv.litres for iv in intervals)
    expected = float(demo_stream.litres[-1] - demo_stream.litres[0])
    assert total == pytest.approx(expected, rel=1e-9)


def test_consecutive_differences_are_exact():
    # Neighbouring cumulative readings are close enough that their float
    # difference is exact, so per-interval usage carries no rounding at all.
    rng = np.random.default_rng(5)
    litres = np.cumsum(rng.uniform(0, 20, 500))
    s = make_stream(np.arange(500) * 900, litres)
    intervals = difference_cumulative(s)
    for k, iv in enumerate(intervals):
        assert iv.litres == float(litres[k + 1]) - float(litres[k])


def test_split_on_counter_decrease_segments():
    s = make_stream([0, 900, 1800, 2700, 3600], [5.0, 6.0, 2.0, 3.0, 4.0])
    segments = split_on_counter_decrease(s)
    assert [len(seg) for seg in segments] == [2, 3]
    assert segments[1].litres[0] == 2.0


def test_split_without_decrease_is_identity():
    s = make_stream([0, 900], [1.0, 2.0])
    segments = split_on_counter_decrease(s)
    assert len(segments) == 1 and len(segments[0]) == 2


def test_drop_long_gaps():
    s = make_stream([0, 900, 900 + 3600, 900 + 4500], [0.0, 1.0, 7.0, 8.0])
    intervals = difference_cumulative(s)
    kept = drop_long_gaps(intervals, timedelta(minutes=45))
    assert [iv.litres for iv in kept] == [1.0, 1.0]


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(11)
    litres = np.cumsum(rng.uniform(0, 3, 50))
    s = make_stream(np.arange(50) * 901, litres)
    path = tmp_path / "r.csv"
    write_stream_csv(s, path)
    back = parse_stream(path.read_text())
    assert np.array_equal(back.epoch_s, s.epoch_s)
    assert np.array_equal(back.litres, s.litres)


def test_jsonl_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(12)
    litres = np.cumsum(rng.uniform(0, 3, 50))
    s = make_stream(np.arange(50) * 901, litres)
    path = tmp_path / "r.jsonl"
    write_stream_jsonl(s, path)
    back = parse_stream(path.read_text(), fmt="jsonl")
    assert np.array_equal(back.epoch_s, s.epoch_s)
    assert np.array_equal(back.litres, s.litres)
