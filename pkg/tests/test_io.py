import datetime as dt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shockfit.io import (
    CrisisWindow, InputError, PriceSeries, builtin_windows, extract_window, fixture_names, load_csv,
    load_fixture, parse_window, synthesize, write_csv,
)
from shockfit.model_core import ShockFitParams


def write(tmp_path, text, name="p.csv"):
    f = tmp_path / name
    f.write_text(text)
    return f


def test_two_rows(tmp_path):
    s = load_csv(write(tmp_path, "date,close\n2020-01-02,10.5\n2020-01-03,11\n"))
    assert len(s) == 2 and s.label == "p"
    assert s.dates[0] == dt.date(2020, 1, 2)


def test_out_of_order(tmp_path):
    with pytest.raises(InputError, match="out of order"):
        load_csv(write(tmp_path, "date,close\n2020-01-03,1\n2020-01-02,1\n"))


def test_duplicate_date(tmp_path):
    with pytest.raises(InputError, match="duplicate"):
        load_csv(write(tmp_path, "date,close\n2020-01-03,1\n2020-01-03,2\n"))


def test_zero_close_names_row(tmp_path):
    with pytest.raises(InputError, match=r":3: nonpositive close"):
        load_csv(write(tmp_path, "date,close\n2020-01-02,1\n2020-01-03,0\n"))


@pytest.mark.parametrize("body,msg", [
    ("date,price\n", "header"),
    ("date,close\n2020-13-01,1\n", "bad date"),
    ("date,close\n2020-01-01,abc\n", "bad close"),
    ("", "empty"),
])
def test_parse_errors(tmp_path, body, msg):
    with pytest.raises(InputError, match=msg):
        load_csv(write(tmp_path, body))


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_csv(tmp_path / "nope.csv")


def test_builtin_windows():
    w = {x.name: x for x in builtin_windows()}
    assert len(w) == 4
    assert (w["1987"].start, w["1987"].end) == (dt.date(1987, 10, 13), dt.date(1987, 11, 8))
    assert (w["2008"].start, w["2008"].end) == (dt.date(2008, 9, 12), dt.date(2008, 10, 27))
    assert (w["1998"].start, w["2001"].start) == (dt.date(1998, 8, 25), dt.date(2001, 9, 10))


def test_parse_window():
    assert parse_window("2001").end == dt.date(2001, 10, 22)
    w = parse_window("2020-03-01:2020-04-01")
    assert (w.start, w.end) == (dt.date(2020, 3, 1), dt.date(2020, 4, 1))
    with pytest.raises(InputError):
        parse_window("2020-04-01:2020-03-01")
    with pytest.raises(InputError):
        parse_window("1929")


def daily(start, closes):
    d0 = dt.date.fromisoformat(start)
    return PriceSeries("x", tuple(d0 + dt.timedelta(days=i) for i in range(len(closes))), np.asarray(closes, float))


def test_constant_window_is_exactly_one():
    s = daily("1987-10-01", [0.1] * 60)
    v = extract_window(s, parse_window("1987")).values
    assert np.all(v == 1.0)


def test_scale_invariance():
    rng = np.random.default_rng(3)
    p = np.exp(np.cumsum(rng.normal(0, 0.02, 80))) * 100
    a = extract_window(daily("1987-10-01", p), parse_window("1987")).values
    b = extract_window(daily("1987-10-01", 37.0 * p), parse_window("1987")).values
    np.testing.assert_allclose(a, b, rtol=1e-14)


def test_window_too_short_or_empty():
    s = daily("1990-01-01", np.ones(30))
    with pytest.raises(InputError):
        extract_window(s, parse_window("1987"))
    with pytest.raises(InputError):
        extract_window(s, CrisisWindow("short", dt.date(1990, 1, 1), dt.date(1990, 1, 5)))


def test_dow_1987_window_reproduces_plotted_points():
    # the plotted 1987 points form one sample per calendar day of the window
    ref = load_fixture("dow_1987").values
    assert ref.size == 27
    prices = np.concatenate([[2500.0, 2510.0], 2200.0 * ref, [1900.0, 1910.0]])
    s = daily("1987-10-11", prices)
    out = extract_window(s, parse_window("1987"))
    assert len(out) == 27 and out.window == (dt.date(1987, 10, 13), dt.date(1987, 11, 8))
    np.testing.assert_allclose(out.values, ref / ref.mean(), atol=5e-4)
    np.testing.assert_allclose(out.values[:3], [1.227, 1.198, 1.143], atol=5e-3)


@given(st.lists(st.floats(0.01, 1e6), min_size=8, max_size=60))
def test_normalized_mean_is_one(closes):
    s = daily("1987-10-13", closes)
    w = CrisisWindow("all", s.dates[0], s.dates[-1])
    assert abs(extract_window(s, w).values.mean() - 1.0) < 1e-12


@given(st.lists(st.floats(1e-6, 1e9, allow_subnormal=False), min_size=1, max_size=40), st.integers(0, 20000))
def test_csv_round_trip(tmp_path_factory, closes, offset):
    s = daily((dt.date(1950, 1, 1) + dt.timedelta(days=offset)).isoformat(), closes)
    f = tmp_path_factory.mktemp("rt") / "s.csv"
    write_csv(s, f)
    back = load_csv(f)
    assert back.dates == s.dates
    assert np.array_equal(back.closes, s.closes)


def test_synthesize():
    p = ShockFitParams(0.95, 1.0, 0.5, 0.1, 0.1, 1.5, 1.0)
    s = synthesize(p, 27)
    from shockfit.model_core import eval_single_shock
    assert np.array_equal(s.values, eval_single_shock(p, np.arange(1, 28)))
    a, b = synthesize(p, 27, 0.01, seed=9), synthesize(p, 27, 0.01, seed=9)
    assert np.array_equal(a.values, b.values)
    flat = synthesize(ShockFitParams(1, 0, 0, 0, 0, 1, 0), 10_000, 0.005, seed=1)
    assert abs(flat.values.std(ddof=1) - 0.005) < 0.0005
    with pytest.raises(InputError):
        synthesize(p, 0)
    with pytest.raises(InputError):
        synthesize(p, 5, -1.0)


def test_fixtures_present_with_provenance():
    names = fixture_names()
    for m in ["dow", "sp500", "nasdaq", "hangseng", "nikkei", "dax", "ftse", "ibovespa", "ipc", "kospi", "asx"]:
        for y in ("1987", "1998", "2001", "2008"):
            assert f"{m}_{y}" in names
            assert "provenance" in load_fixture(f"{m}_{y}").meta
    assert len(load_fixture("dow_2008_long")) == 32
