import math

import numpy as np
import pytest

from lobstates.errors import DataError
from lobstates.market_data import Feature, WindowSpec, extract_features, \
    ingest_events, session_windows, to_increments

HEADER = "ts_us,kind,trade_px,trade_qty,bid_px,bid_qty,ask_px,ask_qty\n"


def make_csv(rows):
    return HEADER + "".join(r + "\n" for r in rows)


def test_ingest_single_quote_row():
    res = ingest_events(make_csv(["1000,Q,,,99.5,1200,100.5,1100"]))
    assert len(res.events) == 1
    e = res.events[0]
    assert e.ts_us == 1000 and e.kind == "Q"
    assert e.bid_px == 99.5 and e.ask_px == 100.5
    assert e.bid_qty == 1200 and e.ask_qty == 1100
    assert res.rows_skipped == 0


def test_ingest_skips_crossed_quote():
    res = ingest_events(make_csv(["1000,Q,,,100.5,1200,99.5,1100"]))
    assert len(res.events) == 0
    assert res.rows_skipped == 1


def test_ingest_resorts_out_of_order_rows():
    res = ingest_events(make_csv(["2000,T,100,50,,,,",
                                  "1000,T,101,60,,,,"]))
    assert res.out_of_order
    assert [e.ts_us for e in res.events] == [1000, 2000]


def test_ingest_rejects_malformed_header():
    with pytest.raises(DataError):
        ingest_events("ts,kind\n1,T\n")


def test_ingest_skips_nonpositive_and_incomplete_rows():
    res = ingest_events(make_csv([
        "1,T,0,50,,,,",            # nonpositive price
        "2,T,100,,,,,",            # missing volume
        "3,Q,,,99,0,101,5",        # nonpositive bid size
        "4,X,,,,,,",               # unknown kind
        "5,T,100,50,,,,",          # valid
    ]))
    assert len(res.events) == 1
    assert res.rows_skipped == 4


def quote(ts, bid=99.0, ask=101.0):
    return f"{ts},Q,,,{bid},1000,{ask},900"


def trade(ts, px=100.0, qty=10.0):
    return f"{ts},T,{px},{qty},,,,"


def test_extract_empty_trade_series():
    res = ingest_events(make_csv([quote(10), quote(20)]))
    series = extract_features(res.events, WindowSpec(0, 100))
    assert series[Feature.TRADE_PRICE.value].sample_count == 0
    assert series[Feature.BID_PRICE.value].sample_count == 2


def test_extract_counts_per_kind():
    res = ingest_events(make_csv([quote(10), quote(20), quote(30),
                                  trade(25)]))
    series = extract_features(res.events, WindowSpec(0, 100))
    assert series[Feature.BID_PRICE.value].sample_count == 3
    assert series[Feature.ASK_VOLUME.value].sample_count == 3
    assert series[Feature.TRADE_PRICE.value].sample_count == 1


def test_extract_window_end_excluded():
    res = ingest_events(make_csv([quote(10), quote(100)]))
    series = extract_features(res.events, WindowSpec(0, 100))
    assert series[Feature.BID_PRICE.value].sample_count == 1


def test_windowing_partitions_events():
    rng = np.random.default_rng(3)
    ts = sorted(int(t) for t in rng.integers(0, 300, 200))
    res = ingest_events(make_csv([trade(t) for t in ts]))
    windows = session_windows(0, 300, 100)
    total = 0
    for w in windows:
        series = extract_features(res.events, w)
        total += series[Feature.TRADE_PRICE.value].sample_count
    assert total == len(res.events)


def test_increments_equal_values_give_zero():
    res = ingest_events(make_csv([trade(10, 100), trade(20, 100)]))
    series = extract_features(res.events, WindowSpec(0, 100))
    inc = to_increments(series[Feature.TRADE_PRICE.value], WindowSpec(0, 100))
    assert inc.increments.tolist() == [0.0]
    assert not inc.degenerate


def test_increments_log_ratio_and_rescaling():
    w = WindowSpec(0, 1000)
    res = ingest_events(make_csv([trade(0, 100), trade(999, 200)]))
    series = extract_features(res.events, w)
    inc = to_increments(series[Feature.TRADE_PRICE.value], w)
    assert inc.increments[0] == pytest.approx(math.log(2.0), abs=1e-12)
    assert inc.rescaled_times[0] == pytest.approx(2 * math.pi * 0.999,
                                                  abs=1e-12)


def test_single_sample_is_degenerate():
    res = ingest_events(make_csv([trade(10)]))
    series = extract_features(res.events, WindowSpec(0, 100))
    inc = to_increments(series[Feature.TRADE_PRICE.value], WindowSpec(0, 100))
    assert inc.degenerate
    assert len(inc.increments) == 0


def test_increment_lengths_and_time_order():
    rng = np.random.default_rng(11)
    w = WindowSpec(0, 10_000)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        ts = np.sort(rng.integers(0, 10_000, n))
        rows = [trade(int(t), float(rng.uniform(50, 150))) for t in ts]
        res = ingest_events(make_csv(rows))
        series = extract_features(res.events, w)
        inc = to_increments(series[Feature.TRADE_PRICE.value], w)
        assert len(inc.increments) == inc.sample_count - 1
        assert np.all(np.diff(inc.rescaled_times) >= 0)
        assert inc.rescaled_times.min() >= 0
        assert inc.rescaled_times.max() <= 2 * math.pi + 1e-12
