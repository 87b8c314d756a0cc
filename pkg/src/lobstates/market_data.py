"""Tick ingestion, decision windows and per-feature log-increment series.

Input is a CSV of asynchronous trade/quote events with header
``ts_us,kind,trade_px,trade_qty,bid_px,bid_qty,ask_px,ask_qty`` where
``kind`` is T or Q and timestamps are integer microseconds since midnight
of the session day. Each quote row feeds the four level-1 features, each
trade row the two trade features; every feature is an unevenly spaced
series. Increments are consecutive log-value differences with times
rescaled onto [0, 2*pi] per window for the Fourier estimator.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from lobstates.errors import DataError

TWO_PI = 2.0 * math.pi

CSV_HEADER = ["ts_us", "kind", "trade_px", "trade_qty",
              "bid_px", "bid_qty", "ask_px", "ask_qty"]


class Feature(Enum):
    """The six level-1 order book features, in fixed pipeline order."""

    TRADE_PRICE = 0
    TRADE_VOLUME = 1
    BID_PRICE = 2
    BID_VOLUME = 3
    ASK_PRICE = 4
    ASK_VOLUME = 5


FEATURES = tuple(Feature)
N_FEATURES = len(FEATURES)


@dataclass(frozen=True)
class TickEvent:
    """One trade (price/volume) or quote (full L1) event.

    All present numeric fields are strictly positive and quotes satisfy
    bid_price < ask_price; rows violating this never become events.
    """

    ts_us: int
    kind: str  # "T" or "Q"
    trade_px: float | None = None
    trade_qty: float | None = None
    bid_px: float | None = None
    bid_qty: float | None = None
    ask_px: float | None = None
    ask_qty: float | None = None


@dataclass(frozen=True)
class WindowSpec:
    """Half-open decision window [start_us, end_us)."""

    start_us: int
    end_us: int

    def __post_init__(self) -> None:
        if self.start_us >= self.end_us:
            raise ValueError("window start must precede end")


@dataclass
class FeatureSeries:
    """Samples of one feature inside a window; times nondecreasing."""

    feature: Feature
    times: np.ndarray  # int64 microseconds
    values: np.ndarray  # float64, strictly positive

    @property
    def sample_count(self) -> int:
        return len(self.times)


@dataclass
class FeatureIncrementSeries:
    """Log increments of one feature with window-rescaled terminal times.

    increments[i] = ln(v[i+1]) - ln(v[i]); rescaled_times[i] is the time of
    the increment's terminal observation mapped onto [0, 2*pi]. A series
    with fewer than two samples is degenerate (no increments).
    """

    feature: Feature
    rescaled_times: np.ndarray
    increments: np.ndarray
    sample_count: int
    degenerate: bool


@dataclass
class IngestResult:
    """Events in timestamp order plus per-run data-quality counters."""

    events: list[TickEvent]
    rows_read: int = 0
    rows_skipped: int = 0
    out_of_order: bool = False
    diagnostics: list[str] = field(default_factory=list)


def _positive(x: str) -> float:
    v = float(x)
    if not math.isfinite(v) or v <= 0.0:
        raise ValueError("field must be strictly positive")
    return v


def _parse_row(row: list[str]) -> TickEvent:
    ts = int(row[0])
    kind = row[1].strip()
    if kind == "T":
        if not row[2] or not row[3]:
            raise ValueError("trade row missing trade fields")
        return TickEvent(ts, "T", trade_px=_positive(row[2]),
                         trade_qty=_positive(row[3]))
    if kind == "Q":
        if not all(row[4:8]):
            raise ValueError("quote row missing L1 fields")
        bid_px = _positive(row[4])
        ask_px = _positive(row[6])
        if bid_px >= ask_px:
            raise ValueError("crossed or locked quote")
        return TickEvent(ts, "Q", bid_px=bid_px, bid_qty=_positive(row[5]),
                         ask_px=ask_px, ask_qty=_positive(row[7]))
    raise ValueError(f"unknown event kind {kind!r}")


def ingest_events(source) -> IngestResult:
    """Read the tick CSV from ``source`` (path, text or binary stream).

    Rows that violate event invariants are skipped and counted; a
    malformed header is fatal. Out-of-order rows are re-sorted (stable)
    and flagged.
    """
    if isinstance(source, (str, bytes)) and "\n" not in str(source):
        with open(source, "r", newline="") as fh:
            return ingest_events(fh)
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    if isinstance(source, (io.RawIOBase, io.BufferedIOBase)) or (
            hasattr(source, "mode") and "b" in getattr(source, "mode", "")):
        source = io.TextIOWrapper(source, encoding="utf-8")

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: missing CSV header") from None
    if [h.strip() for h in header] != CSV_HEADER:
        raise DataError(f"malformed header: expected {','.join(CSV_HEADER)}")

    result = IngestResult(events=[])
    for row in reader:
        if not row:
            continue
        result.rows_read += 1
        try:
            if len(row) != len(CSV_HEADER):
                raise ValueError("wrong column count")
            result.events.append(_parse_row(row))
        except (ValueError, IndexError) as exc:
            result.rows_skipped += 1
            if len(result.diagnostics) < 20:
                result.diagnostics.append(
                    f"row {result.rows_read}: {exc}")
    ts = [e.ts_us for e in result.events]
    if any(a > b for a, b in zip(ts, ts[1:])):
        result.out_of_order = True
        result.events.sort(key=lambda e: e.ts_us)
    return result


def extract_features(events: list[TickEvent],
                     window: WindowSpec) -> tuple[FeatureSeries, ...]:
    """Slice events into the six per-feature series for one window.

    Membership is half-open [start, end); repeated values are retained (a
    repeated price is a zero increment). Assumes events sorted by time.
    """
    cols: list[tuple[list[int], list[float]]] = [([], []) for _ in FEATURES]

    def put(feature: Feature, ts: int, value: float) -> None:
        t, v = cols[feature.value]
        t.append(ts)
        v.append(value)

    for e in events:
        if e.ts_us < window.start_us:
            continue
        if e.ts_us >= window.end_us:
            break
        if e.kind == "T":
            put(Feature.TRADE_PRICE, e.ts_us, e.trade_px)
            put(Feature.TRADE_VOLUME, e.ts_us, e.trade_qty)
        else:
            put(Feature.BID_PRICE, e.ts_us, e.bid_px)
            put(Feature.BID_VOLUME, e.ts_us, e.bid_qty)
            put(Feature.ASK_PRICE, e.ts_us, e.ask_px)
            put(Feature.ASK_VOLUME, e.ts_us, e.ask_qty)

    return tuple(
        FeatureSeries(f, np.asarray(cols[f.value][0], dtype=np.int64),
                      np.asarray(cols[f.value][1], dtype=np.float64))
        for f in FEATURES)


def to_increments(series: FeatureSeries,
                  window: WindowSpec) -> FeatureIncrementSeries:
    """Log increments with terminal-observation times rescaled to [0, 2*pi]."""
    n = series.sample_count
    if n < 2:
        return FeatureIncrementSeries(series.feature,
                                      np.empty(0), np.empty(0), n, True)
    logs = np.log(series.values)
    increments = np.diff(logs)
    span = float(window.end_us - window.start_us)
    rescaled = TWO_PI * (series.times[1:] - window.start_us) / span
    return FeatureIncrementSeries(series.feature, rescaled, increments,
                                  n, False)


def session_windows(start_us: int, end_us: int,
                    period_us: int) -> list[WindowSpec]:
    """Consecutive whole windows covering the session; trailing remainder
    dropped."""
    if start_us >= end_us or period_us <= 0:
        raise ValueError("invalid session bounds or period")
    n = (end_us - start_us) // period_us
    return [WindowSpec(start_us + i * period_us,
                       start_us + (i + 1) * period_us) for i in range(n)]
