"""Synthetic tick sessions with planted cluster structure.

Each of the six features follows a positive value path: the exponential
of the cumulative planted factor-model increments, scaled by a
per-window volatility, anchored at a per-feature base level. Quote rows
sample the four L1 features at one Poisson arrival stream, trade rows the
two trade features at another, so the emitted CSV is asynchronous in the
same way the live feed is. Regimes (cluster labels, couplings, optional
common price drift) alternate in fixed blocks of windows. Rows whose
sampled quote would cross (bid >= ask) are dropped and counted; with the
default geometry they are vanishingly rare.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from lobstates.clustering import ClusterConfiguration, NohModelSpec, \
    noh_generate
from lobstates.market_data import CSV_HEADER, Feature

MINUTE_US = 60_000_000
DEFAULT_START_US = (9 * 3600 + 5 * 60) * 1_000_000   # 09:05
DEFAULT_PERIOD_US = 5 * MINUTE_US

# base levels: trade_px, trade_qty, bid_px, bid_qty, ask_px, ask_qty
DEFAULT_BASES = (100.0, 1500.0, 99.0, 1200.0, 101.0, 1100.0)

_PRICE_FEATURES = (Feature.TRADE_PRICE.value, Feature.BID_PRICE.value,
                   Feature.ASK_PRICE.value)


@dataclass(frozen=True)
class RegimeSpec:
    """Planted structure for one block of windows."""

    labels: ClusterConfiguration
    couplings: tuple[float, ...]
    price_drift: float = 0.0  # log drift per window, applied to all prices


@dataclass(frozen=True)
class SessionSpec:
    """Full-session generation parameters."""

    regimes: tuple[RegimeSpec, ...]
    block_windows: int = 10
    n_windows: int = 89
    start_us: int = DEFAULT_START_US
    period_us: int = DEFAULT_PERIOD_US
    steps_per_window: int = 250
    window_vol: float = 0.001  # integrated log volatility per window
    quote_rate: float = 300.0  # mean quote events per window
    trade_rate: float = 100.0  # mean trade events per window
    bases: tuple[float, ...] = DEFAULT_BASES
    rng_seed: int = 0


def single_regime(labels, couplings, price_drift: float = 0.0,
                  **kwargs) -> SessionSpec:
    """Session spec with one regime throughout."""
    if isinstance(couplings, (int, float)):
        couplings = tuple([float(couplings)]
                          * ClusterConfiguration(tuple(labels)).n_clusters)
    regime = RegimeSpec(ClusterConfiguration(tuple(labels)),
                        tuple(couplings), price_drift)
    return SessionSpec(regimes=(regime,), **kwargs)


@dataclass
class SessionResult:
    csv_text: str
    n_rows: int
    n_crossed_dropped: int
    regime_schedule: list[int]  # regime index per window


def generate_session(spec: SessionSpec) -> SessionResult:
    """Emit one session in the tick CSV format, deterministically."""
    rng = np.random.default_rng(spec.rng_seed)
    steps = spec.steps_per_window
    step_vol = spec.window_vol / np.sqrt(steps)
    levels = np.zeros(6)  # cumulative log deviation from base per feature
    bases = np.asarray(spec.bases)

    out = io.StringIO()
    out.write(",".join(CSV_HEADER) + "\n")
    n_rows = 0
    n_crossed = 0
    schedule = []

    for w in range(spec.n_windows):
        regime_idx = (w // spec.block_windows) % len(spec.regimes)
        regime = spec.regimes[regime_idx]
        schedule.append(regime_idx)
        noh = NohModelSpec(regime.labels, regime.couplings, steps,
                           rng_seed=int(rng.integers(2 ** 63)))
        increments = noh_generate(noh) * step_vol
        if regime.price_drift:
            increments[list(_PRICE_FEATURES)] += regime.price_drift / steps
        paths = levels[:, None] + np.cumsum(increments, axis=1)
        levels = paths[:, -1].copy()

        w_start = spec.start_us + w * spec.period_us
        rows: list[tuple[int, int, str]] = []

        n_quotes = int(rng.poisson(spec.quote_rate))
        quote_ts = np.sort(rng.uniform(0, spec.period_us, n_quotes))
        for ts in quote_ts:
            k = min(int(ts / spec.period_us * steps), steps - 1)
            bid = bases[2] * np.exp(paths[2, k])
            bqty = bases[3] * np.exp(paths[3, k])
            ask = bases[4] * np.exp(paths[4, k])
            aqty = bases[5] * np.exp(paths[5, k])
            if bid >= ask:
                n_crossed += 1
                continue
            rows.append((w_start + int(ts), 0,
                         f",Q,,,{bid:.6f},{bqty:.4f},{ask:.6f},{aqty:.4f}"))

        n_trades = int(rng.poisson(spec.trade_rate))
        trade_ts = np.sort(rng.uniform(0, spec.period_us, n_trades))
        for ts in trade_ts:
            k = min(int(ts / spec.period_us * steps), steps - 1)
            px = bases[0] * np.exp(paths[0, k])
            qty = bases[1] * np.exp(paths[1, k])
            rows.append((w_start + int(ts), 1, f",T,{px:.6f},{qty:.4f},,,,"))

        rows.sort(key=lambda r: (r[0], r[1]))
        for ts, _, tail in rows:
            out.write(f"{ts}{tail}\n")
            n_rows += 1

    return SessionResult(out.getvalue(), n_rows, n_crossed, schedule)


def write_session(spec: SessionSpec, path) -> SessionResult:
    result = generate_session(spec)
    with open(path, "w", newline="") as fh:
        fh.write(result.csv_text)
    return result


def two_regime_session(g: float = 0.95, price_drift: float = 0.0,
                       rng_seed: int = 0, **kwargs) -> SessionSpec:
    """The standard validation session.

    Blocks alternate between a regime whose quote features split into a
    price pair and a volume pair (with optional up-drift on prices) and a
    regime where all four quote features share one factor (drift
    negated). The two trade features form their own cluster in both
    regimes: quote and trade rows sample different arrival streams, and
    correlations across those streams attenuate at the Nyquist mode
    count, so the regime distinction is carried entirely by same-stream
    pairs where the estimator is unbiased.
    """
    regime_a = RegimeSpec(ClusterConfiguration((1, 1, 2, 3, 2, 3)),
                          (g, g, g), price_drift)
    regime_b = RegimeSpec(ClusterConfiguration((1, 1, 2, 2, 2, 2)),
                          (g, g), -price_drift)
    return SessionSpec(regimes=(regime_a, regime_b), rng_seed=rng_seed,
                       **kwargs)
