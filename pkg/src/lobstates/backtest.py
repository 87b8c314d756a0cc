"""Session replay: state discovery each period, then trading post-init.

Per decision window the pipeline extracts the six feature series,
computes the Fourier correlation matrix, searches for the
maximum-likelihood cluster configuration, matches it into the state
registry and records the 1-step transition. Once the initialisation
periods have passed the agent acts at the window-end quote, the reward is
the mark-to-market PnL, the transition model predicts the next state and
the Q-value of the (state, action) pair is updated. The buy-and-hold
agent runs the identical state pipeline but never acts; the random agent
acts uniformly and ignores the Q-table.

A whole run is a pure function of (events, config, seed): the state
pipeline itself does not consume the agent's generator, so learner and
random runs over the same data discover identical state sequences.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np

from lobstates import agent as agent_mod
from lobstates import clustering, states
from lobstates.agent import LearningParams, PortfolioState, QTable
from lobstates.clustering import ClusterConfiguration, GAParams
from lobstates.distance import DistanceMode
from lobstates.errors import DataError
from lobstates.fourier import CoefficientPolicy, correlation_matrix
from lobstates.market_data import TickEvent, extract_features, \
    session_windows, to_increments

MINUTE_US = 60_000_000
SESSION_START_US = (9 * 3600 + 5 * 60) * 1_000_000    # 09:05
SESSION_END_US = (16 * 3600 + 30 * 60) * 1_000_000    # 16:30


@dataclass(frozen=True)
class RunConfig:
    """Everything a session replay needs besides the events and seed."""

    initial_cash: float = 100_000.0
    initial_inventory: int = 800
    session_start_us: int = SESSION_START_US
    session_end_us: int = SESSION_END_US
    period_us: int = 5 * MINUTE_US
    init_periods: int = 5
    threshold: float = 0.05
    distance_mode: DistanceMode = DistanceMode.BEST_MATCH
    coefficient_policy: CoefficientPolicy = CoefficientPolicy()
    cluster_engine: str = "exhaustive"  # "exhaustive" | "ga"
    exhaustive_limit: int = 10
    ga_params: GAParams = GAParams()
    learning: LearningParams = LearningParams()
    agent: str = "learner"  # "learner" | "random" | "buy_and_hold"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.init_periods < 0:
            raise ValueError("init_periods must be >= 0")
        if self.session_start_us >= self.session_end_us:
            raise ValueError("session start must precede end")
        if self.agent not in ("learner", "random", "buy_and_hold"):
            raise ValueError(f"unknown agent kind {self.agent!r}")
        if self.cluster_engine not in ("exhaustive", "ga"):
            raise ValueError(f"unknown cluster engine {self.cluster_engine!r}")


@dataclass
class PeriodRecord:
    window_index: int
    clock: str  # HH:MM of the decision instant (window end)
    state_id: int
    is_new_state: bool
    labels: tuple[int, ...]
    action_index: int | None
    filled_shares: int
    fill_price: float | None
    cash: float
    inventory: int
    bid: float | None
    ask: float | None
    mid: float | None
    value: float | None
    pnl: float | None
    degenerate: tuple[bool, ...]
    reused_state: bool
    # wall-clock stage timings; kept out of serialized reports
    corr_seconds: float = 0.0
    cluster_seconds: float = 0.0


@dataclass
class DayResult:
    records: list[PeriodRecord]
    initial_value: float
    eod_value: float
    eod_pnl_pct: float
    registry: states.StateRegistry
    transitions: states.TransitionCounts
    q_table: QTable
    clamp_events: int
    degenerate_windows: int
    config: RunConfig
    seed: int


@dataclass
class SummaryStats:
    minimum: float
    lower_quartile: float
    mean: float
    median: float
    upper_quartile: float
    maximum: float
    std_dev: float
    n: int
    std_dev_defined: bool = True

    def row(self) -> list[float]:
        return [self.minimum, self.lower_quartile, self.mean, self.median,
                self.upper_quartile, self.maximum, self.std_dev]


def _clock(ts_us: int) -> str:
    minutes = (ts_us // MINUTE_US) % (24 * 60)
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def _search_configuration(corr: np.ndarray, config: RunConfig,
                          window_index: int) -> ClusterConfiguration:
    n = corr.shape[0]
    if config.cluster_engine == "exhaustive" and n <= config.exhaustive_limit:
        best, _ = clustering.exhaustive_search(corr, config.exhaustive_limit)
        return best
    params = dataclasses.replace(
        config.ga_params,
        rng_seed=config.ga_params.rng_seed + window_index)
    best, _, _ = clustering.ga_search(corr, params)
    return best


def run_day(events: list[TickEvent], config: RunConfig,
            seed: int | None = None) -> DayResult:
    """Replay one session under the configured agent."""
    if not any(e.kind == "Q" for e in events):
        raise DataError("session contains no quote events")
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)

    windows = session_windows(config.session_start_us, config.session_end_us,
                              config.period_us)
    registry = states.StateRegistry(threshold=config.threshold,
                                    mode=config.distance_mode)
    transitions = states.TransitionCounts()
    q_table = QTable()
    portfolio = PortfolioState(cash=float(config.initial_cash),
                               inventory=int(config.initial_inventory))
    learning = config.learning

    records: list[PeriodRecord] = []
    clamp_events = 0
    degenerate_windows = 0
    prev_value: float | None = None
    last_state: int | None = None
    last_bid = last_ask = None

    ev_idx = 0
    n_events = len(events)
    while ev_idx < n_events and events[ev_idx].ts_us < windows[0].start_us:
        if events[ev_idx].kind == "Q":
            last_bid, last_ask = events[ev_idx].bid_px, events[ev_idx].ask_px
        ev_idx += 1

    for w_index, window in enumerate(windows):
        w_events = []
        while ev_idx < n_events and events[ev_idx].ts_us < window.end_us:
            e = events[ev_idx]
            if e.ts_us >= window.start_us:
                w_events.append(e)
            if e.kind == "Q":
                last_bid, last_ask = e.bid_px, e.ask_px
            ev_idx += 1

        series = extract_features(w_events, window)
        increments = tuple(to_increments(s, window) for s in series)

        t0 = time.perf_counter()
        corr = correlation_matrix(increments, config.coefficient_policy)
        t1 = time.perf_counter()
        clamp_events += corr.clamp_count

        reused = False
        if corr.degenerate.all() and last_state is not None:
            degenerate_windows += 1
            state_id, is_new = last_state, False
            registry.states[state_id].visits += 1
            labels = registry.states[state_id].representative.labels
            t2 = t1
        else:
            if corr.degenerate.all():
                degenerate_windows += 1
            configuration = _search_configuration(corr.rho, config, w_index)
            t2 = time.perf_counter()
            labels = configuration.labels
            state_id, is_new = states.match_or_create(registry, configuration,
                                                      w_index)
        reused = corr.degenerate.all() and last_state is not None

        states.record_transition(transitions, state_id)
        agent_mod.grow(q_table, len(registry))
        last_state = state_id

        mid = (last_bid + last_ask) / 2.0 if last_bid is not None else None
        if portfolio.initial_value is None and mid is not None:
            portfolio.initial_value = portfolio.value(mid)

        action_index: int | None = None
        filled = 0
        fill_price: float | None = None
        trading = w_index >= config.init_periods
        if trading and config.agent != "buy_and_hold" and mid is not None:
            if config.agent == "learner":
                action_index = agent_mod.select_action(q_table, state_id,
                                                       learning, rng)
            else:
                action_index = int(rng.integers(0, agent_mod.N_ACTIONS))
            filled, fill_price = agent_mod.execute(
                portfolio, agent_mod.ACTIONS[action_index],
                last_bid, last_ask)

        value = pnl = reward_value = None
        if mid is not None:
            base = prev_value if prev_value is not None \
                else portfolio.initial_value
            reward_value, value = agent_mod.reward(
                portfolio, mid, base, learning.reward_mode)
            pnl = value - portfolio.initial_value

        if trading and config.agent == "learner" and action_index is not None:
            next_state = states.predict_next(transitions, state_id)
            agent_mod.q_update(q_table, state_id, action_index,
                               reward_value, next_state, learning)

        if value is not None:
            prev_value = value

        records.append(PeriodRecord(
            window_index=w_index, clock=_clock(window.end_us),
            state_id=state_id, is_new_state=is_new, labels=tuple(labels),
            action_index=action_index, filled_shares=filled,
            fill_price=fill_price, cash=portfolio.cash,
            inventory=portfolio.inventory, bid=last_bid, ask=last_ask,
            mid=mid, value=value, pnl=pnl,
            degenerate=tuple(bool(x) for x in corr.degenerate),
            reused_state=reused,
            corr_seconds=t1 - t0, cluster_seconds=t2 - t1))

    if portfolio.initial_value is None or records[-1].value is None:
        raise DataError("session never produced a usable mid quote")
    eod_value = records[-1].value
    eod_pnl_pct = 100.0 * (eod_value - portfolio.initial_value) \
        / portfolio.initial_value
    return DayResult(records, portfolio.initial_value, eod_value,
                     eod_pnl_pct, registry, transitions, q_table,
                     clamp_events, degenerate_windows, config, seed)


def summarize(results) -> SummaryStats:
    """Distribution summary of end-of-day PnL percentages."""
    values = [r.eod_pnl_pct if isinstance(r, DayResult) else float(r)
              for r in results]
    if not values:
        raise ValueError("nothing to summarize")
    arr = np.asarray(values, dtype=np.float64)
    lq, med, uq = np.percentile(arr, [25.0, 50.0, 75.0])
    defined = arr.size > 1
    std = float(np.std(arr, ddof=1)) if defined else 0.0
    return SummaryStats(float(arr.min()), float(lq), float(arr.mean()),
                        float(med), float(uq), float(arr.max()), std,
                        arr.size, defined)


def compare_agents(events: list[TickEvent], config: RunConfig,
                   seeds: list[int]) -> dict[str, SummaryStats]:
    """Learner and random per seed, buy-and-hold once; Min/LQ/Mean/Median/
    UQ/Max/StdDev rows per agent."""
    if not seeds:
        raise ValueError("need at least one seed")
    out: dict[str, SummaryStats] = {}
    for kind in ("learner", "random"):
        cfg = dataclasses.replace(config, agent=kind)
        out[kind] = summarize(
            [run_day(events, cfg, seed=s) for s in seeds])
    bh = run_day(events, dataclasses.replace(config, agent="buy_and_hold"),
                 seed=seeds[0])
    out["buy_and_hold"] = summarize([bh])
    return out


def sweep_threshold(events: list[TickEvent], config: RunConfig,
                    thresholds: list[float],
                    ) -> tuple[list[dict], float]:
    """One full run per threshold (same seed); returns per-threshold rows
    and the mean-PnL argmax (ties to the smaller threshold)."""
    if not thresholds:
        raise ValueError("need at least one threshold")
    rows = []
    for theta in thresholds:
        cfg = dataclasses.replace(config, threshold=theta)
        day = run_day(events, cfg)
        rows.append({"threshold": theta, "n_states": len(day.registry),
                     "mean_eod_pnl_pct": day.eod_pnl_pct})
    best = min(rows, key=lambda r: (-r["mean_eod_pnl_pct"], r["threshold"]))
    return rows, best["threshold"]


# ---------------------------------------------------------------- reports

PERIOD_COLUMNS = ["window_index", "clock", "state_id", "is_new_state",
                  "labels", "action_index", "filled_shares", "fill_price",
                  "cash", "inventory", "bid", "ask", "mid", "value", "pnl",
                  "degenerate", "reused_state"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value)


def periods_csv(day: DayResult) -> str:
    """PeriodRecord rows; stage timings are deliberately not serialized so
    repeated runs are byte-identical."""
    lines = [",".join(PERIOD_COLUMNS)]
    for r in day.records:
        lines.append(",".join([
            _cell(r.window_index), r.clock, _cell(r.state_id),
            _cell(r.is_new_state), "|".join(map(str, r.labels)),
            _cell(r.action_index), _cell(r.filled_shares),
            _cell(r.fill_price), _cell(r.cash), _cell(r.inventory),
            _cell(r.bid), _cell(r.ask), _cell(r.mid), _cell(r.value),
            _cell(r.pnl), "".join("1" if d else "0" for d in r.degenerate),
            _cell(r.reused_state)]))
    return "\n".join(lines) + "\n"


def config_dict(config: RunConfig, seed: int | None = None) -> dict:
    """Flat, re-parseable echo of the resolved configuration."""
    ga = config.ga_params
    lp = config.learning
    pol = config.coefficient_policy
    return {
        "cash": config.initial_cash,
        "inventory": config.initial_inventory,
        "session_start": _clock(config.session_start_us),
        "session_end": _clock(config.session_end_us),
        "period_minutes": config.period_us // MINUTE_US,
        "init_periods": config.init_periods,
        "threshold": config.threshold,
        "distance_mode": config.distance_mode.value,
        "coefficients": pol.mode,
        "fixed_n": pol.fixed_n,
        "cluster_engine": config.cluster_engine,
        "exhaustive_limit": config.exhaustive_limit,
        "population_size": ga.population_size,
        "max_generations": ga.max_generations,
        "stagnation_limit": ga.stagnation_limit,
        "mutation_rate": ga.mutation_rate,
        "tournament_size": ga.tournament_size,
        "elite_count": ga.elite_count,
        "ga_seed": ga.rng_seed,
        "epsilon": lp.epsilon,
        "gamma": lp.gamma,
        "alpha0": lp.alpha0,
        "reward_mode": lp.reward_mode,
        "agent": config.agent,
        "seed": seed if seed is not None else config.seed,
    }


def summary_json(day: DayResult) -> str:
    payload = {
        "config": config_dict(day.config, day.seed),
        "initial_value": day.initial_value,
        "eod_value": day.eod_value,
        "eod_pnl_pct": day.eod_pnl_pct,
        "clamp_events": day.clamp_events,
        "degenerate_windows": day.degenerate_windows,
        "n_states": len(day.registry),
        "registry": [
            {"state_id": s.state_id,
             "labels": list(s.representative.labels),
             "first_seen": s.first_seen,
             "visits": s.visits,
             "creation_distances": list(s.creation_distances)}
            for s in day.registry.states],
        "transition_counts": day.transitions.counts.tolist(),
        "transition_probabilities":
            states.transition_probabilities(day.transitions).tolist(),
        "q_values": day.q_table.values.tolist(),
        "q_visit_counts": day.q_table.visit_counts.tolist(),
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


COMPARISON_COLUMNS = ["model", "min", "lq", "mean", "median", "uq", "max",
                      "std_dev"]


def comparison_csv(table: dict[str, SummaryStats]) -> str:
    lines = [",".join(COMPARISON_COLUMNS)]
    for name in ("learner", "random", "buy_and_hold"):
        if name in table:
            stats = table[name]
            lines.append(",".join([name] + [str(v) for v in stats.row()]))
    return "\n".join(lines) + "\n"


def sweep_csv(rows: list[dict], best: float) -> str:
    lines = ["threshold,n_states,mean_eod_pnl_pct,selected"]
    for r in rows:
        sel = "1" if r["threshold"] == best else "0"
        lines.append(f"{r['threshold']},{r['n_states']},"
                     f"{r['mean_eod_pnl_pct']},{sel}")
    return "\n".join(lines) + "\n"
