"""Flat key-value run configuration with strict validation.

Documents every tunable with its default; unknown keys and out-of-range
values are fatal so typos never pass silently. The resolved mapping is
embedded into every report, and re-parsing that echo yields the same
resolved configuration.
"""

from __future__ import annotations

import yaml

from lobstates.agent import LearningParams
from lobstates.backtest import MINUTE_US, RunConfig
from lobstates.clustering import GAParams
from lobstates.distance import DistanceMode
from lobstates.errors import ConfigError
from lobstates.fourier import CoefficientPolicy


def _clock_us(text: str) -> int:
    try:
        hh, mm = text.split(":")
        hh, mm = int(hh), int(mm)
    except (ValueError, AttributeError):
        raise ConfigError(f"bad clock time {text!r}, expected HH:MM") from None
    if not (0 <= hh < 24 and 0 <= mm < 60):
        raise ConfigError(f"bad clock time {text!r}")
    return (hh * 3600 + mm * 60) * 1_000_000


def _us_clock(us: int) -> str:
    minutes = (us // MINUTE_US) % (24 * 60)
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


# key -> (default, type, constraint description, predicate)
_SCHEMA: dict[str, tuple] = {
    "cash": (100_000.0, float, ">= 0", lambda v: v >= 0),
    "inventory": (800, int, ">= 0", lambda v: v >= 0),
    "session_start": ("09:05", str, "HH:MM", lambda v: True),
    "session_end": ("16:30", str, "HH:MM", lambda v: True),
    "period_minutes": (5, int, ">= 1", lambda v: v >= 1),
    "init_periods": (5, int, ">= 0", lambda v: v >= 0),
    "threshold": (0.05, float, ">= 0", lambda v: v >= 0),
    "distance_mode": ("best_match", str, "best_match|index_paired",
                      lambda v: v in ("best_match", "index_paired")),
    "coefficients": ("nyquist", str, "nyquist|fixed",
                     lambda v: v in ("nyquist", "fixed")),
    "fixed_n": (None, int, ">= 1 or null", lambda v: v is None or v >= 1),
    "cluster_engine": ("exhaustive", str, "exhaustive|ga",
                       lambda v: v in ("exhaustive", "ga")),
    "exhaustive_limit": (10, int, "1..12", lambda v: 1 <= v <= 12),
    "population_size": (64, int, ">= 3", lambda v: v >= 3),
    "max_generations": (200, int, ">= 1", lambda v: v >= 1),
    "stagnation_limit": (50, int, ">= 1", lambda v: v >= 1),
    "mutation_rate": (None, float, "[0, 1] or null (1/n)",
                      lambda v: v is None or 0 <= v <= 1),
    "tournament_size": (3, int, ">= 1", lambda v: v >= 1),
    "elite_count": (2, int, ">= 1", lambda v: v >= 1),
    "ga_seed": (0, int, "any", lambda v: True),
    "epsilon": (0.05, float, "[0, 1]", lambda v: 0 <= v <= 1),
    "gamma": (0.9, float, "[0, 1)", lambda v: 0 <= v < 1),
    "alpha0": (0.5, float, "(0, 1]", lambda v: 0 < v <= 1),
    "reward_mode": ("cumulative", str, "cumulative|incremental",
                    lambda v: v in ("cumulative", "incremental")),
    "agent": ("learner", str, "learner|random|buy_and_hold",
              lambda v: v in ("learner", "random", "buy_and_hold")),
    "seed": (0, int, "any", lambda v: True),
}


def parse_config(text: str | None) -> dict:
    """Parse a flat YAML document into the fully resolved mapping."""
    raw = {}
    if text:
        loaded = yaml.safe_load(text)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a flat key-value document")
        raw = loaded

    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    resolved = {}
    for key, (default, typ, desc, pred) in _SCHEMA.items():
        value = raw.get(key, default)
        if value is not None:
            if typ is float and isinstance(value, int) \
                    and not isinstance(value, bool):
                value = float(value)
            if not isinstance(value, typ) or isinstance(value, bool):
                raise ConfigError(
                    f"config key {key!r}: expected {typ.__name__}, "
                    f"got {value!r}")
            if not pred(value):
                raise ConfigError(f"config key {key!r}: must be {desc}, "
                                  f"got {value!r}")
        resolved[key] = value

    if resolved["coefficients"] == "fixed" and resolved["fixed_n"] is None:
        raise ConfigError("config key 'fixed_n': required when "
                          "coefficients is fixed")
    if resolved["population_size"] < resolved["elite_count"] + 2:
        raise ConfigError("config key 'population_size': must exceed "
                          "elite_count by at least 2")
    # validate clock fields eagerly so errors carry the key name
    for key in ("session_start", "session_end"):
        _clock_us(resolved[key])
    if _clock_us(resolved["session_start"]) >= _clock_us(
            resolved["session_end"]):
        raise ConfigError("config key 'session_start': must precede "
                          "session_end")
    return resolved


def run_config_from(resolved: dict, seed: int | None = None) -> RunConfig:
    """Materialize a RunConfig from the resolved mapping; ``seed``
    overrides the document's seed."""
    policy = CoefficientPolicy(resolved["coefficients"], resolved["fixed_n"])
    ga = GAParams(population_size=resolved["population_size"],
                  max_generations=resolved["max_generations"],
                  stagnation_limit=resolved["stagnation_limit"],
                  mutation_rate=resolved["mutation_rate"],
                  tournament_size=resolved["tournament_size"],
                  elite_count=resolved["elite_count"],
                  rng_seed=resolved["ga_seed"])
    learning = LearningParams(epsilon=resolved["epsilon"],
                              gamma=resolved["gamma"],
                              alpha0=resolved["alpha0"],
                              reward_mode=resolved["reward_mode"])
    return RunConfig(
        initial_cash=resolved["cash"],
        initial_inventory=resolved["inventory"],
        session_start_us=_clock_us(resolved["session_start"]),
        session_end_us=_clock_us(resolved["session_end"]),
        period_us=resolved["period_minutes"] * MINUTE_US,
        init_periods=resolved["init_periods"],
        threshold=resolved["threshold"],
        distance_mode=DistanceMode(resolved["distance_mode"]),
        coefficient_policy=policy,
        cluster_engine=resolved["cluster_engine"],
        exhaustive_limit=resolved["exhaustive_limit"],
        ga_params=ga,
        learning=learning,
        agent=resolved["agent"],
        seed=resolved["seed"] if seed is None else seed,
    )
