"""Long-only portfolio, action set and tabular Q-learning over a growing
state space.

Actions are buy fractions {0.0..1.0} of available cash (fraction 0 is
hold) and sell fractions {0.1..1.0} of inventory, 21 in total. Buys fill
at the best ask, sells at the best bid, so the spread is the transaction
cost; share counts floor to integers, which keeps cash and inventory
nonnegative by construction. The default reward is cumulative portfolio
PnL (mark-to-market value minus initial value); an incremental
value-difference mode is available behind a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

N_ACTIONS = 21


@dataclass(frozen=True)
class ActionSpec:
    kind: str  # "buy" | "sell"
    fraction: float


def build_action_set() -> tuple[ActionSpec, ...]:
    """Indices 0-10: buy 0.0..1.0; indices 11-20: sell 0.1..1.0."""
    buys = tuple(ActionSpec("buy", round(i / 10, 1)) for i in range(11))
    sells = tuple(ActionSpec("sell", round(i / 10, 1)) for i in range(1, 11))
    return buys + sells


ACTIONS = build_action_set()


@dataclass
class PortfolioState:
    """Cash and integer share inventory; never negative (long-only)."""

    cash: float
    inventory: int
    initial_value: float | None = None  # fixed at the first marked mid

    def value(self, mid: float) -> float:
        return self.inventory * mid + self.cash


@dataclass(frozen=True)
class LearningParams:
    epsilon: float = 0.05
    gamma: float = 0.9
    alpha0: float = 0.5
    reward_mode: str = "cumulative"  # "cumulative" | "incremental"
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 < self.alpha0 <= 1.0:
            raise ValueError("alpha0 must lie in (0, 1]")
        if self.reward_mode not in ("cumulative", "incremental"):
            raise ValueError(f"unknown reward mode {self.reward_mode!r}")


@dataclass
class QTable:
    """State x action values with per-cell visit counts; rows appended as
    states are discovered."""

    values: np.ndarray = field(
        default_factory=lambda: np.zeros((0, N_ACTIONS)))
    visit_counts: np.ndarray = field(
        default_factory=lambda: np.zeros((0, N_ACTIONS), dtype=np.int64))

    @property
    def n_states(self) -> int:
        return self.values.shape[0]


def grow(q: QTable, new_state_count: int) -> None:
    """Append zero rows up to ``new_state_count`` states."""
    if new_state_count < q.n_states:
        raise ValueError("Q-table cannot shrink")
    if new_state_count == q.n_states:
        return
    extra = new_state_count - q.n_states
    q.values = np.vstack([q.values, np.zeros((extra, N_ACTIONS))])
    q.visit_counts = np.vstack(
        [q.visit_counts, np.zeros((extra, N_ACTIONS), dtype=np.int64)])


def select_action(q: QTable, state: int, params: LearningParams,
                  rng: np.random.Generator) -> int:
    """Epsilon-greedy over the state's row; greedy ties take the smallest
    index."""
    if rng.random() < params.epsilon:
        return int(rng.integers(0, N_ACTIONS))
    return int(np.argmax(q.values[state]))


def execute(p: PortfolioState, action: ActionSpec, bid: float, ask: float,
            ) -> tuple[int, float]:
    """Apply the action at the prevailing quote; returns (filled shares,
    fill price). Buys spend floor(fraction * cash / ask) shares of cash at
    the ask; sells move floor(fraction * inventory) shares at the bid."""
    if not (0 < bid < ask):
        raise ValueError("need positive bid < ask")
    if action.kind == "buy":
        shares = math.floor(action.fraction * p.cash / ask)
        if shares <= 0:
            return 0, ask
        p.cash -= shares * ask
        p.inventory += shares
        return shares, ask
    shares = math.floor(action.fraction * p.inventory)
    if shares <= 0:
        return 0, bid
    p.inventory -= shares
    p.cash += shares * bid
    return shares, bid


def reward(p: PortfolioState, mid: float, prev_value: float,
           mode: str = "cumulative") -> tuple[float, float]:
    """(reward, current value): cumulative rewards measure value against
    the initial portfolio value, incremental against the previous one."""
    value = p.value(mid)
    if mode == "cumulative":
        if p.initial_value is None:
            raise ValueError("initial value not yet fixed")
        return value - p.initial_value, value
    return value - prev_value, value


def learning_rate(visits: int, alpha0: float) -> float:
    """Per state-action step size alpha0 / (1 + visits), decreasing."""
    if visits < 0:
        raise ValueError("visit count must be >= 0")
    return alpha0 / (1.0 + visits)


def q_update(q: QTable, state: int, action: int, r: float, next_state: int,
             params: LearningParams) -> None:
    """One tabular update: Q += alpha * (r + gamma * max_b Q(next, b) - Q),
    with alpha from the pre-update visit count of (state, action)."""
    alpha = learning_rate(int(q.visit_counts[state, action]), params.alpha0)
    target = r + params.gamma * float(np.max(q.values[next_state]))
    q.values[state, action] += alpha * (target - q.values[state, action])
    q.visit_counts[state, action] += 1
