"""Online state registry and empirical one-step transition counts.

A state is represented by the first cluster configuration that spawned
it. A new configuration joins the nearest state whose representative is
within the discrimination threshold, otherwise it becomes a new state.
Representatives are never updated. Transition counts grow with the
registry; next-state prediction is the row argmax of the counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from lobstates.clustering import ClusterConfiguration
from lobstates.distance import DistanceMode, config_distance

DEFAULT_THRESHOLD = 0.05


@dataclass
class StateEntry:
    state_id: int
    representative: ClusterConfiguration
    first_seen: int
    visits: int
    creation_distances: tuple[float, ...]  # to earlier reps at creation


@dataclass
class StateRegistry:
    """Discovered states in creation order; ids are consecutive from 0."""

    threshold: float = DEFAULT_THRESHOLD
    mode: DistanceMode = DistanceMode.BEST_MATCH
    states: list[StateEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")

    def __len__(self) -> int:
        return len(self.states)


def match_or_create(registry: StateRegistry, config: ClusterConfiguration,
                    window_index: int = 0) -> tuple[int, bool]:
    """Assign ``config`` to the nearest in-threshold state or create one.

    Distance is directional, configuration -> representative. Ties on
    distance resolve to the smallest state id.
    """
    distances = [config_distance(config, s.representative, registry.mode)
                 for s in registry.states]
    if distances:
        best = int(np.argmin(distances))  # argmin takes first == smallest id
        if distances[best] <= registry.threshold:
            registry.states[best].visits += 1
            return best, False
    state_id = len(registry.states)
    registry.states.append(StateEntry(state_id, config, window_index, 1,
                                      tuple(distances)))
    return state_id, True


@dataclass
class TransitionCounts:
    """Square nonnegative count matrix over registered states."""

    counts: np.ndarray = field(
        default_factory=lambda: np.zeros((0, 0), dtype=np.int64))
    last_state: int | None = None

    @property
    def n_states(self) -> int:
        return self.counts.shape[0]


def record_transition(tc: TransitionCounts, to_state: int) -> None:
    """Count the 1-step transition last_state -> to_state, growing the
    matrix as states appear."""
    if to_state >= tc.n_states:
        grown = np.zeros((to_state + 1, to_state + 1), dtype=np.int64)
        grown[:tc.n_states, :tc.n_states] = tc.counts
        tc.counts = grown
    if tc.last_state is not None:
        tc.counts[tc.last_state, to_state] += 1
    tc.last_state = to_state


def predict_next(tc: TransitionCounts, state: int) -> int:
    """Most frequent successor of ``state``; self when the row is empty,
    smallest id on ties."""
    if state >= tc.n_states:
        raise ValueError(f"state {state} not registered")
    row = tc.counts[state]
    if row.sum() == 0:
        return state
    return int(np.argmax(row))


def transition_probabilities(tc: TransitionCounts) -> np.ndarray:
    """Row-normalized counts; rows never visited become uniform."""
    n = tc.n_states
    if n == 0:
        return np.zeros((0, 0))
    probs = np.empty((n, n), dtype=np.float64)
    sums = tc.counts.sum(axis=1)
    for i in range(n):
        if sums[i] == 0:
            probs[i] = 1.0 / n
        else:
            probs[i] = tc.counts[i] / sums[i]
    return probs
