"""Online, unsupervised market-state discovery from streaming asynchronous
limit-order-book features, driving a long-only Q-learning agent through a
tick-replay backtest.

Pipeline per decision window: asynchronous tick events -> per-feature
log-increment series -> Fourier correlation matrix -> maximum-likelihood
feature cluster configuration -> state registry match -> transition counts
-> epsilon-greedy action + Q-update.
"""

from lobstates._kernels import BACKEND as KERNEL_BACKEND
from lobstates.backtest import RunConfig, compare_agents, run_day, \
    summarize, sweep_threshold
from lobstates.clustering import ClusterConfiguration, GAParams, \
    NohModelSpec, canonicalize, exhaustive_search, ga_search, \
    log_likelihood, noh_generate
from lobstates.distance import DistanceMode, config_distance, set_distance
from lobstates.fourier import CoefficientPolicy, correlation_matrix, \
    covolatility_pair
from lobstates.market_data import Feature, TickEvent, WindowSpec, \
    extract_features, ingest_events, to_increments

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "__version__",
    "RunConfig", "run_day", "compare_agents", "summarize", "sweep_threshold",
    "ClusterConfiguration", "GAParams", "NohModelSpec", "canonicalize",
    "exhaustive_search", "ga_search", "log_likelihood", "noh_generate",
    "DistanceMode", "config_distance", "set_distance",
    "CoefficientPolicy", "correlation_matrix", "covolatility_pair",
    "Feature", "TickEvent", "WindowSpec", "extract_features",
    "ingest_events", "to_increments",
]
