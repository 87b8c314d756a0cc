"""Maximum-likelihood cluster configurations over a correlation matrix.

A configuration assigns each of n objects a cluster label. Its score is

    L = 1/2 * sum over clusters with n_s > 1 and c_s > n_s of
        [ ln(n_s / c_s) + (n_s - 1) * ln((n_s^2 - n_s) / (n_s^2 - c_s)) ]

where n_s is the member count and c_s the intra-cluster correlation sum
including diagonal terms (a singleton has c_s = 1). Clusters whose c_s
does not exceed n_s have no admissible positive coupling and contribute
zero; c_s is clamped just below n_s^2 so perfectly correlated clusters
score finite. The maximizer is found exactly for small n by enumerating
set partitions as restricted-growth strings, or by a seeded genetic
algorithm over label vectors. A factor-model generator produces synthetic
increments with planted cluster structure for validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lobstates import _kernels

CS_CLAMP_EPS = 1e-9
EXHAUSTIVE_DEFAULT_LIMIT = 10
EXHAUSTIVE_HARD_LIMIT = 12


@dataclass(frozen=True)
class ClusterConfiguration:
    """Canonical assignment of objects to clusters.

    Labels are positive integers in order of first appearance: the first
    object is labelled 1 and each new cluster takes the next integer.
    """

    labels: tuple[int, ...]

    @property
    def n_objects(self) -> int:
        return len(self.labels)

    @property
    def n_clusters(self) -> int:
        return max(self.labels)

    def member_sets(self) -> dict[int, frozenset[int]]:
        """Cluster label -> zero-based member indices."""
        out: dict[int, set[int]] = {}
        for i, lab in enumerate(self.labels):
            out.setdefault(lab, set()).add(i)
        return {k: frozenset(v) for k, v in out.items()}


@dataclass
class ClusterStats:
    """Per-cluster size, intra-cluster correlation sum and coupling."""

    label: int
    n_s: int
    c_s: float
    g_hat: float | None


@dataclass(frozen=True)
class GAParams:
    """Genetic-search controls; defaults sized for 6-8 objects well inside
    a 0.8 s per-search budget."""

    population_size: int = 64
    max_generations: int = 200
    stagnation_limit: int = 50
    mutation_rate: float | None = None  # None -> 1/n per gene
    tournament_size: int = 3
    elite_count: int = 2
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < self.elite_count + 2:
            raise ValueError("population must exceed elite count by >= 2")
        for name in ("population_size", "max_generations",
                     "stagnation_limit", "tournament_size", "elite_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.mutation_rate is not None and not 0 <= self.mutation_rate <= 1:
            raise ValueError("mutation_rate must lie in [0, 1]")


@dataclass(frozen=True)
class NohModelSpec:
    """Planted factor model: members of a cluster share a common Gaussian
    component with weight g_s, plus sqrt(1 - g_s^2) idiosyncratic noise."""

    labels: ClusterConfiguration
    couplings: tuple[float, ...]  # one per planted cluster, in [0, 1]
    series_length: int
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if len(self.couplings) != self.labels.n_clusters:
            raise ValueError("need one coupling per planted cluster")
        if any(not 0.0 <= g <= 1.0 for g in self.couplings):
            raise ValueError("couplings must lie in [0, 1]")
        if self.series_length < 1:
            raise ValueError("series_length must be positive")


def canonicalize(raw_labels) -> ClusterConfiguration:
    """Relabel by first appearance, preserving the partition."""
    raw = list(raw_labels)
    if not raw:
        raise ValueError("labels must be nonempty")
    mapping: dict[int, int] = {}
    out = []
    for lab in raw:
        if lab not in mapping:
            mapping[lab] = len(mapping) + 1
        out.append(mapping[lab])
    return ClusterConfiguration(tuple(out))


def _canonicalize_rows(rows: np.ndarray) -> np.ndarray:
    """Row-wise first-appearance relabelling of an int label matrix."""
    out = np.empty_like(rows)
    for r in range(rows.shape[0]):
        mapping: dict[int, int] = {}
        row = rows[r]
        for i in range(rows.shape[1]):
            lab = int(row[i])
            if lab not in mapping:
                mapping[lab] = len(mapping) + 1
            out[r, i] = mapping[lab]
    return out


def _as_label_array(config: ClusterConfiguration | list | tuple | np.ndarray
                    ) -> np.ndarray:
    if isinstance(config, ClusterConfiguration):
        return np.asarray(config.labels, dtype=np.int64)
    return np.asarray(config, dtype=np.int64)


def log_likelihood(corr: np.ndarray, config) -> float:
    """Configuration log-likelihood against a correlation matrix."""
    labels = _as_label_array(config)
    corr = np.ascontiguousarray(corr, dtype=np.float64)
    if corr.shape[0] != corr.shape[1] or corr.shape[0] != len(labels):
        raise ValueError("matrix and labels disagree on object count")
    return float(_kernels.likelihood_single(corr, labels))


def cluster_stats(corr: np.ndarray, config) -> list[ClusterStats]:
    """Size, intra-cluster correlation sum and coupling per cluster."""
    labels = _as_label_array(config)
    corr = np.asarray(corr, dtype=np.float64)
    stats = []
    for lab in range(1, int(labels.max()) + 1):
        members = labels == lab
        n_s = int(members.sum())
        c_s = float(corr[np.ix_(members, members)].sum())
        g_hat = None
        if n_s > 1 and c_s > n_s:
            g_hat = estimate_coupling(n_s, c_s)
        stats.append(ClusterStats(lab, n_s, c_s, g_hat))
    return stats


def estimate_coupling(n_s: int, c_s: float) -> float:
    """Invert the factor-model moment: g_hat = sqrt((c_s - n_s) /
    (n_s^2 - n_s))."""
    if n_s <= 1 or c_s <= n_s:
        raise ValueError("coupling undefined: needs n_s > 1 and c_s > n_s")
    c_s = min(c_s, n_s * n_s - CS_CLAMP_EPS)
    return math.sqrt((c_s - n_s) / (n_s * n_s - n_s))


def iter_partitions(n: int, chunk: int = 65536):
    """Yield all set partitions of n objects as canonical label matrices.

    Restricted-growth strings in lexicographic order, emitted in chunks of
    at most ``chunk`` rows (int64, labels 1-based).
    """
    a = np.zeros(n, dtype=np.int64)  # current RGS, 0-based
    b = np.zeros(n, dtype=np.int64)  # b[i] = max(a[:i]) for i >= 1
    buf = np.empty((chunk, n), dtype=np.int64)
    fill = 0
    while True:
        buf[fill] = a + 1
        fill += 1
        if fill == chunk:
            yield buf[:fill].copy()
            fill = 0
        # advance to the next RGS
        i = n - 1
        while i > 0 and a[i] == b[i] + 1:
            i -= 1
        if i == 0:
            break
        a[i] += 1
        for j in range(i + 1, n):
            b[j] = max(b[i], a[i])
            a[j] = 0
    if fill:
        yield buf[:fill].copy()


def _better(score_a: float, labels_a: np.ndarray,
            score_b: float, labels_b: np.ndarray) -> bool:
    """Composite ordering: likelihood, then more clusters, then
    lexicographically smaller canonical labels."""
    if score_a != score_b:
        return score_a > score_b
    ka, kb = int(labels_a.max()), int(labels_b.max())
    if ka != kb:
        return ka > kb
    return tuple(labels_a) < tuple(labels_b)


def exhaustive_search(corr: np.ndarray,
                      limit: int = EXHAUSTIVE_DEFAULT_LIMIT,
                      ) -> tuple[ClusterConfiguration, float]:
    """Exact maximum-likelihood configuration by enumerating all set
    partitions; refuses above ``limit`` objects (hard ceiling 12)."""
    corr = np.ascontiguousarray(corr, dtype=np.float64)
    n = corr.shape[0]
    if n > min(limit, EXHAUSTIVE_HARD_LIMIT):
        raise ValueError(
            f"exhaustive search limited to {min(limit, EXHAUSTIVE_HARD_LIMIT)}"
            f" objects, got {n}")
    best_score = -np.inf
    best_labels: np.ndarray | None = None
    for block in iter_partitions(n):
        scores = _kernels.likelihood_batch(corr, block)
        # fast path: only contend with rows at or above the block max
        m = float(scores.max())
        if m < best_score:
            continue
        for idx in np.nonzero(scores >= min(m, best_score))[0]:
            s = float(scores[idx])
            if best_labels is None or _better(s, block[idx],
                                              best_score, best_labels):
                best_score = s
                best_labels = block[idx].copy()
    return ClusterConfiguration(tuple(int(x) for x in best_labels)), best_score


def ga_search(corr: np.ndarray, params: GAParams | None = None,
              history: list | None = None,
              ) -> tuple[ClusterConfiguration, float, int]:
    """Genetic search over label vectors.

    Chromosomes are canonicalized after every variation; tournament
    selection, uniform crossover, per-gene uniform relabel mutation and
    elitism. Stops at max_generations or after stagnation_limit
    generations without improvement. Deterministic given rng_seed. When a
    list is passed as ``history`` it receives the best-so-far likelihood
    after every generation.
    """
    if params is None:
        params = GAParams()
    corr = np.ascontiguousarray(corr, dtype=np.float64)
    n = corr.shape[0]
    if n == 1:
        return ClusterConfiguration((1,)), 0.0, 0

    rng = np.random.default_rng(params.rng_seed)
    pop_size = params.population_size
    mut_rate = params.mutation_rate if params.mutation_rate is not None \
        else 1.0 / n

    pop = np.empty((pop_size, n), dtype=np.int64)
    pop[0] = np.arange(1, n + 1)  # all singletons
    pop[1] = 1                    # single cluster
    pop[2:] = rng.integers(1, n + 1, size=(pop_size - 2, n))
    pop = _canonicalize_rows(pop)

    scores = _kernels.likelihood_batch(corr, pop)
    best_idx = int(np.argmax(scores))
    best_labels = pop[best_idx].copy()
    best_score = float(scores[best_idx])
    for idx in range(pop_size):
        if _better(float(scores[idx]), pop[idx], best_score, best_labels):
            best_score = float(scores[idx])
            best_labels = pop[idx].copy()

    generations = 0
    stagnant = 0
    n_children = pop_size - params.elite_count
    while generations < params.max_generations and \
            stagnant < params.stagnation_limit:
        generations += 1
        # elites: stable sort on score descending keeps ties deterministic
        elite_order = np.argsort(-scores, kind="stable")[:params.elite_count]
        elites = pop[elite_order]

        entrants = rng.integers(0, pop_size,
                                size=(n_children, 2, params.tournament_size))
        picked = np.take(scores, entrants)
        winners = np.take_along_axis(
            entrants, np.argmax(picked, axis=2)[..., None], axis=2)[..., 0]
        mothers = pop[winners[:, 0]]
        fathers = pop[winners[:, 1]]

        cross = rng.random((n_children, n)) < 0.5
        children = np.where(cross, mothers, fathers)

        mutate = rng.random((n_children, n)) < mut_rate
        random_genes = rng.integers(1, n + 1, size=(n_children, n))
        children = np.where(mutate, random_genes, children)
        children = _canonicalize_rows(children)

        pop = np.vstack([elites, children])
        scores = np.concatenate([_kernels.likelihood_batch(corr, elites),
                                 _kernels.likelihood_batch(corr, children)])

        improved = False
        for idx in range(pop_size):
            if _better(float(scores[idx]), pop[idx], best_score, best_labels):
                best_score = float(scores[idx])
                best_labels = pop[idx].copy()
                improved = True
        stagnant = 0 if improved else stagnant + 1
        if history is not None:
            history.append(best_score)

    config = ClusterConfiguration(tuple(int(x) for x in best_labels))
    return config, best_score, generations


def noh_generate(spec: NohModelSpec) -> np.ndarray:
    """Planted-model increments, shape (n_objects, series_length).

    Object i at step t gets g_s * eta_s(t) + sqrt(1 - g_s^2) * eps_i(t)
    with unit-variance Gaussian cluster factors eta and idiosyncratic eps.
    """
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.labels.n_objects
    k = spec.labels.n_clusters
    t_len = spec.series_length
    eta = rng.standard_normal((k, t_len))
    eps = rng.standard_normal((n, t_len))
    g = np.asarray(spec.couplings)[np.asarray(spec.labels.labels) - 1]
    common = eta[np.asarray(spec.labels.labels) - 1]
    return g[:, None] * common + np.sqrt(1.0 - g[:, None] ** 2) * eps


def pearson_correlation(increments: np.ndarray) -> np.ndarray:
    """Sample-correlation oracle for synchronous synthetic increments."""
    return np.corrcoef(increments)
