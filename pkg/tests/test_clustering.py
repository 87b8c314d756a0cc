import itertools
import math

import numpy as np
import pytest

from lobstates.clustering import ClusterConfiguration, GAParams, \
    NohModelSpec, canonicalize, cluster_stats, estimate_coupling, \
    exhaustive_search, ga_search, iter_partitions, log_likelihood, \
    noh_generate, pearson_correlation


def reference_likelihood(corr, labels):
    """Independent hand oracle: sum the closed form cluster by cluster."""
    total = 0.0
    for lab in set(labels):
        members = [i for i, l in enumerate(labels) if l == lab]
        ns = len(members)
        if ns <= 1:
            continue
        cs = sum(corr[i][j] for i in members for j in members)
        if cs <= ns:
            continue
        cs_c = min(cs, ns * ns - 1e-9)
        total += 0.5 * (math.log(ns / cs)
                        + (ns - 1) * math.log((ns * ns - ns)
                                              / (ns * ns - cs_c)))
    return total


def corr_two(rho):
    return np.array([[1.0, rho], [rho, 1.0]])


def random_corr(rng, n):
    m = rng.uniform(-0.9, 0.9, (n, n))
    m = (m + m.T) / 2
    np.fill_diagonal(m, 1.0)
    return m


def test_canonicalize_examples():
    assert canonicalize([7, 7, 2]).labels == (1, 1, 2)
    assert canonicalize([1, 2, 3]).labels == (1, 2, 3)
    assert canonicalize([3, 1, 3, 1]).labels == (1, 2, 1, 2)


def test_canonicalize_invariant_to_relabelling():
    rng = np.random.default_rng(2)
    for _ in range(50):
        raw = rng.integers(1, 5, size=8)
        perm = rng.permutation(10) + 1
        assert canonicalize(raw).labels == canonicalize(perm[raw]).labels


def test_likelihood_all_singletons_zero():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        corr = random_corr(rng, n)
        assert log_likelihood(corr, list(range(1, n + 1))) == 0.0


def test_likelihood_merged_pair_hand_value():
    value = log_likelihood(corr_two(0.5), [1, 1])
    assert value == pytest.approx(0.5 * math.log(4.0 / 3.0), abs=1e-12)
    assert value == pytest.approx(0.143841, abs=1e-6)


def test_likelihood_guard_boundary():
    assert log_likelihood(corr_two(0.0), [1, 1]) == 0.0


def test_likelihood_permutation_invariant():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        corr = random_corr(rng, n)
        labels = canonicalize(rng.integers(1, n + 1, size=n))
        perm = rng.permutation(n)
        permuted = canonicalize(np.asarray(labels.labels)[perm])
        assert log_likelihood(corr, labels) == pytest.approx(
            log_likelihood(corr[np.ix_(perm, perm)], permuted), abs=1e-12)


def test_likelihood_matches_reference_and_guard_removal():
    rng = np.random.default_rng(8)
    for _ in range(30):
        n = int(rng.integers(2, 9))
        corr = random_corr(rng, n)
        labels = list(canonicalize(rng.integers(1, n + 1, size=n)).labels)
        full = log_likelihood(corr, labels)
        assert full == pytest.approx(reference_likelihood(corr, labels),
                                     abs=1e-12)
        # dropping guarded clusters (c_s <= n_s) leaves the sum unchanged
        kept = full
        for stat in cluster_stats(corr, labels):
            if stat.n_s > 1 and stat.c_s <= stat.n_s:
                sub = [l for l in labels if l != stat.label]
                # removing a guarded cluster's members entirely
                keep_idx = [i for i, l in enumerate(labels)
                            if l != stat.label]
                sub_corr = corr[np.ix_(keep_idx, keep_idx)]
                kept = reference_likelihood(sub_corr.tolist(), sub)
                assert kept == pytest.approx(full, abs=1e-12)


def test_estimate_coupling_examples():
    assert estimate_coupling(2, 3.0) == pytest.approx(math.sqrt(0.5),
                                                      abs=1e-12)
    assert estimate_coupling(2, 4.0) == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(ValueError, match="coupling undefined"):
        estimate_coupling(2, 2.0)


def test_cluster_stats_fields():
    corr = corr_two(0.5)
    stats = cluster_stats(corr, [1, 1])
    assert stats[0].n_s == 2
    assert stats[0].c_s == pytest.approx(3.0)
    assert stats[0].g_hat == pytest.approx(math.sqrt(0.5))
    singleton = cluster_stats(corr, [1, 2])
    assert singleton[0].c_s == 1.0 and singleton[0].g_hat is None


def test_partition_enumeration_counts():
    bell = {1: 1, 2: 2, 3: 5, 4: 15, 5: 52, 6: 203, 7: 877, 8: 4140}
    for n, count in bell.items():
        assert sum(len(b) for b in iter_partitions(n)) == count


def test_exhaustive_merges_strong_pair():
    config, score = exhaustive_search(corr_two(0.9))
    assert config.labels == (1, 1)
    expected = 0.5 * (math.log(2 / 3.8) + math.log(2 / 0.2))
    assert score == pytest.approx(expected, abs=1e-12)
    assert score > 0


def test_exhaustive_tie_breaks_to_more_clusters():
    config, score = exhaustive_search(corr_two(0.0))
    assert config.labels == (1, 2)
    assert score == 0.0


def test_exhaustive_identity_matrix_all_singletons():
    config, score = exhaustive_search(np.eye(3))
    assert config.labels == (1, 2, 3)
    assert score == 0.0


def test_exhaustive_refuses_large_n():
    with pytest.raises(ValueError):
        exhaustive_search(np.eye(11))


def test_exhaustive_agrees_with_brute_force_over_all_partitions():
    rng = np.random.default_rng(10)
    for _ in range(10):
        n = int(rng.integers(2, 7))
        corr = random_corr(rng, n)
        best = max(
            (reference_likelihood(corr, labels)
             for block in iter_partitions(n) for labels in block.tolist()))
        config, score = exhaustive_search(corr)
        assert score == pytest.approx(best, abs=1e-12)


def test_ga_single_object():
    config, score, generations = ga_search(np.eye(1))
    assert config.labels == (1,)
    assert score == 0.0 and generations == 0


def test_ga_recovers_block_structure():
    corr = np.eye(6)
    for i, j in itertools.combinations(range(3), 2):
        corr[i, j] = corr[j, i] = 0.9
        corr[i + 3, j + 3] = corr[j + 3, i + 3] = 0.9
    config, score, _ = ga_search(corr, GAParams(rng_seed=1))
    exact_config, exact_score = exhaustive_search(corr)
    assert config.labels == (1, 1, 1, 2, 2, 2)
    assert score == pytest.approx(exact_score, abs=1e-12)


def test_ga_deterministic_given_seed():
    rng = np.random.default_rng(12)
    corr = random_corr(rng, 7)
    params = GAParams(rng_seed=99)
    assert ga_search(corr, params) == ga_search(corr, params)


def test_ga_best_fitness_monotone():
    rng = np.random.default_rng(14)
    corr = random_corr(rng, 8)
    history: list = []
    ga_search(corr, GAParams(rng_seed=3), history=history)
    assert all(b >= a for a, b in zip(history, history[1:]))


def test_ga_never_exceeds_exhaustive():
    rng = np.random.default_rng(16)
    hits = 0
    for trial in range(20):
        corr = random_corr(rng, 6)
        _, exact = exhaustive_search(corr)
        _, score, _ = ga_search(corr, GAParams(rng_seed=trial))
        assert score <= exact + 1e-12
        hits += score == pytest.approx(exact, abs=1e-12)
    assert hits >= 19


def test_noh_full_coupling_duplicates_members():
    spec = NohModelSpec(canonicalize([1, 1, 2]), (1.0, 1.0), 500, rng_seed=3)
    x = noh_generate(spec)
    assert np.allclose(x[0], x[1])
    assert pearson_correlation(x)[0, 1] == pytest.approx(1.0)


def test_noh_zero_coupling_decorrelates():
    spec = NohModelSpec(canonicalize([1, 1, 1]), (0.0,), 10_000, rng_seed=5)
    x = noh_generate(spec)
    corr = pearson_correlation(x)
    off = corr[np.triu_indices(3, k=1)]
    assert np.all(np.abs(off) <= 0.1)


def test_noh_planted_recovery():
    planted = canonicalize([1, 1, 1, 2, 2, 2])
    spec = NohModelSpec(planted, (0.9, 0.9), 5000, rng_seed=7)
    x = noh_generate(spec)
    config, _ = exhaustive_search(pearson_correlation(x))
    assert config.labels == planted.labels


def test_ga_params_validation():
    with pytest.raises(ValueError):
        GAParams(population_size=3, elite_count=2)
    with pytest.raises(ValueError):
        GAParams(mutation_rate=1.5)
    with pytest.raises(ValueError):
        NohModelSpec(canonicalize([1, 1]), (0.5, 0.5), 100)
