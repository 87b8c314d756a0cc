"""Integrated co-volatility and correlation from asynchronous increments.

The estimator averages, over Fourier modes s = -N..N, the cross products
exp(i*s*(t_i - t_j)) * d_i * d_j of two increment series whose times live
on [0, 2*pi]:

    cov_hat = 1/(2N+1) * sum_{|s|<=N} sum_i sum_j exp(i*s*(t_i - t_j)) d_i d_j

No synchronisation of the two series is required. The production path
accumulates per-series coefficients c(s) = sum_i exp(-i*s*t_i) d_i and
combines conj(c_a) * c_b, using conjugate symmetry so only s >= 0 is
evaluated; the literal double sum is retained as a cross-check oracle.
Pairwise correlation follows as cov_hat / sqrt(var_a * var_b) with both
variances computed at the same N as the pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lobstates import _kernels
from lobstates.market_data import FeatureIncrementSeries


@dataclass(frozen=True)
class CoefficientPolicy:
    """How many Fourier modes to use per pair.

    nyquist: N = max(1, floor(min(n_a - 1, n_b - 1) / 2)) with n the sample
    counts, i.e. half the sparser series' increment count. fixed: always
    fixed_n.
    """

    mode: str = "nyquist"  # "nyquist" | "fixed"
    fixed_n: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("nyquist", "fixed"):
            raise ValueError(f"unknown coefficient mode {self.mode!r}")
        if self.mode == "fixed" and (self.fixed_n is None or self.fixed_n < 1):
            raise ValueError("fixed mode requires fixed_n >= 1")


@dataclass
class CovolatilityEstimate:
    """Pairwise co-volatility matrix with the per-pair mode counts used."""

    sigma: np.ndarray  # (n, n) float
    n_used: np.ndarray  # (n, n) int
    degenerate: np.ndarray  # (n,) bool


@dataclass
class CorrelationMatrix:
    """Symmetric unit-diagonal correlation matrix over the features.

    Degenerate features (fewer than two increments, or zero variance at
    the evaluated resolution) carry zero off-diagonal correlation and a
    flag; out-of-range estimates are clamped into [-1, 1] and counted.
    """

    rho: np.ndarray
    degenerate: np.ndarray
    clamp_count: int = 0


def choose_coefficients(n_a: int, n_b: int,
                        policy: CoefficientPolicy | None = None) -> int:
    """Mode count for one pair given the two sample counts."""
    if policy is None:
        policy = CoefficientPolicy()
    if n_a < 2 or n_b < 2:
        raise ValueError("need at least 2 samples per series")
    if policy.mode == "fixed":
        return int(policy.fixed_n)
    return max(1, min(n_a - 1, n_b - 1) // 2)


def _pair_sums(coeffs_a: np.ndarray, coeffs_b: np.ndarray, n_modes: int) -> float:
    # s=0 term once, s=1..N doubled via conjugate symmetry; exactly real.
    head = (coeffs_a[0].real * coeffs_b[0].real)
    tail = np.real(np.conj(coeffs_a[1:]) * coeffs_b[1:]).sum()
    return (head + 2.0 * tail) / (2 * n_modes + 1)


def covolatility_pair(a: FeatureIncrementSeries, b: FeatureIncrementSeries,
                      n_modes: int) -> float:
    """Integrated co-volatility of two increment series at N = n_modes."""
    if a.degenerate or b.degenerate:
        raise ValueError("insufficient samples: degenerate increment series")
    ca = _kernels.fourier_coeffs(a.rescaled_times, a.increments, n_modes)
    cb = _kernels.fourier_coeffs(b.rescaled_times, b.increments, n_modes)
    return _pair_sums(ca, cb, n_modes)


def covolatility_pair_literal(a: FeatureIncrementSeries,
                              b: FeatureIncrementSeries,
                              n_modes: int) -> float:
    """Direct triple-sum evaluation; cross-check oracle for the
    coefficient path (O(N * n_a * n_b), test sizes only)."""
    if a.degenerate or b.degenerate:
        raise ValueError("insufficient samples: degenerate increment series")
    dt = np.subtract.outer(a.rescaled_times, b.rescaled_times)
    dd = np.outer(a.increments, b.increments)
    total = 0.0
    for s in range(-n_modes, n_modes + 1):
        total += float(np.real(np.exp(1j * s * dt) * dd).sum())
    return total / (2 * n_modes + 1)


def covolatility_matrix(series: tuple[FeatureIncrementSeries, ...],
                        policy: CoefficientPolicy | None = None,
                        ) -> CovolatilityEstimate:
    """Pairwise co-volatility at per-pair N; diagonals at each feature's
    own N."""
    if policy is None:
        policy = CoefficientPolicy()
    n = len(series)
    sigma = np.zeros((n, n))
    n_used = np.zeros((n, n), dtype=np.int64)
    degenerate = np.array([s.degenerate for s in series])
    for k in range(n):
        if degenerate[k]:
            continue
        nk = choose_coefficients(series[k].sample_count,
                                 series[k].sample_count, policy)
        n_used[k, k] = nk
        sigma[k, k] = covolatility_pair(series[k], series[k], nk)
    for k in range(n):
        for l in range(k + 1, n):
            if degenerate[k] or degenerate[l]:
                continue
            nkl = choose_coefficients(series[k].sample_count,
                                      series[l].sample_count, policy)
            n_used[k, l] = n_used[l, k] = nkl
            cov = covolatility_pair(series[k], series[l], nkl)
            sigma[k, l] = sigma[l, k] = cov
    return CovolatilityEstimate(sigma, n_used, degenerate)


def correlation_matrix(series: tuple[FeatureIncrementSeries, ...],
                       policy: CoefficientPolicy | None = None,
                       ) -> CorrelationMatrix:
    """Pairwise correlations; each pair's variances are recomputed at that
    pair's N so numerator and denominator share a resolution."""
    if policy is None:
        policy = CoefficientPolicy()
    n = len(series)
    if n < 2:
        raise ValueError("need at least two series")
    rho = np.eye(n)
    degenerate = np.array([s.degenerate for s in series])
    clamps = 0

    coeff_cache: dict[tuple[int, int], np.ndarray] = {}

    def coeffs(idx: int, n_modes: int) -> np.ndarray:
        key = (idx, n_modes)
        if key not in coeff_cache:
            coeff_cache[key] = _kernels.fourier_coeffs(
                series[idx].rescaled_times, series[idx].increments, n_modes)
        return coeff_cache[key]

    for k in range(n):
        for l in range(k + 1, n):
            if degenerate[k] or degenerate[l]:
                continue
            nkl = choose_coefficients(series[k].sample_count,
                                      series[l].sample_count, policy)
            ck, cl = coeffs(k, nkl), coeffs(l, nkl)
            var_k = _pair_sums(ck, ck, nkl)
            var_l = _pair_sums(cl, cl, nkl)
            if var_k <= 0.0:
                degenerate[k] = True
            if var_l <= 0.0:
                degenerate[l] = True
            if var_k <= 0.0 or var_l <= 0.0:
                continue
            value = _pair_sums(ck, cl, nkl) / np.sqrt(var_k * var_l)
            if value > 1.0 or value < -1.0:
                clamps += 1
                value = float(np.clip(value, -1.0, 1.0))
            rho[k, l] = rho[l, k] = value

    rho[degenerate, :] = 0.0
    rho[:, degenerate] = 0.0
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(rho, degenerate, clamps)
