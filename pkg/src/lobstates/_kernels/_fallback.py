"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
``LOBSTATES_PURE_PYTHON`` is set. Same contracts as ``_native``.
"""

import numpy as np

CS_CLAMP_EPS = 1e-9


def fourier_coeffs(times, deltas, n_coeffs):
    """c(s) = sum_i exp(-i*s*t_i) * delta_i for s = 0..n_coeffs."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    deltas = np.ascontiguousarray(deltas, dtype=np.float64)
    out = np.empty(n_coeffs + 1, dtype=np.complex128)
    out[0] = deltas.sum()
    z = np.exp(-1j * times)
    w = np.ones_like(z)
    for s in range(1, n_coeffs + 1):
        w *= z
        out[s] = w.dot(deltas)
    return out


def _likelihood_row(corr, labels):
    n_lab = labels.max()
    total = 0.0
    for lab in range(1, n_lab + 1):
        members = labels == lab
        ns = float(members.sum())
        if ns <= 1.0:
            continue
        cs = float(corr[np.ix_(members, members)].sum())
        if cs <= ns:
            continue
        cs_clamped = min(cs, ns * ns - CS_CLAMP_EPS)
        total += 0.5 * (np.log(ns / cs)
                        + (ns - 1.0) * np.log((ns * ns - ns)
                                              / (ns * ns - cs_clamped)))
    return total


def likelihood_single(corr, labels):
    """Cluster log-likelihood of one label vector against ``corr``."""
    corr = np.asarray(corr, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    return _likelihood_row(corr, labels)


def likelihood_batch(corr, labels):
    """Cluster log-likelihood of each row of ``labels`` against ``corr``."""
    corr = np.asarray(corr, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    return np.array([_likelihood_row(corr, row) for row in labels])
