# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the two hot inner loops: per-series Fourier
coefficient accumulation and batched cluster-likelihood scoring.

Signatures mirror ``_fallback``; the package selects one backend at import.
"""

import numpy as np

from libc.math cimport cos, sin, log


def fourier_coeffs(double[::1] times, double[::1] deltas, int n_coeffs):
    """c(s) = sum_i exp(-i*s*t_i) * delta_i for s = 0..n_coeffs.

    Uses the power recursion exp(-i*s*t) = exp(-i*t)**s, one complex
    multiply per (s, i) instead of a trig call.
    """
    cdef Py_ssize_t n = times.shape[0]
    cdef Py_ssize_t i, s
    out = np.empty(n_coeffs + 1, dtype=np.complex128)
    cdef double complex[::1] c = out
    cdef double[::1] wr = np.empty(n, dtype=np.float64)
    cdef double[::1] wi = np.empty(n, dtype=np.float64)
    cdef double[::1] zr = np.empty(n, dtype=np.float64)
    cdef double[::1] zi = np.empty(n, dtype=np.float64)
    cdef double acc_r, acc_i, tr, d

    acc_r = 0.0
    for i in range(n):
        zr[i] = cos(times[i])
        zi[i] = -sin(times[i])
        wr[i] = 1.0
        wi[i] = 0.0
        acc_r += deltas[i]
    c[0] = acc_r

    for s in range(1, n_coeffs + 1):
        acc_r = 0.0
        acc_i = 0.0
        for i in range(n):
            tr = wr[i] * zr[i] - wi[i] * zi[i]
            wi[i] = wr[i] * zi[i] + wi[i] * zr[i]
            wr[i] = tr
            d = deltas[i]
            acc_r += wr[i] * d
            acc_i += wi[i] * d
        c[s] = acc_r + 1j * acc_i
    return out


cdef double _likelihood_row(double[:, ::1] corr, long[:] labels,
                            double* ns_buf, double* cs_buf,
                            Py_ssize_t n) noexcept:
    cdef Py_ssize_t i, j, k, n_lab
    cdef double cs, ns, total

    n_lab = 0
    for i in range(n):
        if labels[i] > n_lab:
            n_lab = labels[i]
    for k in range(n_lab):
        ns_buf[k] = 0.0
        cs_buf[k] = 0.0
    for i in range(n):
        k = labels[i] - 1
        ns_buf[k] += 1.0
        for j in range(n):
            if labels[j] == labels[i]:
                cs_buf[k] += corr[i, j]

    total = 0.0
    for k in range(n_lab):
        ns = ns_buf[k]
        cs = cs_buf[k]
        if ns > 1.0 and cs > ns:
            if cs > ns * ns - 1e-9:
                total += 0.5 * (log(ns / cs)
                                + (ns - 1.0) * log((ns * ns - ns) / 1e-9))
            else:
                total += 0.5 * (log(ns / cs)
                                + (ns - 1.0) * log((ns * ns - ns)
                                                   / (ns * ns - cs)))
    return total


def likelihood_single(double[:, ::1] corr, long[:] labels):
    """Cluster log-likelihood of one label vector against ``corr``."""
    cdef Py_ssize_t n = corr.shape[0]
    cdef double[::1] ns_buf = np.empty(n, dtype=np.float64)
    cdef double[::1] cs_buf = np.empty(n, dtype=np.float64)
    return _likelihood_row(corr, labels, &ns_buf[0], &cs_buf[0], n)


def likelihood_batch(double[:, ::1] corr, long[:, ::1] labels):
    """Cluster log-likelihood of each row of ``labels`` against ``corr``."""
    cdef Py_ssize_t n = corr.shape[0]
    cdef Py_ssize_t rows = labels.shape[0]
    cdef Py_ssize_t r
    out = np.empty(rows, dtype=np.float64)
    cdef double[::1] scores = out
    cdef double[::1] ns_buf = np.empty(n, dtype=np.float64)
    cdef double[::1] cs_buf = np.empty(n, dtype=np.float64)
    for r in range(rows):
        scores[r] = _likelihood_row(corr, labels[r], &ns_buf[0], &cs_buf[0], n)
    return out
