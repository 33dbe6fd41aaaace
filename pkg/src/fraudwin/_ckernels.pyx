# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels. Same contracts as ``_pykernels``."""

from libc.math cimport sqrt


def weighted_stats(list amounts, double lam):
    cdef Py_ssize_t n = len(amounts)
    cdef Py_ssize_t i
    cdef double w, wsum, xsum, ssum, mean, d, x, lo, hi
    if n == 0:
        raise ValueError("empty buffer")
    w = 1.0
    wsum = 0.0
    xsum = 0.0
    lo = <double>amounts[n - 1]
    hi = lo
    for i in range(n - 1, -1, -1):
        x = <double>amounts[i]
        wsum += w
        xsum += w * x
        w *= lam
        if x < lo:
            lo = x
        if x > hi:
            hi = x
    mean = xsum / wsum
    w = 1.0
    ssum = 0.0
    for i in range(n - 1, -1, -1):
        d = <double>amounts[i] - mean
        ssum += w * d * d
        w *= lam
    if mean < lo:
        mean = lo
    elif mean > hi:
        mean = hi
    return mean, sqrt(ssum / wsum)


def interval_bounds(double mean, double std, double c, double rho, double a0):
    cdef double s_eff = std
    cdef double floor = rho * mean + a0
    cdef double lo
    if floor > s_eff:
        s_eff = floor
    lo = mean - c * s_eff
    if lo < 0.0:
        lo = 0.0
    return lo, mean + c * s_eff
