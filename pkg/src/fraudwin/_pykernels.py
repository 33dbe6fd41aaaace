"""Pure-Python versions of the numeric kernels.

Used when the compiled extension is unavailable or when
``FRAUDWIN_PURE=1`` is set in the environment.
"""

from math import sqrt


def weighted_stats(amounts, lam):
    """Exponentially weighted mean and population std of ``amounts``.

    ``amounts`` is ordered oldest to newest; the newest entry has weight 1,
    the one before it ``lam``, then ``lam**2`` and so on.
    """
    n = len(amounts)
    if n == 0:
        raise ValueError("empty buffer")
    w = 1.0
    wsum = 0.0
    xsum = 0.0
    for i in range(n - 1, -1, -1):
        wsum += w
        xsum += w * amounts[i]
        w *= lam
    mean = xsum / wsum
    w = 1.0
    ssum = 0.0
    for i in range(n - 1, -1, -1):
        d = amounts[i] - mean
        ssum += w * d * d
        w *= lam
    lo = min(amounts)
    hi = max(amounts)
    # rounding can push the mean a hair outside the data range
    if mean < lo:
        mean = lo
    elif mean > hi:
        mean = hi
    return mean, sqrt(ssum / wsum)


def interval_bounds(mean, std, c, rho, a0):
    s_eff = std
    floor = rho * mean + a0
    if floor > s_eff:
        s_eff = floor
    lo = mean - c * s_eff
    if lo < 0.0:
        lo = 0.0
    return lo, mean + c * s_eff
