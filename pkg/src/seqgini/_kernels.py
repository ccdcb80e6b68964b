"""Compiled inner loops.

Everything here works on a sorted buffer ``xs[:n]``. The Python layer owns
buffer growth and validation; these functions assume both are done.
"""

import math

import numba as nb
import numpy as np

STAT_MEAN, STAT_VAR, STAT_GMD, STAT_TAU, STAT_SW2, STAT_V2 = range(6)
NSTATS = 6

STOP_NONE, STOP_RULE, STOP_CAP = 0, 1, 2


@nb.njit(cache=True)
def insert_sorted(buf, n, x):
    pos = np.searchsorted(buf[:n], x, side="right")
    for i in range(n, pos, -1):
        buf[i] = buf[i - 1]
    buf[pos] = x


@nb.njit(cache=True)
def sorted_stats(xs, n, out, work):
    """Fill ``out`` with (mean, variance, gmd, tau, s_w^2, raw V^2).

    ``work`` is a (2, >= n) scratch array. Entries that are undefined at
    this n are set to NaN: variance, gmd and tau need n >= 2, s_w^2 and V^2
    need n >= 4.
    """
    for i in range(NSTATS):
        out[i] = np.nan
    if n < 1:
        return
    pw = work[1]

    # Kahan-compensated sum for the mean
    s = 0.0
    comp = 0.0
    for i in range(n):
        y = xs[i] - comp
        t = s + y
        comp = (t - s) - y
        s = t
    mean = s / n
    out[STAT_MEAN] = mean
    if n < 2:
        return

    # Everything below is written in terms of the spacings
    # d_k = x_(k+1) - x_(k) >= 0, so ties contribute exact zeros and no
    # sum can go negative:
    #   sum_{i<j} |x_i - x_j|     = sum_k k (n - k) d_k          (k 1-based)
    #   sum_{i<j} |x_i^2 - x_j^2| = same with squared spacings
    #   R_1 = sum_i |x_(1) - x_i| = sum_k (n - k) d_k
    #   R_{k+1} = R_k + (2k - n) d_k
    n1 = n - 1.0
    ss = 0.0
    g = 0.0
    tt = 0.0
    r0 = 0.0
    for i in range(n):
        d = xs[i] - mean
        ss += d * d
    for k in range(1, n):
        d = xs[k] - xs[k - 1]
        g += k * (n - k) * d
        tt += k * (n - k) * (xs[k] * xs[k] - xs[k - 1] * xs[k - 1])
        r0 += (n - k) * d
    pairs = 0.5 * n * n1
    var = ss / n1
    gmd = g / pairs
    # (x + y)|x - y| = |x^2 - y^2|
    tau = 0.5 * tt / pairs

    # the leave-one-out GMD is (pairs*gmd - R_k) / C(n-1, 2), so the
    # pseudo-value n*gmd - (n-2)*gmd^(k) collapses to 2 R_k / (n - 1)
    r = r0
    wsum = 0.0
    for i in range(n):
        if i > 0:
            r += (2.0 * i - n) * (xs[i] - xs[i - 1])
        pw[i] = 2.0 * r / n1
        wsum += pw[i]
    out[STAT_VAR] = var
    out[STAT_GMD] = gmd
    out[STAT_TAU] = tau
    if n < 4:
        return

    wbar = wsum / n
    sq = 0.0
    for i in range(n):
        d = pw[i] - wbar
        sq += d * d
    sw2 = sq / n1
    out[STAT_SW2] = sw2

    m2 = mean * mean
    out[STAT_V2] = (
        gmd * gmd * var / (4.0 * m2 * m2)
        - gmd * tau / (m2 * mean)
        + gmd * gmd / m2
        + sw2 / (4.0 * m2)
    )


@nb.njit(cache=True)
def advance(buf, n, block, m, scale, gamma, guarded, cap, stats, work, traj, record):
    """Push observations from ``block`` until the stopping rule fires.

    Returns ``(used, status, last_threshold)``. When ``record`` is set,
    ``traj`` must have one row per block element; row ``i`` receives
    (n, V^2, threshold) whenever the rule was evaluated after pushing
    ``block[i]`` and is left untouched otherwise.
    """
    last_thr = np.nan
    for i in range(block.shape[0]):
        insert_sorted(buf, n, block[i])
        n += 1
        if n < m:
            continue
        sorted_stats(buf, n, stats, work)
        v2 = stats[STAT_V2]
        if v2 < 0.0:
            v2 = 0.0
        thr = scale * math.sqrt(v2)
        if guarded:
            thr += scale * n ** (-gamma)
        last_thr = thr
        if record:
            traj[i, 0] = n
            traj[i, 1] = v2
            traj[i, 2] = thr
        if n >= thr:
            return i + 1, STOP_RULE, last_thr
        if n >= cap:
            return i + 1, STOP_CAP, last_thr
    return block.shape[0], STOP_NONE, last_thr
