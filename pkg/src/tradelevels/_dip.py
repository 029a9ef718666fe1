"""Dip statistic kernel.

Maximum deviation between the empirical CDF of a sorted sample and the
closest unimodal CDF, computed with the greatest-convex-minorant /
least-concave-majorant sweep.  The kernel assumes sorted input with at
least 4 points and x[0] < x[-1]; the public wrapper lives in
``tradelevels.modality``.

Compiled with numba when available; the pure-python body is the fallback
and performs the same arithmetic in the same order.
"""
from __future__ import annotations

import numpy as np


def _dip_sorted(x: np.ndarray) -> float:  # pragma: no cover - exercised via modality
    n = x.shape[0]
    low = 0
    high = n - 1
    best = 0.0  # running max of 2n * dip

    # Pooling predecessors for the greatest convex minorant.
    mn = np.empty(n, np.int64)
    mn[0] = 0
    for j in range(1, n):
        mn[j] = j - 1
        while True:
            mnj = mn[j]
            mnmnj = mn[mnj]
            if mnj == 0 or ((x[j] - x[mnj]) * (mnj - mnmnj)
                            < (x[mnj] - x[mnmnj]) * (j - mnj)):
                break
            mn[j] = mnmnj

    # Pooling successors for the least concave majorant.
    mj = np.empty(n, np.int64)
    mj[n - 1] = n - 1
    for k in range(n - 2, -1, -1):
        mj[k] = k + 1
        while True:
            mjk = mj[k]
            mjmjk = mj[mjk]
            if mjk == n - 1 or ((x[k] - x[mjk]) * (mjk - mjmjk)
                                < (x[mjk] - x[mjmjk]) * (k - mjk)):
                break
            mj[k] = mjmjk

    gcm = np.empty(n, np.int64)
    lcm = np.empty(n, np.int64)
    while True:
        gcm[0] = high
        i = 0
        while gcm[i] > low:
            gcm[i + 1] = mn[gcm[i]]
            i += 1
        ig = i
        l_gcm = i
        ix = i - 1

        lcm[0] = low
        i = 0
        while lcm[i] < high:
            lcm[i + 1] = mj[lcm[i]]
            i += 1
        ih = i
        l_lcm = i
        iv = 1

        # Largest ECDF deviation between the current minorant and majorant.
        d = 0.0
        if l_gcm != 1 or l_lcm != 1:
            while True:
                gcm_ix = gcm[ix]
                lcm_iv = lcm[iv]
                if gcm_ix > lcm_iv:
                    gcm_il = gcm[ix + 1]
                    dx = ((lcm_iv - gcm_il + 1)
                          - (x[lcm_iv] - x[gcm_il]) * (gcm_ix - gcm_il)
                          / (x[gcm_ix] - x[gcm_il]))
                    iv += 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv - 1
                else:
                    lcm_ivl = lcm[iv - 1]
                    dx = ((x[gcm_ix] - x[lcm_ivl]) * (lcm_iv - lcm_ivl)
                          / (x[lcm_iv] - x[lcm_ivl])
                          - (gcm_ix - lcm_ivl - 1))
                    ix -= 1
                    if dx >= d:
                        d = dx
                        ig = ix + 1
                        ih = iv
                if ix < 0:
                    ix = 0
                if iv > l_lcm:
                    iv = l_lcm
                if gcm[ix] == lcm[iv]:
                    break
        if d < best:
            break

        # Deviations inside the minorant sections...
        dip_l = 0.0
        for j in range(ig, l_gcm):
            max_t = 1.0
            jb = gcm[j + 1]
            je = gcm[j]
            if je - jb > 1 and x[je] != x[jb]:
                rate = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    t = (jj - jb + 1) - (x[jj] - x[jb]) * rate
                    if max_t < t:
                        max_t = t
            if dip_l < max_t:
                dip_l = max_t

        # ... and inside the majorant sections.
        dip_u = 0.0
        for j in range(ih, l_lcm):
            max_t = 1.0
            jb = lcm[j]
            je = lcm[j + 1]
            if je - jb > 1 and x[je] != x[jb]:
                rate = (je - jb) / (x[je] - x[jb])
                for jj in range(jb, je + 1):
                    t = (x[jj] - x[jb]) * rate - (jj - jb - 1)
                    if max_t < t:
                        max_t = t
            if dip_u < max_t:
                dip_u = max_t

        dip_new = dip_u if dip_u > dip_l else dip_l
        if best < dip_new:
            best = dip_new
        if low == gcm[ig] and high == lcm[ih]:
            break
        low = gcm[ig]
        high = lcm[ih]

    if best < 1.0:
        best = 1.0
    return best / (2.0 * n)


try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

if njit is not None:
    _dip_sorted = njit(cache=True)(_dip_sorted)
