"""Pure-Python twin of the compiled Sturm kernels (same signatures)."""

import sys

import numpy as np

_DBL_MIN = sys.float_info.min


def _pivmin(e):
    m = 1.0
    for x in e:
        if x * x > m:
            m = x * x
    return _DBL_MIN * m


def _count(a, e, b, sigma, pivmin):
    neg = 0
    d = a[0] - sigma * b[0]
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        neg += 1
    for i in range(1, len(a)):
        d = a[i] - sigma * b[i] - e[i - 1] * e[i - 1] / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            neg += 1
    return neg


def sturm_count(a, e, b, sigma):
    a, e, b = (np.asarray(x, dtype=float).tolist() for x in (a, e, b))
    return _count(a, e, b, float(sigma), _pivmin(e))


def bisect_eigenvalues(a, e, b, lo, hi, k, atol):
    a, e, b = (np.asarray(x, dtype=float).tolist() for x in (a, e, b))
    pm = _pivmin(e)
    base = _count(a, e, b, lo, pm)
    out = np.empty(k)
    left = float(lo)
    for i in range(k):
        right = float(hi)
        while True:
            mid = 0.5 * (left + right)
            if mid <= left or mid >= right or right - left <= atol:
                break
            if _count(a, e, b, mid, pm) > base + i:
                right = mid
            else:
                left = mid
        out[i] = 0.5 * (left + right)
    return out
