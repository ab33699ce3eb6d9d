# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Sturm-sequence kernels for symmetric tridiagonal pencils.

The pencil is ``A - sigma B`` with ``A`` symmetric tridiagonal (diagonal ``a``,
off-diagonal ``e``) and ``B`` a positive diagonal ``b``.
"""

import numpy as np
cimport numpy as cnp
from libc.float cimport DBL_MIN
from libc.math cimport fabs

cnp.import_array()


cdef inline double _pivmin(const double[::1] e) noexcept nogil:
    cdef Py_ssize_t i
    cdef double m = 1.0
    for i in range(e.shape[0]):
        if e[i] * e[i] > m:
            m = e[i] * e[i]
    return DBL_MIN * m


cdef Py_ssize_t _count(const double[::1] a, const double[::1] e,
                       const double[::1] b, double sigma,
                       double pivmin) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, neg = 0
    cdef double d = a[0] - sigma * b[0]
    if fabs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        neg += 1
    for i in range(1, n):
        d = a[i] - sigma * b[i] - e[i - 1] * e[i - 1] / d
        if fabs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            neg += 1
    return neg


def sturm_count(const double[::1] a, const double[::1] e,
                const double[::1] b, double sigma):
    """Number of pencil eigenvalues strictly below ``sigma``."""
    cdef double pm = _pivmin(e)
    cdef Py_ssize_t r
    with nogil:
        r = _count(a, e, b, sigma, pm)
    return r


def bisect_eigenvalues(const double[::1] a, const double[::1] e,
                       const double[::1] b, double lo, double hi,
                       Py_ssize_t k, double atol):
    """Lowest ``k`` pencil eigenvalues inside ``(lo, hi)`` by bisection.

    ``lo`` must lie below the spectrum. Each interval is halved until its
    width is at most ``atol`` or no representable midpoint remains.
    """
    cdef double pm = _pivmin(e)
    cdef Py_ssize_t base, i, c
    cdef double left, right, mid
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        base = _count(a, e, b, lo, pm)
        left = lo
        for i in range(k):
            right = hi
            while True:
                mid = 0.5 * (left + right)
                if mid <= left or mid >= right or right - left <= atol:
                    break
                c = _count(a, e, b, mid, pm)
                if c > base + i:
                    right = mid
                else:
                    left = mid
            ov[i] = 0.5 * (left + right)
    return out
