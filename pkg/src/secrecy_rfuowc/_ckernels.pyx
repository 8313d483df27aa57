# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: incomplete gamma and exponential-polynomial sums."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, lgamma, fabs, tgamma, INFINITY

cnp.import_array()

cdef double EPS = 1e-16
cdef double TINY = 1e-300
cdef int MAX_ITER = 2000


cdef double _gammainc_lower(double a, double x) nogil:
    cdef double ap, term, total, b, c, d, h, an, delta, upper
    cdef int n
    if x <= 0.0:
        return 0.0
    if x == INFINITY:
        return tgamma(a)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for n in range(MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if fabs(term) < fabs(total) * EPS:
                break
        return total * exp(-x + a * log(x))
    # modified Lentz for the upper function
    b = x + 1.0 - a
    c = 1.0 / TINY
    d = 1.0 / b
    h = d
    for n in range(1, MAX_ITER):
        an = -n * (n - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < TINY:
            d = TINY
        c = b + an / c
        if fabs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < EPS:
            break
    upper = exp(-x + a * log(x) + log(h))
    return exp(lgamma(a)) - upper


def gammainc_lower(double a, x):
    """Unregularized lower incomplete gamma of every element of ``x``."""
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(np.ravel(x), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xs)
    cdef Py_ssize_t i, n = xs.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _gammainc_lower(a, xs[i])
    return out.reshape(np.shape(x))


def expoly_sum(x, coef, power, rate):
    """sum_k coef[k] * x**power[k] * exp(-rate[k] * x) for every element of ``x``."""
    cdef cnp.ndarray[double, ndim=1] xs = np.ascontiguousarray(np.ravel(x), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cf = np.ascontiguousarray(coef, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pw = np.ascontiguousarray(power, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] rt = np.ascontiguousarray(rate, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(xs)
    cdef Py_ssize_t i, k, n = xs.shape[0], m = cf.shape[0]
    cdef double xi, lx, acc, p
    with nogil:
        for i in range(n):
            xi = xs[i]
            acc = 0.0
            if xi > 0.0:
                lx = log(xi)
                for k in range(m):
                    acc += cf[k] * exp(pw[k] * lx - rt[k] * xi)
            else:
                for k in range(m):
                    if pw[k] == 0.0:
                        acc += cf[k]
            out[i] = acc
    return out.reshape(np.shape(x))
