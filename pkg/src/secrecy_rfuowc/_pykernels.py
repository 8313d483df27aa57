"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``.

Same algorithms, vectorized across elements instead of looped.
"""
import math

import numpy as np

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 2000


def gammainc_lower(a, x):
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    out = np.zeros_like(flat)
    a = float(a)

    inf = np.isinf(flat)
    out[inf] = math.gamma(a)
    pos = (flat > 0.0) & ~inf
    ser = pos & (flat < a + 1.0)
    cf = pos & ~ser

    if ser.any():
        xs = flat[ser]
        ap = np.full_like(xs, a)
        term = np.full_like(xs, 1.0 / a)
        total = term.copy()
        active = np.ones(xs.shape, dtype=bool)
        for _ in range(_MAX_ITER):
            ap[active] += 1.0
            term[active] *= xs[active] / ap[active]
            total[active] += term[active]
            active &= np.abs(term) >= np.abs(total) * _EPS
            if not active.any():
                break
        out[ser] = total * np.exp(-xs + a * np.log(xs))

    if cf.any():
        xs = flat[cf]
        b = xs + 1.0 - a
        c = np.full_like(xs, 1.0 / _TINY)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(xs.shape, dtype=bool)
        for n in range(1, _MAX_ITER):
            an = -n * (n - a)
            b = b + 2.0
            d_new = an * d + b
            d_new = np.where(np.abs(d_new) < _TINY, _TINY, d_new)
            c_new = b + an / c
            c_new = np.where(np.abs(c_new) < _TINY, _TINY, c_new)
            d_new = 1.0 / d_new
            delta = d_new * c_new
            d = np.where(active, d_new, d)
            c = np.where(active, c_new, c)
            h = np.where(active, h * delta, h)
            active &= np.abs(delta - 1.0) >= _EPS
            if not active.any():
                break
        upper = np.exp(-xs + a * np.log(xs) + np.log(h))
        out[cf] = math.exp(math.lgamma(a)) - upper

    return out.reshape(x.shape)


def expoly_sum(x, coef, power, rate):
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    coef = np.asarray(coef, dtype=np.float64)
    power = np.asarray(power, dtype=np.float64)
    rate = np.asarray(rate, dtype=np.float64)
    out = np.zeros_like(flat)
    pos = flat > 0.0
    if pos.any():
        lx = np.log(flat[pos])
        expo = np.outer(lx, power) - np.outer(flat[pos], rate)
        out[pos] = np.exp(expo) @ coef
    if (~pos).any():
        out[~pos] = coef[power == 0.0].sum()
    return out.reshape(x.shape)
