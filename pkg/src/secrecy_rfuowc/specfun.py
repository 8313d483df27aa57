"""Special functions and the adaptive semi-infinite quadrature engine.

Only the Meijer-G reductions with elementary or incomplete-gamma closed forms
live here.  Every other G/H-function term is computed from its defining
integral with :func:`quad_semi_infinite`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, NonConvergent, PoleError

# Gauss-Kronrod 21/10 nodes and weights on [-1, 1] (QUADPACK qk21), positive half.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208696048300,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G_WEIGHTS = np.zeros(21)
G_WEIGHTS[1:10:2] = _WG
G_WEIGHTS[11:20:2] = _WG[::-1]


@dataclass(frozen=True)
class QuadResult:
    value: float | np.ndarray
    abs_error_estimate: float | np.ndarray
    evaluations: int


@dataclass(frozen=True)
class DeltaSeq:
    """The parameter sequence Delta(k, a) = (a/k, (a+1)/k, ..., (a+k-1)/k)."""

    k: int
    a: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"Delta(k, a) needs a positive integer k, got {self.k!r}")

    def values(self) -> tuple[float, ...]:
        return tuple((self.a + j) / self.k for j in range(int(self.k)))

    def __len__(self):
        return int(self.k)

    def __iter__(self):
        return iter(self.values())


def lower_incomplete_gamma(a: float, x):
    """Unregularized lower incomplete gamma function gamma(a, x).

    Power series below ``x = a + 1``, Lentz continued fraction for the upper
    function above it.  Accepts a scalar or an array ``x``.
    """
    if not a > 0:
        raise DomainError(f"lower_incomplete_gamma needs a > 0, got a={a!r}")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("lower_incomplete_gamma needs x >= 0")
    out = _kernels.gammainc_lower(float(a), arr)
    return float(out) if np.ndim(x) == 0 else out


def meijer_g_1012(z, b: float):
    """G^{1,0}_{0,1}[z | -; b] = z**b * exp(-z)."""
    arr = np.asarray(z, dtype=np.float64)
    if np.any(arr < 0):
        raise DomainError("meijer_g_1012 needs z >= 0")
    if b < 0 and np.any(arr == 0):
        raise DomainError("meijer_g_1012 is singular at z = 0 for b < 0")
    with np.errstate(divide="ignore"):
        out = np.where(arr > 0, np.exp(b * np.log(np.where(arr > 0, arr, 1.0)) - arr),
                       1.0 if b == 0 else 0.0)
    return float(out) if np.ndim(z) == 0 else out


def meijer_g_1112(z, u: float):
    """G^{1,1}_{1,2}[z | 1; u, 0] = gamma(u, z)."""
    if u == 1.0:
        arr = np.asarray(z, dtype=np.float64)
        if np.any(arr < 0):
            raise DomainError("meijer_g_1112 needs z >= 0")
        out = -np.expm1(-arr)
        return float(out) if np.ndim(z) == 0 else out
    return lower_incomplete_gamma(u, z)


def _is_pole(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def beta_fn(x: float, y: float) -> float:
    """Beta function Gamma(x) Gamma(y) / Gamma(x + y) through log-Gamma."""
    for v in (x, y):
        if _is_pole(v):
            raise PoleError(f"beta_fn: Gamma pole at argument {v!r}")
    s = x + y
    if _is_pole(s):
        return 0.0
    lx, sx = math.lgamma(x), _gamma_sign(x)
    ly, sy = math.lgamma(y), _gamma_sign(y)
    ls, ss = math.lgamma(s), _gamma_sign(s)
    return sx * sy * ss * math.exp(lx + ly - ls)


def _gamma_sign(v: float) -> float:
    if v > 0:
        return 1.0
    return -1.0 if math.floor(v) % 2 else 1.0


def _gk_panels(f, lo: np.ndarray, hi: np.ndarray, log_map: bool):
    """Apply the 21-point rule to each panel [lo_j, hi_j] in the mapped variable."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[:, None] + half[:, None] * GK_NODES[None, :]
    if log_map:
        x = np.expm1(t)
        jac = np.exp(t)
    else:
        one_minus = 1.0 - t
        x = t / one_minus
        jac = 1.0 / (one_minus * one_minus)
    fx = np.asarray(f(x.ravel()), dtype=np.float64)
    vector = fx.ndim == 2
    if vector:
        fx = fx.reshape(fx.shape[0], t.shape[0], t.shape[1]) * jac[None]
        k = np.einsum("cpn,n->cp", fx, GK_WEIGHTS) * half[None]
        g = np.einsum("cpn,n->cp", fx, G_WEIGHTS) * half[None]
        vals, errs = k.T, np.abs(k - g).T
    else:
        fx = fx.reshape(t.shape) * jac
        vals = (fx @ GK_WEIGHTS) * half
        errs = np.abs(vals - (fx @ G_WEIGHTS) * half)
    if not np.all(np.isfinite(vals)):
        raise NonConvergent("integrand produced a non-finite value")
    return vals, errs, x.size


def quad_semi_infinite(
    f: Callable[[np.ndarray], np.ndarray],
    tol_abs=1e-10,
    tol_rel: float = 1e-8,
    breakpoints: Iterable[float] = (),
    upper: float | None = None,
    max_evals: int = 1_000_000,
) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of ``f`` over (0, inf), or (0, upper).

    The half-line is mapped onto (0, 1) with x = t / (1 - t) and subdivided
    adaptively.  A finite ``upper`` uses x = exp(s) - 1 instead, which keeps
    the end point exact even for very large caps.  ``f`` is called with a 1-D
    array of abscissae and returns either an array of the same length or a
    ``(components, len(x))`` array; in the vector case every component must
    meet its own tolerance (``tol_abs`` may then be an array too).

    ``breakpoints`` are interior points (in x) where the integrand changes
    scale; each one seeds a panel boundary.
    """
    if upper is not None and not upper > 0:
        raise DomainError(f"upper limit must be > 0, got {upper!r}")
    log_map = upper is not None
    to_t = math.log1p if log_map else (lambda v: v / (1.0 + v))
    t_max = math.log1p(upper) if log_map else 1.0
    cuts = {0.0, t_max}
    for bp in breakpoints:
        bp = float(bp)
        if math.isfinite(bp) and bp > 0 and (upper is None or bp < upper):
            cuts.add(to_t(bp))
    edges = np.array(sorted(cuts))
    lo, hi = edges[:-1], edges[1:]
    keep = hi - lo > 0
    lo, hi = lo[keep], hi[keep]

    vals, errs, n_eval = _gk_panels(f, lo, hi, log_map)
    while True:
        total = vals.sum(axis=0)
        err = errs.sum(axis=0)
        target = np.maximum(tol_abs, tol_rel * np.abs(total))
        if np.all(err <= target):
            break
        if n_eval >= max_evals:
            raise NonConvergent(
                f"quadrature error {np.max(err):.3g} above target after {n_eval} evaluations",
                value=total,
                abs_error=err,
            )
        scaled = errs / target if errs.ndim == 1 else np.max(errs / target[None, :], axis=1)
        splittable = (hi - lo) > 64 * np.finfo(float).eps * np.maximum(hi, 1e-300)
        scaled = np.where(splittable, scaled, 0.0)
        worst = scaled.max()
        if worst <= 0:
            raise NonConvergent(
                "quadrature panels cannot be refined further",
                value=total,
                abs_error=err,
            )
        pick = scaled >= 0.1 * worst
        mids = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mids])
        new_hi = np.concatenate([mids, hi[pick]])
        nv, ne, k = _gk_panels(f, new_lo, new_hi, log_map)
        n_eval += k
        lo = np.concatenate([lo[~pick], new_lo])
        hi = np.concatenate([hi[~pick], new_hi])
        vals = np.concatenate([vals[~pick], nv])
        errs = np.concatenate([errs[~pick], ne])

    if total.ndim == 0:
        return QuadResult(float(total), float(err), n_eval)
    return QuadResult(total, err, n_eval)


def quad_interval(f, a: float, b: float, **kwargs) -> QuadResult:
    """Adaptive integral of ``f`` over the finite interval [a, b], a >= 0."""
    if a == 0:
        return quad_semi_infinite(f, upper=b, **kwargs)
    shifted = lambda y: f(y + a)  # noqa: E731
    bps = [bp - a for bp in kwargs.pop("breakpoints", ())]
    return quad_semi_infinite(shifted, upper=b - a, breakpoints=bps, **kwargs)


def scale_breakpoints(values: Sequence[float]) -> list[float]:
    """Deduplicated positive finite breakpoints, sorted."""
    out = sorted({float(v) for v in values if math.isfinite(v) and v > 0})
    return out
