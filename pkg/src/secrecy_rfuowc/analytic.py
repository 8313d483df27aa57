"""Secrecy metrics (ASC, SOP_L, SPSC) of the dual-hop wiretap scenario.

Two families of evaluators live here:

* ``*_direct`` / integral paths integrate the defining expectation with the
  exact link distributions.  These are the references.
* Term-wise assemblies (``asc_series_1``, ``asc_series_2``, the closed SOP
  path) expand every CDF into exponential-polynomial pieces and integrate each
  piece on its own.  Each named piece is also callable on its own through
  :func:`asc_term`, :func:`asc_b_term` and :func:`sop_term`.

ASC is reported in nats per channel use.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import CancellationWarning, DomainError, SeriesDiverged
from .linkstats import DualHop, EtaMuMrc
from .params import SystemConfig
from .specfun import beta_fn, quad_semi_infinite, scale_breakpoints

# term integrals feed signed sums; they are computed well below the metric tolerances
_TERM_TOL_REL = 1e-12
_TERM_TOL_ABS = 1e-14
_EPS = np.finfo(float).eps


class Method(enum.Enum):
    DirectQuadrature = "direct"
    PaperSeries1 = "series1"
    PaperSeries2 = "series2"
    ClosedForm = "closed"
    MonteCarlo = "mc"


@dataclass(frozen=True)
class MetricResult:
    """A metric value with its numerical error estimate.

    ``parts`` carries named sub-totals of term-wise assemblies (or a
    cross-check value) and is informational only.
    """

    value: float
    error_estimate: float
    method: Method
    parts: dict = field(default_factory=dict, compare=False, repr=False)


# ---------------------------------------------------------------------------
# model cache


class _Model:
    """Link objects and expansion tables for one configuration."""

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg
        self.main = DualHop(cfg)
        self.eav = EtaMuMrc(cfg.se)
        self.optical = self.main.optical
        self.kernel = self.optical.kernel

    # 1 - F_e = sum c x^p e^{-r x}
    def eav_sf_terms(self):
        P = self.eav.sf_poly
        return list(zip(P.coef, P.power.astype(int), P.rate))

    # f_e = sum d x^p e^{-r x}
    def eav_pdf_terms(self):
        P = self.eav.pdf_poly
        return list(zip(P.coef, P.power.astype(int), P.rate))

    # F_r* = sum R x^q e^{-phi x}, m = 0 term included
    def tas_terms(self):
        exp = self.main.rf.expansion
        if exp is None:
            raise DomainError("TAS expansion unavailable (n_s * (N mu - 1) too large)")
        return [(float(c), int(p), float(r)) for c, p, r in exp._mp_terms]

    def branches(self):
        """(paper index i, weight S_i) for the non-vanishing optical branches."""
        return [(i + 1, s) for i, s in enumerate(self.kernel.S) if s != 0.0]

    def g(self, i: int, x):
        return self.optical.branch_cdf(i - 1, x)

    def knees(self) -> list[float]:
        out = list(self.main.knees()) + self.eav.knees()
        return scale_breakpoints(out)


@lru_cache(maxsize=64)
def _model(cfg: SystemConfig) -> _Model:
    return _Model(cfg)


def _rate_breaks(rates) -> list[float]:
    return [1.0 / r for r in rates if r > 0]


# ---------------------------------------------------------------------------
# vector-valued term integration


def _integrate_keys(model: _Model, keys, weights, *, cap=None, kernel="asc", scale=1.0,
                    extra_breaks=()):
    """Integrate every ``(power, rate, branch)`` key in one adaptive pass.

    ``kernel="asc"`` integrates x^p e^{-rx} G_i(x) / (1 + x) over [0, cap];
    ``kernel="sop"`` integrates x^p e^{-rx} G_i(scale x) over [0, inf).
    Branch 0 means no G factor.  ``weights`` are the summed absolute
    coefficients multiplying each key; they set per-key absolute tolerances.
    """
    keys = list(keys)
    P = np.array([k[0] for k in keys], float)[:, None]
    R = np.array([k[1] for k in keys], float)[:, None]
    B = np.array([k[2] for k in keys], int)
    used = sorted(set(B.tolist()) - {0})

    def f(x):
        pos = x > 0
        lx = np.log(np.where(pos, x, 1.0))
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            base = np.where(pos[None, :] | (P == 0), np.exp(P * lx[None, :] - R * x[None, :]), 0.0)
        gx = {0: 1.0}
        for i in used:
            gx[i] = model.g(i, scale * x)
        rows = np.stack([np.broadcast_to(gx[b], x.shape) for b in B]) if used else 1.0
        out = base * rows
        if kernel == "asc":
            out = out / (1.0 + x)[None, :]
        return out

    breaks = model.knees() + _rate_breaks(R.ravel()) + list(extra_breaks)
    if scale != 1.0:
        breaks += [k / scale for k in model.optical.knees()]
    tol_abs = _TERM_TOL_ABS / np.maximum(1.0, np.asarray(weights, float))
    res = quad_semi_infinite(f, tol_abs=tol_abs, tol_rel=_TERM_TOL_REL,
                             breakpoints=scale_breakpoints(breaks), upper=cap,
                             max_evals=4_000_000)
    return dict(zip(keys, np.atleast_1d(res.value))), dict(zip(keys, np.atleast_1d(res.abs_error_estimate)))


def _assemble(pieces, model, **kw):
    """Sum coef * integral(key) over ``pieces = [(label, coef, key)]``."""
    weights: dict = {}
    for _, c, k in pieces:
        weights[k] = weights.get(k, 0.0) + abs(c)
    vals, errs = _integrate_keys(model, weights.keys(), list(weights.values()), **kw)
    parts: dict[str, float] = {}
    total, err, gauge = 0.0, 0.0, 0.0
    for label, c, k in pieces:
        t = c * vals[k]
        parts[label] = parts.get(label, 0.0) + t
        total += t
        err += abs(c) * errs[k]
        gauge += abs(t)
    err += 8 * _EPS * gauge
    return total, err, parts


# ---------------------------------------------------------------------------
# ASC


def asc_direct(cfg: SystemConfig, tol_abs: float = 1e-10, tol_rel: float = 1e-8) -> MetricResult:
    """Reference ASC: integral of F_e(x) (1 - F_f(x)) / (1 + x) over (0, inf), nats."""
    m = _model(cfg)

    def f(x):
        return m.eav.cdf(x) * m.main.sf(x) / (1.0 + x)

    res = quad_semi_infinite(f, tol_abs=tol_abs, tol_rel=tol_rel, breakpoints=m.knees())
    return MetricResult(max(res.value, 0.0), res.abs_error_estimate, Method.DirectQuadrature)


def default_cap(cfg: SystemConfig) -> float:
    """Shared truncation point Z = 1e6 times the largest scale knee."""
    return 1e6 * max(_model(cfg).knees())


def asc_series_1(cfg: SystemConfig, cap_z: float | None = None, check: bool = True) -> MetricResult:
    """ASC from the eight-term (A1..A8) expansion, every term on the shared cap [0, Z].

    The product F_e (1 - F_r*) (1 - F_d) is expanded into exponential-polynomial
    pieces; the A1 piece ln(1 + Z) is cancelled by the m = 0 TAS piece, which
    is why all terms must share one cap.  Emits CancellationWarning when the
    assembly strays from :func:`asc_direct` by more than 1e-2 * max(1, value).
    """
    m = _model(cfg)
    cap = default_cap(cfg) if cap_z is None else float(cap_z)
    floor = 1e3 * max(1.0 / min(m.main.rf.link.psi), 1.0 / min(m.eav.psi))
    if not cap >= floor:
        raise DomainError(f"cap_z={cap:.4g} below the required {floor:.4g}")
    e_terms = [(None, 1.0, 0, 0.0)] + [("e", -c, p, r) for c, p, r in m.eav_sf_terms()]
    t_terms = [(None, 1.0, 0, 0.0)] + [("t", -c, p, r) for c, p, r in m.tas_terms()]
    g_terms = [(None, 1.0, 0)] + [("g", -s, i) for i, s in m.branches()]
    pieces = []
    for et, ce, pe, re in e_terms:
        for tt, ct, pt, rt in t_terms:
            for gt, cg, i in g_terms:
                label = _A_LABEL[(et is not None, tt is not None, gt is not None)]
                pieces.append((label, ce * ct * cg, (pe + pt, re + rt, i)))
    # A1 is closed form; integrate the rest
    a1 = [p for p in pieces if p[0] == "A1"]
    rest = [p for p in pieces if p[0] != "A1"]
    total, err, parts = _assemble(rest, m, cap=cap)
    parts["A1"] = math.log1p(cap)
    total += sum(c for _, c, _ in a1) * parts["A1"]
    err += 4 * _EPS * parts["A1"]
    out = MetricResult(total, err, Method.PaperSeries1, parts)
    if check:
        _check_against_direct(cfg, out)
    return out


# (eav piece?, tas piece?, optical G piece?) -> paper term family
_A_LABEL = {
    (False, False, False): "A1", (True, False, False): "A2", (False, True, False): "A3",
    (True, True, False): "A4", (False, False, True): "A5", (True, False, True): "A6",
    (False, True, True): "A7", (True, True, True): "A8",
}


def series2_cap(cfg: SystemConfig, survival: float = 1e-6) -> float:
    """Smallest x with main-link survival 1 - F_f(x) <= ``survival`` (log bisection)."""
    m = _model(cfg)
    lo, hi = 1e-12, max(m.knees())
    while m.main.sf(hi) > survival:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if m.main.sf(mid) > survival:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1 + 1e-9:
            break
    return hi


def series2_regime(cfg: SystemConfig, cap_z: float | None = None) -> float:
    """max_delta Omega_delta * cap; the ascending series is trusted only while <= 5."""
    cap = series2_cap(cfg) if cap_z is None else cap_z
    return max(_model(cfg).eav.psi) * cap


def _eav_series_coeffs(eav: EtaMuMrc, terms: int) -> dict[int, float]:
    """Coefficients a_w of the truncated ascending series F_e(x) = sum a_w x**w."""
    mp = eav._mp
    n = eav.n
    acc: dict[int, mpmath.mpf] = {}
    with mpmath.workdps(50):
        for a in range(2):
            om = mp["psi"][a]
            for theta in range(n):
                d = mp["K"] * mp["B"][a][theta]
                for z in range(terms):
                    w = n - theta + z
                    acc[w] = acc.get(w, 0) + d * (-om) ** z / (mpmath.factorial(z) * w)
    return {w: float(v) for w, v in acc.items()}


def asc_series_2(cfg: SystemConfig, terms: int = 20, cap_z: float | None = None,
                 check: bool = True) -> MetricResult:
    """ASC from the ascending-series eavesdropper CDF (terms B1..B4).

    Integration runs on [0, cap] where cap defaults to the point where the main
    link survival falls below 1e-6; the neglected tail beyond the cap is
    bounded by quadrature and added to the error estimate.  The series is only trusted while
    max Omega_delta * cap <= 5; beyond that SeriesDiverged is raised.
    """
    if terms < 1:
        raise DomainError("terms must be >= 1")
    m = _model(cfg)
    cap = series2_cap(cfg) if cap_z is None else float(cap_z)
    regime = max(m.eav.psi) * cap
    if regime > 5.0:
        raise SeriesDiverged(
            f"max Omega * cap = {regime:.3g} > 5: the {terms}-term eavesdropper series "
            "is not reliable on this range"
        )
    _, trunc = m.eav.cdf_series(cap, terms=terms, return_bound=True)
    a = _eav_series_coeffs(m.eav, terms)
    t_terms = [(None, 1.0, 0, 0.0)] + [("t", -c, p, r) for c, p, r in m.tas_terms()]
    g_terms = [(None, 1.0, 0)] + [("g", -s, i) for i, s in m.branches()]
    pieces = []
    for w, cw in a.items():
        for tt, ct, pt, rt in t_terms:
            for gt, cg, i in g_terms:
                label = _B_LABEL[(tt is not None, gt is not None)]
                pieces.append((label, cw * ct * cg, (w + pt, rt, i)))
    total, err, parts = _assemble(pieces, m, cap=cap)
    # truncated series error, plus the neglected tail beyond the cap
    tail = quad_semi_infinite(lambda y: m.main.sf(y + cap) / (1.0 + y + cap),
                              tol_abs=1e-14, tol_rel=1e-6).value
    err += trunc * math.log1p(cap) + tail
    out = MetricResult(total, err, Method.PaperSeries2, parts)
    if check:
        _check_against_direct(cfg, out)
    return out


_B_LABEL = {(False, False): "B1", (True, False): "B2", (True, True): "B3", (False, True): "B4"}


def _check_against_direct(cfg, res: MetricResult):
    ref = asc_direct(cfg).value
    if abs(res.value - ref) > 1e-2 * max(1.0, abs(ref)):
        warnings.warn(
            f"{res.method.name} ASC {res.value:.6g} differs from direct quadrature {ref:.6g}",
            CancellationWarning,
            stacklevel=3,
        )


# -- individually addressable terms ------------------------------------------


def _tas_rate(model: _Model, m: int, n: int) -> float:
    p1, p2 = model.main.rf.link.psi
    return (m - n) * p1 + n * p2


def _one_integral(model, power, rate, branch, cap, kernel="asc", scale=1.0) -> float:
    vals, _ = _integrate_keys(model, [(power, rate, branch)], [1.0], cap=cap,
                              kernel=kernel, scale=scale)
    return float(next(iter(vals.values())))


def asc_term(kind: str, cfg: SystemConfig, *, delta: int = 1, varsigma: int = 0, m: int = 0,
             n: int = 0, u: int = 0, v: int = 0, i: int = 1, cap_z: float | None = None) -> float:
    """One A-term of the eight-term ASC expansion, integrated on [0, cap_z].

    Indices follow the expansion: ``delta`` (eavesdropper rate, 1 or 2),
    ``varsigma`` (eavesdropper power), ``(m, n, u, v)`` (TAS table entry) and
    ``i`` (optical branch, 1 or 2).  Only the indices a term uses matter.
    """
    model = _model(cfg)
    cap = default_cap(cfg) if cap_z is None else float(cap_z)
    kind = kind.upper()
    if kind == "A1":
        return math.log1p(cap)
    om = model.eav.psi[delta - 1]
    phi = _tas_rate(model, m, n)
    table = {
        "A2": (varsigma, om, 0), "A3": (u + v, phi, 0), "A4": (u + v + varsigma, om + phi, 0),
        "A5": (0, 0.0, i), "A6": (varsigma, om, i), "A7": (u + v, phi, i),
        "A8": (u + v + varsigma, om + phi, i),
    }
    if kind not in table:
        raise ValueError(f"unknown ASC term {kind!r}")
    return _one_integral(model, *table[kind], cap)


def asc_b_term(kind: str, cfg: SystemConfig, *, w: int, m: int = 0, n: int = 0, u: int = 0,
               v: int = 0, i: int = 1, cap_z: float | None = None, via_beta: bool = False) -> float:
    """One B-term of the series-form ASC, integrated on [0, cap_z].

    ``via_beta=True`` evaluates B1 through B(w + 1, -w), which has a Gamma pole
    at every nonnegative integer w and therefore raises PoleError.
    """
    model = _model(cfg)
    cap = series2_cap(cfg) if cap_z is None else float(cap_z)
    kind = kind.upper()
    if kind == "B1" and via_beta:
        return beta_fn(w + 1, -w)
    phi = _tas_rate(model, m, n)
    table = {
        "B1": (w, 0.0, 0), "B2": (u + v + w, phi, 0), "B3": (u + v + w, phi, i), "B4": (w, 0.0, i),
    }
    if kind not in table:
        raise ValueError(f"unknown series ASC term {kind!r}")
    return _one_integral(model, *table[kind], cap)


# ---------------------------------------------------------------------------
# SOP and SPSC


def sop_lower(cfg: SystemConfig, path: str = "integral") -> MetricResult:
    """Lower-bound secrecy outage Pr(gamma_f <= sigma gamma_e).

    ``path="integral"`` integrates F_f(sigma x) f_e(x); ``path="closed"``
    assembles the expansion with S1 in closed form and S2, S3 by quadrature.
    """
    if path == "integral":
        return _sop_integral(cfg)
    if path == "closed":
        return _sop_closed(cfg)
    raise ValueError(f"unknown SOP path {path!r}")


def _sop_integral(cfg: SystemConfig) -> MetricResult:
    m = _model(cfg)
    sigma = cfg.sigma

    def f(x):
        return m.main.cdf(sigma * x) * m.eav.pdf(x)

    breaks = m.eav.knees() + [k / sigma for k in m.main.knees()]
    res = quad_semi_infinite(f, tol_abs=1e-13, tol_rel=1e-10, breakpoints=breaks)
    return MetricResult(min(max(res.value, 0.0), 1.0), res.abs_error_estimate, Method.DirectQuadrature)


def _sop_closed(cfg: SystemConfig) -> MetricResult:
    m = _model(cfg)
    sigma = cfg.sigma
    tas = m.tas_terms()
    pieces = []
    closed = 0.0
    gauge = 0.0
    for d, p, om in m.eav_pdf_terms():
        s = p + 1  # N_e mu_e - theta
        for R, q, phi in tas:
            w1, w2 = q + s, om + sigma * phi
            c = d * R * sigma ** q
            s1 = math.exp(math.lgamma(w1) - w1 * math.log(w2))
            closed += c * s1
            gauge += abs(c * s1)
            for i, si in m.branches():
                pieces.append(("S3", -c * si, (w1 - 1, w2, i)))
        for i, si in m.branches():
            pieces.append(("S2", d * si, (s - 1, om, i)))
    total, err, parts = _assemble(pieces, m, kernel="sop", scale=sigma)
    parts["S1"] = closed
    total += closed
    err += 8 * _EPS * gauge
    if err > 1e-3:
        warnings.warn(
            f"closed-form SOP lost precision to cancellation (error estimate {err:.3g})",
            CancellationWarning,
            stacklevel=3,
        )
    return MetricResult(min(max(total, 0.0), 1.0), err, Method.ClosedForm, parts)


def sop_term(kind: str, cfg: SystemConfig, *, delta: int = 1, theta: int = 0, m: int = 0,
             n: int = 0, u: int = 0, v: int = 0, i: int = 1) -> float:
    """One S-term of the closed SOP assembly; S1 is exact, S2 and S3 use quadrature."""
    model = _model(cfg)
    sigma = cfg.sigma
    ne = model.eav.n
    om = model.eav.psi[delta - 1]
    w1 = u + v + ne - theta
    w2 = om + sigma * _tas_rate(model, m, n)
    kind = kind.upper()
    if kind == "S1":
        return math.exp(math.lgamma(w1) - w1 * math.log(w2))
    if kind == "S2":
        return _one_integral(model, ne - theta - 1, om, i, None, kernel="sop", scale=sigma)
    if kind == "S3":
        return _one_integral(model, w1 - 1, w2, i, None, kernel="sop", scale=sigma)
    raise ValueError(f"unknown SOP term {kind!r}")


def spsc(cfg: SystemConfig) -> MetricResult:
    """Pr(gamma_f > gamma_e) = 1 - SOP_L at zero target rate.

    ``parts["closed"]`` holds the same quantity assembled term-wise, with its
    error estimate in ``parts["closed_error"]``; it is informational only, so
    its cancellation warning is not propagated.
    """
    base = cfg.replace(target_rate=0.0)
    ref = _sop_integral(base)
    parts = {}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CancellationWarning)
            closed = _sop_closed(base)
        parts["closed"] = 1.0 - closed.value
        parts["closed_error"] = closed.error_estimate
    except DomainError:
        pass
    return MetricResult(1.0 - ref.value, ref.error_estimate, Method.DirectQuadrature, parts)


def sop_exact_mc_reference(cfg: SystemConfig, n: int = 1_000_000, seed: int = 0) -> MetricResult:
    """Monte-Carlo estimate of the exact outage Pr(gamma_f <= sigma gamma_e + sigma - 1)."""
    from .montecarlo import RngStream, estimate_metric

    est = estimate_metric("SOP_exact", cfg, n, snr_form="exact", rng=RngStream(seed, 0))
    return MetricResult(est.mean, est.std_error, Method.MonteCarlo)


def evaluate(metric: str, cfg: SystemConfig) -> MetricResult:
    """Reference analytic value of ``metric`` in {ASC, SOP_L, SPSC}."""
    key = metric.upper()
    if key == "ASC":
        return asc_direct(cfg)
    if key in ("SOP_L", "SOP"):
        return sop_lower(cfg)
    if key == "SPSC":
        return spsc(cfg)
    raise ValueError(f"unknown metric {metric!r}")
