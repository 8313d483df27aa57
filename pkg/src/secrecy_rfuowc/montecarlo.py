"""Monte-Carlo oracle: physical-level channel sampling and metric estimation.

The eta-mu sampler builds each SNR from Gaussian in-phase / quadrature
components and never touches a density, so it is independent of
:mod:`secrecy_rfuowc.linkstats`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .params import MeggParams, RfLinkParams, SystemConfig

METRICS = ("ASC", "SOP_L", "SOP_exact", "SPSC")
CHUNK = 1 << 16
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream; ``(seed, stream_id)`` fixes the sequence.

    ``child(j)`` derives independent sub-streams for parallel fan-out.
    """

    seed: int
    stream_id: int = 0
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self.path)
        return np.random.default_rng(ss)

    def child(self, j: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + (j,))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# ---------------------------------------------------------------------------
# samplers


def sample_etamu_mrc(p: RfLinkParams, rng, size: int = 1) -> np.ndarray:
    """MRC output SNR from 2*N*mu Gaussian in-phase/quadrature pairs.

    Each of the N branches carries 2*mu clusters.  In-phase and quadrature
    variances are 1/(2 psi2) and 1/(2 psi1), so their ratio is eta (Format I)
    and the summed power has mean avg_snr.
    """
    g = _gen(rng)
    pairs = 2 * p.order
    sx = math.sqrt(0.5 / p.psi2)
    sy = math.sqrt(0.5 / p.psi1)
    out = np.empty(size)
    for lo in range(0, size, CHUNK):
        k = min(CHUNK, size - lo)
        x = g.standard_normal((k, pairs))
        y = g.standard_normal((k, pairs))
        out[lo:lo + k] = sx * sx * np.einsum("ij,ij->i", x, x) + sy * sy * np.einsum("ij,ij->i", y, y)
    return out


def sample_tas_snr(p: RfLinkParams, n_s: int, rng, size: int = 1) -> np.ndarray:
    """Largest of n_s independent MRC SNRs (transmit antenna selection)."""
    g = _gen(rng)
    best = sample_etamu_mrc(p, g, size)
    for _ in range(int(n_s) - 1):
        np.maximum(best, sample_etamu_mrc(p, g, size), out=best)
    return best


def sample_megg(p: MeggParams, rng, size: int = 1) -> np.ndarray:
    """Optical SNR Psi * I**r with I drawn from the exponential / GG mixture."""
    g = _gen(rng)
    pick_exp = g.random(size) < p.omega
    i_exp = g.exponential(p.lam, size)
    i_gg = p.b * g.standard_gamma(p.a, size) ** (1.0 / p.c)
    irradiance = np.where(pick_exp, i_exp, i_gg)
    return p.psi * irradiance ** p.r


def sample_end_to_end(cfg: SystemConfig, rng, size: int = 1):
    """One batch of trials: (gamma_f exact AF, gamma_f min form, gamma_e)."""
    g = _gen(rng)
    gr = sample_tas_snr(cfg.sr, cfg.n_s, g, size)
    gd = sample_megg(cfg.rd, g, size)
    ge = sample_etamu_mrc(cfg.se, g, size)
    exact = gr * gd / (gr + gd + 1.0)
    return exact, np.minimum(gr, gd), ge


# ---------------------------------------------------------------------------
# estimation


def _per_sample(metric: str, gf: np.ndarray, ge: np.ndarray, sigma: float) -> np.ndarray:
    if metric == "ASC":
        return np.maximum(0.0, np.log1p(gf) - np.log1p(ge))
    if metric == "SOP_L":
        return (gf <= sigma * ge).astype(float)
    if metric == "SOP_exact":
        return (gf <= sigma * ge + sigma - 1.0).astype(float)
    if metric == "SPSC":
        return (gf > ge).astype(float)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass
class _Moments:
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add_batch(self, v: np.ndarray):
        k = v.size
        if k == 0:
            return
        mu = float(v.mean())
        m2 = float(((v - mu) ** 2).sum())
        self.merge(_Moments(k, mu, m2))

    def merge(self, other: "_Moments"):
        n = self.n + other.n
        if n == 0:
            return
        d = other.mean - self.mean
        self.mean += d * other.n / n
        self.m2 += other.m2 + d * d * self.n * other.n / n
        self.n = n

    def estimate(self) -> McEstimate:
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        return McEstimate(self.mean, math.sqrt(var / self.n), self.n)


def _run_stream(metrics, cfg, n, snr_form, stream) -> dict:
    g = _gen(stream)
    acc = {m: _Moments() for m in metrics}
    sigma = cfg.sigma
    for lo in range(0, n, CHUNK):
        k = min(CHUNK, n - lo)
        exact, mn, ge = sample_end_to_end(cfg, g, k)
        gf = exact if snr_form == "exact" else mn
        for m in metrics:
            acc[m].add_batch(_per_sample(m, gf, ge, sigma))
    return acc


def estimate_metrics(metrics, cfg: SystemConfig, n: int, snr_form: str = "min", rng=None,
                     streams: int = 1, workers: int = 1) -> dict[str, McEstimate]:
    """Estimate several metrics on one shared sample set.

    With ``streams > 1`` the n trials are split over independent child
    streams and pooled with sample-count weights; the result depends only on
    (rng, streams), never on ``workers``.
    """
    metrics = tuple(metrics)
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}; expected one of {METRICS}")
    if snr_form not in ("exact", "min"):
        raise ValueError("snr_form must be 'exact' or 'min'")
    if n < MIN_SAMPLES:
        raise ValueError(f"n must be >= {MIN_SAMPLES}, got {n}")
    base = rng if isinstance(rng, RngStream) else RngStream(0 if rng is None else int(rng))
    if streams <= 1:
        parts = [_run_stream(metrics, cfg, n, snr_form, base)]
    else:
        sizes = [n // streams + (1 if j < n % streams else 0) for j in range(streams)]
        jobs = [(s, base.child(j)) for j, s in enumerate(sizes)]
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(lambda a: _run_stream(metrics, cfg, a[0], snr_form, a[1]), jobs))
        else:
            parts = [_run_stream(metrics, cfg, s, snr_form, st) for s, st in jobs]
    out = {}
    for m in metrics:
        pooled = _Moments()
        for part in parts:
            pooled.merge(part[m])
        out[m] = pooled.estimate()
    return out


def estimate_metric(metric: str, cfg: SystemConfig, n: int, snr_form: str = "min", rng=None,
                    streams: int = 1, workers: int = 1) -> McEstimate:
    """Monte-Carlo estimate of ASC (nats), SOP_L, SOP_exact or SPSC."""
    return estimate_metrics((metric,), cfg, n, snr_form, rng, streams, workers)[metric]


# ---------------------------------------------------------------------------
# goodness of fit


def ks_test(samples: np.ndarray, cdf) -> tuple[float, float]:
    """Kolmogorov-Smirnov statistic and asymptotic p-value against ``cdf``."""
    res = stats.kstest(samples, lambda x: np.asarray(cdf(x)), method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_critical(n: int, alpha: float = 0.05) -> float:
    """Asymptotic KS critical distance at level ``alpha``."""
    return float(stats.kstwobign.isf(alpha)) / math.sqrt(n)
