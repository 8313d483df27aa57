"""Per-hop SNR distributions and the dual-hop end-to-end CDF.

The eta-mu hops use the integer-mu finite-sum form: the density is a sum of
``x**k * exp(-psi * x)`` terms, so PDFs and CDFs reduce to exponential
polynomials (``expoly``) with precomputed coefficient tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial, lgamma

import mpmath
import numpy as np
from scipy.special import ive

from . import _kernels
from .errors import DomainError, SeriesDiverged
from .params import MeggParams, RfLinkParams, SystemConfig, megg_kernel_constants
from .specfun import meijer_g_1112

MAX_TAS_POWER = 64
_REFINE_COND = 1e2


@dataclass(frozen=True)
class ExpPoly:
    """sum_k coef[k] * x**power[k] * exp(-rate[k] * x)."""

    coef: np.ndarray
    power: np.ndarray
    rate: np.ndarray

    def __call__(self, x):
        return _kernels.expoly_sum(x, self.coef, self.power, self.rate)

    def abs_terms(self, x):
        """Sum of absolute term values, a cancellation gauge."""
        return _kernels.expoly_sum(x, np.abs(self.coef), self.power, self.rate)

    def merged(self) -> "ExpPoly":
        keys: dict[tuple[float, float], float] = {}
        for c, p, r in zip(self.coef, self.power, self.rate):
            keys[(p, r)] = keys.get((p, r), 0.0) + c
        items = [(p, r, c) for (p, r), c in keys.items() if c != 0.0]
        if not items:
            items = [(0.0, 0.0, 0.0)]
        p, r, c = map(np.array, zip(*items))
        return ExpPoly(c.astype(float), p.astype(float), r.astype(float))


class EtaMuMrc:
    """SNR of an eta-mu hop after N-branch MRC (integer mu).

    The prefactor ``K = h**n / (H**n Gamma(n))`` with ``n = N mu`` multiplies the
    ``B`` (density) and ``C`` (survival) coefficient tables; alpha = 1, 2
    index the two exponential rates ``psi1 = 2n(h-H)/phi``, ``psi2 = 2n(h+H)/phi``.

    Coefficients are built in extended precision and rounded once.  The finite
    sums cancel badly near the origin when n is large and |H| small, so the
    default ``method="auto"`` evaluates them only where their condition number
    is small and switches elsewhere to the equivalent positive-weight form:
    the SNR is Gamma(n, psi_lo) + Gamma(n, psi_hi), i.e. a negative-binomial
    mixture of Gamma(2n + k, psi_hi) laws.
    """

    _PDF_COND = 1e3
    _SF_GAUGE = 100.0

    def __init__(self, p: RfLinkParams):
        self.params = p
        n = p.order
        self.n = n
        self.h, self.H = p.h, p.H
        self.psi = (p.psi1, p.psi2)
        mp = _etamu_coefficients_mp(p.h, p.H, p.avg_snr, n)
        self._mp = mp
        self.K = float(mp["K"])
        self.B = np.array([[float(v) for v in row] for row in mp["B"]])
        self.C = np.array([[float(v) for v in row] for row in mp["C"]])
        self.poly = np.array([[float(v) for v in row] for row in mp["poly"]])

        coef, power, rate = [], [], []
        for a in range(2):
            for beta in range(n):
                coef.append(float(mp["K"] * mp["B"][a][beta]))
                power.append(n - beta - 1)
                rate.append(self.psi[a])
        self.pdf_poly = ExpPoly(np.array(coef), np.array(power, float), np.array(rate))

        # survival = K * sum_a P_a(x) exp(-psi_a x), P_a of degree n-1
        coef, power, rate = [], [], []
        for a in range(2):
            for k in range(n):
                coef.append(float(mp["K"] * mp["poly"][a][k]))
                power.append(k)
                rate.append(self.psi[a])
        self.sf_poly = ExpPoly(np.array(coef), np.array(power, float), np.array(rate))

        self.psi_lo, self.psi_hi = sorted(self.psi)
        self.mix_weights = _negbin_weights(n, self.psi_lo / self.psi_hi)

    # -- scales -------------------------------------------------------------
    def knees(self) -> list[float]:
        return [1.0 / self.psi[0], 1.0 / self.psi[1], self.n / self.psi_lo]

    # -- density ------------------------------------------------------------
    def pdf(self, x, method: str = "auto"):
        """SNR density.

        ``method``: ``"auto"``, ``"finite"`` (plain double finite sum),
        ``"exact"`` (finite sum, ill-conditioned points redone in extended
        precision), ``"mixture"`` or ``"bessel"``.
        """
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr < 0):
            raise DomainError("SNR must be >= 0")
        if method == "bessel":
            return self.pdf_bessel(x)
        if method == "mixture":
            out = self._mixture(arr, density=True)
        else:
            out = np.asarray(self.pdf_poly(arr), dtype=float)
            if method != "finite":
                flat_x = arr.ravel()
                flat = out.ravel()
                gauge = np.asarray(self.pdf_poly.abs_terms(flat_x)).ravel()
                with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                    cond = gauge / np.abs(flat)
                if method == "auto":
                    bad = ~(cond <= self._PDF_COND) & (flat_x > 0)
                    if bad.any():
                        flat[bad] = self._mixture(flat_x[bad], density=True)
                elif method == "exact":
                    for i in np.flatnonzero(~(cond <= _REFINE_COND) & (flat_x > 0)):
                        flat[i] = self._pdf_mp(flat_x[i])
                else:
                    raise ValueError(f"unknown method {method!r}")
                out = flat.reshape(arr.shape)
        out = np.maximum(out, 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def _pdf_mp(self, x: float) -> float:
        n = self.n
        dps = 40
        while True:
            with mpmath.workdps(dps):
                mp = _etamu_coefficients_mp(self.h, self.H, self.params.avg_snr, n, dps=dps)
                xm = mpmath.mpf(x)
                total, gauge = mpmath.mpf(0), mpmath.mpf(0)
                for a in range(2):
                    e = mpmath.exp(-mp["psi"][a] * xm)
                    for beta in range(n):
                        t = mp["B"][a][beta] * xm ** (n - beta - 1) * e
                        total += t
                        gauge += abs(t)
                lost = float(mpmath.log10(gauge / abs(total))) if total != 0 else dps
                if lost < dps - 20:
                    return float(mp["K"] * total)
            dps = int(lost) + 40

    def pdf_bessel(self, x):
        """Density from the modified-Bessel form (valid for any mu)."""
        arr = np.asarray(x, dtype=np.float64)
        n, h, H, phi = self.n, self.h, abs(self.H), self.params.avg_snr
        nu = n - 0.5
        with np.errstate(divide="ignore"):
            z = 2.0 * n * H * arr / phi
            logpref = (math.log(2.0 * math.sqrt(math.pi)) + (n + 0.5) * math.log(n) + n * math.log(h)
                       - lgamma(n) - nu * math.log(H) - (n + 0.5) * math.log(phi))
            out = np.where(arr > 0,
                           np.exp(logpref + nu * np.log(np.where(arr > 0, arr, 1.0))
                                  - 2.0 * n * h * arr / phi + z) * ive(nu, z),
                           0.0)
        return float(out) if np.ndim(x) == 0 else out

    def _mixture(self, x: np.ndarray, density: bool, lower: bool = False):
        """Negative-binomial mixture of Gamma(2n + k, psi_hi): density, survival or (``lower``) CDF."""
        y = self.psi_hi * np.asarray(x, dtype=np.float64)
        a = 2.0 * self.n
        with np.errstate(divide="ignore"):
            logy = np.log(np.where(y > 0, y, 1.0))
        g = np.where(y > 0, np.exp((a - 1.0) * logy - y - lgamma(a)), 0.0)  # Gamma(a, 1) density
        P = _kernels.gammainc_lower(a, y) / math.gamma(a)
        acc = np.zeros_like(y)
        for w in self.mix_weights:
            acc += w * (g if density else P)
            t = g * y / a
            P = P - t
            g = t
            a += 1.0
        if density:
            return self.psi_hi * acc
        if lower:
            return np.clip(acc, 0.0, 1.0)
        return np.clip(1.0 - acc, 0.0, 1.0)

    # -- distribution -------------------------------------------------------
    def sf(self, x, method: str = "auto"):
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr < 0):
            raise DomainError("SNR must be >= 0")
        if method == "mixture":
            out = self._mixture(arr, density=False)
        else:
            out = np.asarray(self.sf_poly(arr), dtype=float)
            if method == "auto":
                flat_x = arr.ravel()
                flat = out.ravel()
                bad = np.asarray(self.sf_poly.abs_terms(flat_x)).ravel() > self._SF_GAUGE
                if bad.any():
                    flat[bad] = self._mixture(flat_x[bad], density=False)
                out = flat.reshape(arr.shape)
            elif method != "finite":
                raise ValueError(f"unknown method {method!r}")
        out = np.clip(out, 0.0, 1.0)
        return float(out) if np.ndim(x) == 0 else out

    def cdf(self, x, method: str = "auto"):
        """SNR CDF; in the lower half of the law ``"auto"`` sums the mixture
        directly so that small probabilities keep their relative accuracy."""
        S = np.asarray(self.sf(x, method=method), dtype=float)
        out = 1.0 - S
        if method == "auto":
            low = S > 0.5
            if low.any():
                arr = np.broadcast_to(np.asarray(x, dtype=np.float64), S.shape)
                out = np.where(low, 0.0, out)
                out[low] = self._mixture(arr[low], density=False, lower=True)
        return float(out) if np.ndim(x) == 0 else out

    def cdf_series(self, x, terms: int = 20, return_bound: bool = False):
        """Ascending-series CDF truncated after ``terms`` powers of x.

        Raises SeriesDiverged when the term magnitude keeps growing for five
        consecutive indices.  The bound is the magnitude of the first omitted term
        plus the rounding floor of the alternating sum.
        """
        if terms < 1:
            raise DomainError("terms must be >= 1")
        arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if np.any(arr < 0):
            raise DomainError("SNR must be >= 0")
        n = self.n
        with np.errstate(divide="ignore"):
            logx = np.log(np.where(arr > 0, arr, 1.0))
        pos = arr > 0

        def signed_terms(z):
            total = np.zeros_like(arr)
            mag = np.zeros_like(arr)
            for a in range(2):
                for theta in range(n):
                    w = n - theta + z
                    c = self.K * self.B[a, theta]
                    lm = z * math.log(self.psi[a]) - lgamma(z + 1) - math.log(w) + w * logx
                    t = np.where(pos, np.exp(lm), 0.0)
                    total += (-1) ** z * c * t
                    mag += abs(c) * t
            return total, mag

        total = np.zeros_like(arr)
        gauge = np.zeros_like(arr)
        prev = None
        streak = np.zeros(arr.shape, dtype=int)
        for z in range(terms):
            t, mag = signed_terms(z)
            total += t
            gauge += mag
            if prev is not None:
                streak = np.where(mag > prev, streak + 1, 0)
                if np.any(streak >= 5):
                    bad = arr[streak >= 5]
                    raise SeriesDiverged(
                        f"series terms still growing at z={z} for x={bad.max():.4g}; "
                        "x too large for the requested term count"
                    )
            prev = mag
        # first omitted term plus the rounding floor of the alternating sum
        bound = signed_terms(terms)[1] + 4 * np.finfo(float).eps * gauge
        if np.ndim(x) == 0:
            total, bound = float(total[0]), float(bound[0])
        return (total, bound) if return_bound else total


def _etamu_coefficients_mp(h, H, phi, n, dps=50):
    """K, B, C and survival-polynomial tables in mpmath precision."""
    with mpmath.workdps(dps):
        h, H, phi = mpmath.mpf(h), mpmath.mpf(H), mpmath.mpf(phi)
        K = (h / H) ** n / mpmath.factorial(n - 1)
        psi = (2 * n * (h - H) / phi, 2 * n * (h + H) / phi)
        B = [[None] * n, [None] * n]
        C = [[None] * n, [None] * n]
        for beta in range(n):
            common = (mpmath.factorial(n + beta - 1) * mpmath.mpf(n) ** (n - beta)
                      / (mpmath.factorial(beta) * mpmath.factorial(n - beta - 1)
                         * mpmath.mpf(4) ** beta * phi ** (n - beta) * H ** beta))
            B[0][beta] = common * (-1) ** beta
            B[1][beta] = common * (-1) ** n
            cc = mpmath.factorial(n + beta - 1) / (mpmath.factorial(beta) * mpmath.mpf(2) ** (n + beta) * H ** beta)
            C[0][beta] = (-1) ** beta * cc / (h - H) ** (n - beta)
            C[1][beta] = (-1) ** n * cc / (h + H) ** (n - beta)
        poly = [[None] * n, [None] * n]
        for a in range(2):
            for k in range(n):
                poly[a][k] = psi[a] ** k / mpmath.factorial(k) * mpmath.fsum(C[a][: n - k])
        return {"K": K, "B": B, "C": C, "poly": poly, "psi": psi}


def _negbin_weights(n: int, rho: float, tail: float = 1e-17, cap: int = 20000) -> np.ndarray:
    """P(k; n, rho) of the negative binomial, truncated once the remaining mass is below ``tail``."""
    w = [rho ** n]
    total = w[0]
    k = 0
    while 1.0 - total > tail and k < cap:
        w.append(w[-1] * (n + k) / (k + 1) * (1.0 - rho))
        total += w[-1]
        k += 1
        if w[-1] < tail * 1e-3 and k > n / max(rho, 1e-12):
            break
    return np.array(w)

class TasExpansion:
    """Multinomial expansion of [F_r(x)]**n_s into exponential-polynomial terms.

    ``table[(m, n, u, v)]`` holds ``R = V**m * psi_u * psi_v`` and
    ``rates[(m, n)] = (m - n) psi1 + n psi2``.  Coefficients are accumulated in
    extended precision; evaluation falls back to it where the merged terms
    cancel below the double-precision floor.
    """

    _GAUGE_TOL = 1e-12

    def __init__(self, link: EtaMuMrc, n_s: int):
        if n_s * (link.n - 1) > MAX_TAS_POWER:
            raise ValueError(
                f"expansion power n_s*(N mu - 1) = {n_s * (link.n - 1)} exceeds {MAX_TAS_POWER}"
            )
        self.n_s = n_s
        self.V = -link.K
        self.table: dict[tuple[int, int, int, int], float] = {}
        self.rates: dict[tuple[int, int], float] = {}
        mp = link._mp
        merged: dict[tuple[int, float], mpmath.mpf] = {}
        with mpmath.workdps(50):
            V = -mp["K"]
            pow1, pow2 = [[mpmath.mpf(1)]], [[mpmath.mpf(1)]]
            for _ in range(n_s):
                pow1.append(_mp_convolve(pow1[-1], mp["poly"][0]))
                pow2.append(_mp_convolve(pow2[-1], mp["poly"][1]))
            for m in range(n_s + 1):
                vm = V ** m
                for n in range(m + 1):
                    phi_exp = (m - n) * link.psi[0] + n * link.psi[1]
                    self.rates[(m, n)] = phi_exp
                    binom = comb(n_s, m) * comb(m, n)
                    for u, cu in enumerate(pow1[m - n]):
                        for v, cv in enumerate(pow2[n]):
                            R = vm * cu * cv
                            self.table[(m, n, u, v)] = float(R)
                            # key on the integer rate multiplicities; float rates
                            # that coincide only up to rounding must not cancel
                            key = (u + v, m - n, n)
                            merged[key] = merged.get(key, 0) + binom * R
            self._mp_terms = [(c, p, i * mp["psi"][0] + j * mp["psi"][1])
                              for (p, i, j), c in merged.items() if c != 0]
        c = np.array([float(t[0]) for t in self._mp_terms])
        self.poly = ExpPoly(c, np.array([t[1] for t in self._mp_terms], float),
                            np.array([t[2] for t in self._mp_terms], float))

    def terms(self):
        """Yield (weight, power, rate) with weight = C(n_s, m) C(m, n) R."""
        for (m, n, u, v), R in self.table.items():
            yield comb(self.n_s, m) * comb(m, n) * R, u + v, self.rates[(m, n)]

    def __call__(self, x):
        arr = np.asarray(x, dtype=np.float64)
        flat_x = arr.ravel()
        flat = np.atleast_1d(np.asarray(self.poly(flat_x), dtype=float)).copy()
        gauge = np.atleast_1d(np.asarray(self.poly.abs_terms(flat_x)))
        for i in np.flatnonzero(gauge * np.finfo(float).eps > self._GAUGE_TOL):
            flat[i] = self._eval_mp(flat_x[i])
        out = flat.reshape(arr.shape)
        return float(out) if np.ndim(x) == 0 else out

    def _eval_mp(self, x: float) -> float:
        with mpmath.workdps(50):
            xm = mpmath.mpf(x)
            return float(mpmath.fsum(c * xm ** p * mpmath.exp(-r * xm)
                                     for c, p, r in self._mp_terms))


def _mp_convolve(a, b):
    out = [mpmath.mpf(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


class TasSnr:
    """Strongest of n_s i.i.d. eta-mu MRC SNRs (transmit antenna selection)."""

    def __init__(self, p: RfLinkParams, n_s: int):
        self.link = EtaMuMrc(p)
        self.n_s = int(n_s)
        try:
            self.expansion = TasExpansion(self.link, self.n_s)
        except ValueError:
            self.expansion = None

    def cdf(self, x):
        F = self.link.cdf(x)
        return F if self.n_s == 1 else F ** self.n_s

    def cdf_expanded(self, x):
        if self.expansion is None:
            raise ValueError("expansion unavailable for this (n_s, N mu)")
        out = np.clip(self.expansion(x), 0.0, 1.0)
        return float(out) if np.ndim(x) == 0 else out

    def sf(self, x):
        if self.n_s == 1:
            return self.link.sf(x)
        F = self.link.cdf(x)
        # 1 - F**n = (1 - F)(1 + F + ... + F**(n-1)) keeps precision when F ~ 1
        S = self.link.sf(x)
        geo = sum(np.asarray(F) ** k for k in range(self.n_s))
        out = S * geo
        return float(out) if np.ndim(x) == 0 else out

    def knees(self) -> list[float]:
        return self.link.knees()


class Megg:
    """Mixture exponential / generalized-Gamma SNR of the R-D optical hop."""

    def __init__(self, p: MeggParams):
        self.params = p
        self.kernel = megg_kernel_constants(p)
        self.psi_r = p.psi

    def pdf(self, x):
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr <= 0):
            raise DomainError("mEGG density is defined for x > 0")
        k = self.kernel
        lx = np.log(arr)
        out = np.zeros_like(arr)
        for i in range(2):
            if k.M[i] == 0.0:
                continue
            z = k.N[i] * np.exp(k.V[i] * lx)
            out += k.M[i] / arr * np.exp(k.U[i] * np.log(z) - z)
        return float(out) if np.ndim(x) == 0 else out

    def cdf(self, x):
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr < 0):
            raise DomainError("SNR must be >= 0")
        k = self.kernel
        out = np.zeros_like(arr)
        with np.errstate(divide="ignore"):
            lx = np.log(arr)
        for i in range(2):
            if k.S[i] == 0.0:
                continue
            z = np.where(arr > 0, k.N[i] * np.exp(k.V[i] * lx), 0.0)
            out += k.S[i] * meijer_g_1112(z, k.U[i])
        out = np.clip(out, 0.0, 1.0)
        return float(out) if np.ndim(x) == 0 else out

    def sf(self, x):
        out = 1.0 - np.asarray(self.cdf(x))
        return float(out) if np.ndim(x) == 0 else out

    def branch_cdf(self, i: int, x):
        """Unweighted i-th G-term gamma(U_i, N_i x**V_i) (i = 0, 1)."""
        k = self.kernel
        arr = np.asarray(x, dtype=np.float64)
        with np.errstate(divide="ignore"):
            z = np.where(arr > 0, k.N[i] * np.exp(k.V[i] * np.log(np.where(arr > 0, arr, 1.0))), 0.0)
        return meijer_g_1112(z, k.U[i])

    def knees(self) -> list[float]:
        p, r = self.params, self.params.r
        return [self.psi_r * p.lam ** r, self.psi_r * p.b ** r]


class DualHop:
    """End-to-end SNR min(gamma_r*, gamma_d) of the AF relay link."""

    def __init__(self, cfg: SystemConfig):
        self.cfg = cfg
        self.rf = TasSnr(cfg.sr, cfg.n_s)
        self.optical = Megg(cfg.rd)

    def cdf(self, x):
        Fr = np.asarray(self.rf.cdf(x))
        Fd = np.asarray(self.optical.cdf(x))
        lower = Fr + Fd - Fr * Fd
        # near 1 the survival product is monotone under rounding; the sum is not
        upper = 1.0 - np.asarray(self.rf.sf(x)) * np.asarray(self.optical.sf(x))
        out = np.where(lower > 0.5, upper, lower)
        return float(out) if np.ndim(x) == 0 else out

    def sf(self, x):
        out = np.asarray(self.rf.sf(x)) * np.asarray(self.optical.sf(x))
        return float(out) if np.ndim(x) == 0 else out

    def cdf_expanded(self, x):
        """The expanded TAS form times the un-expanded optical CDF."""
        Fd = np.asarray(self.optical.cdf(x))
        out = np.asarray(self.rf.cdf_expanded(x)) * (1.0 - Fd) + Fd
        return float(out) if np.ndim(x) == 0 else out

    def knees(self) -> list[float]:
        return self.rf.knees() + self.optical.knees()


# Functional surface ---------------------------------------------------------

def etamu_mrc_pdf(x, p: RfLinkParams):
    return EtaMuMrc(p).pdf(x)


def etamu_mrc_pdf_bessel(x, p: RfLinkParams):
    return EtaMuMrc(p).pdf_bessel(x)


def etamu_mrc_cdf(x, p: RfLinkParams):
    return EtaMuMrc(p).cdf(x)


def tas_cdf(x, p: RfLinkParams, n_s: int):
    return TasSnr(p, n_s).cdf(x)


def tas_cdf_expanded(x, p: RfLinkParams, n_s: int):
    return TasSnr(p, n_s).cdf_expanded(x)


def megg_pdf(x, p: MeggParams):
    return Megg(p).pdf(x)


def megg_cdf(x, p: MeggParams):
    return Megg(p).cdf(x)


def eav_pdf(x, p: RfLinkParams):
    return EtaMuMrc(p).pdf(x)


def eav_cdf(x, p: RfLinkParams):
    return EtaMuMrc(p).cdf(x)


def eav_cdf_series(x, p: RfLinkParams, terms: int = 20, return_bound: bool = False):
    return EtaMuMrc(p).cdf_series(x, terms=terms, return_bound=return_bound)


def dualhop_cdf(x, cfg: SystemConfig):
    return DualHop(cfg).cdf(x)


def dualhop_cdf_expanded(x, cfg: SystemConfig):
    return DualHop(cfg).cdf_expanded(x)
