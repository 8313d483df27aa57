"""Scenario parameters for the S-R / S-E eta-mu hops and the R-D mEGG hop.

Everything is stored in the linear SNR domain.  dB values are converted once,
at the configuration boundary, with :func:`db_to_linear`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .errors import DegenerateEta, ValidationError

_DEGENERATE_RTOL = 1e-9


class EtaMuFormat(enum.Enum):
    FormatI = "I"
    FormatII = "II"

    @classmethod
    def parse(cls, value) -> "EtaMuFormat":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("FORMAT", "").strip(" _-")
        for member in cls:
            if member.value == key:
                return member
        raise ValidationError(f"unknown eta-mu format {value!r} (expected 'I' or 'II')")


class Detection(enum.IntEnum):
    """Optical detection technique; the integer value is the exponent r."""

    HD = 1
    IMDD = 2

    @classmethod
    def parse(cls, value) -> "Detection":
        if isinstance(value, cls):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            if value not in (1, 2):
                raise ValidationError(f"detection exponent must be 1 (HD) or 2 (IMDD), got {value}")
            return cls(value)
        key = str(value).strip().upper().replace("/", "").replace("-", "")
        if key in ("HD", "1", "HETERODYNE"):
            return cls.HD
        if key in ("IMDD", "2"):
            return cls.IMDD
        raise ValidationError(f"unknown detection type {value!r} (expected 'HD' or 'IMDD')")


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def derive_h_H(eta: float, fmt: EtaMuFormat = EtaMuFormat.FormatI) -> tuple[float, float]:
    """Return the (h, H) pair of the eta-mu distribution for the given format."""
    fmt = EtaMuFormat.parse(fmt)
    eta = float(eta)
    if fmt is EtaMuFormat.FormatI:
        if not (0.0 < eta < math.inf):
            raise ValidationError(f"Format I requires 0 < eta < inf, got {eta}")
        h = (2.0 + 1.0 / eta + eta) / 4.0
        H = (1.0 / eta - eta) / 4.0
    else:
        if not (-1.0 < eta < 1.0):
            raise ValidationError(f"Format II requires -1 < eta < 1, got {eta}")
        h = 1.0 / (1.0 - eta * eta)
        H = eta / (1.0 - eta * eta)
    if abs(H) < _DEGENERATE_RTOL * h:
        raise DegenerateEta(
            f"eta={eta} gives H={H:.3g}; the integer-mu expansion is singular there "
            "(use eta = 1 +/- 1e-3 for the Nakagami limit)"
        )
    return h, H


def _as_positive_int(value, name: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    try:
        as_float = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a positive integer, got {value!r}") from None
    if not as_float.is_integer() or as_float < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return int(as_float)


def _as_positive_float(value, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a positive number, got {value!r}") from None
    if not (v > 0.0 and math.isfinite(v)):
        raise ValidationError(f"{name} must be finite and > 0, got {value!r}")
    return v


@dataclass(frozen=True)
class RfLinkParams:
    """One eta-mu hop after MRC over ``n_antennas`` branches.

    Used for both the S-R link (N_r, phi_r) and the S-E link (N_e, phi_e).
    """

    eta: float
    mu: int
    n_antennas: int
    avg_snr: float
    format: EtaMuFormat = EtaMuFormat.FormatI
    h: float = field(init=False, repr=False)
    H: float = field(init=False, repr=False)

    def __post_init__(self):
        fmt = EtaMuFormat.parse(self.format)
        object.__setattr__(self, "format", fmt)
        object.__setattr__(self, "mu", _as_positive_int(self.mu, "mu"))
        object.__setattr__(self, "n_antennas", _as_positive_int(self.n_antennas, "n_antennas"))
        object.__setattr__(self, "avg_snr", _as_positive_float(self.avg_snr, "avg_snr"))
        h, H = derive_h_H(self.eta, fmt)
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "H", H)

    @property
    def order(self) -> int:
        """Combined cluster count N*mu of the MRC output."""
        return self.n_antennas * self.mu

    @property
    def psi1(self) -> float:
        return 2.0 * self.order * (self.h - self.H) / self.avg_snr

    @property
    def psi2(self) -> float:
        return 2.0 * self.order * (self.h + self.H) / self.avg_snr

    def with_snr(self, avg_snr: float) -> "RfLinkParams":
        return replace(self, avg_snr=avg_snr)


class MeggKernel(NamedTuple):
    """Per-branch constants (N_i, V_i, U_i, M_i, S_i), i = 1 (exponential), 2 (GG)."""

    N: tuple[float, float]
    V: tuple[float, float]
    U: tuple[float, float]
    M: tuple[float, float]
    S: tuple[float, float]


@dataclass(frozen=True)
class MeggParams:
    """Mixture exponential / generalized-Gamma irradiance model of the R-D hop."""

    omega: float
    lam: float
    a: float
    b: float
    c: float
    detection: Detection = Detection.HD
    avg_snr_d: float = 1.0
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "detection", Detection.parse(self.detection))
        omega = float(self.omega)
        if not (0.0 < omega <= 1.0):
            raise ValidationError(f"omega must lie in (0, 1], got {self.omega!r}")
        object.__setattr__(self, "omega", omega)
        for name in ("lam", "a", "b", "c", "avg_snr_d"):
            object.__setattr__(self, name, _as_positive_float(getattr(self, name), name))
        psi = electrical_snr(self)
        if not (psi > 0.0 and math.isfinite(psi)):
            raise ValidationError(f"electrical SNR must be finite and > 0, got {psi}")

    @property
    def r(self) -> int:
        return int(self.detection)

    @property
    def psi(self) -> float:
        return electrical_snr(self)

    def with_snr(self, avg_snr_d: float) -> "MeggParams":
        return replace(self, avg_snr_d=avg_snr_d)


def imdd_normalisation(omega: float, lam: float, a: float, b: float, c: float) -> float:
    """Second irradiance moment E[I^2] of the mEGG mixture."""
    gg = 0.0
    if omega < 1.0:
        gg = b * b * (1.0 - omega) * math.exp(math.lgamma(a + 2.0 / c) - math.lgamma(a))
    return 2.0 * omega * lam * lam + gg


def electrical_snr(p: MeggParams) -> float:
    """Electrical SNR Psi_r: phi_d for HD, phi_d / E[I^2] for IM/DD."""
    if p.detection is Detection.HD:
        return p.avg_snr_d
    return p.avg_snr_d / imdd_normalisation(p.omega, p.lam, p.a, p.b, p.c)


def megg_kernel_constants(p: MeggParams) -> MeggKernel:
    r = p.r
    psi = electrical_snr(p)
    gamma_a = math.gamma(p.a)
    return MeggKernel(
        N=(1.0 / (p.lam * psi ** (1.0 / r)), 1.0 / (p.b ** p.c * psi ** (p.c / r))),
        V=(1.0 / r, p.c / r),
        U=(1.0, p.a),
        M=(p.omega / r, p.c * (1.0 - p.omega) / (r * gamma_a)),
        S=(p.omega, (1.0 - p.omega) / gamma_a),
    )


@dataclass(frozen=True)
class SystemConfig:
    """Four-node scenario: TAS/MRC S-R hop, passive S-E wiretap hop, mEGG R-D hop."""

    sr: RfLinkParams
    se: RfLinkParams
    rd: MeggParams
    n_s: int = 1
    target_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "n_s", _as_positive_int(self.n_s, "n_s"))
        rate = float(self.target_rate)
        if not (rate >= 0.0 and math.isfinite(rate)):
            raise ValidationError(f"target_rate must be >= 0 bits/s/Hz, got {self.target_rate!r}")
        object.__setattr__(self, "target_rate", rate)

    @property
    def sigma(self) -> float:
        """Threshold multiplier 2**target_rate."""
        return 2.0 ** self.target_rate

    def replace(self, **changes) -> "SystemConfig":
        return replace(self, **changes)
