"""Fading models for the three link types and their samplers.

* satellite -> relay: Shadowed-Rician (integer severity m)
* relay -> receiver: Rician with Rice factor K
* interferer -> receiver: Rayleigh (exponential power with rate lambda_I)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import bessel_i0e, marcum_q1


class ChannelError(ValueError):
    pass


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class ShadowedRicianParams:
    """Shadowed-Rician power gain scaled by the transmit SNR ``lambda_bar``.

    ``2b`` is the multipath power, ``Omega`` the LOS power, ``m`` the severity.
    """

    b: float
    m: int
    Omega: float
    lambda_bar: float = 1.0
    alpha: float = field(init=False)
    beta: float = field(init=False)
    delta: float = field(init=False)

    def __post_init__(self):
        if not (self.b > 0 and self.Omega > 0 and self.lambda_bar > 0):
            raise ChannelError("b, Omega and lambda_bar must be positive")
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ChannelError(f"m must be a positive integer, got {self.m!r}")
        b, m, Om = self.b, int(self.m), self.Omega
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "alpha", (2 * b * m / (2 * b * m + Om)) ** m / (2 * b))
        object.__setattr__(self, "beta", 1 / (2 * b))
        object.__setattr__(self, "delta", Om / (2 * b * (2 * b * m + Om)))

    @property
    def decay(self):
        """Exponential rate (beta - delta) / lambda_bar of the power density."""
        return self.m / (2 * self.b * self.m + self.Omega) / self.lambda_bar

    def varsigma(self, k):
        """Series coefficient (-1)^k (1-m)_k delta^k / (k!)^2."""
        poch = 1.0
        for i in range(k):
            poch *= 1 - self.m + i
        return (-1) ** k * poch * self.delta**k / math.factorial(k) ** 2


@dataclass(frozen=True)
class RicianParams:
    K: float
    Omega_R: float  # mean of the power

    def __post_init__(self):
        if not (self.K >= 0 and self.Omega_R > 0):
            raise ChannelError("need K >= 0 and Omega_R > 0")


@dataclass(frozen=True)
class InterferenceParams:
    """Rician desired link against a Rayleigh interferer.

    ``Omega_X`` is the mean of |h_RD|^2, i.e. Omega_R * sigma^2 / P_R.
    """

    K: float
    Omega_X: float
    lambda_I: float = 1.0
    P_R: float = 1.0
    P_I: float = 1.0

    def __post_init__(self):
        if not (self.K >= 0 and self.Omega_X > 0 and self.lambda_I > 0):
            raise ChannelError("need K >= 0, Omega_X > 0, lambda_I > 0")
        if not (self.P_R > 0 and self.P_I > 0):
            raise ChannelError("powers must be positive")

    @property
    def Gamma2(self):
        return (1 + self.K) / self.Omega_X

    @property
    def Gamma1(self):
        return self.Gamma2 * math.exp(-self.K)

    @property
    def Gamma3(self):
        return self.lambda_I * self.P_R / self.P_I

    @property
    def Gamma4(self):
        return self.K * self.Gamma2


# -- Shadowed-Rician -------------------------------------------------------------


def sr_pdf(x, p: ShadowedRicianParams):
    x = np.asarray(x, dtype=float)
    lb = p.lambda_bar
    acc = np.zeros_like(x)
    for k in range(p.m):
        acc = acc + p.varsigma(k) / lb ** (k + 1) * x**k
    out = np.where(x >= 0, p.alpha * acc * np.exp(-p.decay * x), 0.0)
    return out if out.ndim else float(out)


def sr_survival(x, p: ShadowedRicianParams):
    """1 - CDF of lambda_bar * |h_SR|^2, summed directly (no cancellation)."""
    x = np.asarray(x, dtype=float)
    xc = np.maximum(x, 0.0)
    c = p.decay
    lb = p.lambda_bar
    acc = np.zeros_like(xc)
    for k in range(p.m):
        inner = np.zeros_like(xc)
        for q in range(k + 1):
            inner = inner + math.factorial(k) / math.factorial(q) * c ** (-(k + 1 - q)) * xc**q
        acc = acc + p.varsigma(k) / lb ** (k + 1) * inner
    out = np.where(x > 0, np.clip(p.alpha * acc * np.exp(-c * xc), 0.0, 1.0), 1.0)
    return out if out.ndim else float(out)


def sr_cdf(x, p: ShadowedRicianParams):
    """CDF of lambda_bar * |h_SR|^2 in the finite double-sum form."""
    out = 1.0 - np.asarray(sr_survival(x, p))
    return out if out.ndim else float(out)


def sample_shadowed_rician(rng: np.random.Generator, p: ShadowedRicianParams, size: int):
    """Draw lambda_bar * |A e^{j phi} + Z|^2 with A^2 ~ Gamma(m, Omega/m), Z ~ CN(0, 2b).

    The scatter term is circular, so the LOS phase is dropped.
    """
    los = np.sqrt(rng.gamma(p.m, p.Omega / p.m, size))
    s = math.sqrt(p.b)
    re = los + s * rng.standard_normal(size)
    im = s * rng.standard_normal(size)
    return p.lambda_bar * (re * re + im * im)


# -- Rician / Rayleigh ---------------------------------------------------------------


def rician_pdf(x, p: RicianParams):
    x = np.asarray(x, dtype=float)
    g = (1 + p.K) / p.Omega_R
    xc = np.maximum(x, 0.0)
    z = 2 * np.sqrt(p.K * g * xc)
    out = np.where(x >= 0, g * np.exp(z - p.K - g * xc) * bessel_i0e(z), 0.0)
    return out if out.ndim else float(out)


def rician_cdf(x, p: RicianParams):
    x = np.asarray(x, dtype=float)
    b = np.sqrt(2 * (1 + p.K) * np.maximum(x, 0.0) / p.Omega_R)
    out = np.where(x > 0, 1.0 - marcum_q1(math.sqrt(2 * p.K), b), 0.0)
    return out if out.ndim else float(out)


def sample_rician_power(rng: np.random.Generator, p: RicianParams, size: int):
    los = math.sqrt(p.K * p.Omega_R / (1 + p.K))
    s = math.sqrt(p.Omega_R / (2 * (1 + p.K)))
    re = los + s * rng.standard_normal(size)
    im = s * rng.standard_normal(size)
    return re * re + im * im


def sample_rayleigh_power(rng: np.random.Generator, lambda_I: float, size: int):
    return rng.exponential(1.0 / lambda_I, size)
