"""Coverage and outage probabilities from the closed-form and quadrature expressions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .channels import InterferenceParams, RicianParams, ShadowedRicianParams, sr_survival
from .geometry import GeometryParams, d0_squared_pdf, d0_support
from .specfun import (
    MU_COEFFS,
    UPSILON_COEFFS,
    chebyshev_rule,
    marcum_q1,
    marcum_q1_approx,
    upper_inc_gamma,
)

log = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUAD_LIMIT = 10_000
CLAMP_WARN = 1e-3


class UnsupportedConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureOrders:
    G: int = 50  # cos(theta) nodes
    H: int = 50  # interferer radius nodes
    J: int = 50  # receiver radius nodes
    Q: int = 50  # d0^2 nodes

    def __post_init__(self):
        for name in ("G", "H", "J", "Q"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValueError(f"quadrature order {name} must be a positive integer")

    def doubled(self) -> QuadratureOrders:
        return QuadratureOrders(2 * self.G, 2 * self.H, 2 * self.J, 2 * self.Q)


@dataclass(frozen=True)
class ProbabilityResult:
    value: float
    method: str  # "exact-integral" | "closed-approx" | "quadrature"
    threshold: float
    orders: QuadratureOrders | None = None
    raw: float | None = None  # pre-clamp value
    refinement_delta: float | None = None  # |value(2n) - value(n)| when requested

    def __float__(self):
        return self.value


CoverageResult = OutageResult = ProbabilityResult


def _clamp(value, what):
    if value < 0.0 or value > 1.0:
        level = logging.WARNING if min(abs(value), abs(value - 1)) > CLAMP_WARN else logging.DEBUG
        log.log(level, "%s: clamping quadrature value %.3e into [0, 1]", what, value)
    return min(max(value, 0.0), 1.0)


def _check_n2(n2):
    if n2 != 2:
        raise UnsupportedConfiguration(
            f"interference analysis supports path-loss exponent 2 only, got {n2}"
        )


# -- non-interference coverage -------------------------------------------------------


def _theta(rician: RicianParams, gamma_th):
    return 2 * (1 + rician.K) * gamma_th / rician.Omega_R


def coverage_ni_exact(geom: GeometryParams, rician: RicianParams, gamma_th, n2=2, q1=marcum_q1):
    """Average of Q1(sqrt(2K), sqrt(Theta d^n2)) over the receiver distance density.

    ``q1`` may be swapped for :func:`marcum_q1_approx` to integrate the
    approximated integrand directly.
    """
    a = math.sqrt(2 * rician.K)
    th = _theta(rician, gamma_th)
    lo, hi = geom.H1, math.hypot(geom.H1, geom.L)

    def integrand(x):
        return x * q1(a, math.sqrt(th * x**n2))

    val, _ = integrate.quad(integrand, lo, hi, epsabs=QUAD_EPSABS, epsrel=1e-12, limit=QUAD_LIMIT)
    raw = 2.0 / geom.L**2 * val
    method = "exact-integral" if q1 is marcum_q1 else "approx-integral"
    return ProbabilityResult(_clamp(raw, "coverage_ni_exact"), method, gamma_th, raw=raw)


def fit_exponents(K):
    """mu and upsilon of the Q1 exponential fit evaluated at a = sqrt(2K)."""
    a = math.sqrt(2 * K)
    mu = float(np.polynomial.polynomial.polyval(a, MU_COEFFS))
    ups = float(np.polynomial.polynomial.polyval(a, UPSILON_COEFFS))
    return mu, ups


def coverage_ni_approx(geom: GeometryParams, rician: RicianParams, gamma_th, n2=2):
    """Closed form in upper incomplete gamma functions of the fitted integrand."""
    mu, ups = fit_exponents(rician.K)
    th = _theta(rician, gamma_th)
    if th == 0:
        return ProbabilityResult(1.0, "closed-approx", gamma_th, raw=1.0)
    scale = math.exp(ups) * th ** (mu / 2)
    y_min = scale * geom.H1 ** (n2 * mu / 2)
    y_max = scale * (geom.H1**2 + geom.L**2) ** (n2 * mu / 4)
    shape = 4 / (n2 * mu)
    pref = 4 / (geom.L**2 * n2 * mu) * math.exp(-4 * ups / (n2 * mu)) * th ** (-2 / n2)
    raw = pref * (upper_inc_gamma(shape, y_min) - upper_inc_gamma(shape, y_max))
    return ProbabilityResult(_clamp(raw, "coverage_ni_approx"), "closed-approx", gamma_th, raw=raw)


# -- interference coverage ---------------------------------------------------------------


def cdf_z(z, ip: InterferenceParams):
    """CDF of the fading ratio P_R|h_RD|^2 / (P_I|h_ID|^2)."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("cdf_z requires z > 0")
    theta = 1.0 / (ip.Gamma2 + ip.Gamma3 / z)
    out = ip.Gamma1 * theta * np.exp(ip.Gamma4 * theta)
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def _radial_rule(n):
    """Nodes/weights mapping a Chebyshev rule onto int_{-1}^{1} (y+1) f(y) dy."""
    rule = chebyshev_rule(n)
    w = rule.weights * np.sqrt(1 - rule.nodes**2) * (rule.nodes + 1)
    return rule.nodes + 1, w


def _cdf_gamma_rd_raw(x, geom: GeometryParams, ip: InterferenceParams, orders: QuadratureOrders):
    ang = chebyshev_rule(orders.G)
    cos_t = ang.nodes[:, None, None]
    w_g = ang.weights[:, None, None]
    zi, w_j = _radial_rule(orders.H)  # interferer radius, eta1 * (zeta + 1)
    ki, w_k = _radial_rule(orders.J)  # receiver radius, eta2 * (kappa + 1)
    r_I = 0.5 * geom.T_I * zi[None, :, None]
    r_i = 0.5 * geom.L * ki[None, None, :]
    u2 = r_i**2 + r_I**2 - 2 * r_I * r_i * cos_t
    d2 = r_i**2 + geom.H1**2
    theta = 1.0 / (ip.Gamma2 + ip.Gamma3 / x * u2 / d2)
    kernel = theta * np.exp(ip.Gamma4 * theta)
    weights = w_g * w_j[None, :, None] * w_k[None, None, :]
    return ip.Gamma1 / (4 * math.pi) * float(np.sum(weights * kernel))


def cdf_gamma_rd_interference(
    x, geom: GeometryParams, ip: InterferenceParams, orders: QuadratureOrders = QuadratureOrders(), n2=2
):
    """CDF of the relay->receiver SIR averaged over receiver and interferer positions.

    Triple Gauss-Chebyshev sum over cos(theta), the interferer radius and the
    receiver radius (G, H, J nodes).
    """
    _check_n2(n2)
    if not x > 0:
        raise ValueError("SIR threshold must be positive")
    raw = _cdf_gamma_rd_raw(x, geom, ip, orders)
    return ProbabilityResult(_clamp(raw, "cdf_gamma_rd"), "quadrature", x, orders, raw=raw)


def coverage_interference(
    geom: GeometryParams,
    ip: InterferenceParams,
    gamma_th,
    orders: QuadratureOrders = QuadratureOrders(),
    n2=2,
    refine=False,
):
    cdf = cdf_gamma_rd_interference(gamma_th, geom, ip, orders, n2)
    raw = 1.0 - cdf.raw
    delta = None
    if refine:
        delta = abs(_cdf_gamma_rd_raw(gamma_th, geom, ip, orders.doubled()) - cdf.raw)
    return ProbabilityResult(
        _clamp(raw, "coverage_interference"), "quadrature", gamma_th, orders, raw, delta
    )


# -- satellite -> relay outage ---------------------------------------------------------------


def outage_sr_conditional(d0, sr: ShadowedRicianParams, gamma_out, n1=2):
    """Outage of the satellite hop at a fixed distance d0 (path-loss exponent 2)."""
    if n1 != 2:
        raise UnsupportedConfiguration("satellite outage supports path-loss exponent 2 only")
    d0 = np.asarray(d0, dtype=float)
    out = 1.0 - np.asarray(sr_survival(gamma_out * d0**2, sr))
    return out if out.ndim else float(out)


def _outage_sr_raw(geom, sr, gamma_out, Q):
    sup = d0_support(geom)
    b1 = 0.5 * (sup.d0_max_sq - sup.d0_min_sq)
    b2 = 0.5 * (sup.d0_max_sq + sup.d0_min_sq)
    rule = chebyshev_rule(Q)
    x = b1 * rule.nodes + b2
    w = b1 * rule.weights * np.sqrt(1 - rule.nodes**2)
    # 1 - E[survival]: the quadrature weights carry the d0^2 density
    return 1.0 - float(np.sum(w * d0_squared_pdf(x, geom) * sr_survival(gamma_out * x, sr)))


def outage_sr(
    geom: GeometryParams,
    sr: ShadowedRicianParams,
    gamma_out,
    orders: QuadratureOrders = QuadratureOrders(),
    refine=False,
):
    """Satellite-hop outage averaged over the uniform satellite position (Q-node sum)."""
    raw = _outage_sr_raw(geom, sr, gamma_out, orders.Q)
    delta = abs(_outage_sr_raw(geom, sr, gamma_out, 2 * orders.Q) - raw) if refine else None
    return ProbabilityResult(_clamp(raw, "outage_sr"), "quadrature", gamma_out, orders, raw, delta)


# -- end to end ----------------------------------------------------------------------------


def e2e_outage(
    geom: GeometryParams,
    sr: ShadowedRicianParams,
    scenario: str,
    gamma_th,
    gamma_out,
    *,
    rician: RicianParams | None = None,
    ip: InterferenceParams | None = None,
    orders: QuadratureOrders = QuadratureOrders(),
    ni_method: str = "approx",
):
    """Decode-and-forward end-to-end outage 1 - p_c (1 - P_out,SR).

    ``scenario`` is "ni" (needs ``rician``) or "is" (needs ``ip``). For "ni"
    the coverage comes from the closed form unless ``ni_method="exact"``.
    """
    if scenario == "ni":
        if rician is None:
            raise ValueError("non-interference scenario needs Rician parameters")
        if ni_method == "approx":
            pc = coverage_ni_approx(geom, rician, gamma_th).value
        elif ni_method == "exact":
            pc = coverage_ni_exact(geom, rician, gamma_th).value
        else:
            raise ValueError(f"unknown ni_method {ni_method!r}")
    elif scenario == "is":
        if ip is None:
            raise ValueError("interference scenario needs interference parameters")
        pc = coverage_interference(geom, ip, gamma_th, orders).value
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    pout = outage_sr(geom, sr, gamma_out, orders).value
    raw = 1.0 - pc * (1.0 - pout)
    method = "quadrature" if scenario == "is" or ni_method == "exact" else "closed-approx"
    return ProbabilityResult(_clamp(raw, "e2e_outage"), method, gamma_out, orders, raw)

