"""Node placement: distances, position distributions and samplers.

All lengths are kilometres. Samplers take an explicit ``numpy.random.Generator``
and a sample count and return arrays; nothing here holds random state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class GeometryParams:
    H1: float = 5.0  # relay altitude
    L: float = 20.0  # receiver disk radius
    T_I: float = 30.0  # interferer disk radius
    R_E: float = 6371.0
    U1: float = 8371.0  # outer shell radius
    U2: float = 6531.0  # inner shell radius
    Psi: float = math.pi / 3  # full apex angle of the satellite cone
    density: float = 0.01  # receivers per km^2
    H_max_R: float | None = None  # optional ceiling on relay altitude
    H_R: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "H_R", self.H1 + self.R_E)
        if not self.H1 > 0:
            raise GeometryError("H1 must be positive")
        if not 0 <= self.L < self.T_I:
            raise GeometryError("need 0 <= L < T_I")
        if not self.U2 <= self.U1:
            raise GeometryError("need U2 <= U1")
        if not 0 < self.Psi <= 2 * math.pi:
            raise GeometryError("Psi must lie in (0, 2*pi]")
        if self.U2 < self.H_R:
            raise GeometryError("satellite shell must lie above the relay (U2 >= H1 + R_E)")
        if self.density < 0:
            raise GeometryError("density must be nonnegative")
        if self.H_max_R is not None and self.H1 > self.H_max_R:
            raise GeometryError("H1 exceeds H_max_R")


# -- receiver population -------------------------------------------------------


def expected_node_count(params: GeometryParams) -> float:
    return math.pi * params.L**2 * params.density


def node_count_pmf(k, mean):
    """Poisson probability of k receivers in the coverage disk."""
    return stats.poisson.pmf(k, mean)


def receiver_distance_pdf(x, params: GeometryParams):
    """Density of the relay-to-receiver distance, 2x/L^2 on [H1, sqrt(H1^2+L^2)]."""
    x = np.asarray(x, dtype=float)
    lo, hi = params.H1, math.hypot(params.H1, params.L)
    out = np.where((x >= lo) & (x <= hi), 2 * x / params.L**2, 0.0)
    return out if out.ndim else float(out)


def interferer_distance(r_i, r_I, theta):
    """Receiver-to-interferer distance from polar coordinates (law of cosines)."""
    r_i, r_I, theta = (np.asarray(v, dtype=float) for v in (r_i, r_I, theta))
    u2 = r_i**2 + r_I**2 - 2 * r_i * r_I * np.cos(theta)
    out = np.sqrt(np.maximum(u2, 0.0))
    return out if out.ndim else float(out)


# -- satellite ------------------------------------------------------------------


@dataclass(frozen=True)
class D0SquaredSupport:
    d0_min_sq: float
    d0_max_sq: float
    tau: float


def d0_support(params: GeometryParams) -> D0SquaredSupport:
    H, c = params.H_R, math.cos(params.Psi / 2)
    d_min = params.U2 - H
    d_max_sq = params.U1**2 + H**2 - 2 * params.U1 * H * c
    tau = 3.0 / (4 * H) / (1 - c) / (params.U1**3 - params.U2**3)
    return D0SquaredSupport(d_min**2, d_max_sq, tau)


def satellite_distance(r_S, theta, params: GeometryParams):
    """Relay-to-satellite distance for a satellite at radius r_S, polar angle theta."""
    r_S = np.asarray(r_S, dtype=float)
    theta = np.asarray(theta, dtype=float)
    slack = 1e-9 * params.U1
    if np.any(r_S < params.U2 - slack) or np.any(r_S > params.U1 + slack):
        raise GeometryError("r_S outside [U2, U1]")
    if np.any(theta < 0) or np.any(theta > params.Psi / 2 + 1e-12):
        raise GeometryError("theta outside [0, Psi/2]")
    H = params.H_R
    d2 = r_S**2 + H**2 - 2 * r_S * H * np.cos(theta)
    out = np.sqrt(np.maximum(d2, 0.0))
    return out if out.ndim else float(out)


def cone_shell_volume(params: GeometryParams) -> float:
    return 2 * math.pi / 3 * (1 - math.cos(params.Psi / 2)) * (params.U1**3 - params.U2**3)


def d0_squared_pdf(x, params: GeometryParams):
    """Density of the squared relay-satellite distance for a uniform satellite.

    For fixed r_S = y, d0^2 is uniform over [(y-H_R)^2, y^2 + H_R^2 - 2 y H_R cos(Psi/2)],
    and integrating y over its admissible range gives tau * (omega^2 - rho^2).
    """
    x = np.asarray(x, dtype=float)
    sup = d0_support(params)
    H = params.H_R
    half = params.Psi / 2
    s2 = (H * math.sin(half)) ** 2
    sx = np.sqrt(np.maximum(x, 0.0))
    omega = np.minimum(params.U1, H + sx)
    # below H_R^2 sin^2 the cone-edge constraint is inactive, so the U2 branch wins
    edge = H * math.cos(half) + np.sqrt(np.maximum(x - s2, 0.0))
    rho = np.where(x >= s2, np.maximum(params.U2, edge), params.U2)
    dens = sup.tau * np.maximum(omega**2 - rho**2, 0.0)
    inside = (x >= sup.d0_min_sq) & (x <= sup.d0_max_sq)
    out = np.where(inside, dens, 0.0)
    return out if out.ndim else float(out)


def d0_squared_cdf(x, params: GeometryParams):
    """CDF of d0^2, by direct integration of the r_S-conditional uniform law."""
    from scipy import integrate

    sup = d0_support(params)

    def one(xv):
        if xv <= sup.d0_min_sq:
            return 0.0
        if xv >= sup.d0_max_sq:
            return 1.0
        val, _ = integrate.quad(
            lambda t: d0_squared_pdf(t, params), sup.d0_min_sq, xv, limit=200, epsabs=1e-12
        )
        return min(max(val, 0.0), 1.0)

    x = np.asarray(x, dtype=float)
    out = np.vectorize(one, otypes=[float])(x)
    return out if out.ndim else float(out)


# -- samplers -------------------------------------------------------------------


def receiver_radius_from_uniform(u, params: GeometryParams):
    return params.L * np.sqrt(u)


def sample_receiver(rng: np.random.Generator, params: GeometryParams, size: int):
    """Uniform receiver in the coverage disk; returns (ground radius r_i, slant distance d_i)."""
    r = receiver_radius_from_uniform(rng.random(size), params)
    return r, np.sqrt(params.H1**2 + r**2)


def interferer_radius_from_uniform(u, params: GeometryParams):
    return params.T_I * np.sqrt(u)


def sample_interferer(rng: np.random.Generator, params: GeometryParams, size: int):
    """Uniform interferer in the disk of radius T_I; returns (r_I, theta)."""
    r = interferer_radius_from_uniform(rng.random(size), params)
    theta = 2 * math.pi * rng.random(size)
    return r, theta


def satellite_radius_from_uniform(u, params: GeometryParams):
    lo3, hi3 = params.U2**3, params.U1**3
    return np.cbrt(lo3 + u * (hi3 - lo3))


def sample_satellite(rng: np.random.Generator, params: GeometryParams, size: int):
    """Uniform satellite in the spherical cone shell; returns (r_S, theta, d0)."""
    r = satellite_radius_from_uniform(rng.random(size), params)
    c = math.cos(params.Psi / 2)
    cos_t = 1.0 - rng.random(size) * (1.0 - c)
    theta = np.arccos(np.clip(cos_t, c, 1.0))
    H = params.H_R
    d0 = np.sqrt(np.maximum(r**2 + H**2 - 2 * r * H * cos_t, 0.0))
    return r, theta, d0
