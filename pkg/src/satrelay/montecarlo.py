"""Monte-Carlo simulation of every analytic quantity.

Trials are split into fixed-size blocks. Block ``b`` draws from a Philox
stream keyed by ``(seed, b)``, so the estimate depends only on
``(seed, trials)`` and never on how blocks are spread across workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, stats

from . import channels as ch
from . import geometry as geo
from .analytic import cdf_z

BLOCK_SIZE = 1 << 16
WORKERS_ENV = "SATRELAY_WORKERS"

SCENARIOS = (
    "coverage-ni",
    "coverage-is",
    "outage-sr",
    "outage-sr-fixed",
    "e2e-ni",
    "e2e-is",
    "cdf-z",
)


class McConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class McConfig:
    scenario: str
    trials: int = 1_000_000
    seed: int = 0
    workers: int | None = None  # None: read SATRELAY_WORKERS, default 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise McConfigurationError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise McConfigurationError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise McConfigurationError("seed must fit in 64 bits")


@dataclass(frozen=True)
class ChannelSet:
    rician: ch.RicianParams | None = None
    ip: ch.InterferenceParams | None = None
    sr: ch.ShadowedRicianParams | None = None


@dataclass(frozen=True)
class Thresholds:
    gamma_th: float = 1.0
    gamma_out: float = 1.0
    z: float = 1.0  # cdf-z evaluation point
    d0: float | None = None  # fixed distance for outage-sr-fixed


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int
    count: int

    def z_score(self, value):
        if self.std_error == 0:
            return 0.0 if value == self.mean else math.copysign(math.inf, self.mean - value)
        return (self.mean - value) / self.std_error


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed + (block << 64)))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _blocks(trials):
    return [(b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE)) for b in range(-(-trials // BLOCK_SIZE))]


def _need(value, name, scenario):
    if value is None:
        raise McConfigurationError(f"scenario {scenario!r} needs {name}")
    return value


# -- per-trial pipelines: each returns a boolean event array ------------------------------


def _covered_ni(rng, n, geom, chans, thr, n2=2):
    _, d = geo.sample_receiver(rng, geom, n)
    lam_r = ch.sample_rician_power(rng, chans.rician, n)
    return lam_r / d**n2 >= thr.gamma_th


def _covered_is(rng, n, geom, chans, thr):
    ip = chans.ip
    r_i, d = geo.sample_receiver(rng, geom, n)
    r_I, theta = geo.sample_interferer(rng, geom, n)
    u = geo.interferer_distance(r_i, r_I, theta)
    x = ch.sample_rician_power(rng, ch.RicianParams(ip.K, ip.Omega_X), n)
    y = ch.sample_rayleigh_power(rng, ip.lambda_I, n)
    sir = ip.P_R * x * u**2 / (ip.P_I * y * d**2)
    return sir >= thr.gamma_th


def _outage_sr(rng, n, geom, chans, thr):
    _, _, d0 = geo.sample_satellite(rng, geom, n)
    lam_s = ch.sample_shadowed_rician(rng, chans.sr, n)
    return lam_s / d0**2 <= thr.gamma_out


def _outage_sr_fixed(rng, n, geom, chans, thr):
    lam_s = ch.sample_shadowed_rician(rng, chans.sr, n)
    return lam_s / thr.d0**2 <= thr.gamma_out


def _cdf_z(rng, n, geom, chans, thr):
    ip = chans.ip
    x = ch.sample_rician_power(rng, ch.RicianParams(ip.K, ip.Omega_X), n)
    y = ch.sample_rayleigh_power(rng, ip.lambda_I, n)
    return ip.P_R * x / (ip.P_I * y) <= thr.z


def _e2e_ni(rng, n, geom, chans, thr):
    return _outage_sr(rng, n, geom, chans, thr) | ~_covered_ni(rng, n, geom, chans, thr)


def _e2e_is(rng, n, geom, chans, thr):
    return _outage_sr(rng, n, geom, chans, thr) | ~_covered_is(rng, n, geom, chans, thr)


_PIPELINES = {
    "coverage-ni": (_covered_ni, ("rician",)),
    "coverage-is": (_covered_is, ("ip",)),
    "outage-sr": (_outage_sr, ("sr",)),
    "outage-sr-fixed": (_outage_sr_fixed, ("sr",)),
    "e2e-ni": (_e2e_ni, ("rician", "sr")),
    "e2e-is": (_e2e_is, ("ip", "sr")),
    "cdf-z": (_cdf_z, ("ip",)),
}


def mc_estimate(
    config: McConfig,
    geom: geo.GeometryParams,
    channels: ChannelSet,
    thresholds: Thresholds = Thresholds(),
) -> McEstimate:
    """Bernoulli estimate of the scenario's event probability.

    Events: coverage (SNR/SIR >= gamma_th), outage (SNR <= gamma_out),
    end-to-end outage (either hop fails), or Z <= z.
    """
    fn, needs = _PIPELINES[config.scenario]
    for name in needs:
        _need(getattr(channels, name), name, config.scenario)
    if config.scenario == "outage-sr-fixed":
        _need(thresholds.d0, "thresholds.d0", config.scenario)

    def run(block):
        b, n = block
        return int(np.count_nonzero(fn(block_rng(config.seed, b), n, geom, channels, thresholds)))

    workers = config.workers or default_workers()
    blocks = _blocks(config.trials)
    if workers == 1:
        counts = [run(blk) for blk in blocks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(run, blocks))
    count = sum(counts)
    mean = count / config.trials
    se = math.sqrt(mean * (1 - mean) / config.trials)
    return McEstimate(mean, se, config.trials, config.seed, count)


# -- histograms and KS checks --------------------------------------------------------------


@dataclass(frozen=True)
class HistogramResult:
    quantity: str
    edges: np.ndarray
    density: np.ndarray
    ks_statistic: float
    samples: int


def d0_squared_cdf_table(geom: geo.GeometryParams, points=4001):
    """Monotone interpolant of the d0^2 CDF built from the exact density.

    The density is integrated piecewise with Gauss-Legendre between its kinks.
    """
    sup = geo.d0_support(geom)
    H, c = geom.H_R, math.cos(geom.Psi / 2)
    kinks = [
        (geom.U1 - H) ** 2,
        geom.U2**2 + H**2 - 2 * geom.U2 * H * c,
        (H * math.sin(geom.Psi / 2)) ** 2,
    ]
    grid = np.unique(
        np.concatenate(
            [
                np.linspace(sup.d0_min_sq, sup.d0_max_sq, points),
                [k for k in kinks if sup.d0_min_sq < k < sup.d0_max_sq],
            ]
        )
    )
    gl_x, gl_w = np.polynomial.legendre.leggauss(16)
    lo, hi = grid[:-1, None], grid[1:, None]
    nodes = 0.5 * (hi - lo) * gl_x + 0.5 * (hi + lo)
    mass = 0.5 * (hi[:, 0] - lo[:, 0]) * np.sum(gl_w * geo.d0_squared_pdf(nodes, geom), axis=1)
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    cdf = cdf / cdf[-1]
    spline = interpolate.PchipInterpolator(grid, cdf, extrapolate=False)

    def F(x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= sup.d0_min_sq, 0.0, np.where(x >= sup.d0_max_sq, 1.0, spline(x)))

    return F


def mc_histogram(
    config: McConfig,
    quantity: str,
    geom: geo.GeometryParams,
    channels: ChannelSet,
    bins: int = 100,
) -> HistogramResult:
    """Sample one random quantity and compare it with its analytic CDF.

    ``quantity`` is one of ``d0_sq``, ``lambda_S``, ``lambda_R``, ``Z``.
    """
    if config.trials < 10_000:
        raise McConfigurationError("histograms need at least 1e4 trials")
    if quantity == "d0_sq":

        def draw(rng, n):
            return geo.sample_satellite(rng, geom, n)[2] ** 2

        cdf = d0_squared_cdf_table(geom)
    elif quantity == "lambda_S":
        sr = _need(channels.sr, "sr", quantity)

        def draw(rng, n):
            return ch.sample_shadowed_rician(rng, sr, n)

        def cdf(x):
            return ch.sr_cdf(x, sr)

    elif quantity == "lambda_R":
        ric = _need(channels.rician, "rician", quantity)

        def draw(rng, n):
            return ch.sample_rician_power(rng, ric, n)

        def cdf(x):
            return ch.rician_cdf(x, ric)

    elif quantity == "Z":
        ip = _need(channels.ip, "ip", quantity)
        ric = ch.RicianParams(ip.K, ip.Omega_X)

        def draw(rng, n):
            x = ch.sample_rician_power(rng, ric, n)
            y = ch.sample_rayleigh_power(rng, ip.lambda_I, n)
            return ip.P_R * x / (ip.P_I * y)

        def cdf(x):
            return cdf_z(np.maximum(x, 1e-300), ip)

    else:
        raise McConfigurationError(f"unknown quantity {quantity!r}")

    samples = np.concatenate(
        [draw(block_rng(config.seed, b), n) for b, n in _blocks(config.trials)]
    )
    density, edges = np.histogram(samples, bins=bins, density=True)
    ks = stats.kstest(samples, cdf).statistic
    return HistogramResult(quantity, edges, density, float(ks), samples.size)
