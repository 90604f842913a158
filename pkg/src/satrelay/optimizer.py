"""End-to-end energy-efficiency time/power allocation.

Maximizing D / (P_S T_S + P_R T_R) under the per-hop rate equalities is
equivalent to minimizing the convex energy

    E(T_S, T_R) = T_S g(D/T_S, B_S) / gamma_SR + T_R g(D/T_R, B_R) / gamma_RD,
    g(x, B) = 2^(x/B) - 1,

over T_S + T_R <= T, T_S >= T_S,min, T_R >= T_R,min. The total-time
constraint is dualized; for a fixed multiplier each hop's time solves a
scalar stationarity equation, and the multiplier is driven by subgradient
steps on T_S + T_R - T.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as sopt

log = logging.getLogger(__name__)

LN2 = math.log(2.0)


class InfeasibleError(ValueError):
    def __init__(self, t_min_s, t_min_r, deadline):
        self.t_min_s = t_min_s
        self.t_min_r = t_min_r
        self.deadline = deadline
        super().__init__(
            f"deadline {deadline:.6g} s is shorter than the minimum transmission times "
            f"T_S,min={t_min_s:.6g} s + T_R,min={t_min_r:.6g} s"
        )


@dataclass(frozen=True)
class LinkBudget:
    D_SD: float  # bits
    B_S: float  # Hz
    B_R: float
    T_total: float  # s
    P_S_max: float  # W
    P_R_max: float
    gamma_SR: float  # normalized channel gains, 1/W
    gamma_RD: float

    def __post_init__(self):
        for name, v in vars(self).items():
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


@dataclass
class Allocation:
    T_S: float
    T_R: float
    P_S: float
    P_R: float
    eta: float
    lambda_: float
    lambda_trace: list[float] = field(default_factory=list)
    eta_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True

    @property
    def energy(self):
        return self.P_S * self.T_S + self.P_R * self.T_R


def rate_gap(x, B):
    """g(x, B) = 2^(x/B) - 1: transmit-SNR needed for rate x over bandwidth B."""
    return np.expm1(LN2 * np.asarray(x, dtype=float) / B)


def min_time(D, B, P_max, gamma):
    snr = P_max * gamma
    if not snr > 0:
        raise ValueError("link cannot carry data: P_max * gamma must be positive")
    return D / (B * math.log2(1 + snr))


def hop_energy(T, D, B, gamma):
    return T * rate_gap(D / T, B) / gamma


def _h(x):
    # (1 - x ln2) 2^x, strictly decreasing from h(0) = 1
    return (1 - x * LN2) * 2.0**x


_SERIES = [(n - 1) / math.factorial(n) for n in range(2, 16)]


def _one_minus_h(x):
    """1 - h(x) = y e^y - expm1(y) with y = x ln2, without cancellation near 0."""
    y = x * LN2
    if y < 0.05:
        return sum(c * y ** (n + 2) for n, c in enumerate(_SERIES))
    return y * math.exp(y) - math.expm1(y)


def _log_one_minus_h(y):
    # log(1 - h) in terms of y = x ln2; y e^y - expm1(y) = e^y (y - 1 + e^-y)
    if y < 0.05:
        return math.log(sum(c * y ** (n + 2) for n, c in enumerate(_SERIES)))
    return y + math.log(y - 1 + math.exp(-y))


def _x_root(eps):
    """Unique x > 0 with h(x) = 1 - eps, for eps > 0."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    target = math.log(eps)
    # 1 - h ~ y^2/2 near 0 and ~ y e^y for large y
    lo = min(math.sqrt(eps), 0.01)
    hi = max(2 * math.sqrt(2 * eps), 1.0)
    while _log_one_minus_h(lo) > target:
        lo *= 0.5
    while _log_one_minus_h(hi) < target:
        hi *= 2.0
    y = sopt.brentq(lambda t: _log_one_minus_h(t) - target, lo, hi, xtol=1e-300, rtol=1e-15)
    return y / LN2


def solve_time_equation(gamma, lam, D, B):
    """Stationary hop time for multiplier ``lam``.

    Solves 1 - ln2 D/(T B) = (1 - gamma lam) 2^(-D/(B T)) for T. Returns
    ``math.inf`` when lam == 0 (energy keeps decreasing as T grows).
    """
    if lam < 0:
        raise ValueError("multiplier must be nonnegative")
    if lam == 0:
        return math.inf
    x = _x_root(gamma * lam)
    return D / (B * x)


def stationarity_residual(T, gamma, lam, D, B):
    return abs(_one_minus_h(D / (B * T)) - gamma * lam)


def kkt_time(gamma, lam, D, B, P_max, T_upper=math.inf):
    """Per-hop time for a fixed multiplier, floored at the power-cap time."""
    t_min = min_time(D, B, P_max, gamma)
    return min(max(solve_time_equation(gamma, lam, D, B), t_min), max(T_upper, t_min))


def _dT_dlam(T, gamma, D, B):
    # implicit derivative of the stationary time; h'(x) = -x ln2^2 2^x
    x = D / (B * T)
    dx = gamma / (x * LN2**2 * 2.0**x)
    return -D / (B * x * x) * dx


def _log_newton(lam, grad, ts, tr, b, ts_min, tr_min):
    """Newton increment of log(lam) for the dual gradient, bounded to +-10."""
    D = b.D_SD
    slope = 0.0
    if ts > ts_min:
        slope += _dT_dlam(ts, b.gamma_SR, D, b.B_S)
    if tr > tr_min:
        slope += _dT_dlam(tr, b.gamma_RD, D, b.B_R)
    if slope == 0.0:
        # both hops floored: borrow the slope of the unfloored stationary times
        for g, bw in ((b.gamma_SR, b.B_S), (b.gamma_RD, b.B_R)):
            slope += _dT_dlam(solve_time_equation(g, lam, D, bw), g, D, bw)
    return min(max(grad / (-slope * lam), -10.0), 10.0)


def _hop_power(T, D, B, gamma, P_max):
    return min(float(rate_gap(D / T, B)) / gamma, P_max)


def optimize(
    budget: LinkBudget,
    *,
    step: str = "newton",
    phi0: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> Allocation:
    """Dual subgradient solution of the time/power allocation.

    ``step="newton"`` sizes each subgradient step by a Newton step on
    log(lambda) and falls back to geometric bisection of the multiplier
    bracket whenever a step would leave it. ``step="harmonic"`` uses phi0/(1+j).
    Iteration stops once the multiplier moves by less than ``tol`` relative.
    """
    b = budget
    D = b.D_SD
    ts_min = min_time(D, b.B_S, b.P_S_max, b.gamma_SR)
    tr_min = min_time(D, b.B_R, b.P_R_max, b.gamma_RD)
    if ts_min + tr_min > b.T_total * (1 + 1e-12):
        raise InfeasibleError(ts_min, tr_min, b.T_total)
    ts_up = b.T_total - tr_min
    tr_up = b.T_total - ts_min

    def times(lam, bounded=True):
        # the harmonic rule needs the upper bounds to keep the gradient finite
        # at lam = 0; the Newton rule drops them so the gradient stays strictly
        # monotone until both hops hit their floors
        ts = kkt_time(b.gamma_SR, lam, D, b.B_S, b.P_S_max, ts_up if bounded else math.inf)
        tr = kkt_time(b.gamma_RD, lam, D, b.B_R, b.P_R_max, tr_up if bounded else math.inf)
        return ts, tr

    def eta_of(ts, tr):
        e = hop_energy(ts, D, b.B_S, b.gamma_SR) + hop_energy(tr, D, b.B_R, b.gamma_RD)
        return D / float(e)

    # multiplier at which a hop's stationary time reaches its power-cap floor;
    # beyond the larger one both hops are pinned and the deadline is slack
    cap_s = _one_minus_h(D / (b.B_S * ts_min)) / b.gamma_SR
    cap_r = _one_minus_h(D / (b.B_R * tr_min)) / b.gamma_RD
    lo, hi = 0.0, max(cap_s, cap_r)
    if phi0 is None:
        phi0 = hi / max(b.T_total - ts_min - tr_min, 1e-300)

    lam = 0.0
    trace = [lam]
    eta_trace = []
    converged = False
    it = 0
    newton = step == "newton"
    if not newton and step != "harmonic":
        raise ValueError(f"unknown step rule {step!r}")
    for it in range(1, max_iter + 1):
        ts, tr = times(lam, bounded=not newton or lam == 0)
        eta_trace.append(eta_of(ts, tr))
        grad = ts + tr - b.T_total
        if grad > 0:
            lo = max(lo, lam)
        elif grad < 0:
            hi = min(hi, lam)
        else:
            converged = True
            break
        j = it - 1
        if not newton:
            new = max(lam + phi0 / (1 + j) * grad, 0.0)
        elif lam == 0:
            new = lam + phi0 * grad
        else:
            new = lam * math.exp(_log_newton(lam, grad, ts, tr, b, ts_min, tr_min))
            if not lo < new < hi:
                new = math.sqrt(lo * hi) if lo > 0 else 0.5 * hi
        trace.append(new)
        moved = abs(new - lam)
        lam = new
        if moved <= tol * lam:
            converged = True
            break

    if not converged:
        log.warning("dual iteration hit max_iter=%d without converging", max_iter)

    ts, tr = times(lam)
    # recover primal feasibility: when the deadline binds, hand the residual
    # to the hop that is not pinned at its floor
    gap = ts + tr - b.T_total
    if lam > 0 and gap != 0:
        if tr - gap >= tr_min and (tr > tr_min or gap < 0):
            tr = tr - gap
        else:
            ts = max(ts - gap, ts_min)
    ps = _hop_power(ts, D, b.B_S, b.gamma_SR, b.P_S_max)
    pr = _hop_power(tr, D, b.B_R, b.gamma_RD, b.P_R_max)
    eta = D / (ps * ts + pr * tr)
    eta_trace.append(eta)
    return Allocation(ts, tr, ps, pr, eta, lam, trace, eta_trace, it, converged)


def constraint_violations(alloc: Allocation, budget: LinkBudget):
    """Relative violation of each constraint (<= 0 means satisfied)."""
    b = budget
    D = b.D_SD
    rate_s = alloc.T_S * b.B_S * math.log2(1 + alloc.P_S * b.gamma_SR)
    rate_r = alloc.T_R * b.B_R * math.log2(1 + alloc.P_R * b.gamma_RD)
    return {
        "C1": abs(rate_s - D) / D,
        "C2": abs(rate_r - D) / D,
        "C3": (alloc.T_S + alloc.T_R - b.T_total) / b.T_total,
        "C4": (min_time(D, b.B_S, b.P_S_max, b.gamma_SR) - alloc.T_S) / alloc.T_S,
        "C5": (min_time(D, b.B_R, b.P_R_max, b.gamma_RD) - alloc.T_R) / alloc.T_R,
        "P_S": (alloc.P_S - b.P_S_max) / b.P_S_max,
        "P_R": (alloc.P_R - b.P_R_max) / b.P_R_max,
    }


def random_feasible_eta(budget: LinkBudget, rng: np.random.Generator, n: int):
    """Energy efficiency of n random feasible allocations.

    Half of the draws sit on the binding deadline T_S + T_R = T, the rest
    anywhere in the feasible polygon; powers follow from the rate equalities.
    """
    b = budget
    D = b.D_SD
    ts_min = min_time(D, b.B_S, b.P_S_max, b.gamma_SR)
    tr_min = min_time(D, b.B_R, b.P_R_max, b.gamma_RD)
    ts = ts_min + rng.random(n) * (b.T_total - tr_min - ts_min)
    tr_hi = b.T_total - ts
    tr = np.where(
        np.arange(n) % 2 == 0, tr_hi, tr_min + rng.random(n) * (tr_hi - tr_min)
    )
    energy = hop_energy(ts, D, b.B_S, b.gamma_SR) + hop_energy(tr, D, b.B_R, b.gamma_RD)
    return D / energy
