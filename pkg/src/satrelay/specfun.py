"""Special functions and quadrature rules used by the analytic formulas.

All functions accept scalars or numpy arrays and broadcast elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


# Coefficients (ascending powers of a) of the exponent polynomials in the
# two-parameter exponential fit of Q1(a, b).
MU_COEFFS = (2.174, -0.592, 0.593, -0.092, 0.005)
UPSILON_COEFFS = (-0.840, 0.327, -0.740, 0.083, -0.004)

_Q1_TAIL_TOL = 1e-14
_Q1_MAX_TERMS = 100_000


def _require_finite(name, x):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite, got {x!r}")


def marcum_q1(a, b):
    """First-order Marcum Q-function Q1(a, b).

    Evaluated as the Poisson mixture

        Q1(a, b) = sum_k Pois(k; a^2/2) * Qgamma(k + 1, b^2/2)

    where Qgamma is the regularized upper incomplete gamma function. Every
    term is nonnegative, so truncation error is bounded by the remaining
    Poisson mass, which is bounded geometrically once k exceeds a^2/2.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require_finite("a", a)
    _require_finite("b", b)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("marcum_q1 requires a >= 0 and b >= 0")
    a, b = np.broadcast_arrays(a, b)
    lam = 0.5 * a * a
    y = 0.5 * b * b

    # Start the sum at the Poisson mode to avoid underflow for large a:
    # terms k < k0 are accumulated downward, k >= k0 upward.
    k0 = np.floor(lam)
    log_pois = -lam + k0 * np.log(np.where(lam > 0, lam, 1.0)) - special.gammaln(k0 + 1)
    log_pois = np.where(lam > 0, log_pois, 0.0)
    pois0 = np.exp(log_pois)
    q0 = special.gammaincc(k0 + 1, y)

    total = pois0 * q0

    # Upward: Qgamma(k+2, y) = Qgamma(k+1, y) + y^(k+1) e^-y / (k+1)!
    log_y = np.log(np.where(y > 0, y, 1.0))
    pois = pois0.copy()
    q = q0.copy()
    k = k0.copy()
    log_ginc = np.where(y > 0, (k0 + 1) * log_y - y - special.gammaln(k0 + 2), -np.inf)
    active = np.ones(a.shape, dtype=bool)
    for _ in range(_Q1_MAX_TERMS):
        if not active.any():
            break
        k = k + 1
        pois = np.where(lam > 0, pois * lam / k, 0.0)
        q = np.minimum(q + np.exp(log_ginc), 1.0)
        log_ginc = np.where(y > 0, log_ginc + log_y - np.log(k + 1), -np.inf)
        term = pois * q
        total = total + np.where(active, term, 0.0)
        # Remaining Poisson mass after k is <= pois * r / (1 - r), r = lam/(k+2).
        r = lam / (k + 2)
        tail = np.where(r < 1, pois * r / np.maximum(1 - r, 1e-300), np.inf)
        active &= tail >= _Q1_TAIL_TOL

    # Downward: Qgamma(k, y) = Qgamma(k+1, y) - y^k e^-y / k!
    pois = pois0.copy()
    q = q0.copy()
    k = k0.copy()
    active = k > 0
    for _ in range(_Q1_MAX_TERMS):
        if not active.any():
            break
        log_drop = np.where(y > 0, k * log_y - y - special.gammaln(k + 1), -np.inf)
        q = np.where(active, np.maximum(q - np.exp(log_drop), 0.0), q)
        pois = np.where(active, pois * k / np.where(lam > 0, lam, 1.0), pois)
        k = np.where(active, k - 1, k)
        total = total + np.where(active, pois * q, 0.0)
        # Below the mode the weights shrink at least as fast as k/lam; the
        # lower tail is then bounded by pois * k / (lam - k).
        bound = np.where(lam > k, pois * k / np.maximum(lam - k, 1e-300), np.inf)
        active &= (k > 0) & (bound >= _Q1_TAIL_TOL)

    out = np.where(b == 0, 1.0, np.clip(total, 0.0, 1.0))
    return out if out.ndim else float(out)


def marcum_q1_approx(a, b):
    """Exponential fit Q1(a, b) ~ exp(-exp(v(a)) * b**mu(a)).

    Fitted for a in [1, 5] and b in [0, 10].
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require_finite("a", a)
    _require_finite("b", b)
    mu = np.polynomial.polynomial.polyval(a, MU_COEFFS)
    ups = np.polynomial.polynomial.polyval(a, UPSILON_COEFFS)
    out = np.exp(-np.exp(ups) * np.power(b, mu))
    return out if out.ndim else float(out)


def kummer_1f1_integer(m, x):
    """Confluent hypergeometric 1F1(m; 1; x) for integer m >= 1.

    Uses Kummer's transformation to the terminating Laguerre form
    1F1(m; 1; x) = e^x * sum_{k<m} C(m-1, k) x^k / k!.
    """
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise DomainError(f"kummer_1f1_integer requires integer m >= 1, got {m!r}")
    m = int(m)
    x = np.asarray(x, dtype=float)
    _require_finite("x", x)
    poly = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(m):
        poly = poly + term
        # C(m-1, k+1)/(k+1)! = C(m-1, k)/k! * (m-1-k) / (k+1)^2
        term = term * x * (m - 1 - k) / (k + 1) ** 2
    out = np.exp(x) * poly
    return out if out.ndim else float(out)


def upper_inc_gamma(a, x):
    """Non-regularized upper incomplete gamma function Gamma(a, x), a > 0."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(a > 0)):
        raise DomainError("upper_inc_gamma requires a > 0")
    if np.any(~(x >= 0)):
        raise DomainError("upper_inc_gamma requires x >= 0")
    out = special.gammaincc(a, x) * special.gamma(a)
    return out if out.ndim else float(out)


_I0_SERIES_MAX = 15.0


def bessel_i0(x):
    """Modified Bessel function of the first kind, order 0."""
    return _i0(x, scaled=False)


def bessel_i0e(x):
    """exp(-|x|) * I0(x), finite for any finite x."""
    return _i0(x, scaled=True)


def _i0(x, scaled):
    x = np.abs(np.asarray(x, dtype=float))
    _require_finite("x", x)
    out = np.empty_like(x)
    small = x <= _I0_SERIES_MAX

    xs = x[small]
    q = 0.25 * xs * xs
    term = np.ones_like(xs)
    acc = np.ones_like(xs)
    for k in range(1, 200):
        term = term * q / (k * k)
        acc = acc + term
        if np.all(term <= 1e-17 * acc):
            break
    out[small] = acc * np.exp(-xs) if scaled else acc

    xl = x[~small]
    if xl.size:
        # Hankel expansion; terms shrink until k ~ 2x, far past the cutoff here.
        term = np.ones_like(xl)
        acc = np.ones_like(xl)
        for k in range(1, 40):
            term = term * (2 * k - 1) ** 2 / (8.0 * k * xl)
            acc = acc + term
            if np.all(term <= 1e-17 * acc):
                break
        scale = 1.0 if scaled else np.exp(xl)
        out[~small] = scale / np.sqrt(2 * np.pi * xl) * acc
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ChebyshevRule:
    """Gauss-Chebyshev (first kind) nodes and weights."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f, lo=-1.0, hi=1.0):
        """Approximate the plain integral of f over [lo, hi].

        The rule integrates f(x)/sqrt(1-x^2) exactly for polynomial f, so the
        sqrt(1 - x^2) factor is multiplied back in.
        """
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        vals = f(half * self.nodes + mid)
        return half * float(np.sum(self.weights * np.sqrt(1 - self.nodes**2) * vals))


def chebyshev_rule(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"chebyshev_rule requires a positive integer, got {n!r}")
    n = int(n)
    i = np.arange(1, n + 1)
    nodes = np.cos((2 * i - 1) * math.pi / (2 * n))
    weights = np.full(n, math.pi / n)
    return ChebyshevRule(order=n, nodes=nodes, weights=weights)
