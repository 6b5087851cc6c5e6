"""Gaussian spherical-cap probabilities.

For unit vectors at chord distance ``s`` and a standard Gaussian ``z``:

* ``F(eta)`` is the probability that ``<z, u> >= eta``;
* ``G(s, eta_u, eta_q)`` is the probability that both projections clear
  their thresholds, i.e. a bivariate normal orthant probability with
  correlation ``alpha(s) = 1 - s**2 / 2``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_s(s: float, open_interval: bool) -> None:
    if not np.isfinite(s):
        raise ValueError(f"distance s must be finite, got {s}")
    if open_interval and not 0.0 < s < 2.0:
        raise ValueError(f"distance s must lie in (0, 2), got {s}")
    if not open_interval and not 0.0 <= s <= 2.0:
        raise ValueError(f"distance s must lie in [0, 2], got {s}")


def alpha_beta(s: float) -> tuple[float, float]:
    """Cosine and sine of the angle between unit vectors at distance ``s``."""
    _check_s(s, open_interval=False)
    a = 1.0 - s * s / 2.0
    # 1 - a^2 = s^2 (1 - s^2/4), which avoids cancellation near s = 0
    b = s * math.sqrt(max(0.0, 1.0 - s * s / 4.0))
    return a, b


def cap_prob(eta: float) -> float:
    """F(eta) = Pr[N(0,1) >= eta]."""
    if not np.isfinite(eta):
        raise ValueError(f"threshold must be finite, got {eta}")
    return float(special.ndtr(-eta))


def log_cap_prob(eta: float) -> float:
    """ln F(eta), accurate far into the tail."""
    if not np.isfinite(eta):
        raise ValueError(f"threshold must be finite, got {eta}")
    return float(special.log_ndtr(-eta))


def log_joint_cap_prob(s: float, eta_u: float, eta_q: float) -> float:
    """ln G(s, eta_u, eta_q) by quadrature of phi(x) * Q((eta_q - a x) / b).

    The integrand is rescaled by its maximum before integrating so the
    result stays accurate when G itself underflows a double.
    """
    _check_s(s, open_interval=True)
    if not (np.isfinite(eta_u) and np.isfinite(eta_q)):
        raise ValueError("thresholds must be finite")
    a, b = alpha_beta(s)
    # integrate over the variable with the larger threshold; G is symmetric
    lo, other = (eta_u, eta_q) if eta_u >= eta_q else (eta_q, eta_u)

    def log_integrand(x):
        return -0.5 * x * x - LOG_SQRT_2PI + special.log_ndtr((a * x - other) / b)

    # the log-integrand is concave, so a coarse grid plus a bounded search
    # locates its peak on [lo, inf)
    grid = lo + np.concatenate([np.linspace(0.0, 2.0, 41), np.linspace(2.5, 40.0, 76)])
    vals = log_integrand(grid)
    k = int(np.argmax(vals))
    peak_x = grid[k]
    peak = float(vals[k])
    width = 1.0 / math.sqrt(1.0 + (a / b) ** 2)

    def f(x):
        return math.exp(log_integrand(x) - peak)

    pieces = [lo, max(lo, peak_x - 10 * width), peak_x, peak_x + 10 * width]
    pieces = sorted(set(pieces))
    total = 0.0
    for x0, x1 in zip(pieces[:-1], pieces[1:]):
        total += integrate.quad(f, x0, x1, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    total += integrate.quad(f, pieces[-1], np.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return peak + math.log(total)


def joint_cap_prob(s: float, eta_u: float, eta_q: float) -> float:
    """G(s, eta_u, eta_q) = Pr[X >= eta_u, Y >= eta_q], corr(X, Y) = alpha(s)."""
    return math.exp(log_joint_cap_prob(s, eta_u, eta_q))


def log_exponents(s: float, eta_u: float, eta_q: float) -> tuple[float, float, float]:
    """Leading-order negative log probabilities of F(eta_u), F(eta_q) and G.

    Returns ``(eta_u**2/2, eta_q**2/2, (eta_u**2 + eta_q**2 - 2 a eta_u eta_q) / (2 b**2))``.
    """
    _check_s(s, open_interval=True)
    a, b = alpha_beta(s)
    g = (eta_u ** 2 + eta_q ** 2 - 2.0 * a * eta_u * eta_q) / (2.0 * b * b)
    return eta_u ** 2 / 2.0, eta_q ** 2 / 2.0, g
