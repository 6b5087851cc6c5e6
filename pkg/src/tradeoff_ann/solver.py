"""Trade-off curves and the parameter solver for the cap filter tree.

A point on the sphere trade-off satisfies

    (1 - a(r) a(cr)) sqrt(rho_q) + (a(r) - a(cr)) sqrt(rho_u) = b(r) b(cr)

and is realised by cap exponents ``sigma_exp`` (update side) and ``tau_exp``
(query side) with ``sqrt(sigma) = a(cr) sqrt(tau) + b(cr)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy import optimize

from .caps import alpha_beta, joint_cap_prob, log_cap_prob

DEFAULT_SUCCESS_CONST = 100.0


class InfeasibleError(ValueError):
    """Requested operating point lies outside the feasible range."""


@dataclass(frozen=True)
class TradeoffPoint:
    c: float
    r: float
    rho_q: float
    rho_u: float
    sigma_exp: float
    tau_exp: float
    eta_u: float | None = None
    eta_q: float | None = None
    T: int | None = None
    K: int | None = None
    n: int | None = None
    success_const: float | None = None

    @property
    def space_exponent(self) -> float:
        return 1.0 + self.rho_u

    @property
    def complete(self) -> bool:
        return None not in (self.eta_u, self.eta_q, self.T, self.K)


def _coeffs(c: float, r: float):
    if not c > 1.0:
        raise ValueError(f"approximation factor must exceed 1, got {c}")
    if not (r > 0.0 and c * r < 2.0):
        raise ValueError(f"need 0 < cr < 2, got r={r}, c={c}")
    ar, br = alpha_beta(r)
    acr, bcr = alpha_beta(c * r)
    return ar, br, acr, bcr


def tau_range(c: float, r: float) -> tuple[float, float]:
    """(tau_exp at rho_u = 0, tau_exp at rho_q = 0)."""
    ar, br, acr, bcr = _coeffs(c, r)
    lo = max(0.0, ar * bcr / (1.0 - ar * acr))
    hi = bcr / (ar - acr)
    return lo * lo, hi * hi


def _from_sqrt_tau(c, r, st, ar, br, acr, bcr):
    ss = acr * st + bcr
    sq = (ss - ar * st) / br
    su = (st - ar * ss) / br
    return TradeoffPoint(c=c, r=r, rho_q=sq * sq, rho_u=su * su,
                         sigma_exp=ss * ss, tau_exp=st * st)


def curve_point(c: float, r: float, *, rho_q: float | None = None,
                rho_u: float | None = None, which: str | None = None) -> TradeoffPoint:
    """Solve for the trade-off point with the requested exponent.

    Exactly one of ``rho_q=``, ``rho_u=`` or ``which="balanced"`` selects the
    point. The returned point carries exponents only; see
    :func:`solve_thresholds` for concrete thresholds.
    """
    ar, br, acr, bcr = _coeffs(c, r)
    chosen = [rho_q is not None, rho_u is not None, which is not None]
    if sum(chosen) != 1:
        raise ValueError("give exactly one of rho_q, rho_u, which='balanced'")
    A, B, C = 1.0 - ar * acr, ar - acr, br * bcr
    lo, hi = tau_range(c, r)
    if which is not None:
        if which != "balanced":
            raise ValueError(f"unknown selector {which!r}")
        s = C / (A + B)
        rho_q = s * s
    if rho_q is not None:
        if rho_q < 0:
            raise InfeasibleError(f"rho_q must be >= 0, got {rho_q}")
        st = (bcr - br * math.sqrt(rho_q)) / B
    else:
        if rho_u < 0:
            raise InfeasibleError(f"rho_u must be >= 0, got {rho_u}")
        st = (ar * bcr + br * math.sqrt(rho_u)) / A
    eps = 1e-12
    if not (math.sqrt(lo) - eps <= st <= math.sqrt(hi) + eps):
        raise InfeasibleError(
            f"requested exponent is off the curve: tau_exp must lie in "
            f"[{lo:.12g}, {hi:.12g}], got {st * max(st, 0.0):.12g}")
    st = min(max(st, math.sqrt(lo)), math.sqrt(hi))
    p = _from_sqrt_tau(c, r, st, ar, br, acr, bcr)
    # pin the requested coordinate exactly, absorbing rounding
    if rho_q is not None and which is None:
        p = replace(p, rho_q=float(rho_q))
    if rho_u is not None:
        p = replace(p, rho_u=float(rho_u))
    return p


def tradeoff_residual(p: TradeoffPoint) -> float:
    ar, br, acr, bcr = _coeffs(p.c, p.r)
    return ((1 - ar * acr) * math.sqrt(p.rho_q) + (ar - acr) * math.sqrt(p.rho_u)
            - br * bcr)


def random_curve(c: float, grid: int) -> list[tuple[float, float]]:
    """Points on c^2 sqrt(rho_q) + (c^2 - 1) sqrt(rho_u) = sqrt(2c^2 - 1)."""
    return _linear_curve(c, grid, c * c, c * c - 1.0, math.sqrt(2 * c * c - 1))


def worst_case_curve(c: float, grid: int) -> list[tuple[float, float]]:
    """Points on (c^2 + 1) sqrt(rho_q) + (c^2 - 1) sqrt(rho_u) = 2c."""
    return _linear_curve(c, grid, c * c + 1.0, c * c - 1.0, 2.0 * c)


def random_rho_u(c: float, rho_q: float) -> float:
    return _solve_u(c, rho_q, c * c, c * c - 1.0, math.sqrt(2 * c * c - 1))


def worst_case_rho_u(c: float, rho_q: float) -> float:
    return _solve_u(c, rho_q, c * c + 1.0, c * c - 1.0, 2.0 * c)


def _solve_u(c, rho_q, A, B, C):
    if not c > 1.0:
        raise ValueError(f"approximation factor must exceed 1, got {c}")
    su = (C - A * math.sqrt(rho_q)) / B
    if su < 0 or rho_q < 0:
        raise InfeasibleError(f"rho_q must lie in [0, {(C / A) ** 2:.12g}]")
    return su * su


def _linear_curve(c, grid, A, B, C):
    if not c > 1.0:
        raise ValueError(f"approximation factor must exceed 1, got {c}")
    if grid < 2:
        raise ValueError("grid must be at least 2")
    top = C / A
    out = []
    for i in range(grid):
        sq = top * i / (grid - 1)
        su = (C - A * sq) / B
        out.append((sq * sq, max(su, 0.0) ** 2))
    return out


def default_K(n: int) -> int:
    return max(1, round(math.sqrt(math.log(n))))


def _threshold(exp: float, n: int, K: int) -> float:
    # solve ln F(eta) = -exp ln(n) / K; ln F is strictly decreasing
    target = -exp * math.log(n) / K

    def g(eta):
        return log_cap_prob(eta) - target

    lo, hi = -1.0, 1.0
    while g(lo) < 0:
        lo *= 2
        if lo < -1e6:
            raise RuntimeError(f"threshold root not bracketed below: target={target}")
    while g(hi) > 0:
        hi *= 2
        if hi > 1e6:
            raise RuntimeError(f"threshold root not bracketed above: target={target}")
    root, info = optimize.brentq(g, lo, hi, xtol=1e-14, rtol=1e-15, full_output=True)
    if not info.converged or abs(g(root)) > 1e-10:
        raise RuntimeError(f"threshold solve failed on [{lo}, {hi}]: {info.flag}")
    return root


def solve_thresholds(point: TradeoffPoint, n: int, K: int | None = None,
                     success_const: float = DEFAULT_SUCCESS_CONST) -> TradeoffPoint:
    """Fill in ``eta_u``, ``eta_q``, ``T`` and ``K`` for ``n`` data points.

    ``T = ceil(success_const / G(r, eta_u, eta_q))``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    K = default_K(n) if K is None else int(K)
    if K < 1:
        raise ValueError("K must be at least 1")
    if not point.sigma_exp > 0:
        raise InfeasibleError("sigma_exp must be > 0 (F(eta_u) = 1 needs eta_u = -inf)")
    if not point.tau_exp > 0:
        raise InfeasibleError("tau_exp must be > 0 (F(eta_q) = 1 needs eta_q = -inf)")
    if success_const <= 0:
        raise ValueError("success_const must be positive")
    eta_u = _threshold(point.sigma_exp, n, K)
    eta_q = _threshold(point.tau_exp, n, K)
    G = joint_cap_prob(point.r, eta_u, eta_q)
    T = math.ceil(success_const / G)
    return replace(point, eta_u=eta_u, eta_q=eta_q, T=int(T), K=K, n=int(n),
                   success_const=float(success_const))


def sphere_point(c: float, *, rho_q=None, rho_u=None, which=None,
                 r: float | None = None) -> TradeoffPoint:
    """Curve point for the random-instance geometry (r = sqrt(2)/c by default)."""
    r = math.sqrt(2.0) / c if r is None else r
    return curve_point(c, r, rho_q=rho_q, rho_u=rho_u, which=which)
