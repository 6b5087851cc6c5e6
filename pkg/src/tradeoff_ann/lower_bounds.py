"""Lower-bound formulas and exact hypercube checks.

Noise model on {-1, 1}^d: each coordinate is kept with probability
``sigma`` and resampled uniformly otherwise. Function tables are indexed by
the integer whose bit ``k`` is 1 when coordinate ``k`` equals -1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DIM = 16


@dataclass(frozen=True)
class NoiseParams:
    sigma_noise: float
    p: float
    q: float

    def __post_init__(self):
        if not 0.0 < self.sigma_noise < 1.0:
            raise ValueError(f"sigma_noise must lie in (0, 1), got {self.sigma_noise}")
        if self.p < 1.0 or self.q < 1.0:
            raise ValueError("p and q must be at least 1")
        if abs((self.p - 1.0) * (self.q - 1.0) - self.sigma_noise ** 2) > 1e-12:
            raise ValueError("need (p - 1)(q - 1) = sigma_noise^2")

    @classmethod
    def from_p(cls, sigma_noise: float, p: float) -> "NoiseParams":
        if p <= 1.0:
            raise ValueError("p must exceed 1 to determine q")
        return cls(sigma_noise, p, 1.0 + sigma_noise ** 2 / (p - 1.0))


def noise_of(c: float) -> float:
    if not c > 1.0:
        raise ValueError(f"approximation factor must exceed 1, got {c}")
    return 1.0 - 1.0 / c


def robust_expansion_lb(m: float, gamma: float, np_: NoiseParams) -> float:
    """gamma^q * m^(1 + q/p - q)."""
    if m < 1.0:
        raise ValueError("m must be at least 1")
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    p, q = np_.p, np_.q
    return gamma ** q * m ** (1.0 + q / p - q)


def one_probe_space_exponent(c: float) -> float:
    """(c / (c - 1))^2, the headline exponent without lower-order terms."""
    s = noise_of(c)
    return 1.0 / (s * s)


def one_probe_schedule_exponent(c: float, n: float | None = None, *,
                                ln_n: float | None = None) -> float:
    """Finite-n exponent p / (q (p - 1)) for p = 1 + L, q = 1 + sigma^2 / L,
    L = ln ln n / ln n (the gamma and cell-size factors are dropped).

    Pass ``ln_n`` directly for n too large to represent.
    """
    s = noise_of(c)
    if ln_n is None:
        if n is None or n <= math.e:
            raise ValueError("need n > e")
        ln_n = math.log(n)
    if ln_n <= 1.0:
        raise ValueError("need ln n > 1")
    L = math.log(ln_n) / ln_n
    p = 1.0 + L
    q = 1.0 + s * s / L
    return p / (q * (p - 1.0))


def list_of_points_max_rho_u(c: float) -> float:
    return (2 * c - 1) / (c - 1) ** 2


def list_of_points_pq(c: float, rho_u: float) -> tuple[float, float]:
    """Hoelder pair (p, q) used for 0 < rho_u <= (2c-1)/(c-1)^2."""
    s = noise_of(c)
    beta = math.sqrt((1 - s * s) / rho_u)
    q = 1 - s * s + s * beta
    p = math.inf if beta - s <= 0 else beta / (beta - s)
    return p, q


def list_of_points_rho_q(c: float, rho_u: float) -> float:
    """Smallest query exponent compatible with space n^(1 + rho_u)."""
    s = noise_of(c)
    top = list_of_points_max_rho_u(c)
    if rho_u < 0 or rho_u > top * (1 + 1e-12):
        raise ValueError(f"rho_u must lie in [0, (2c-1)/(c-1)^2 = {top:.12g}], got {rho_u}")
    if rho_u == 0:
        return 1 - s * s
    p, q = list_of_points_pq(c, min(rho_u, top))
    val = (1 + rho_u) * (1 - q) + (0.0 if math.isinf(p) else q / p)
    return max(0.0, val)


def list_of_points_closed_form(c: float, rho_u: float) -> float:
    v = math.sqrt(2 * c - 1) / c - math.sqrt(rho_u) * (c - 1) / c
    return v * v


def _as_cube(f: np.ndarray) -> tuple[np.ndarray, int]:
    f = np.asarray(f, dtype=float)
    d = int(round(math.log2(f.size))) if f.size else 0
    if f.ndim != 1 or f.size != 1 << d:
        raise ValueError("function table must have length 2^d")
    if d > MAX_DIM:
        raise ValueError(f"exact enumeration is limited to d <= {MAX_DIM}, got {d}")
    return f, d


def noise_operator_apply(f: np.ndarray, sigma_noise: float) -> np.ndarray:
    """Exact T_sigma f: one keep-or-resample averaging pass per coordinate."""
    if not 0.0 <= sigma_noise <= 1.0:
        raise ValueError("sigma_noise must lie in [0, 1]")
    f, d = _as_cube(f)
    g = f.reshape((2,) * d) if d else f.copy()
    for ax in range(d):
        g = sigma_noise * g + (1.0 - sigma_noise) * g.mean(axis=ax, keepdims=True)
    return g.reshape(-1)


def transition_matrix(d: int, sigma_noise: float) -> np.ndarray:
    """Dense 2^d x 2^d kernel of T_sigma, for small d."""
    if d > 12:
        raise ValueError("dense kernel limited to d <= 12")
    x = np.arange(1 << d)
    flips = np.array([bin(v).count("1") for v in range(1 << d)])
    ham = flips[x[:, None] ^ x[None, :]]
    keep = (1 + sigma_noise) / 2
    return keep ** (d - ham) * (1 - keep) ** ham


def indicator(d: int, members) -> np.ndarray:
    chi = np.zeros(1 << d)
    m = np.asarray(members)
    if m.dtype == bool:
        chi[m] = 1.0
    else:
        chi[m.astype(np.int64)] = 1.0
    return chi


def hamming_ball(d: int, center: int, radius: int) -> np.ndarray:
    """Boolean mask of cube points within Hamming distance ``radius``."""
    x = np.arange(1 << d) ^ center
    w = np.zeros(1 << d, dtype=np.int64)
    for k in range(d):
        w += (x >> k) & 1
    return w <= radius


def hypercontractive_check(d: int, sigma_noise: float, A, B,
                           np_: NoiseParams) -> tuple[float, float, bool]:
    """(<T chi_A, chi_B>, mu(A)^(1/p) mu(B)^(1/q), lhs <= rhs + 1e-9)."""
    if d > MAX_DIM:
        raise ValueError(f"exact enumeration is limited to d <= {MAX_DIM}, got {d}")
    a = indicator(d, A)
    b = indicator(d, B)
    if not a.any() or not b.any():
        raise ValueError("A and B must be non-empty")
    lhs = float(np.mean(noise_operator_apply(a, sigma_noise) * b))
    rhs = float(a.mean() ** (1.0 / np_.p) * b.mean() ** (1.0 / np_.q))
    return lhs, rhs, lhs <= rhs + 1e-9


def min_gamma_bound(a: float, b: float, p: float, q: float) -> float:
    """Upper bound a^(1/p - 1) b^(1/q) on gamma = <T chi_A, chi_B> / mu(A)."""
    return a ** (1.0 / p - 1.0) * b ** (1.0 / q)
