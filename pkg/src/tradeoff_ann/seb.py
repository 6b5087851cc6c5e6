"""Approximate smallest enclosing ball.

Frank-Wolfe with away steps on the dual of the minimum enclosing ball
problem (a core-set method). The returned radius is always the exact
distance from the returned centre to the farthest input point, so the
ball encloses every point regardless of the tolerance.
"""
from __future__ import annotations

import numpy as np


def smallest_enclosing_ball(points: np.ndarray, tol: float = 1e-4,
                            max_iter: int = 100_000) -> tuple[np.ndarray, float]:
    """Return ``(center, radius)`` with radius within a factor ``1 + tol``
    of optimal."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("need a non-empty 2-D point array")
    if len(x) == 1:
        return x[0].copy(), 0.0
    shift = x.mean(axis=0)
    y = x - shift
    m = len(y)
    a = int(np.argmax(np.einsum("ij,ij->i", y - y[0], y - y[0])))
    b = int(np.argmax(np.einsum("ij,ij->i", y - y[a], y - y[a])))
    u = np.zeros(m)
    u[a] += 0.5
    u[b] += 0.5
    target = (1.0 + tol) ** 2 - 1.0
    for _ in range(max_iter):
        c = u @ y
        diff = y - c
        d2 = np.einsum("ij,ij->i", diff, diff)
        phi = float(u @ d2)
        if phi <= 0.0:
            break
        j = int(np.argmax(d2))
        support = np.flatnonzero(u > 0)
        k = int(support[np.argmin(d2[support])])
        up = d2[j] / phi - 1.0
        down = 1.0 - d2[k] / phi
        if max(up, down) <= target:
            break
        if up > down:
            lam = up / (2.0 * (1.0 + up))
            u *= 1.0 - lam
            u[j] += lam
        else:
            lam = min(down / (2.0 * (1.0 - down)), u[k] / (1.0 - u[k]))
            u *= 1.0 + lam
            u[k] -= lam
            if u[k] < 1e-15:
                u[k] = 0.0
    c = u @ y
    radius = float(np.sqrt(np.max(np.einsum("ij,ij->i", y - c, y - c))))
    return c + shift, radius
