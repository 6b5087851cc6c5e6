"""Random and clustered ANN instances with planted queries.

Streams (see :mod:`tradeoff_ann.rng`): points come from ``"points"`` in
chunks of 1024 rows, and query ``j`` uses its own stream ``("queries", j)``,
so any subset of queries can be regenerated independently.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .pointset import PointSet
from .rng import chunked_normal, stream


@dataclass
class InstanceTruth:
    planted_pairs: list[tuple[int, int]]
    r: float
    cr: float
    space_tag: str
    slack: float = 0.0
    meta: dict = field(default_factory=dict)

    def planted_of(self) -> dict[int, int]:
        return dict(self.planted_pairs)


def _check_sizes(n, d, q_count, c):
    if n < 1 or d < 1 or q_count < 1:
        raise ValueError("n, d and q_count must be positive")
    if not c > 1.0:
        raise ValueError(f"approximation factor must exceed 1, got {c}")


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _point_on_shell(p: np.ndarray, s: float, g: np.ndarray) -> np.ndarray:
    """Unit vector at chord distance exactly ``s`` from unit ``p``.

    ``g`` is a standard normal vector giving the tangent direction.
    """
    u = g - (g @ p) * p
    u /= np.linalg.norm(u)
    a = 1.0 - s * s / 2.0
    b = math.sqrt(max(0.0, 1.0 - a * a))
    q = a * p + b * u
    return q / np.linalg.norm(q)


def _planted_queries(points, n, q_count, s, seed):
    d = points.shape[1]
    queries = np.empty((q_count, d))
    pairs = []
    for j in range(q_count):
        g = stream(seed, "queries", j)
        i = int(g.integers(n))
        queries[j] = _point_on_shell(points[i], s, g.standard_normal(d))
        pairs.append((j, i))
    return queries, pairs


def gen_sphere(n: int, d: int, c: float, q_count: int, seed: int):
    """Uniform unit vectors; each query sits at distance exactly sqrt(2)/c
    from a uniformly chosen planted point."""
    _check_sizes(n, d, q_count, c)
    pts = _unit_rows(chunked_normal(seed, "points", n, d))
    r = math.sqrt(2.0) / c
    queries, pairs = _planted_queries(pts, n, q_count, r, seed)
    slack = 3.0 * math.sqrt(2.0 * math.log(max(2, n * q_count)) / d)
    meta = dict(kind="sphere", n=n, d=d, c=c, q_count=q_count, seed=seed)
    truth = InstanceTruth(pairs, r=r, cr=math.sqrt(2.0), space_tag="sphere",
                          slack=slack, meta=meta)
    return PointSet(pts, "sphere", dict(meta)), PointSet(queries, "sphere", dict(meta)), truth


def gen_hamming(n: int, d: int, c: float, q_count: int, seed: int):
    """Uniform +-1 vectors; each query flips every coordinate of a planted
    point independently with probability 1/(2c)."""
    _check_sizes(n, d, q_count, c)
    if d < 64 * math.log(max(n, 2)):
        warnings.warn(f"d={d} is below 64 ln n; planted and random distances may overlap",
                      stacklevel=2)
    pts = np.empty((n, d), dtype=np.int8)
    for k, start in enumerate(range(0, n, 1024)):
        stop = min(n, start + 1024)
        bits = stream(seed, "points", k).integers(0, 2, size=(stop - start, d), dtype=np.int8)
        pts[start:stop] = 2 * bits - 1
    flip = 1.0 / (2.0 * c)
    queries = np.empty((q_count, d), dtype=np.int8)
    pairs = []
    for j in range(q_count):
        g = stream(seed, "queries", j)
        i = int(g.integers(n))
        mask = g.random(d) < flip
        queries[j] = np.where(mask, -pts[i], pts[i])
        pairs.append((j, i))
    r = d * flip
    slack = 3.0 * math.sqrt(flip * (1 - flip) * d) / r if r > 0 else 0.0
    meta = dict(kind="hamming", n=n, d=d, c=c, q_count=q_count, seed=seed)
    truth = InstanceTruth(pairs, r=r, cr=d / 2.0, space_tag="hamming",
                          slack=slack, meta=meta)
    return PointSet(pts, "hamming", dict(meta)), PointSet(queries, "hamming", dict(meta)), truth


def gen_clustered(n: int, d: int, c: float, n_clusters: int,
                  cluster_radius_factor: float, seed: int, q_count: int = 500):
    """Points on the boundaries of ``n_clusters`` caps of chord radius
    ``cluster_radius_factor`` around random centres, with sphere-style
    planted queries."""
    _check_sizes(n, d, q_count, c)
    if n_clusters < 1:
        raise ValueError("n_clusters must be positive")
    if not 0.0 <= cluster_radius_factor < 2.0:
        raise ValueError(
            f"cluster radius factor must lie in [0, 2) on the unit sphere, got {cluster_radius_factor}")
    centers = _unit_rows(stream(seed, "centers").standard_normal((n_clusters, d)))
    label = stream(seed, "assign").integers(n_clusters, size=n)
    noise = chunked_normal(seed, "points", n, d)
    pts = np.empty((n, d))
    for i in range(n):
        pts[i] = _point_on_shell(centers[label[i]], cluster_radius_factor, noise[i])
    r = math.sqrt(2.0) / c
    queries, pairs = _planted_queries(pts, n, q_count, r, seed)
    meta = dict(kind="clustered", n=n, d=d, c=c, q_count=q_count, seed=seed,
                n_clusters=n_clusters, cluster_radius_factor=cluster_radius_factor)
    truth = InstanceTruth(pairs, r=r, cr=math.sqrt(2.0), space_tag="sphere",
                          slack=0.0, meta=dict(meta, labels=label.tolist()))
    return PointSet(pts, "sphere", dict(meta)), PointSet(queries, "sphere", dict(meta)), truth
