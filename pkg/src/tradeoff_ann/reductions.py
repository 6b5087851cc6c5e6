"""Reductions to the sphere: JL projection, Hamming embedding, grid lift.

Order at query time is fixed: JL first, then the grid lift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pointset import PointSet
from .rng import stream


@dataclass
class JLMap:
    matrix: np.ndarray  # shape (target_dim, d)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.matrix.T


def jl_matrix(d: int, target_dim: int, seed: int, orthonormal: bool = False) -> JLMap:
    if target_dim < 8:
        raise ValueError("target_dim must be at least 8")
    g = stream(seed, "jl").standard_normal((target_dim, d))
    if not orthonormal:
        return JLMap(g / math.sqrt(target_dim))
    if target_dim > d:
        raise ValueError("orthonormal mode needs target_dim <= d")
    q, rr = np.linalg.qr(g.T)
    q = q * np.sign(np.diag(rr))
    # orthonormal rows, rescaled so squared norms are preserved in expectation
    return JLMap(q.T * math.sqrt(d / target_dim))


def jl_project(points: PointSet, target_dim: int, seed: int,
               orthonormal: bool = False) -> PointSet:
    """Gaussian projection scaled by 1/sqrt(target_dim); the map is kept in
    ``meta["jl"]`` for use on queries."""
    m = jl_matrix(points.d, target_dim, seed, orthonormal)
    space = "euclidean"
    return PointSet(m(points.data), space, dict(points.meta, jl=m))


def hamming_to_sphere(points: PointSet) -> PointSet:
    """Scale +-1 vectors by 1/sqrt(d): ||x - y||^2 = 4 Ham(x, y) / d."""
    x = np.asarray(points.data)
    if not np.all((x == 1) | (x == -1)):
        raise ValueError("hamming_to_sphere needs entries in {-1, +1}")
    return PointSet(x.astype(float) / math.sqrt(points.d), "sphere", dict(points.meta))


def default_lift_radius(d: int, n: int) -> float:
    return d * d * max(1.0, math.log(math.log(max(n, 3))))


@dataclass
class GridLift:
    """Randomly shifted cubes of side ``cube_side``; each occupied cube is
    lifted onto a sphere of radius ``R`` in one extra dimension.

    Coordinates are in units of ``r`` (the caller's near distance).
    """

    cube_side: float
    shift: np.ndarray
    R: float
    r: float
    cubes: dict = field(default_factory=dict)  # cube key -> array of point indices
    point_cube: list = field(default_factory=list)
    lifted: np.ndarray | None = None  # lifted coordinates, row i for point i
    max_offset: float = 0.0

    def cube_of(self, x: np.ndarray) -> tuple:
        return tuple(np.floor((x / self.r + self.shift) / self.cube_side).astype(np.int64).tolist())

    def cube_center(self, key: tuple) -> np.ndarray:
        return (np.asarray(key, dtype=float) + 0.5) * self.cube_side - self.shift

    def lift(self, x: np.ndarray, key: tuple | None = None) -> tuple[tuple, np.ndarray]:
        """Map one point (original units) to ``(cube key, lifted vector)``."""
        key = self.cube_of(x) if key is None else key
        y = x / self.r - self.cube_center(key)
        v = np.append(y, self.R)
        return key, v * (self.R / np.linalg.norm(v))

    @property
    def distortion_bound(self) -> float:
        """Measured additive bound on pairwise distortion within a cube."""
        return 2.0 * self.max_offset


def grid_lift(points: PointSet, r: float, seed: int, R: float | None = None,
              n: int | None = None) -> GridLift:
    """Assign points to shifted cubes of side 10 sqrt(d) and lift each cube
    onto the sphere of radius R (default d^2 ln ln n)."""
    if r <= 0:
        raise ValueError("r must be positive")
    x = np.asarray(points.data, dtype=float)
    d = x.shape[1]
    side = 10.0 * math.sqrt(d)
    R = default_lift_radius(d, n or points.n) if R is None else float(R)
    shift = stream(seed, "grid").uniform(0.0, side, size=d)
    gl = GridLift(cube_side=side, shift=shift, R=R, r=r)
    keys = np.floor((x / r + shift) / side).astype(np.int64)
    groups: dict = {}
    for i, k in enumerate(map(tuple, keys.tolist())):
        groups.setdefault(k, []).append(i)
        gl.point_cube.append(k)
    gl.cubes = {k: np.asarray(v, dtype=np.int64) for k, v in groups.items()}
    lifted = np.empty((x.shape[0], d + 1))
    off = 0.0
    for k, idx in gl.cubes.items():
        y = x[idx] / r - gl.cube_center(k)
        v = np.hstack([y, np.full((len(idx), 1), R)])
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        lifted[idx] = v * (R / norms)
        off = max(off, float(np.max(norms[:, 0] - R)))
    gl.lifted = lifted
    gl.max_offset = off
    return gl
