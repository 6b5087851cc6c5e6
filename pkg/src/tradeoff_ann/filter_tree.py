"""Data-independent Gaussian cap tree.

Each internal node owns ``T`` candidate children whose Gaussian vectors
form a ``T x d`` block drawn from the node's own stream (keyed by the
node's path of child slots). Blocks are regenerated on demand at query
time instead of being stored, which keeps the tree small while staying
bit-identical to the build.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import stream
from .solver import TradeoffPoint

BLOCK_STREAM = "cap-block"
UNIT_TOL = 1e-6


def gaussian_block(seed: int, path: tuple, T: int, d: int) -> np.ndarray:
    return stream(seed, BLOCK_STREAM, *path).standard_normal((T, d))


@dataclass
class QueryStats:
    nodes_visited: int = 0
    leaves_visited: int = 0
    points_scanned: int = 0
    far_scanned: int = 0

    def add(self, other: "QueryStats") -> None:
        self.nodes_visited += other.nodes_visited
        self.leaves_visited += other.leaves_visited
        self.points_scanned += other.points_scanned
        self.far_scanned += other.far_scanned


@dataclass
class FilterTree:
    """Flat array representation.

    Nodes are numbered breadth-first, so the children of node ``v`` are the
    contiguous range ``first_child[v] : first_child[v] + n_children[v]``.
    ``slot[v]`` is the row of the parent's block that produced ``v``.
    Leaves (level K) own ``leaf_points[leaf_start[v]:leaf_start[v] + leaf_count[v]]``.
    """

    params: TradeoffPoint
    seed: int
    dim: int
    n_points: int
    level: np.ndarray
    parent: np.ndarray
    slot: np.ndarray
    first_child: np.ndarray
    n_children: np.ndarray
    leaf_start: np.ndarray
    leaf_count: np.ndarray
    leaf_points: np.ndarray
    points: np.ndarray | None = None
    _root_block: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.level)

    @property
    def stored_points(self) -> int:
        return int(len(self.leaf_points))

    def path(self, v: int) -> tuple:
        out = []
        while v != 0:
            out.append(int(self.slot[v]))
            v = int(self.parent[v])
        return tuple(reversed(out))

    def children(self, v: int) -> range:
        s = int(self.first_child[v])
        return range(s, s + int(self.n_children[v]))

    def child_vectors(self, v: int) -> np.ndarray:
        """Gaussian vectors of the stored children of ``v``, in order."""
        if v == 0:
            if self._root_block is None:
                self._root_block = gaussian_block(self.seed, (), self.params.T, self.dim)
            block = self._root_block
        else:
            block = gaussian_block(self.seed, self.path(v), self.params.T, self.dim)
        return block[self.slot[list(self.children(v))]]

    def leaf_indices(self, v: int) -> np.ndarray:
        s = int(self.leaf_start[v])
        return self.leaf_points[s:s + int(self.leaf_count[v])]

    def attach(self, points: np.ndarray) -> None:
        points = np.asarray(points, dtype=float)
        if points.shape != (self.n_points, self.dim):
            raise ValueError("dataset shape does not match the tree")
        self.points = points


def _check_unit(x: np.ndarray, what: str) -> None:
    err = np.abs(np.linalg.norm(x, axis=-1) - 1.0)
    if np.any(err > UNIT_TOL):
        raise ValueError(f"{what} must be unit vectors (max norm error {err.max():.3g})")


def build(points, params: TradeoffPoint, seed: int) -> FilterTree:
    """Build the cap tree over unit vectors ``points`` (array or PointSet)."""
    x = np.asarray(getattr(points, "data", points), dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("build needs a non-empty 2-D point array")
    _check_unit(x, "data points")
    if not params.complete:
        raise ValueError("params must carry eta_u, eta_q, T and K (see solve_thresholds)")
    n, d = x.shape
    T, K, eta_u = params.T, params.K, params.eta_u

    level, parent, slot = [0], [-1], [0]
    first_child, n_children = [0], [0]
    leaf_start, leaf_count = [0], [0]
    leaf_chunks = []
    n_leaf_pts = 0
    frontier = [(0, (), np.arange(n))]
    for lvl in range(K):
        nxt = []
        for v, path, idx in frontier:
            z = gaussian_block(seed, path, T, d)
            hit = (x[idx] @ z.T) >= eta_u  # |idx| x T
            kept = np.flatnonzero(hit.any(axis=0))
            first_child[v] = len(level)
            n_children[v] = len(kept)
            for s in kept:
                u = len(level)
                level.append(lvl + 1)
                parent.append(v)
                slot.append(int(s))
                first_child.append(0)
                n_children.append(0)
                members = idx[hit[:, s]]
                if lvl + 1 == K:
                    leaf_start.append(n_leaf_pts)
                    leaf_count.append(len(members))
                    leaf_chunks.append(members)
                    n_leaf_pts += len(members)
                else:
                    leaf_start.append(0)
                    leaf_count.append(0)
                    nxt.append((u, path + (int(s),), members))
        frontier = nxt
    if K == 0:
        raise ValueError("K must be at least 1")
    i32 = np.int32
    tree = FilterTree(
        params=params, seed=int(seed), dim=d, n_points=n,
        level=np.asarray(level, dtype=np.int16), parent=np.asarray(parent, dtype=i32),
        slot=np.asarray(slot, dtype=i32), first_child=np.asarray(first_child, dtype=i32),
        n_children=np.asarray(n_children, dtype=i32),
        leaf_start=np.asarray(leaf_start, dtype=np.int64),
        leaf_count=np.asarray(leaf_count, dtype=i32),
        leaf_points=(np.concatenate(leaf_chunks).astype(i32) if leaf_chunks
                     else np.zeros(0, dtype=i32)),
        points=x)
    return tree


def query(tree: FilterTree, q: np.ndarray, cr: float, *, stop_at_first: bool = True,
          eta_q: float | None = None) -> tuple[int | None, QueryStats]:
    """Return the first stored point within ``cr`` of ``q`` and work counters.

    With ``stop_at_first=False`` the whole reachable tree is scanned (used
    for work accounting); the returned index is still the first hit.
    """
    if tree.points is None:
        raise ValueError("tree has no dataset attached")
    q = np.asarray(q, dtype=float)
    _check_unit(q, "query")
    eta_q = tree.params.eta_q if eta_q is None else eta_q
    K = tree.params.K
    st = QueryStats()
    found = None
    stack = [0]
    cr2 = cr * cr
    while stack:
        v = stack.pop()
        st.nodes_visited += 1
        if tree.level[v] == K:
            st.leaves_visited += 1
            idx = tree.leaf_indices(v)
            diff = tree.points[idx] - q
            dist2 = np.einsum("ij,ij->i", diff, diff)
            ok = dist2 <= cr2
            if stop_at_first:
                hits = np.flatnonzero(ok)
                if len(hits):
                    st.points_scanned += int(hits[0]) + 1
                    st.far_scanned += int(np.count_nonzero(~ok[:hits[0]]))
                    return int(idx[hits[0]]), st
                st.points_scanned += len(idx)
                st.far_scanned += len(idx)
            else:
                st.points_scanned += len(idx)
                st.far_scanned += int(np.count_nonzero(~ok))
                if found is None and ok.any():
                    found = int(idx[np.argmax(ok)])
            continue
        if tree.n_children[v] == 0:
            continue
        z = tree.child_vectors(v)
        ch = np.asarray(tree.children(v))[(z @ q) >= eta_q]
        stack.extend(ch[::-1].tolist())  # visit in slot order
    return found, st


def expected_stored(params: TradeoffPoint, n: int) -> float:
    from .caps import cap_prob
    return n * (params.T * cap_prob(params.eta_u)) ** params.K


def expected_far_scanned(params: TradeoffPoint, n: int, cr: float) -> float:
    from .caps import joint_cap_prob
    return n * (params.T * joint_cap_prob(cr, params.eta_u, params.eta_q)) ** params.K


def replay_check(tree: FilterTree) -> bool:
    """Recompute every leaf's membership from scratch.

    A point belongs to leaf v iff it clears eta_u at every node on the path
    to v; returns True when stored lists match exactly.
    """
    x = tree.points
    K, T, d = tree.params.K, tree.params.T, tree.dim
    eta_u = tree.params.eta_u
    for v in range(1, tree.n_nodes):
        if tree.level[v] != K:
            continue
        path = tree.path(v)
        mask = np.ones(tree.n_points, dtype=bool)
        for depth in range(K):
            z = gaussian_block(tree.seed, path[:depth], T, d)[path[depth]]
            mask &= (x @ z) >= eta_u
        if not np.array_equal(np.flatnonzero(mask), np.sort(tree.leaf_indices(v))):
            return False
    return True


def reached_leaves(tree: FilterTree, q: np.ndarray, eta_q: float | None = None) -> list[int]:
    """Leaves reached by the query descent, in visiting order."""
    eta_q = tree.params.eta_q if eta_q is None else eta_q
    K = tree.params.K
    out = []
    stack = [0]
    while stack:
        v = stack.pop()
        if tree.level[v] == K:
            out.append(v)
            continue
        if tree.n_children[v] == 0:
            continue
        z = tree.child_vectors(v)
        ch = np.asarray(tree.children(v))[(z @ np.asarray(q, dtype=float)) >= eta_q]
        stack.extend(ch[::-1].tolist())
    return out


def reaches(tree: FilterTree, q: np.ndarray, index: int) -> bool:
    """Whether some leaf reached by ``q`` stores dataset point ``index``."""
    return any(np.any(tree.leaf_indices(v) == index) for v in reached_leaves(tree, q))


_ARRAYS = ("level", "parent", "slot", "first_child", "n_children",
           "leaf_start", "leaf_count", "leaf_points")


def save(tree: FilterTree, path) -> None:
    from dataclasses import asdict

    from .io import KIND_FILTER, write_envelope
    header = dict(params=asdict(tree.params), seed=tree.seed, dim=tree.dim,
                  n_points=tree.n_points)
    write_envelope(path, KIND_FILTER, header, {k: getattr(tree, k) for k in _ARRAYS})


def load(path, points=None) -> FilterTree:
    from .io import KIND_FILTER, FormatError, read_envelope
    kind, header, arrays = read_envelope(path)
    if kind != KIND_FILTER:
        raise FormatError(f"{path}: not a filter tree (kind {kind})")
    try:
        tree = FilterTree(params=TradeoffPoint(**header["params"]), seed=header["seed"],
                          dim=header["dim"], n_points=header["n_points"],
                          **{k: arrays[k] for k in _ARRAYS})
    except (KeyError, TypeError) as e:
        raise FormatError(f"{path}: missing field {e}") from e
    if points is not None:
        tree.attach(getattr(points, "data", points))
    return tree
