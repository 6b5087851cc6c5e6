import math

import numpy as np
import pytest

from tradeoff_ann import dd_tree as dd
from tradeoff_ann import filter_tree as ft
from tradeoff_ann.instances import gen_clustered, gen_sphere
from tradeoff_ann.solver import curve_point, solve_thresholds

SQRT2 = math.sqrt(2.0)


class TestProjectDistance:
    def test_example(self):
        assert dd.project_distance(2.0, 1.0, 1.5) == pytest.approx(math.sqrt(2.5))

    def test_same_sphere_identity(self):
        assert dd.project_distance(3.0, 3.0, 1.2) == pytest.approx(1.2)

    def test_geometry(self, rng):
        # project p2 radially onto sphere R1 and measure
        for _ in range(50):
            R1, R2 = rng.uniform(0.5, 3, 2)
            u = rng.standard_normal(4)
            u /= np.linalg.norm(u)
            w = rng.standard_normal(4)
            w /= np.linalg.norm(w)
            p1, p2 = R1 * u, R2 * w
            r = np.linalg.norm(p1 - p2)
            assert dd.project_distance(R1, R2, r) == pytest.approx(
                np.linalg.norm(p1 - R1 * w), rel=1e-9, abs=1e-12)

    def test_impossible(self):
        with pytest.raises(ValueError):
            dd.project_distance(3.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            dd.project_distance(0.0, 1.0, 1.0)


def test_balanced_point_on_boundary():
    pt = curve_point(2.0, SQRT2 / 2, which="balanced")
    lhs, rhs = dd.tradeoff_lhs_rhs(SQRT2 / 2, SQRT2, pt.rho_q, pt.rho_u)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def _params(**kw):
    pt = curve_point(2.0, SQRT2 / 2, which="balanced")
    return dd.DDParams(rho_q=pt.rho_q, rho_u=pt.rho_u, **kw)


class TestBaseCases:
    def test_leaf_at_depth_K(self, rng):
        x = rng.standard_normal((5, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        node = dd.process_sphere(x, 0.7, 1.4, np.zeros(3), 1.0, 2, _params(K=2))
        assert node.kind == "leaf" and node.n_points == 5

    def test_single_when_far_radius_covers_sphere(self, rng):
        x = rng.standard_normal((5, 3))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        node = dd.process_sphere(x, 0.7, 2.0, np.zeros(3), 1.0, 0, _params(K=2))
        assert node.kind == "single" and node.n_points == 1

    def test_single_ball(self, rng):
        x = rng.standard_normal((5, 3)) * 0.01
        node, _ = dd.process_ball(x, 1.0, 2.0, np.zeros(3), 0.1, 0, _params(K=2))
        assert node.kind == "single"

    def test_ball_depth_cap(self, rng):
        x = rng.standard_normal((5, 3))
        b = dd.Builder(_params(K=2, ball_depth_cap=1), 5, 0, 2)
        with pytest.raises(dd.BallDepthExceeded):
            b.ball(x, np.arange(5), 1.0, 2.0, np.zeros(3), 5.0, 0, (), 2)

    def test_one_point_dataset(self):
        tree = dd.dd_build(np.ones((1, 6)) / math.sqrt(6), 2.0, SQRT2 / 2,
                           dd.DDParams(K=2, success_const=3), seed=0)
        assert dd.dd_query(tree, np.ones(6) / math.sqrt(6))[0] == 0

    def test_params_validation(self):
        with pytest.raises(ValueError):
            dd.DDParams(delta=0.0)
        with pytest.raises(ValueError):
            dd.DDParams(ball_depth_cap=0)
        with pytest.raises(ValueError):
            dd.dd_build(np.ones((2, 2)), 2.0, 1.0, dd.DDParams(rho_q=0.1))


def test_matches_data_independent_tree_on_random_instance():
    """With no dense clusters, the sphere procedure is exactly the cap tree."""
    n = 800
    P, _, _ = gen_sphere(n, 48, 2.0, 1, seed=21)
    pt = solve_thresholds(curve_point(2.0, SQRT2 / 2, which="balanced"), n, K=2,
                          success_const=2)
    di = ft.build(P, pt, seed=6)
    prm = dd.DDParams(K=2, success_const=2, rho_q=pt.rho_q, rho_u=pt.rho_u)
    root = dd.process_sphere(P.data, SQRT2 / 2, SQRT2, np.zeros(48), 1.0, 0, prm, seed=6,
                             n_total=n)
    assert root.clusters == []
    assert root.T == pt.T and root.eta_u == pt.eta_u and root.eta_q == pt.eta_q
    assert np.array_equal(root.cap_slots, di.slot[list(di.children(0))])
    for a, u in zip(root.cap_children, di.children(0)):
        assert np.array_equal(a.cap_slots, di.slot[list(di.children(u))])
        for leaf, w in zip(a.cap_children, di.children(u)):
            assert np.array_equal(np.sort(leaf.idx), np.sort(di.leaf_indices(w)))


class TestRounding:
    def test_pairwise_change_bounded(self, rng):
        delta, r1 = 0.01, 0.8
        x = rng.standard_normal((400, 10))
        o = rng.standard_normal(10)
        snapped, ring = dd.snap_to_annuli(x, o, delta * r1)
        i, j = rng.integers(0, 400, (2, 4000))
        before = np.linalg.norm(x[i] - x[j], axis=1)
        after = np.linalg.norm(snapped[i] - snapped[j], axis=1)
        assert np.all(np.abs(after - before) <= 2 * delta * r1 + 1e-12)
        np.testing.assert_allclose(np.linalg.norm(snapped - o, axis=1), ring * delta * r1)

    def test_centre_point(self):
        s, ring = dd.snap_to_annuli(np.zeros((1, 3)), np.zeros(3), 0.1)
        assert ring[0] == 1 and np.linalg.norm(s[0]) == pytest.approx(0.1)


@pytest.fixture(scope="module")
def clustered():
    P, Q, truth = gen_clustered(1500, 64, 2.0, 3, 1.0, seed=2, q_count=60)
    tree = dd.dd_build(P, 2.0, truth.r, dd.DDParams(K=2, success_const=3), seed=3)
    return P, Q, truth, tree


def test_clusters_carved_at_root(clustered):
    *_, tree = clustered
    roots = list(tree.roots.values())
    assert sum(len(r.clusters) for r in roots) >= 1
    assert any(ch.kind in ("ball", "single") for r in roots for ch in r.clusters)


def test_queries_sound_and_invariants(clustered):
    P, Q, truth, tree = clustered
    hits = 0
    for j, i in truth.planted_pairs:
        idx, st = dd.dd_query(tree, Q.data[j])
        if idx is not None:
            hits += 1
            assert np.linalg.norm(P.data[idx] - Q.data[j]) <= truth.cr
    assert hits >= 0.85 * len(truth.planted_pairs)
    assert dd.check_invariants(tree) == []
    assert dd.node_counts(tree)["max_ball_depth"] <= tree.params.ball_depth_cap


def test_reaches_consistent_with_query(clustered):
    P, Q, truth, tree = clustered
    for j, i in truth.planted_pairs[:5]:
        if dd.dd_reaches(tree, Q.data[j], i):
            assert dd.dd_query(tree, Q.data[j])[0] is not None


def test_lazy_children_deterministic(clustered):
    P, Q, truth, tree = clustered
    other = dd.dd_build(P, 2.0, truth.r, dd.DDParams(K=2, success_const=3), seed=3)
    for j, _ in reversed(truth.planted_pairs[:10]):
        dd.dd_query(other, Q.data[j])
    for j, _ in truth.planted_pairs[:10]:
        a, sa = dd.dd_query(tree, Q.data[j])
        b, sb = dd.dd_query(other, Q.data[j])
        assert a == b and sa == sb


def test_degenerate_single_cluster():
    P, Q, truth = gen_clustered(200, 16, 2.0, 1, 1e-9, seed=1, q_count=10)
    tree = dd.dd_build(P, 2.0, truth.r, dd.DDParams(K=2, success_const=3), seed=0)
    for j, _ in truth.planted_pairs:
        idx, _ = dd.dd_query(tree, Q.data[j])
        assert idx is not None
    assert dd.check_invariants(tree) == []
