import math

import numpy as np
import pytest
from scipy import stats

from tradeoff_ann.instances import gen_clustered, gen_hamming, gen_sphere

SQRT2 = math.sqrt(2.0)


class TestSphere:
    def test_planted_distance_exact(self):
        P, Q, truth = gen_sphere(500, 64, 2.0, 50, seed=3)
        for j, i in truth.planted_pairs:
            assert abs(np.linalg.norm(Q.data[j] - P.data[i]) - SQRT2 / 2) < 1e-9

    def test_unit_norms(self):
        P, Q, _ = gen_sphere(300, 32, 1.5, 30, seed=1)
        assert np.abs(np.linalg.norm(P.data, axis=1) - 1).max() < 1e-12
        assert np.abs(np.linalg.norm(Q.data, axis=1) - 1).max() < 1e-12

    def test_far_points_concentrate(self):
        # a handful of queries keeps the union bound over pairs meaningful
        P, Q, truth = gen_sphere(1000, 512, 2.0, 5, seed=11)
        planted = truth.planted_of()
        for j in range(Q.n):
            dist = np.linalg.norm(P.data - Q.data[j], axis=1)
            dist[planted[j]] = np.inf
            assert dist.min() >= SQRT2 * 0.9

    def test_pairwise_spread(self):
        d = 256
        P, _, _ = gen_sphere(400, d, 2.0, 1, seed=5)
        iu = np.triu_indices(400, 1)
        dist = np.linalg.norm(P.data[:, None] - P.data[None], axis=2)[iu]
        assert abs(dist.mean() - SQRT2) < 0.01
        assert dist.std() < 3 / math.sqrt(d)

    def test_deterministic(self):
        a = gen_sphere(100, 16, 2.0, 10, seed=9)
        b = gen_sphere(100, 16, 2.0, 10, seed=9)
        assert np.array_equal(a[0].data, b[0].data)
        assert np.array_equal(a[1].data, b[1].data)
        assert a[2].planted_pairs == b[2].planted_pairs

    def test_prefix_stable(self):
        # query j uses its own stream, so fewer queries give a prefix
        _, Qa, ta = gen_sphere(100, 16, 2.0, 10, seed=9)
        _, Qb, tb = gen_sphere(100, 16, 2.0, 4, seed=9)
        assert np.array_equal(Qa.data[:4], Qb.data)
        assert ta.planted_pairs[:4] == tb.planted_pairs

    @pytest.mark.parametrize("args", [(0, 8, 2.0, 1), (10, 0, 2.0, 1), (10, 8, 2.0, 0),
                                      (10, 8, 1.0, 1)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            gen_sphere(*args, seed=0)


class TestHamming:
    def test_planted_mean(self):
        d = 2048
        P, Q, truth = gen_hamming(1000, d, 2.0, 300, seed=2)
        ham = np.array([np.count_nonzero(P.data[i] != Q.data[j]) for j, i in truth.planted_pairs])
        se = math.sqrt(d * 0.25 * 0.75 / len(ham)) / d
        assert abs(ham.mean() / d - 0.25) < 3 * se

    def test_binomial_fit(self):
        d, c = 64, 2.0
        _, Q, truth = gen_hamming(20, d, c, 10_000, seed=4)
        P, _, _ = gen_hamming(20, d, c, 1, seed=4)
        ham = np.array([np.count_nonzero(P.data[i] != Q.data[j]) for j, i in truth.planted_pairs])
        # pool the tails so every expected count is at least 5
        dist = stats.binom(d, 1 / (2 * c))
        edges = [-1, 10, 12, 14, 16, 18, 20, 22, d]
        obs = np.histogram(ham, bins=np.array(edges) + 0.5)[0]
        exp = np.diff(dist.cdf(np.array(edges))) * len(ham)
        assert stats.chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 0.01

    def test_infinite_c_copies_point(self):
        P, Q, truth = gen_hamming(50, 128, 1e12, 20, seed=1)
        for j, i in truth.planted_pairs:
            assert np.array_equal(P.data[i], Q.data[j])

    def test_entries_and_determinism(self):
        a = gen_hamming(64, 400, 2.0, 5, seed=8)
        b = gen_hamming(64, 400, 2.0, 5, seed=8)
        assert set(np.unique(a[0].data)) == {-1, 1}
        assert np.array_equal(a[0].data, b[0].data) and np.array_equal(a[1].data, b[1].data)

    def test_low_dimension_warns(self):
        with pytest.warns(UserWarning):
            gen_hamming(1000, 32, 2.0, 1, seed=0)


class TestClustered:
    def test_cluster_sizes(self):
        n = 4096
        _, _, truth = gen_clustered(n, 32, 2.0, 4, 1.0, seed=6, q_count=1)
        counts = np.bincount(truth.meta["labels"], minlength=4)
        assert counts.min() >= 0.9 * n / 4

    def test_points_on_cluster_shell(self):
        P, Q, truth = gen_clustered(200, 16, 2.0, 3, 0.5, seed=2, q_count=20)
        assert np.abs(np.linalg.norm(P.data, axis=1) - 1).max() < 1e-12
        for j, i in truth.planted_pairs:
            assert abs(np.linalg.norm(Q.data[j] - P.data[i]) - SQRT2 / 2) < 1e-9

    def test_degenerate_single_cluster(self):
        P, _, _ = gen_clustered(50, 8, 2.0, 1, 1e-9, seed=0, q_count=1)
        assert np.ptp(P.data, axis=0).max() < 1e-8

    def test_deterministic(self):
        a = gen_clustered(100, 8, 2.0, 2, 0.8, seed=1, q_count=5)
        b = gen_clustered(100, 8, 2.0, 2, 0.8, seed=1, q_count=5)
        assert np.array_equal(a[0].data, b[0].data) and np.array_equal(a[1].data, b[1].data)

    @pytest.mark.parametrize("factor", [-0.1, 2.0, 3.0])
    def test_infeasible_geometry(self, factor):
        with pytest.raises(ValueError):
            gen_clustered(10, 8, 2.0, 2, factor, seed=0)
