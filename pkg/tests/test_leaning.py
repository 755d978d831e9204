import math

import numpy as np
import pytest

from newsflow.errors import DegenerateInput, EmptyResult, UsageError
from newsflow.leaning import (FollowGraph, LeaningDensity, LeaningVector,
                              joint_density, leaning_correlation,
                              neighborhood_leaning, user_leaning)
from newsflow.synth import draw_cluster_leanings, generate_follow_graph, rewire_edges


def random_instance(seed, n_users=50, max_posts=6):
    """Random labels + graph, plus naive oracles computed with plain loops."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = []
    for i in range(n_users):
        for _ in range(1 + int(rng.random() * max_posts)):
            pairs.append((f"u{i}", int(rng.random() < 0.5)))
    edges = set()
    for i in range(n_users):
        for _ in range(int(rng.random() * 8)):
            j = int(rng.random() * n_users)
            if j != i:
                edges.add((f"u{i}", f"u{j}"))
    return pairs, sorted(edges)


def oracle_leaning(pairs):
    totals, ones = {}, {}
    for author, label in pairs:
        totals[author] = totals.get(author, 0) + 1
        ones[author] = ones.get(author, 0) + label
    return {a: ones[a] / totals[a] for a in totals}


def oracle_neighborhood(edges, q):
    sums, counts = {}, {}
    for a, b in edges:
        if b in q:
            sums[a] = sums.get(a, 0.0) + q[b]
            counts[a] = counts.get(a, 0) + 1
    return {a: sums[a] / counts[a] for a in sums}


class TestUserLeaning:
    def test_arithmetic_mean(self):
        vec = user_leaning([("u", 1), ("u", 0), ("u", 1), ("u", 1)])
        assert vec.q["u"] == 0.75
        assert vec.k["u"] == 4

    def test_all_reliable_boundary(self):
        vec = user_leaning([("u", 0), ("u", 0)])
        assert vec.q["u"] == 0.0

    def test_rejects_non_binary(self):
        with pytest.raises(UsageError):
            user_leaning([("u", 2)])

    def test_matches_counting_oracle(self):
        for seed in range(5):
            pairs, _ = random_instance(seed)
            vec = user_leaning(pairs)
            oracle = oracle_leaning(pairs)
            assert set(vec.q) == set(oracle)
            for user, q in oracle.items():
                assert vec.q[user] == q  # same integer division, exact
                assert abs(vec.q[user] * vec.k[user] - round(vec.q[user] * vec.k[user])) < 1e-9

    def test_q_in_unit_interval(self):
        pairs, _ = random_instance(123)
        vec = user_leaning(pairs)
        assert all(0.0 <= q <= 1.0 for q in vec.q.values())


class TestNeighborhoodLeaning:
    def test_single_neighbor_identity(self):
        graph = FollowGraph([("a", "b")])
        out = neighborhood_leaning(graph, {"b": 0.5})
        assert out == {"a": 0.5}

    def test_symmetric_pair(self):
        graph = FollowGraph([("a", "b"), ("a", "c")])
        out = neighborhood_leaning(graph, {"b": 0.0, "c": 1.0})
        assert out["a"] == 0.5

    def test_matches_double_loop_oracle(self):
        for seed in range(5):
            pairs, edges = random_instance(seed + 100)
            q = user_leaning(pairs).q
            mine = neighborhood_leaning(FollowGraph(edges), q)
            oracle = oracle_neighborhood(edges, q)
            assert set(mine) == set(oracle)
            for user in oracle:
                assert mine[user] == pytest.approx(oracle[user], abs=1e-12)

    def test_unleaned_followees_excluded(self):
        graph = FollowGraph([("a", "b"), ("a", "ghost")])
        out = neighborhood_leaning(graph, {"b": 0.25})
        assert out["a"] == 0.25  # renormalized over leaned followees only

    def test_no_leaned_followees_omitted(self):
        graph = FollowGraph([("a", "ghost")])
        assert neighborhood_leaning(graph, {"b": 0.5}) == {}

    def test_constant_leaning_propagates(self):
        pairs, edges = random_instance(7)
        q = {u: 0.375 for u in {a for a, _ in pairs}}
        out = neighborhood_leaning(FollowGraph(edges), q)
        for value in out.values():
            assert abs(value - 0.375) < 1e-12

    def test_isolated_node_changes_nothing(self):
        edges = [("a", "b"), ("b", "c")]
        q = {"a": 0.2, "b": 0.9, "c": 0.4}
        base = neighborhood_leaning(FollowGraph(edges), q)
        with_isolated = neighborhood_leaning(FollowGraph(edges), {**q, "z": 0.7})
        assert base == {u: with_isolated[u] for u in base}

    def test_self_loops_dropped(self):
        graph = FollowGraph([("a", "a"), ("a", "b")])
        assert graph.n_self_loops_dropped == 1
        assert graph.followees("a") == ("b",)


def dyadic_instance(seed, n_users=50):
    """Instance whose counts are powers of two, so every division, mean, and
    1-q complement is exact in binary floating point; the relabel symmetry
    can then be asserted bitwise."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = []
    for i in range(n_users):
        k = 2 ** int(rng.random() * 5)  # 1, 2, 4, 8, 16
        for _ in range(k):
            pairs.append((f"u{i}", int(rng.random() < 0.5)))
    edges = []
    for i in range(n_users):
        degree = 2 ** int(rng.random() * 5)
        targets = set()
        while len(targets) < min(degree, n_users - 1):
            j = int(rng.random() * n_users)
            if j != i:
                targets.add(j)
        edges.extend((f"u{i}", f"u{j}") for j in sorted(targets))
    return pairs, edges


class TestRelabelSymmetry:
    def test_q_flip_exact(self):
        pairs, _ = dyadic_instance(1)
        vec = user_leaning(pairs)
        flipped = user_leaning([(a, 1 - l) for a, l in pairs])
        for user in vec.q:
            assert flipped.q[user] == 1.0 - vec.q[user]  # bitwise
        assert flipped.q == vec.flipped().q

    def test_q_flip_via_counts_any_instance(self):
        # without the dyadic design the count-based flip is still exact
        pairs, _ = random_instance(42)
        vec = user_leaning(pairs)
        flipped = user_leaning([(a, 1 - l) for a, l in pairs])
        assert flipped.q == vec.flipped().q
        assert flipped.k == vec.k

    def test_neighborhood_flip_exact(self):
        pairs, edges = dyadic_instance(2)
        graph = FollowGraph(edges)
        vec = user_leaning(pairs)
        base = neighborhood_leaning(graph, vec)
        flipped = neighborhood_leaning(graph, user_leaning([(a, 1 - l) for a, l in pairs]))
        assert set(base) == set(flipped)
        for user in base:
            assert flipped[user] == 1.0 - base[user]  # bitwise

    def test_grid_reflection_exact(self):
        pairs, edges = dyadic_instance(3)
        graph = FollowGraph(edges)
        vec = user_leaning(pairs)
        neigh = neighborhood_leaning(graph, vec)
        flipped_vec = user_leaning([(a, 1 - l) for a, l in pairs])
        flipped_neigh = neighborhood_leaning(graph, flipped_vec)
        # bins=25 keeps every dyadic leaning with denominator <= 16 off the
        # interior bin edges, so reflection is exact cell-for-cell
        base = joint_density(vec, neigh, min_posts=1, bins=25)
        mirrored = joint_density(flipped_vec, flipped_neigh, min_posts=1, bins=25)
        assert np.array_equal(mirrored.grid, np.flip(base.grid, axis=(0, 1)))
        assert np.array_equal(mirrored.marginal_q, np.flip(base.marginal_q))


class TestJointDensity:
    def test_point_mass(self):
        vec = LeaningVector(q={"u": 0.6}, k={"u": 5})
        density = joint_density(vec, {"u": 0.6}, min_posts=3, bins=10)
        assert density.grid[6, 6] == 1.0
        assert density.grid.sum() == 1.0
        assert density.n_users == 1

    def test_two_corner_masses(self):
        vec = LeaningVector(q={"a": 0.0, "b": 1.0}, k={"a": 3, "b": 3})
        density = joint_density(vec, {"a": 0.0, "b": 1.0}, min_posts=3, bins=10)
        assert density.grid[0, 0] == 0.5
        assert density.grid[9, 9] == 0.5
        assert density.marginal_q[0] == 0.5 and density.marginal_q[9] == 0.5

    def test_min_posts_threshold(self):
        vec = LeaningVector(q={"a": 0.5, "b": 0.5}, k={"a": 2, "b": 3})
        density = joint_density(vec, {"a": 0.5, "b": 0.5}, min_posts=3, bins=10)
        assert density.n_users == 1

    def test_zero_eligible_users_errors(self):
        vec = LeaningVector(q={"a": 0.5}, k={"a": 1})
        with pytest.raises(EmptyResult):
            joint_density(vec, {"a": 0.5}, min_posts=3, bins=10)

    def test_mass_conserved_under_smoothing(self):
        rng = np.random.Generator(np.random.PCG64(9))
        users = {f"u{i}": float(rng.random()) for i in range(200)}
        vec = LeaningVector(q=users, k={u: 5 for u in users})
        neigh = {u: float(rng.random()) for u in users}
        for bw in (None, 0.02, 0.05, 0.2):
            density = joint_density(vec, neigh, min_posts=1, bins=50, smoothing=bw)
            assert density.grid.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(density.grid >= 0.0)
            assert density.marginal_q.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.allclose(density.marginal_q, density.grid.sum(axis=1), atol=1e-12)
            assert np.allclose(density.marginal_qn, density.grid.sum(axis=0), atol=1e-12)

    def test_planted_clusters_set_the_mode(self):
        rng = np.random.Generator(np.random.PCG64(4))
        leanings = draw_cluster_leanings(((0.2, 0.5), (0.8, 0.5)), 400, rng, sd=0.03)
        users = [f"u{i}" for i in range(400)]
        q = dict(zip(users, leanings))
        edges = generate_follow_graph(users, 0.95, q, 12.0, rng=rng)
        vec = LeaningVector(q=q, k={u: 5 for u in users})
        neigh = neighborhood_leaning(FollowGraph(edges), vec)
        density = joint_density(vec, neigh, min_posts=3, bins=10)
        i, j = density.mode_cell()
        # the mode must land inside one of the planted cluster boxes
        assert (i, j) in {(1, 1), (1, 2), (2, 1), (2, 2), (7, 7), (7, 8), (8, 7), (8, 8)}

    def test_estimator_api(self):
        est = LeaningDensity(bins=10, min_posts=1)
        est.fit(np.array([[0.1, 0.2], [0.9, 0.8]]))
        assert est.grid_.sum() == pytest.approx(1.0)
        params = est.get_params()
        assert params["bins"] == 10 and params["min_posts"] == 1


class TestCorrelation:
    def test_perfect_line(self):
        vec = LeaningVector(q={"a": 0.0, "b": 1.0}, k={"a": 1, "b": 1})
        r, n = leaning_correlation(vec, {"a": 0.0, "b": 1.0})
        assert r == 1.0
        assert n == 2

    def test_degenerate_axis_errors(self):
        vec = LeaningVector(q={"a": 0.0, "b": 1.0}, k={"a": 1, "b": 1})
        with pytest.raises(DegenerateInput):
            leaning_correlation(vec, {"a": 0.5, "b": 0.5})

    def test_homophilous_vs_rewired_null(self):
        rng = np.random.Generator(np.random.PCG64(31))
        leanings = draw_cluster_leanings(((0.15, 0.5), (0.85, 0.5)), 800, rng, sd=0.03)
        users = [f"u{i}" for i in range(800)]
        q = dict(zip(users, leanings))
        vec = LeaningVector(q=q, k={u: 5 for u in users})
        edges = generate_follow_graph(users, 0.9, q, 10.0, rng=rng)
        r, _ = leaning_correlation(vec, neighborhood_leaning(FollowGraph(edges), vec))
        assert r > 0.8
        null_edges = rewire_edges(edges, seed=77)
        r0, _ = leaning_correlation(vec, neighborhood_leaning(FollowGraph(null_edges), vec))
        assert abs(r0) < 0.1
