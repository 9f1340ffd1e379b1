import math
import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treepack.graph import (
    GraphError,
    MultiGraph,
    bfs_tree,
    diameter,
    global_min_cut,
    hop_bounded_disjoint_paths,
    hop_bounded_shortest_path,
    is_kd_connected,
    sample_subgraph,
)

from conftest import (
    brute_force_min_cut,
    bfs_distances_oracle,
    enumerate_bounded_walks,
    k_edge_connected_random,
)


def random_connected_graph(n, extra, seed):
    rng = random.Random(seed)
    edges = [(rng.randrange(i), i) for i in range(1, n)]
    for _ in range(extra):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            edges.append((u, v))
    return MultiGraph(n, edges)


class TestMultiGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(GraphError):
            MultiGraph(2, [(0, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(GraphError):
            MultiGraph(2, [(0, 2)])

    def test_parallel_edges_have_distinct_ids(self):
        g = MultiGraph(2, [(0, 1), (0, 1), (0, 1)])
        assert g.m == 3
        assert [eid for _, eid in g.adj()[0]] == [0, 1, 2]


class TestSampleSubgraph:
    def test_p_one_keeps_all(self):
        g = MultiGraph(3, [(0, 1), (1, 2), (0, 2)])
        assert sample_subgraph(g, 1.0, 7).kept == {0, 1, 2}

    def test_p_zero_keeps_none(self):
        g = MultiGraph(3, [(0, 1), (1, 2)])
        assert sample_subgraph(g, 0.0, 7).kept == set()

    def test_binomial_mean(self):
        # K_4 at p=0.5: kept-count mean over trials within 3 sigma of 3.0
        g = MultiGraph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
        trials = 10 ** 5
        total = sum(len(sample_subgraph(g, 0.5, s).kept) for s in range(trials))
        mean = total / trials
        sigma = math.sqrt(6 * 0.25 / trials)
        assert abs(mean - 3.0) <= 3 * sigma

    def test_seed_replay_identical(self):
        g = random_connected_graph(40, 60, 1)
        a = sample_subgraph(g, 0.3, 123).kept
        b = sample_subgraph(g, 0.3, 123).kept
        assert a == b

    def test_thread_determinism(self):
        g = random_connected_graph(40, 60, 2)
        seq = [sample_subgraph(g, 0.4, s).kept for s in range(32)]
        with ThreadPoolExecutor(8) as pool:
            par = list(pool.map(lambda s: sample_subgraph(g, 0.4, s).kept, range(32)))
        assert seq == par


class TestBfsTree:
    def test_path_levels(self):
        g = MultiGraph(3, [(0, 1), (1, 2)])
        t = bfs_tree(g, 0)
        assert [t.level[v] for v in range(3)] == [0, 1, 2]

    def test_star_depth_limit(self):
        g = MultiGraph(6, [(0, i) for i in range(1, 6)])
        t = bfs_tree(g, 0, depth_limit=1)
        assert len(t.vertices()) == 6

    def test_depth_limit_truncates(self):
        g = MultiGraph(4, [(0, 1), (1, 2), (2, 3)])
        t = bfs_tree(g, 0, depth_limit=2)
        assert t.vertices() == {0, 1, 2}

    def test_lowest_eid_wins_parenthood(self):
        # vertex 3 reachable from both 1 and 2 at level 2; edge (1,3) has lower eid
        g = MultiGraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
        t = bfs_tree(g, 0)
        assert t.parent[3] == (1, 2)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_levels_match_relaxation_oracle(self, seed):
        g = random_connected_graph(30, 25, seed)
        t = bfs_tree(g, 0)
        assert t.level == bfs_distances_oracle(g, 0)

    def test_levels_match_oracle_larger(self):
        g = random_connected_graph(200, 150, 99)
        t = bfs_tree(g, 5)
        assert t.level == bfs_distances_oracle(g, 5)

    def test_parent_levels_consistent(self):
        g = random_connected_graph(50, 40, 3)
        t = bfs_tree(g, 0)
        for v, (p, eid) in t.parent.items():
            assert t.level[v] == t.level[p] + 1
            assert set(g.edges[eid]) == {v, p}


class TestDiameter:
    def test_single_vertex(self):
        assert diameter(MultiGraph(1, [])) == 0

    def test_disconnected(self):
        assert diameter(MultiGraph(4, [(0, 1), (2, 3)])) == math.inf

    def test_path(self):
        assert diameter(MultiGraph(5, [(i, i + 1) for i in range(4)])) == 4


class TestGlobalMinCut:
    def test_parallel_edges(self):
        g = MultiGraph(2, [(0, 1)] * 5)
        val, side = global_min_cut(g)
        assert val == 5 and side in ({0}, {1})

    def test_cycle(self):
        g = MultiGraph(5, [(i, (i + 1) % 5) for i in range(5)])
        assert global_min_cut(g)[0] == 2

    def test_disconnected_value_zero(self):
        g = MultiGraph(4, [(0, 1), (2, 3)])
        val, side = global_min_cut(g)
        assert val == 0
        assert sum(1 for u, v in g.edges if (u in side) != (v in side)) == 0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 9))
    def test_matches_brute_force(self, seed, n):
        g = random_connected_graph(n, n, seed)
        val, side = global_min_cut(g)
        bval, _ = brute_force_min_cut(g)
        assert val == bval
        assert sum(1 for u, v in g.edges if (u in side) != (v in side)) == val

    def test_matches_brute_force_n14(self):
        for seed in range(3):
            g = random_connected_graph(14, 20, seed)
            assert global_min_cut(g)[0] == brute_force_min_cut(g)[0]

    def test_witness_is_min_cut_side(self):
        g = k_edge_connected_random(12, 4, 0)
        val, side = global_min_cut(g)
        assert 0 < len(side) < g.n
        assert sum(1 for u, v in g.edges if (u in side) != (v in side)) == val


class TestKDConnected:
    def test_parallel_edges_direct(self):
        k = 4
        g = MultiGraph(2, [(0, 1)] * k)
        assert is_kd_connected(g, k, 1)[0]
        assert not is_kd_connected(g, k + 1, 1)[0]

    def test_clique_two_hops(self):
        # K_{k+1}: one direct edge plus k-1 disjoint 2-hop detours per pair
        k = 4
        g = MultiGraph(k + 1, [(u, v) for u in range(k + 1) for v in range(u + 1, k + 1)])
        assert is_kd_connected(g, k, 2)[0]
        assert not is_kd_connected(g, k, 1)[0]

    def test_two_hop_path_fails(self):
        g = MultiGraph(3, [(0, 1), (1, 2)])
        ok, witness = is_kd_connected(g, 2, 2)
        assert not ok and witness is not None

    def test_theta_graph_terminal_pair(self, theta_graph):
        g, k = theta_graph
        assert hop_bounded_disjoint_paths(g, 0, 1, 2, k + 1) == k

    def test_clique_is_kd_connected_at_degree(self):
        # K_m: direct edge plus m-2 disjoint detours between every pair
        m = 5
        g = MultiGraph(m, [(u, v) for u in range(m) for v in range(u + 1, m)])
        assert is_kd_connected(g, m - 1, 2)[0]
        assert not is_kd_connected(g, m, 2)[0]

    def test_hop_budget_matters(self):
        # single edge plus a long detour: two disjoint paths exist but not both short
        g = MultiGraph(5, [(0, 4), (0, 1), (1, 2), (2, 3), (3, 4)])
        assert is_kd_connected(g, 2, 4)[0]
        assert not is_kd_connected(g, 2, 3)[0]

    def test_size_cap_guard(self):
        g = MultiGraph(70, [(i, (i + 1) % 70) for i in range(70)])
        with pytest.raises(GraphError):
            is_kd_connected(g, 1, 2)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 7))
    def test_agrees_with_min_cut_at_full_hops(self, seed, n):
        g = random_connected_graph(n, n, seed)
        k, _ = global_min_cut(g)
        assert is_kd_connected(g, k, n - 1)[0]
        if k >= 1:
            assert not is_kd_connected(g, k + 1, n - 1)[0]


class TestHopBoundedShortestPath:
    def test_zero_hops_same_vertex(self):
        g = MultiGraph(2, [(0, 1)])
        verts, eids, total = hop_bounded_shortest_path(g, [1], 0, 0, 0)
        assert verts == [0] and eids == [] and total == 0

    def test_single_edge(self):
        g = MultiGraph(2, [(0, 1)])
        assert hop_bounded_shortest_path(g, [5], 0, 1, 1)[2] == 5

    def test_triangle_hop_tradeoff(self):
        g = MultiGraph(3, [(0, 2), (0, 1), (1, 2)])
        lengths = [3, 1, 1]
        assert hop_bounded_shortest_path(g, lengths, 0, 2, 1)[2] == 3
        assert hop_bounded_shortest_path(g, lengths, 0, 2, 2)[2] == 2

    def test_unreachable_none(self):
        g = MultiGraph(4, [(0, 1), (2, 3)])
        assert hop_bounded_shortest_path(g, [1, 1], 0, 3, 3) is None

    def test_result_is_simple_path(self):
        g = random_connected_graph(12, 14, 4)
        lengths = [Fraction(i % 3, 7) for i in range(g.m)]
        res = hop_bounded_shortest_path(g, lengths, 0, 11, 8)
        if res is not None:
            verts, eids, total = res
            assert len(set(verts)) == len(verts)
            assert total == sum(lengths[e] for e in eids)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_walk_enumeration(self, seed):
        rng = random.Random(seed)
        g = random_connected_graph(6, 4, seed)
        lengths = [Fraction(rng.randrange(0, 5)) for _ in range(g.m)]
        cap = rng.randrange(0, 4)
        res = hop_bounded_shortest_path(g, lengths, 0, g.n - 1, cap)
        walks = enumerate_bounded_walks(g, 0, g.n - 1, cap)
        if not walks:
            assert res is None
        else:
            best = min(sum(lengths[e] for e in w) for w in walks)
            assert res[2] == best

    def test_unit_lengths_equal_bfs(self):
        g = random_connected_graph(25, 20, 8)
        t = bfs_tree(g, 0)
        lengths = [Fraction(1)] * g.m
        for v in range(g.n):
            res = hop_bounded_shortest_path(g, lengths, 0, v, g.n - 1)
            assert res[2] == t.level[v]
