import itertools
import random

import pytest

from treepack.graph import MultiGraph

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Records one pass/fail summary line per acceptance criterion."""
    def record(num: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(
            f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, f"criterion {num}: {detail}"
    return record


def k_edge_connected_random(n: int, k: int, seed: int) -> MultiGraph:
    """A k-edge-connected test graph: circulant base plus random extra edges."""
    rng = random.Random(seed)
    half = (k + 1) // 2
    edges = [(u, (u + d) % n) for u in range(n) for d in range(1, half + 1) if n > 2 * d or u < (u + d) % n]
    extra = max(0, n // 4)
    for _ in range(extra):
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u != v:
            edges.append((min(u, v), max(u, v)))
    return MultiGraph(n, edges)


def brute_force_min_cut(g: MultiGraph):
    """Enumerate all 2^(n-1)-1 cuts; return (value, lexicographically smallest side)."""
    assert g.n <= 14
    best = None
    best_side = None
    for mask in range(1, 1 << (g.n - 1)):
        side = {v for v in range(g.n - 1) if mask >> v & 1}
        # keep vertex n-1 out of the side so each cut is enumerated once
        val = sum(1 for u, v in g.edges if (u in side) != (v in side))
        cand = min(side, set(range(g.n)) - side, key=sorted)
        if best is None or val < best or (val == best and sorted(cand) < sorted(best_side)):
            best = val
            best_side = cand
    return best, best_side


def bfs_distances_oracle(g: MultiGraph, src: int) -> dict[int, int]:
    """Queue-free distance computation: repeated relaxation to a fixed point."""
    dist = {src: 0}
    changed = True
    while changed:
        changed = False
        for u, v in g.edges:
            for a, b in ((u, v), (v, u)):
                if a in dist and dist[a] + 1 < dist.get(b, 10 ** 9):
                    dist[b] = dist[a] + 1
                    changed = True
    return dist


def enumerate_bounded_walks(g: MultiGraph, u: int, v: int, hop_cap: int):
    """All walks from u to v with at most hop_cap edges, as eid sequences."""
    adj = g.adj()
    out = []

    def rec(x, eids):
        if x == v:
            out.append(list(eids))
        if len(eids) == hop_cap:
            return
        for y, eid in adj[x]:
            eids.append(eid)
            rec(y, eids)
            eids.pop()

    rec(u, [])
    return out


@pytest.fixture
def theta_graph():
    """k=4 internally disjoint 2-hop paths between vertices 0 and 1."""
    k = 4
    edges = []
    for i in range(k):
        mid = 2 + i
        edges.append((0, mid))
        edges.append((mid, 1))
    return MultiGraph(2 + k, edges), k
