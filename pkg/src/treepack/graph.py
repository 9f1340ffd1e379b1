"""Multigraph substrate: sampling, traversal, and exact verification oracles.

Vertices are ``0..n-1``.  Parallel edges are first-class: every copy has its
own dense edge id, because congestion ledgers and cut audits need per-copy
identity.  All randomized operations take an explicit seed and are pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import LinearConstraint, milp

from .rng import stream


class GraphError(Exception):
    pass


class InfeasibleError(Exception):
    """Raised when a requested structure provably does not exist."""


class MultiGraph:
    """Undirected multigraph with dense edge ids and optional integer weights."""

    __slots__ = ("n", "edges", "weights", "_adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]],
                 weights: Optional[Sequence[int]] = None):
        self.n = n
        self.edges = [(int(u), int(v)) for u, v in edges]
        for eid, (u, v) in enumerate(self.edges):
            if u == v:
                raise GraphError(f"self-loop at edge {eid}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge {eid}=({u},{v}) out of range for n={n}")
        if weights is not None:
            weights = [int(w) for w in weights]
            if len(weights) != len(self.edges):
                raise GraphError("weight list length mismatch")
            if any(w < 0 for w in weights):
                raise GraphError("negative edge weight")
        self.weights = weights
        self._adj: Optional[list[list[tuple[int, int]]]] = None

    @property
    def m(self) -> int:
        return len(self.edges)

    def adj(self) -> list[list[tuple[int, int]]]:
        """Adjacency lists of (neighbor, eid), in increasing eid order."""
        if self._adj is None:
            adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
            for eid, (u, v) in enumerate(self.edges):
                adj[u].append((v, eid))
                adj[v].append((u, eid))
            self._adj = adj
        return self._adj

    def other(self, eid: int, u: int) -> int:
        a, b = self.edges[eid]
        if u == a:
            return b
        if u == b:
            return a
        raise GraphError(f"vertex {u} not on edge {eid}")

    def subgraph_edges(self, eids: Iterable[int]) -> "MultiGraph":
        """Spanning subgraph keeping only the given edge ids (re-numbered densely)."""
        eids = sorted(set(eids))
        return MultiGraph(self.n, [self.edges[e] for e in eids],
                          None if self.weights is None else [self.weights[e] for e in eids])

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, m={self.m})"


@dataclass
class RootedTree:
    """A rooted tree given by parent pointers into a base graph's edge ids."""

    root: int
    parent: dict[int, tuple[int, int]]  # vertex -> (parent vertex, eid)
    level: dict[int, int]

    def vertices(self) -> set[int]:
        return set(self.level)

    def edge_ids(self) -> set[int]:
        return {eid for _, eid in self.parent.values()}

    def depth(self) -> int:
        return max(self.level.values())

    def spans(self, g: MultiGraph) -> bool:
        return len(self.level) == g.n

    def path_to_root(self, v: int) -> list[int]:
        """Edge ids on the path from v up to the root."""
        out = []
        while v != self.root:
            p, eid = self.parent[v]
            out.append(eid)
            v = p
        return out


def tree_path(t: RootedTree, a: int, b: int) -> list[int]:
    """Edge ids on the unique a..b path of a tree (meet at the LCA)."""
    pa: list[int] = []
    pb: list[int] = []
    x, y = a, b
    while t.level[x] > t.level[y]:
        p, eid = t.parent[x]
        pa.append(eid)
        x = p
    while t.level[y] > t.level[x]:
        p, eid = t.parent[y]
        pb.append(eid)
        y = p
    while x != y:
        p, eid = t.parent[x]
        pa.append(eid)
        x = p
        p, eid = t.parent[y]
        pb.append(eid)
        y = p
    return pa + pb[::-1]


@dataclass
class SampledSubgraph:
    base: MultiGraph
    kept: set[int]
    p: float
    seed: int
    clamped: bool = False

    def as_graph(self) -> MultiGraph:
        return self.base.subgraph_edges(self.kept)


def sample_subgraph(g: MultiGraph, p: float, seed: int) -> SampledSubgraph:
    """Keep each edge independently with probability p; deterministic in seed."""
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"probability {p} out of range")
    rng = stream(seed, "sample")
    kept = {eid for eid in range(g.m) if rng.random() < p}
    if p == 1.0:
        kept = set(range(g.m))
    return SampledSubgraph(g, kept, p, seed)


def bfs_tree(g: MultiGraph, root: int, depth_limit: Optional[int] = None,
             allowed: Optional[set[int]] = None) -> RootedTree:
    """BFS tree with exact levels; lowest-eid edge wins parenthood.

    ``allowed`` optionally restricts traversal to a set of edge ids.
    """
    if not 0 <= root < g.n:
        raise GraphError(f"root {root} not a vertex")
    adj = g.adj()
    parent: dict[int, tuple[int, int]] = {}
    level = {root: 0}
    frontier = [root]
    d = 0
    while frontier and (depth_limit is None or d < depth_limit):
        candidates: dict[int, tuple[int, int]] = {}
        for u in frontier:
            for v, eid in adj[u]:
                if v in level:
                    continue
                if allowed is not None and eid not in allowed:
                    continue
                cur = candidates.get(v)
                if cur is None or eid < cur[0]:
                    candidates[v] = (eid, u)
        d += 1
        frontier = []
        for v in sorted(candidates):
            eid, u = candidates[v]
            parent[v] = (u, eid)
            level[v] = d
            frontier.append(v)
    return RootedTree(root, parent, level)


def _bfs_dists(adj: list[list[tuple[int, int]]], src: int, n: int) -> list[int]:
    dist = [-1] * n
    dist[src] = 0
    frontier = [src]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v, _ in adj[u]:
                if dist[v] < 0:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return dist


def diameter(g: MultiGraph) -> float:
    """Exact diameter via all-sources BFS; inf when disconnected."""
    if g.n <= 1:
        return 0
    adj = g.adj()
    best = 0
    for s in range(g.n):
        dist = _bfs_dists(adj, s, g.n)
        if min(dist) < 0:
            return math.inf
        best = max(best, max(dist))
    return best


def connected_components(g: MultiGraph) -> list[list[int]]:
    adj = g.adj()
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def global_min_cut(g: MultiGraph) -> tuple[int, set[int]]:
    """Exact global minimum edge cut (parallel copies counted) with a witness side.

    Stoer-Wagner minimum-cut phases on the multiplicity view; deterministic:
    among discovered minima the lexicographically smallest side set wins.
    """
    comps = connected_components(g)
    if len(comps) > 1:
        return 0, set(comps[0])
    if g.n == 1:
        return 0, {0}
    # weight matrix over supernodes; groups track merged original vertices
    n = g.n
    w = np.zeros((n, n), dtype=np.int64)
    for u, v in g.edges:
        w[u, v] += 1
        w[v, u] += 1
    groups: list[Optional[set[int]]] = [{v} for v in range(n)]
    alive = np.ones(n, dtype=bool)
    best_val: Optional[int] = None
    best_side: Optional[set[int]] = None
    for _ in range(n - 1):
        # maximum-adjacency ordering; ties by smallest supernode index
        # (argmax returns the first maximum, matching the tie-break)
        start = int(np.argmax(alive))
        avail = alive.copy()
        avail[start] = False
        key = np.where(avail, w[start], -1)
        s = t = start
        remaining = int(avail.sum())
        for _ in range(remaining):
            u = int(np.argmax(key))
            s, t = t, u
            avail[u] = False
            key = np.where(avail, key + w[u], -1)
        cut_val = int(w[t, alive].sum())
        side = set(groups[t])
        if best_val is None or cut_val < best_val or (
                cut_val == best_val and sorted(side) < sorted(best_side)):
            best_val, best_side = cut_val, side
        # merge t into s
        groups[s] = groups[s] | groups[t]
        groups[t] = None
        w[s] += w[t]
        w[:, s] = w[s]
        w[s, s] = 0
        w[t, :] = 0
        w[:, t] = 0
        alive[t] = False
    assert best_val is not None and best_side is not None
    comp = set(range(g.n)) - best_side
    if sorted(comp) < sorted(best_side):
        best_side = comp
    return best_val, best_side


def is_kd_connected(g: MultiGraph, k: int, D: int,
                    size_cap: Optional[int] = 64) -> tuple[bool, Optional[tuple[int, int]]]:
    """True iff every vertex pair is joined by k edge-disjoint paths of <= D hops.

    Exact check per pair via integer max-flow on a D-layer time-expanded
    network where each edge contributes one unit of shared capacity across
    all layers and directions.  Cost grows as O(n^2 * flow); ``size_cap``
    guards against accidental large inputs (pass None to lift).
    """
    if k < 1 or D < 1:
        raise GraphError("need k >= 1 and D >= 1")
    if size_cap is not None and g.n > size_cap:
        raise GraphError(f"n={g.n} exceeds size_cap={size_cap}; pass size_cap=None to override")
    for s in range(g.n):
        for t in range(s + 1, g.n):
            if hop_bounded_disjoint_paths(g, s, t, D, k) < k:
                return False, (s, t)
    return True, None


def hop_bounded_disjoint_paths(g: MultiGraph, s: int, t: int, D: int, cap: int) -> int:
    """Max number of edge-disjoint s-t paths with <= D edges (capped at cap)."""
    n, m = g.n, g.m
    # variables: for each eid, layer i in [0,D), direction 0:(u->v) 1:(v->u);
    # then wait arcs (v,i)->(v,i+1).
    nv = 2 * m * D + n * D

    def evar(eid: int, i: int, d: int) -> int:
        return (eid * D + i) * 2 + d

    def wvar(v: int, i: int) -> int:
        return 2 * m * D + v * D + i

    node_id = {}
    for v in range(n):
        for i in range(D + 1):
            node_id[(v, i)] = len(node_id)
    rows, cols, vals = [], [], []

    def add(row: int, col: int, val: float) -> None:
        rows.append(row)
        cols.append(col)
        vals.append(val)

    for eid, (u, v) in enumerate(g.edges):
        for i in range(D):
            add(node_id[(u, i)], evar(eid, i, 0), -1)  # leaves (u,i)
            add(node_id[(v, i + 1)], evar(eid, i, 0), 1)  # enters (v,i+1)
            add(node_id[(v, i)], evar(eid, i, 1), -1)
            add(node_id[(u, i + 1)], evar(eid, i, 1), 1)
    for v in range(n):
        for i in range(D):
            add(node_id[(v, i)], wvar(v, i), -1)
            add(node_id[(v, i + 1)], wvar(v, i), 1)
    import scipy.sparse as sp
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(node_id), nv))
    lb = np.zeros(len(node_id))
    ub = np.zeros(len(node_id))
    src, snk = node_id[(s, 0)], node_id[(t, D)]
    lb[src], ub[src] = -cap, 0.0   # net outflow up to cap
    lb[snk], ub[snk] = 0.0, cap
    # per-edge shared capacity
    erows, ecols, evals = [], [], []
    for eid in range(m):
        for i in range(D):
            for d in (0, 1):
                erows.append(eid)
                ecols.append(evar(eid, i, d))
                evals.append(1)
    Ae = sp.csr_matrix((evals, (erows, ecols)), shape=(m, nv))
    # maximize total inflow at the sink (t, D)
    c = np.zeros(nv)
    for _, eid in g.adj()[t]:
        d = 0 if g.edges[eid][1] == t else 1
        c[evar(eid, D - 1, d)] = -1
    c[wvar(t, D - 1)] = -1
    res = milp(c, constraints=[LinearConstraint(A, lb, ub),
                               LinearConstraint(Ae, 0, 1)],
               integrality=np.ones(nv),
               bounds=None)
    if res.status != 0:
        return 0
    return int(round(-res.fun))


def hop_tables(g: MultiGraph, lengths, src: int, hop_cap: int) -> list[dict]:
    """Bellman-Ford layer tables: tables[i][v] = cheapest <= i-hop walk src->v."""
    if hop_cap < 0:
        raise GraphError("hop_cap must be >= 0")
    adj = g.adj()
    zero = Fraction(0) if lengths and isinstance(lengths[0], Fraction) else 0
    tables = [{src: zero}]
    cur = {src: zero}
    for _ in range(hop_cap):
        nxt = dict(cur)
        for x, cx in cur.items():
            for y, eid in adj[x]:
                cand = cx + lengths[eid]
                if y not in nxt or cand < nxt[y]:
                    nxt[y] = cand
        cur = nxt
        tables.append(cur)
    return tables


def extract_hop_path(g: MultiGraph, lengths, tables: list[dict], src: int, v: int):
    """Reconstruct the optimal path to v from layer tables.

    Ties broken toward fewer hops then lower (vertex, eid); the minimal-hop
    optimum under non-negative lengths is always a simple path.
    """
    if v not in tables[-1]:
        return None
    adj = g.adj()
    total = tables[-1][v]
    i = next(j for j in range(len(tables)) if tables[j].get(v) == total)
    verts = [v]
    eids: list[int] = []
    x = v
    while i > 0:
        if tables[i - 1].get(x) == tables[i][x]:
            i -= 1
            continue
        best = None
        for y, eid in adj[x]:
            py = tables[i - 1].get(y)
            if py is not None and py + lengths[eid] == tables[i][x]:
                if best is None or (y, eid) < best:
                    best = (y, eid)
        assert best is not None
        y, eid = best
        verts.append(y)
        eids.append(eid)
        x = y
        i -= 1
    verts.reverse()
    eids.reverse()
    assert verts[0] == src and verts[-1] == v
    return verts, eids, total


def hop_bounded_shortest_path(g: MultiGraph, lengths, u: int, v: int, hop_cap: int):
    """Cheapest <= hop_cap-hop path from u to v under non-negative edge lengths.

    Returns (vertex list, eid list, total length) or None.
    """
    return extract_hop_path(g, lengths, hop_tables(g, lengths, u, hop_cap), u, v)


# ---------------------------------------------------------------------------
# serialization

def write_edgelist(g: MultiGraph, path: str) -> None:
    """Text format: header ``n m``, then one ``u v [weight]`` line per edge."""
    with open(path, "w") as f:
        f.write(f"{g.n} {g.m}\n")
        for eid, (u, v) in enumerate(g.edges):
            if g.weights is not None:
                f.write(f"{u} {v} {g.weights[eid]}\n")
            else:
                f.write(f"{u} {v}\n")


def read_edgelist(path: str) -> MultiGraph:
    with open(path) as f:
        header = f.readline().split()
        n, m = int(header[0]), int(header[1])
        edges, weights = [], []
        weighted = False
        for _ in range(m):
            parts = f.readline().split()
            edges.append((int(parts[0]), int(parts[1])))
            if len(parts) > 2:
                weighted = True
                weights.append(int(parts[2]))
            else:
                weights.append(0)
    return MultiGraph(n, edges, weights if weighted else None)


def graph_to_json(g: MultiGraph) -> dict:
    out = {"n": g.n,
           "edges": [{"eid": eid, "u": u, "v": v} for eid, (u, v) in enumerate(g.edges)]}
    if g.weights is not None:
        for rec in out["edges"]:
            rec["weight"] = g.weights[rec["eid"]]
    return out


def graph_from_json(data: dict) -> MultiGraph:
    recs = sorted(data["edges"], key=lambda r: r["eid"])
    if recs and [r["eid"] for r in recs] != list(range(len(recs))):
        raise GraphError("edge ids not dense")
    weights = [r["weight"] for r in recs] if recs and "weight" in recs[0] else None
    return MultiGraph(data["n"], [(r["u"], r["v"]) for r in recs], weights)
