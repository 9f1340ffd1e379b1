"""Spanning-tree packings: edge-disjoint packing, diameter repair, Karger partition.

The packer implements the classical matroid-union augmenting-walk algorithm
for t edge-disjoint spanning trees; infeasibility follows Nash-Williams
density (the union of t graphic matroids is a matroid, so a one-pass greedy
with augmentation finds a maximum packing).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .graph import GraphError, InfeasibleError, MultiGraph, RootedTree, bfs_tree
from .rng import stream


@dataclass
class TreePacking:
    base: MultiGraph
    trees: list[RootedTree]
    congestion: dict[int, int] = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @classmethod
    def from_trees(cls, base: MultiGraph, trees: Sequence[RootedTree],
                   notes: Optional[dict] = None) -> "TreePacking":
        congestion: dict[int, int] = {}
        for t in trees:
            for eid in t.edge_ids():
                congestion[eid] = congestion.get(eid, 0) + 1
        return cls(base, list(trees), congestion, notes or {})

    @property
    def max_congestion(self) -> int:
        return max(self.congestion.values(), default=0)

    def spanning_flags(self) -> list[bool]:
        return [t.spans(self.base) for t in self.trees]

    def to_json(self) -> dict:
        return {
            "trees": [{"root": t.root,
                       "parent_pairs": [[v, p, eid] for v, (p, eid) in sorted(t.parent.items())]}
                      for t in self.trees],
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, base: MultiGraph, data: dict) -> "TreePacking":
        trees = []
        for rec in data["trees"]:
            parent = {v: (p, eid) for v, p, eid in rec["parent_pairs"]}
            level = {rec["root"]: 0}
            pending = deque(parent)
            guard = 0
            while pending:
                v = pending.popleft()
                p = parent[v][0]
                if p in level:
                    level[v] = level[p] + 1
                else:
                    pending.append(v)
                    guard += 1
                    if guard > len(parent) ** 2 + 10:
                        raise GraphError("parent relation not acyclic")
            trees.append(RootedTree(rec["root"], parent, level))
        return cls.from_trees(base, trees, data.get("notes"))


@dataclass
class PackingReport:
    max_diameter: float
    max_congestion: int
    spanning: list[bool]
    per_tree_diameter: list[float]
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"max_diameter": self.max_diameter,
                "max_congestion": self.max_congestion,
                "spanning": self.spanning,
                "per_tree_diameter": self.per_tree_diameter,
                "notes": self.notes}


def tree_diameter(t: RootedTree) -> float:
    """Diameter of the tree induced on its own vertex set (double BFS)."""
    verts = t.vertices()
    if len(verts) <= 1:
        return 0
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for v, (p, _) in t.parent.items():
        adj[v].append(p)
        adj[p].append(v)

    def far(src):
        dist = {src: 0}
        q = deque([src])
        best = (0, src)
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    if (dist[w], -w) > (best[0], -best[1]):
                        best = (dist[w], w)
                    q.append(w)
        return best

    _, a = far(t.root)
    d, _ = far(a)
    return d


def verify_packing(g: MultiGraph, packing: TreePacking) -> PackingReport:
    """Exact congestion, per-tree diameter, and spanning flags; pure function."""
    congestion: dict[int, int] = {}
    for t in packing.trees:
        for v, (p, eid) in t.parent.items():
            if not 0 <= eid < g.m:
                raise GraphError(f"foreign edge id {eid}")
            if set(g.edges[eid]) != {v, p}:
                raise GraphError(f"edge id {eid} does not join {v},{p}")
            congestion[eid] = congestion.get(eid, 0) + 1
    diameters = [tree_diameter(t) for t in packing.trees]
    return PackingReport(
        max_diameter=max(diameters, default=0),
        max_congestion=max(congestion.values(), default=0),
        spanning=[t.spans(g) for t in packing.trees],
        per_tree_diameter=diameters,
        notes=dict(packing.notes),
    )


class _Forests:
    """t vertex-disjoint... rather edge-disjoint forests over a shared graph."""

    def __init__(self, g: MultiGraph, t: int):
        self.g = g
        self.t = t
        self.adj: list[dict[int, list[tuple[int, int]]]] = [dict() for _ in range(t)]
        self.dsu: list[list[int]] = [list(range(g.n)) for _ in range(t)]
        self.sizes = [0] * t

    def find(self, i: int, v: int) -> int:
        d = self.dsu[i]
        root = v
        while d[root] != root:
            root = d[root]
        while d[v] != root:
            d[v], v = root, d[v]
        return root

    def connected(self, i: int, u: int, v: int) -> bool:
        return self.find(i, u) == self.find(i, v)

    def add(self, i: int, eid: int) -> None:
        u, v = self.g.edges[eid]
        self.adj[i].setdefault(u, []).append((v, eid))
        self.adj[i].setdefault(v, []).append((u, eid))
        self.dsu[i][self.find(i, u)] = self.find(i, v)
        self.sizes[i] += 1

    def remove(self, i: int, eid: int) -> None:
        u, v = self.g.edges[eid]
        self.adj[i][u] = [e for e in self.adj[i][u] if e[1] != eid]
        self.adj[i][v] = [e for e in self.adj[i][v] if e[1] != eid]
        self.sizes[i] -= 1
        # DSU does not support removal; rebuild
        d = list(range(self.g.n))

        def find(x):
            while d[x] != x:
                d[x] = d[d[x]]
                x = d[x]
            return x

        for w, nbrs in self.adj[i].items():
            for x, _ in nbrs:
                d[find(w)] = find(x)
        self.dsu[i] = d

    def cycle_edges(self, i: int, u: int, v: int) -> list[int]:
        """Edge ids on the forest path u..v (the fundamental cycle of (u,v))."""
        prev: dict[int, tuple[int, int]] = {u: (-1, -1)}
        q = deque([u])
        while q:
            x = q.popleft()
            if x == v:
                break
            for y, eid in self.adj[i].get(x, ()):
                if y not in prev:
                    prev[y] = (x, eid)
                    q.append(y)
        out = []
        x = v
        while x != u:
            p, eid = prev[x]
            out.append(eid)
            x = p
        return out


def pack_edge_disjoint_trees(g: MultiGraph, t: int) -> TreePacking:
    """t pairwise edge-disjoint spanning trees via matroid-union augmentation.

    Raises InfeasibleError when no t-packing exists.
    """
    if t < 1:
        raise GraphError("t must be >= 1")
    n = g.n
    target = t * (n - 1)
    forests = _Forests(g, t)
    owner = [-1] * g.m
    total = 0

    # saturated components: vertex sets spanned by every forest; edges inside
    # one are in the span of the packing, so the exchange search must fail
    sat = list(range(n))

    def sfind(v: int) -> int:
        root = v
        while sat[root] != root:
            root = sat[root]
        while sat[v] != root:
            sat[v], v = root, sat[v]
        return root

    def closure() -> None:
        # merge components linked by an owned edge in every forest: the union
        # is again spanned by each forest (one cross edge per forest at most)
        changed = True
        while changed:
            changed = False
            cross: dict[tuple[int, int], set[int]] = {}
            for i in range(t):
                for v, nbrs in forests.adj[i].items():
                    rv = sfind(v)
                    for u2, _ in nbrs:
                        if v < u2:
                            ru = sfind(u2)
                            if ru != rv:
                                key = (ru, rv) if ru < rv else (rv, ru)
                                cross.setdefault(key, set()).add(i)
            for (ra, rb), fs in cross.items():
                if len(fs) == t and sfind(ra) != sfind(rb):
                    sat[sfind(ra)] = sfind(rb)
                    changed = True

    dirty = True  # owned-edge set changed since the last closure pass
    for e0 in range(g.m):
        if total == target:
            break
        u0, v0 = g.edges[e0]
        done = False
        for i in range(t):
            if not forests.connected(i, u0, v0):
                forests.add(i, e0)
                owner[e0] = i
                total += 1
                done = True
                dirty = True
                break
        if done:
            continue
        if sfind(u0) == sfind(v0):
            continue
        if dirty:
            closure()
            dirty = False
            if sfind(u0) == sfind(v0):
                continue
        # BFS over the exchange structure: label[x] = edge whose fundamental
        # cycle (in x's owning forest at labeling time) contains x
        label: dict[int, Optional[int]] = {e0: None}
        label_forest: dict[int, int] = {}
        queue = deque([e0])
        aug = None
        while queue and aug is None:
            y = queue.popleft()
            uy, vy = g.edges[y]
            for i in range(t):
                if owner[y] == i:
                    continue
                if not forests.connected(i, uy, vy):
                    aug = (y, i)
                    break
                for x in forests.cycle_edges(i, uy, vy):
                    if x not in label:
                        label[x] = y
                        label_forest[x] = i
                        queue.append(x)
        if aug is None:
            # e0 lies in the span: the explored edges plus e0 witness a vertex
            # set spanned by every forest, so cache it as one saturated component
            sfu = sfind(u0)
            sat[sfu] = sfind(v0)
            for y in label:
                uy, vy = g.edges[y]
                sat[sfind(uy)] = sfind(vy)
            continue
        cur, dest = aug
        dirty = True
        while True:
            src = owner[cur]
            if src >= 0:
                forests.remove(src, cur)
            forests.add(dest, cur)
            owner[cur] = dest
            if src < 0:
                break
            nxt = label[cur]
            assert nxt is not None and label_forest[cur] == src
            cur, dest = nxt, src
        total += 1
    if total < target:
        raise InfeasibleError(
            f"only {total} of {target} forest edges packable: no {t} edge-disjoint spanning trees")
    trees = []
    for i in range(t):
        allowed = {eid for eid in range(g.m) if owner[eid] == i}
        tree = bfs_tree(g, 0, allowed=allowed)
        assert tree.spans(g) and len(tree.parent) == n - 1
        trees.append(tree)
    return TreePacking.from_trees(g, trees)


@dataclass
class PlantResult:
    graph: MultiGraph
    p: float
    seed: int
    planted_eids: list[int]
    clamped: bool = False


def plant_random_tree(h: MultiGraph, t: RootedTree, p: float, seed: int) -> PlantResult:
    """H plus a p-sampled subset of the tree's edges, as fresh parallel copies."""
    if not 0 < p <= 1:
        raise GraphError("need 0 < p <= 1")
    n_out = max(h.n, max(t.vertices(), default=0) + 1)
    rng = stream(seed, "plant")
    edges = list(h.edges)
    planted = []
    for v in sorted(t.parent):
        parent, _ = t.parent[v]
        if rng.random() < p or p == 1.0:
            planted.append(len(edges))
            edges.append((v, parent))
    return PlantResult(MultiGraph(n_out, edges), p, seed, planted, clamped=(p >= 1.0))


def fix_diameter(g: MultiGraph, trees: Sequence[RootedTree], low_tree: RootedTree,
                 seed: int) -> TreePacking:
    """Repair tree diameters by planting random pieces of a low-depth tree.

    Partitions E(low_tree) uniformly into len(trees) classes E_1..E_t, forms
    G_i = T_i union E_i, and returns the BFS trees of the G_i.  Relative to
    the input trees plus low_tree, every output edge is used at most twice.
    """
    t = len(trees)
    if t == 0:
        raise GraphError("need at least one tree to fix")
    rng = stream(seed, "fix_diameter")
    classes: list[set[int]] = [set() for _ in range(t)]
    low_eids = sorted(low_tree.edge_ids())
    for eid in low_eids:
        classes[rng.randrange(t)].add(eid)
    assert sum(len(c) for c in classes) == len(low_eids)  # exact partition
    out = []
    used_sources: dict[int, int] = {}
    for i, tree in enumerate(trees):
        allowed = tree.edge_ids() | classes[i]
        for eid in tree.edge_ids():
            used_sources[eid] = used_sources.get(eid, 0) + 1
        out.append(bfs_tree(g, 0, allowed=allowed))
    assert all(c <= 1 for c in used_sources.values())  # input trees edge-disjoint
    packing = TreePacking.from_trees(g, out, notes={"seed": seed, "classes": [sorted(c) for c in classes]})
    return packing


def pack_low_diam_congestion2(g: MultiGraph, seed: int) -> tuple[TreePacking, PackingReport]:
    """Low-diameter packing of floor(k/2) trees with per-edge congestion <= 2.

    Pipeline: pack floor(k/2) edge-disjoint spanning trees, take a BFS tree
    from a maximum-degree root, then repair diameters with fix_diameter.
    """
    from .graph import global_min_cut

    k, _ = global_min_cut(g)
    if k < 2:
        raise InfeasibleError(f"min cut {k} < 2")
    t = k // 2
    disjoint = pack_edge_disjoint_trees(g, t)
    deg = [0] * g.n
    for u, v in g.edges:
        deg[u] += 1
        deg[v] += 1
    root = max(range(g.n), key=lambda v: (deg[v], -v))
    low_tree = bfs_tree(g, root)
    packing = fix_diameter(g, disjoint.trees, low_tree, seed)
    packing.notes.update({"k": k, "num_trees": t, "seed": seed})
    report = verify_packing(g, packing)
    return packing, report


def karger_partition_packing(g: MultiGraph, seed: int, c_sample: float = 707,
                             k: Optional[int] = None) -> tuple[TreePacking, PackingReport]:
    """Partition E(G) into r = floor(k/(c_sample ln n)) classes; BFS tree per class.

    Trees are edge-disjoint by construction.  Non-spanning classes are flagged
    in the report, never retried (the operation stays a pure function of seed).
    """
    from .graph import global_min_cut

    if k is None:
        k, _ = global_min_cut(g)
    n = g.n
    r = int(k / (c_sample * math.log(n))) if n > 1 else 0
    if r < 1:
        raise GraphError(
            f"r = floor(k/(c_sample ln n)) = 0 with k={k}, n={n}; use a smaller c_sample")
    rng = stream(seed, "karger")
    assignment = [rng.randrange(r) for _ in range(g.m)]
    trees = []
    for i in range(r):
        allowed = {eid for eid in range(g.m) if assignment[eid] == i}
        trees.append(bfs_tree(g, 0, allowed=allowed))
    packing = TreePacking.from_trees(
        g, trees, notes={"r": r, "k": k, "c_sample": c_sample, "seed": seed,
                         "assignment": assignment})
    report = verify_packing(g, packing)
    return packing, report


def audit_edge_independence(packing: TreePacking, root: int) -> tuple[bool, Optional[int]]:
    """True iff for every vertex the per-tree root paths are pairwise edge-disjoint."""
    for t in packing.trees:
        if t.root != root:
            raise GraphError(f"tree rooted at {t.root}, expected {root}")
    common = set.intersection(*(t.vertices() for t in packing.trees)) if packing.trees else set()
    for v in sorted(common):
        if v == root:
            continue
        paths = [t.path_to_root(v) for t in packing.trees]
        if sum(len(p) for p in paths) != len(set().union(*map(set, paths))):
            return False, v
    return True, None
