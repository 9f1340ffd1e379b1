"""Deterministic lower-bound instance families and their cut/packing audits.

All generators are pure functions of their parameters: same inputs, bit
identical edge lists.  Post-order labels drive the prefix-cut structure that
the audits count against.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .graph import GraphError, MultiGraph, RootedTree, tree_path
from .packing import TreePacking


@dataclass
class WaryTree:
    """Full w-ary tree of depth D with vertices labelled in post-order (0-based)."""

    w: int
    D: int
    parent: dict[int, int]            # child id -> parent id
    children: dict[int, list[int]]
    depth_of: dict[int, int]          # distance from root

    @property
    def N(self) -> int:
        return len(self.depth_of)

    @property
    def root(self) -> int:
        return self.N - 1

    @property
    def post_order(self) -> list[int]:
        return list(range(self.N))

    def leaves(self) -> list[int]:
        return sorted(v for v in range(self.N) if not self.children[v])


def full_wary_tree(w: int, D: int) -> WaryTree:
    """Exact post-order construction: children traversals first, then the root."""
    if w < 2:
        raise GraphError("arity w must be >= 2")
    if D < 1:
        raise GraphError("depth D must be >= 1")
    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {}
    depth_of: dict[int, int] = {}
    counter = [0]

    def build(levels_below: int) -> int:
        kids = [build(levels_below - 1) for _ in range(w)] if levels_below > 0 else []
        vid = counter[0]
        counter[0] += 1
        children[vid] = kids
        for kid in kids:
            parent[kid] = vid
        return vid

    root = build(D)
    stack = [(root, 0)]
    while stack:
        v, d = stack.pop()
        depth_of[v] = d
        stack.extend((c, d + 1) for c in children[v])
    expected = (w ** (D + 1) - 1) // (w - 1)
    assert counter[0] == expected
    return WaryTree(w, D, parent, children, depth_of)


@dataclass
class LBInstance:
    graph: MultiGraph
    blue: set[int]
    red: set[int]
    special: dict[str, int]
    params: dict
    tree: Optional[WaryTree] = None
    partition: Optional[list[list[int]]] = None

    def to_json(self) -> dict:
        from .graph import graph_to_json

        out = {"graph": graph_to_json(self.graph),
               "blue": sorted(self.blue), "red": sorted(self.red),
               "special": self.special, "params": self.params}
        if self.partition is not None:
            out["partition"] = self.partition
        return out


def gen_Gwd(w: int, D: int, k: int) -> LBInstance:
    """Post-order tree (blue) plus k parallel copies per consecutive pair (red)."""
    if k < 1:
        raise GraphError("k must be >= 1")
    tree = full_wary_tree(w, D)
    N = tree.N
    edges = [(v, tree.parent[v]) for v in range(N - 1)]
    blue = set(range(N - 1))
    red = set()
    for i in range(N - 1):
        for _ in range(k):
            red.add(len(edges))
            edges.append((i, i + 1))
    g = MultiGraph(N, edges)
    special = {"u": 0, "u_prime": N - D - 1}
    params = {"w": w, "D": D, "k": k, "N": N}
    return LBInstance(g, blue, red, special, params, tree=tree)


def _clique_core(w: int, D: int, k: int):
    """G_{w,D} with vertices blown up into k-cliques and red bundles into matchings.

    Returns (edges, blue, red, tree, N); vertex x^t_i has id i*k + t (0-based).
    """
    tree = full_wary_tree(w, D)
    N = tree.N
    edges: list[tuple[int, int]] = []
    blue: set[int] = set()
    red: set[int] = set()
    for i in range(N):
        base = i * k
        for a in range(k):
            for b in range(a + 1, k):
                edges.append((base + a, base + b))
    for i in range(N - 1):
        for t in range(k):
            red.add(len(edges))
            edges.append((i * k + t, (i + 1) * k + t))
    clique_count = N * k * (k - 1) // 2
    for v in range(N - 1):
        if tree.parent[v] == v + 1:
            # the tree edge coincides with the first matching strand: keep the
            # graph simple by re-labelling that existing edge as blue
            eid = clique_count + v * k
            assert edges[eid] == (v * k, (v + 1) * k)
            red.discard(eid)
            blue.add(eid)
        else:
            blue.add(len(edges))
            edges.append((v * k, tree.parent[v] * k))
    return edges, blue, red, tree, N


def gen_simple_Gwd(w: int, D: int, k: int, n: int,
                   alpha: Optional[float] = None,
                   eta: Optional[float] = None) -> LBInstance:
    """Simple-graph variant: k-cliques, index-aligned matchings, padding clique."""
    edges, blue, red, tree, N = _clique_core(w, D, k)
    pad = n - k * N
    if pad < k + 1:
        raise GraphError(
            f"n={n} too small: need more than k={k} padding vertices beyond {k * N}")
    params = {"w": w, "D": D, "k": k, "n": n, "N": N, "precondition_checked": False}
    if alpha is not None and eta is not None:
        bound = 3 * k * (k / (2 * D * alpha * eta)) ** D
        if n < bound:
            raise GraphError(f"n={n} below required 3k(k/(2D*alpha*eta))^D = {bound:.1f}")
        params.update({"alpha": alpha, "eta": eta, "precondition_checked": True})
    anchor = (N - 1) * k  # first vertex of the root clique
    first_pad = k * N
    for a in range(pad):
        for b in range(a + 1, pad):
            edges.append((first_pad + a, first_pad + b))
    for a in range(pad):
        edges.append((first_pad + a, anchor))
    g = MultiGraph(n, edges)
    special = {"s": 0, "t": (N - D - 1) * k, "anchor": anchor}
    return LBInstance(g, blue, red, special, params, tree=tree)


def leaf_cut_blue_count(instance: LBInstance, i: int) -> int:
    """Blue edges crossing the post-order prefix cut S_i = {v_1..v_i} (1-based i)."""
    tree = instance.tree
    if tree is None:
        raise GraphError("instance carries no post-order tree")
    v = i - 1
    if not 1 <= i <= tree.N or tree.children[v]:
        raise GraphError(f"index {i} is not a leaf")
    if v == instance.special.get("u_prime"):
        raise GraphError("the cut at u' is excluded")
    count = 0
    for eid in instance.blue:
        a, b = instance.graph.edges[eid]
        if (a < i) != (b < i):
            count += 1
    return count


@dataclass
class LowerBoundAudit:
    per_cut_blue_crossing: dict[int, int]
    per_cut_red_crossing: dict[int, int]
    path_lengths: list[int]
    sum_path_lengths: int
    required_sum: float
    max_path_length: int
    quarter_threshold: float
    paths_edge_disjoint: bool
    blue_budget: float


def audit_packing_lower_bound(instance: LBInstance, packing: TreePacking,
                              alpha: float, eta: float) -> LowerBoundAudit:
    """Check a packing of a post-order instance against the cut-counting argument.

    Every tree contributes its u-u' path; at each leaf cut a path crosses
    either on a blue edge (at most D*w*eta trees may) or on red copies, and
    distinct cuts consume distinct red edges, so total path length is bounded
    below by |L| * k / (2 alpha) when the packing has k/alpha trees.
    """
    tree = instance.tree
    if tree is None:
        raise GraphError("instance carries no post-order tree")
    g = instance.graph
    for t in packing.trees:
        if not t.spans(g):
            raise GraphError("packing contains a non-spanning tree")
    u = instance.special["u"]
    u_prime = instance.special["u_prime"]
    paths = [tree_path(t, u, u_prime) for t in packing.trees]
    leaf_cuts = [v + 1 for v in tree.leaves() if v != u_prime]
    per_blue: dict[int, int] = {}
    per_red: dict[int, int] = {}
    for i in leaf_cuts:
        nblue = nred = 0
        for path in paths:
            crossing = [e for e in path if (g.edges[e][0] < i) != (g.edges[e][1] < i)]
            if any(e in instance.blue for e in crossing):
                nblue += 1
            elif crossing:
                nred += 1
        per_blue[i] = nblue
        per_red[i] = nred
    k = instance.params["k"]
    L = len(tree.leaves())
    lengths = [len(p) for p in paths]
    edge_sets = [set(p) for p in paths]
    disjoint = sum(len(s) for s in edge_sets) == len(set().union(*edge_sets)) if edge_sets else True
    return LowerBoundAudit(
        per_cut_blue_crossing=per_blue,
        per_cut_red_crossing=per_red,
        path_lengths=lengths,
        sum_path_lengths=sum(lengths),
        required_sum=L * k / (2 * alpha),
        max_path_length=max(lengths, default=0),
        quarter_threshold=tree.N / 4,
        paths_edge_disjoint=disjoint,
        blue_budget=instance.params["D"] * instance.params["w"] * eta,
    )


# ---------------------------------------------------------------------------
# MST lower-bound family

def gen_Fmk(m: int, k: int) -> LBInstance:
    """Root, m star centers, and an m^2 x m grid of k-cliques with aligned matchings."""
    if m < 2 or k < 1:
        raise GraphError("need m >= 2 and k >= 1")
    n = 1 + m + m ** 3 * k

    def clique_base(j: int, i: int) -> int:  # 0-based j < m^2, i < m
        return 1 + m + (j * m + i) * k

    edges: list[tuple[int, int]] = []
    root_edges = []
    for i in range(m):
        root_edges.append(len(edges))
        edges.append((0, 1 + i))
    for j in range(m * m):
        for i in range(m):
            base = clique_base(j, i)
            for a in range(k):
                for b in range(a + 1, k):
                    edges.append((base + a, base + b))
    for j in range(m * m):
        for i in range(m - 1):
            for t in range(k):
                edges.append((clique_base(j, i) + t, clique_base(j, i + 1) + t))
    star_eids: list[list[int]] = []
    bit_eids: list[int] = []
    for i in range(m):
        mine = []
        for j in range(m * m):
            base = clique_base(j, i)
            for t in range(k):
                eid = len(edges)
                edges.append((1 + i, base + t))
                mine.append(eid)
                if i == 0 and t == 0:
                    bit_eids.append(eid)
        star_eids.append(mine)
    g = MultiGraph(n, edges)
    special = {"c": 0, "s": 1, "r": m}
    params = {"m": m, "k": k, "n": n, "star_eids": star_eids,
              "bit_eids": bit_eids, "root_eids": root_edges}
    return LBInstance(g, set(), set(), special, params)


def weight_variant(instance: LBInstance, X: str) -> MultiGraph:
    """Weighted family member: star weights plus per-bit 0/2 on (u_1, v^j)."""
    m = instance.params["m"]
    if len(X) != m * m or any(c not in "01" for c in X):
        raise GraphError(f"X must be a binary string of length {m * m}")
    g = instance.graph
    weights = [0] * g.m
    star_eids = instance.params["star_eids"]
    for i in range(1, m - 1):
        for eid in star_eids[i]:
            weights[eid] = 10
    for eid in star_eids[m - 1]:
        weights[eid] = 1
    for eid in star_eids[0]:
        weights[eid] = 10
    for j, eid in enumerate(instance.params["bit_eids"]):
        weights[eid] = 0 if X[j] == "0" else 2
    return MultiGraph(g.n, g.edges, weights)


def kruskal_mst(g: MultiGraph) -> set[int]:
    """Exact MST edge ids; ties broken by lower edge id."""
    if g.weights is None:
        raise GraphError("graph is unweighted")
    dsu = list(range(g.n))

    def find(x: int) -> int:
        while dsu[x] != x:
            dsu[x] = dsu[dsu[x]]
            x = dsu[x]
        return x

    mst: set[int] = set()
    for eid in sorted(range(g.m), key=lambda e: (g.weights[e], e)):
        u, v = g.edges[eid]
        ru, rv = find(u), find(v)
        if ru != rv:
            dsu[ru] = rv
            mst.add(eid)
    return mst


def fmk_decode_via_mst(weighted: MultiGraph, instance: LBInstance) -> str:
    """Recover the bit string: bit j is 0 iff the edge (u_1, v^j) is in the MST."""
    mst = kruskal_mst(weighted)
    return "".join("0" if eid in mst else "1" for eid in instance.params["bit_eids"])


# ---------------------------------------------------------------------------
# shortcut lower-bound family

def gen_shortcut_lb(k: int, alpha: int, eta: int, D: int, n: int) -> LBInstance:
    """Clique-blown post-order graph plus q disjoint paths glued to the leaf cliques."""
    w_frac = Fraction(k, 2 * D * alpha * eta)
    if w_frac.denominator != 1:
        raise GraphError(f"w = k/(2*D*alpha*eta) = {w_frac} must be an integer")
    w = int(w_frac)
    if w < 2:
        raise GraphError(f"w = {w} < 2; increase k or decrease alpha*eta*D")
    edges, blue, red, tree, N = _clique_core(w, D, k)
    n_core = k * N
    L = tree.leaves()
    u_prime = N - D - 1
    lstar = len(L)
    assert lstar == w ** D
    q = n // (2 * w ** D)
    if q < 1:
        raise GraphError(f"q = floor(n/(2 w^D)) = 0 with n={n}, w^D={w ** D}")
    path_vertex = lambda j, i: n_core + j * lstar + i  # i-th vertex of path P_j
    total = n_core + q * lstar
    for j in range(q):
        for i in range(lstar - 1):
            edges.append((path_vertex(j, i), path_vertex(j, i + 1)))
    for i, leaf in enumerate(L):
        base = leaf * k
        for j in range(q):
            for t in range(k):
                edges.append((base + t, path_vertex(j, i)))
    g = MultiGraph(total, edges)
    partition = [[path_vertex(j, i) for i in range(lstar)] for j in range(q)]
    special = {"s": 0, "t": u_prime * k}
    params = {"k": k, "alpha": alpha, "eta": eta, "D": D, "n": n,
              "w": w, "N": N, "q": q, "lstar": lstar, "n_actual": total}
    return LBInstance(g, blue, red, special, params, tree=tree, partition=partition)
