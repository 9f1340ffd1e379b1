"""Cycle covers built from spanning-tree packings, their extraction audit, and
XOR secret-shared broadcast over a tree packing.

The cover constructions are simulations of probabilistic arguments: bounds that
only hold with high probability are measured and reported, never asserted.
The broadcast shares come from a seeded PRNG; this is a simulation aid, not a
cryptographic product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .graph import GraphError, MultiGraph, RootedTree, bfs_tree, tree_path
from .packing import TreePacking
from .rng import stream
from .sim import NodeProgram, RoundTrace, SimError, SimNetwork, random_delay_schedule


@dataclass
class CycleCover:
    cycles: list[list[int]]            # each a closed walk as edge ids
    non_tree: list[list[int]]          # per cycle: edges outside its source tree
    profile: dict
    params: dict = field(default_factory=dict)

    def membership(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for cyc in self.cycles:
            for e in cyc:
                out[e] = out.get(e, 0) + 1
        return out

    def max_length(self) -> int:
        return max((len(c) for c in self.cycles), default=0)


def _check_closed_walk(g: MultiGraph, cycle: list[int]) -> None:
    if len(cycle) < 2 or len(set(cycle)) != len(cycle):
        raise GraphError(f"not a simple cycle: {cycle}")
    # orient the walk greedily: each edge must continue from the previous vertex
    u, v = g.edges[cycle[0]]
    for start in (u, v):
        cur = start
        ok = True
        for eid in cycle:
            a, b = g.edges[eid]
            if cur == a:
                cur = b
            elif cur == b:
                cur = a
            else:
                ok = False
                break
        if ok and cur == start:
            return
    raise GraphError(f"edge sequence is not a closed walk: {cycle}")


def fundamental_cycle_cover(g: MultiGraph, t: RootedTree,
                            allowed: Optional[set[int]] = None) -> CycleCover:
    """One cycle per non-tree edge: the edge plus the tree path of its endpoints.

    Guarantees: each non-tree edge lies on exactly one cycle, cycle length is at
    most 2*depth+1, and each cycle has exactly one non-tree edge.  Tree-edge
    congestion is NOT bounded, and the profile says so.
    """
    if not t.spans(g):
        raise GraphError("tree must span the graph")
    tree_eids = set(t.edge_ids())
    cycles = []
    non_tree = []
    for eid in range(g.m):
        if eid in tree_eids or (allowed is not None and eid not in allowed):
            continue
        u, v = g.edges[eid]
        cyc = [eid] + tree_path(t, u, v)
        _check_closed_walk(g, cyc)
        cycles.append(cyc)
        non_tree.append([eid])
    return CycleCover(cycles, non_tree,
                      profile={"one_cycle_per_non_tree_edge": True,
                               "length_bound": 2 * t.depth() + 1,
                               "non_tree_edges_per_cycle": 1,
                               "tree_congestion_bounded": False})


CoverOracle = Callable[[MultiGraph, RootedTree, Optional[set[int]]], CycleCover]


def high_conn_cycle_cover(g: MultiGraph, packing: TreePacking, seed: int,
                          oracle: Optional[CoverOracle] = None,
                          const_scale: float = 30.0) -> CycleCover:
    """Repeated sampled-supergraph covers, one batch per tree of the packing.

    Per tree T_i, runs ell iterations; iteration j samples each non-tree edge
    with probability p and covers the sampled edges in G[p] union T_i.
    """
    if oracle is None:
        oracle = fundamental_cycle_cover
    trees = packing.trees
    k = len(trees)
    if k == 0:
        raise GraphError("packing is empty")
    n = g.n
    logn = max(1.0, math.log2(max(2, n)))
    ell = math.ceil(const_scale * k * logn ** 2)
    p = min(1.0, 1 / (2 * k * logn))
    cycles: list[list[int]] = []
    non_tree: list[list[int]] = []
    for i, tree in enumerate(trees):
        if not tree.spans(g):
            raise GraphError(f"tree {i} is not spanning")
        tree_eids = set(tree.edge_ids())
        for j in range(ell):
            rng = stream(seed, "cover", i, j)
            sampled = {e for e in range(g.m)
                       if e not in tree_eids and rng.random() < p}
            sub = oracle(g, tree, sampled)
            cycles.extend(sub.cycles)
            non_tree.extend(sub.non_tree)
    return CycleCover(cycles, non_tree,
                      profile={"oracle": getattr(oracle, "__name__", "custom")},
                      params={"k": k, "ell": ell, "p": p, "seed": seed,
                              "const_scale": const_scale,
                              "clamped": 1 / (2 * k * logn) > 1.0})


@dataclass
class CoverAudit:
    min_extraction: int
    max_overlap: int
    max_congestion: int
    max_length: int
    per_edge_extraction: dict[int, int]
    meets_target: bool


def audit_cover(g: MultiGraph, cover: CycleCover, k_target: int,
                eta: int) -> CoverAudit:
    """Greedy per-edge extraction of cycles with pairwise-disjoint non-tree edges.

    For each edge e, cycles through e are scanned by (length, index); a cycle is
    taken when its non-tree edges (minus e) avoid all previously taken ones.
    """
    by_edge: dict[int, list[int]] = {}
    for ci, cyc in enumerate(cover.cycles):
        for e in cyc:
            by_edge.setdefault(e, []).append(ci)
    per_edge: dict[int, int] = {}
    max_overlap = 0
    for e in range(g.m):
        order = sorted(by_edge.get(e, []),
                       key=lambda ci: (len(cover.cycles[ci]), ci))
        used: set[int] = set()
        other_counts: dict[int, int] = {}
        taken = 0
        for ci in order:
            nts = set(cover.non_tree[ci]) - {e}
            if nts & used:
                continue
            taken += 1
            used |= nts
            for e2 in cover.cycles[ci]:
                if e2 != e:
                    other_counts[e2] = other_counts.get(e2, 0) + 1
        per_edge[e] = taken
        if other_counts:
            max_overlap = max(max_overlap, max(other_counts.values()))
    membership = cover.membership()
    min_extraction = min(per_edge.values(), default=0)
    return CoverAudit(
        min_extraction=min_extraction,
        max_overlap=max_overlap,
        max_congestion=max(membership.values(), default=0),
        max_length=cover.max_length(),
        per_edge_extraction=per_edge,
        meets_target=min_extraction >= k_target - eta + 1)


# ---------------------------------------------------------------------------
# secure broadcast

def xor_bits(a: str, b: str) -> str:
    return "".join("1" if x != y else "0" for x, y in zip(a, b))


class _TreeFlood(NodeProgram):
    """Floods fixed-size segments down one tree from the source."""

    def __init__(self, tree_adj: dict[int, list[tuple[int, int]]], s: int,
                 segments: list[str], tag: str):
        self.tree_adj = tree_adj
        self.s = s
        self.segments = segments
        self.tag = tag

    def setup(self, node, net):
        queues: dict[int, list] = {}
        if node == self.s:
            for _, eid in self.tree_adj.get(node, []):
                queues[eid] = [(si, seg) for si, seg in enumerate(self.segments)]
        return {"queues": queues, "got": dict(enumerate(self.segments))
                if node == self.s else {}}

    def step(self, node, state, inbox, rnd):
        for eid, sender, payload, _ in inbox:
            si, seg = payload
            if si not in state["got"]:
                state["got"][si] = seg
                for _, out in self.tree_adj.get(node, []):
                    if out != eid:
                        state["queues"].setdefault(out, []).append(payload)
        sends = []
        for eid in sorted(state["queues"]):
            q = state["queues"][eid]
            if q:
                si, seg = q.pop(0)
                sends.append((eid, (si, seg), len(seg), self.tag))
        return sends

    def done(self, node, state):
        return not any(state["queues"].values()) \
            and len(state["got"]) == len(self.segments)


@dataclass
class BroadcastResult:
    message: str
    received: dict[int, str]
    shares: list[str]
    observed_shares: list[int]         # share indices seen on adversary edges
    trace: RoundTrace
    schedule: object


def secure_broadcast(net: SimNetwork, s: int, message: str,
                     packing: TreePacking, adversary_edges: set[int],
                     seed: int) -> BroadcastResult:
    """XOR-split the message into one share per tree and flood each share.

    Share i travels only on tree i's edges, so an adversary listening on few
    edges misses at least one share whenever the trees are edge-disjoint.
    """
    if any(c not in "01" for c in message) or not message:
        raise SimError("message must be a non-empty bit string")
    g = net.topology
    trees = packing.trees
    k = len(trees)
    if k == 0:
        raise SimError("packing is empty")
    for i, t in enumerate(trees):
        if not t.spans(g):
            raise SimError(f"tree {i} is not spanning")
    shares = []
    acc = message
    for i in range(k - 1):
        rng = stream(seed, "share", i)
        share = "".join(str(rng.getrandbits(1)) for _ in message)
        shares.append(share)
        acc = xor_bits(acc, share)
    shares.append(acc)  # XOR of all shares reconstructs the message
    B = net.bandwidth_bits
    programs = []
    for i, t in enumerate(trees):
        adj: dict[int, list[tuple[int, int]]] = {}
        for v, (p, eid) in t.parent.items():
            adj.setdefault(v, []).append((p, eid))
            adj.setdefault(p, []).append((v, eid))
        segments = [shares[i][j:j + B] for j in range(0, len(message), B)]
        programs.append(_TreeFlood(adj, s, segments, tag=f"share-{i}"))
    depth_bound = max(t.depth() for t in trees) * 2 + math.ceil(len(message) / B)
    c_bound = packing.max_congestion * math.ceil(len(message) / B)
    trace, schedule, states = random_delay_schedule(
        net, programs, c_bound=max(1, c_bound), d_bound=depth_bound + net.n,
        seed=seed)
    received = {}
    for v in range(g.n):
        acc = None
        for i in range(k):
            got = states[i][v]["got"]
            share = "".join(got[si] for si in sorted(got))
            acc = share if acc is None else xor_bits(acc, share)
        received[v] = acc
    observed = sorted({int(tag.split("-")[1])
                       for _, eid, _, _, tag in trace.records
                       if eid in adversary_edges and tag.startswith("share-")})
    return BroadcastResult(message, received, shares, observed, trace, schedule)
