"""Synchronous message-passing simulator with per-edge bandwidth accounting,
plus the distributed routines built on top of it: random-delay composition,
sampled-subgraph construction, connectivity verification, approximate min-cut,
shortcut construction, and pipelined dissemination.

Nodes run lockstep rounds (deliver, compute, send).  A directed edge carries at
most `bandwidth_bits` per round; exceeding it is a simulation error, never a
silent drop.
"""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .graph import GraphError, MultiGraph, RootedTree, bfs_tree, diameter
from .hashing import hash_eval, hash_family_sample
from .rng import stream


class SimError(GraphError):
    pass


@dataclass
class SimNetwork:
    topology: MultiGraph
    bandwidth_bits: int = 32

    @property
    def n(self) -> int:
        return self.topology.n


@dataclass
class RoundTrace:
    records: list = field(default_factory=list)  # (round, eid, sender, bits, tag)
    rounds: int = 0

    def log(self, rnd: int, eid: int, sender: int, bits: int, tag: str) -> None:
        self.records.append((rnd, eid, sender, bits, tag))

    def per_edge_counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, eid, _, _, _ in self.records:
            out[eid] = out.get(eid, 0) + 1
        return out

    def max_bits_per_round(self) -> int:
        best = 0
        acc: dict[tuple[int, int, int], int] = {}
        for rnd, eid, sender, bits, _ in self.records:
            key = (rnd, eid, sender)
            acc[key] = acc.get(key, 0) + bits
            best = max(best, acc[key])
        return best

    def extend(self, other: "RoundTrace") -> None:
        # concatenated runs form one sequential timeline
        base = self.rounds
        self.records.extend((rnd + base, eid, sender, bits, tag)
                            for rnd, eid, sender, bits, tag in other.records)
        self.rounds += other.rounds


class NodeProgram:
    """Per-node behavior: pure function of (state, inbox, round)."""

    def setup(self, node: int, net: SimNetwork) -> dict:
        return {}

    def step(self, node: int, state: dict, inbox: list, rnd: int) -> list:
        """Return sends as (eid, payload, bits, tag) tuples."""
        raise NotImplementedError

    def done(self, node: int, state: dict) -> bool:
        return False


def run_rounds(net: SimNetwork, programs, max_rounds: int,
               quiesce_rounds: Optional[int] = None):
    """Lockstep rounds until every node reports done or max_rounds elapse.

    With quiesce_rounds set, the run also stops after that many consecutive
    message-free rounds (useful for flood-style programs whose non-reached
    nodes cannot detect termination locally).  Returns (trace, states).
    """
    g = net.topology
    if isinstance(programs, NodeProgram):
        programs = {v: programs for v in range(g.n)}
    if set(programs) != set(range(g.n)):
        raise SimError("exactly one program per node required")
    states = {v: programs[v].setup(v, net) for v in range(g.n)}
    inboxes: dict[int, list] = {v: [] for v in range(g.n)}
    trace = RoundTrace()
    idle = 0
    for rnd in range(max_rounds):
        if all(programs[v].done(v, states[v]) for v in range(g.n)):
            break
        if quiesce_rounds is not None and idle >= quiesce_rounds:
            break
        nxt: dict[int, list] = {v: [] for v in range(g.n)}
        used: dict[tuple[int, int], int] = {}
        sent_any = False
        for v in range(g.n):
            sends = programs[v].step(v, states[v], inboxes[v], rnd)
            for eid, payload, bits, tag in sends or []:
                a, b = g.edges[eid]
                if v not in (a, b):
                    raise SimError(f"node {v} sent on non-incident edge {eid}")
                key = (eid, v)
                used[key] = used.get(key, 0) + bits
                if used[key] > net.bandwidth_bits:
                    raise SimError(
                        f"bandwidth exceeded on edge {eid} (from {v}) in round {rnd}:"
                        f" {used[key]} > {net.bandwidth_bits} bits")
                trace.log(rnd, eid, v, bits, tag)
                nxt[g.other(eid, v)].append((eid, v, payload, tag))
                sent_any = True
        idle = 0 if sent_any else idle + 1
        inboxes = nxt
        trace.rounds = rnd + 1
    return trace, states


# ---------------------------------------------------------------------------
# building-block programs

class BFSProgram(NodeProgram):
    """Flooded BFS over an edge subset; parent = lowest-eid first announcement."""

    def __init__(self, root: int, allowed: Optional[set[int]] = None,
                 depth_cap: Optional[int] = None, tag: str = "bfs",
                 bits: int = 32):
        self.root = root
        self.allowed = allowed
        self.depth_cap = depth_cap
        self.tag = tag
        self.bits = bits

    def _edges(self, node: int, net: SimNetwork) -> list[int]:
        out = [eid for _, eid in net.topology.adj()[node]]
        if self.allowed is not None:
            out = [eid for eid in out if eid in self.allowed]
        return sorted(out)

    def setup(self, node: int, net: SimNetwork) -> dict:
        return {"level": 0 if node == self.root else None,
                "parent": None, "parent_eid": None, "announced": False,
                "edges": self._edges(node, net)}

    def step(self, node, state, inbox, rnd):
        for eid, sender, payload, _ in sorted(inbox, key=lambda m: m[0]):
            if state["level"] is None:
                state["level"] = payload + 1
                state["parent"] = sender
                state["parent_eid"] = eid
        if state["level"] is not None and not state["announced"]:
            state["announced"] = True
            if self.depth_cap is None or state["level"] < self.depth_cap:
                return [(eid, state["level"], self.bits, self.tag)
                        for eid in state["edges"]]
        return []

    def done(self, node, state):
        return state["announced"]


def bfs_states_to_tree(root: int, states: dict[int, dict]) -> RootedTree:
    parent = {v: (st["parent"], st["parent_eid"])
              for v, st in states.items() if st["parent"] is not None}
    level = {v: st["level"] for v, st in states.items() if st["level"] is not None}
    return RootedTree(root, parent, level)


def _run_bfs(net: SimNetwork, root: int, allowed=None, depth_cap=None,
             tag="bfs") -> tuple[RootedTree, RoundTrace]:
    prog = BFSProgram(root, allowed, depth_cap, tag)
    cap = depth_cap if depth_cap is not None else net.n
    trace, states = run_rounds(net, prog, max_rounds=cap + 1, quiesce_rounds=2)
    return bfs_states_to_tree(root, states), trace


# ---------------------------------------------------------------------------
# random-delay composition

class PhaseOverflow(SimError):
    pass


@dataclass
class ScheduleReport:
    phase_len: int
    offsets: list[int]
    doublings: int
    total_rounds: int
    bound: float
    within_bound: bool


class _Composite(NodeProgram):
    """Runs tagged sub-programs one local round per phase, FIFO edge queues."""

    def __init__(self, programs: list[NodeProgram], offsets: list[int],
                 phase_len: int, horizon: int):
        self.programs = programs
        self.offsets = offsets
        self.phase_len = phase_len
        self.horizon = horizon  # local rounds granted to every algorithm

    def setup(self, node, net):
        return {"sub": [p.setup(node, net) for p in self.programs],
                "inbox": [[] for _ in self.programs],
                "queues": {},  # eid -> FIFO of (payload, bits, tag)
                "qorder": [],  # sorted queue keys, cached across rounds
                "pending": 0,
                }

    def step(self, node, state, inbox, rnd):
        for eid, sender, (idx, payload), tag in inbox:
            state["inbox"][idx].append((eid, sender, payload, tag))
        phase, pr = divmod(rnd, self.phase_len)
        if pr != 0 and not state["pending"]:
            return []
        if pr == 0:
            queues = state["queues"]
            for idx, prog in enumerate(self.programs):
                local = phase - self.offsets[idx]
                if 0 <= local < self.horizon:
                    sub_inbox = state["inbox"][idx]
                    state["inbox"][idx] = []
                    for send in prog.step(node, state["sub"][idx],
                                          sub_inbox, local) or []:
                        eid, payload, bits, tag = send
                        if eid not in queues:
                            queues[eid] = deque()
                            bisect.insort(state["qorder"], eid)
                        queues[eid].append(((idx, payload), bits, tag))
                        state["pending"] += 1
        sends = []
        for eid in state["qorder"]:
            q = state["queues"][eid]
            if q:
                payload, bits, tag = q.popleft()
                state["pending"] -= 1
                sends.append((eid, payload, bits, tag))
        if pr == self.phase_len - 1:
            if state["pending"]:
                raise PhaseOverflow(f"edge queue overflow at node {node}, round {rnd}")
        return sends

    def done(self, node, state):
        if state["pending"] or any(state["inbox"]):
            return False
        return all(p.done(node, st)
                   for p, st in zip(self.programs, state["sub"]))


def random_delay_schedule(net: SimNetwork, programs: list[NodeProgram],
                          c_bound: int, d_bound: int, seed: int,
                          a: int = 4) -> tuple[RoundTrace, ScheduleReport,
                                               list[list[dict]]]:
    """Run the programs jointly with uniformly random phase offsets.

    Each program advances one of its own rounds per phase; queued messages
    drain at one per directed edge per round.  A phase too short to drain its
    queues is retried with doubled phase length (the low-probability branch).
    Returns (trace, report, per-program node states).
    """
    n = net.n
    logn = max(1, math.ceil(math.log2(max(2, n))))
    rng = stream(seed, "delay")
    offsets = [rng.randrange(0, math.ceil(c_bound / logn) + 1)
               for _ in programs]
    phase_len = a * logn
    doublings = 0
    horizon = d_bound + 1
    while True:
        comp = _Composite(programs, offsets, phase_len, horizon)
        total_phases = max(offsets) + horizon + 1
        try:
            # quiescence must outlast the largest start offset, else a delayed
            # algorithm could be cut off before its first message
            quiet = (max(offsets) + 2) * phase_len + 1
            trace, states = run_rounds(net, comp,
                                       max_rounds=total_phases * phase_len,
                                       quiesce_rounds=quiet)
            break
        except PhaseOverflow:
            phase_len *= 2
            doublings += 1
            if doublings > 16:
                raise
    bound = 8 * (c_bound + d_bound * math.log2(max(2, n)))
    report = ScheduleReport(phase_len, offsets, doublings, trace.rounds,
                            bound, trace.rounds <= bound)
    per_program = [[states[v]["sub"][i] for v in range(n)]
                   for i in range(len(programs))]
    return trace, report, per_program


# ---------------------------------------------------------------------------
# sampled-subgraph tool

@dataclass
class BasicToolResult:
    subgraphs: list[set[int]]          # edge ids of each G_i
    trees: list[RootedTree]            # BFS tree of each G_i from the root
    p: float
    tree_prob: float
    clamped: bool
    spanning: list[bool]
    trace: RoundTrace
    schedule: Optional[ScheduleReport] = None


def distributed_basic_tool(net: SimNetwork, k: int, eta: int, seed: int,
                           const_scale: float = 707.0, root: int = 0,
                           depth_cap: Optional[int] = None) -> BasicToolResult:
    """Build k sampled subgraphs G_i = G[p] union T[eta/k] and BFS them jointly."""
    if not 1 <= eta <= k:
        raise SimError("need 1 <= eta <= k")
    g = net.topology
    n = g.n
    p_raw = const_scale * math.log(max(2, n)) / k
    p = min(1.0, p_raw)
    tree_prob = eta / k
    base_tree = bfs_tree(g, root)
    tree_eids = set(base_tree.edge_ids())
    subgraphs = []
    for i in range(k):
        # the higher-id endpoint flips the coin; iterating eids in order with a
        # per-subgraph stream is observationally identical and deterministic
        rng = stream(seed, "tool", i)
        kept = set()
        for eid in range(g.m):
            if rng.random() < p:
                kept.add(eid)
        trng = stream(seed, "tool-tree", i)
        for eid in sorted(tree_eids):
            if trng.random() < tree_prob:
                kept.add(eid)
        subgraphs.append(kept)
    cap = depth_cap if depth_cap is not None else n
    programs = [BFSProgram(root, allowed=sub, depth_cap=cap, tag=f"tool-{i}")
                for i, sub in enumerate(subgraphs)]
    logn = max(1, math.ceil(math.log2(max(2, n))))
    trace, schedule, states = random_delay_schedule(
        net, programs, c_bound=eta * logn, d_bound=cap, seed=seed)
    trees = [bfs_states_to_tree(root, dict(enumerate(st))) for st in states]
    spanning = [t.spans(g) for t in trees]
    return BasicToolResult(subgraphs, trees, p, tree_prob, p_raw > 1.0,
                           spanning, trace, schedule)


# ---------------------------------------------------------------------------
# connectivity verification and approximate min-cut

@dataclass
class VerifyResult:
    answers: dict[int, bool]
    good: int
    trials: int
    p: float
    depth_cap: int
    trace: RoundTrace


def verify_lambda_connectivity(net: SimNetwork, lam: int, seed: int,
                               const_scale: float = 707.0,
                               trials: Optional[int] = None,
                               diam_hint: Optional[int] = None) -> VerifyResult:
    """Sampling experiments: YES iff >= 0.9 of sampled subgraphs stay connected."""
    if lam < 1:
        raise SimError("lambda must be >= 1")
    g = net.topology
    n = g.n
    if trials is None:
        trials = max(4, math.ceil(math.log2(max(2, n))))
    D = diam_hint if diam_hint is not None else diameter(g)
    if D == float("inf"):
        raise SimError("topology must be connected")
    D = int(D)
    # the sampled-tree depth budget never undercuts the true diameter (at
    # lam=1 the exponent bound degenerates to 1, yet p clamps to 1)
    depth_cap = min(max(lam ** (D * (D + 1) // 2), D), n)
    p = min(1.0, const_scale * math.log(max(2, n)) / lam)
    trace = RoundTrace()
    good = 0
    for j in range(trials):
        rng = stream(seed, "verify", j)
        kept = {eid for eid in range(g.m) if rng.random() < p}
        tree, t = _run_bfs(net, 0, allowed=kept, depth_cap=depth_cap,
                           tag=f"verify-{j}")
        trace.extend(t)
        if tree.spans(g):
            good += 1
    yes = good >= 0.9 * trials
    return VerifyResult({v: yes for v in range(n)}, good, trials, p,
                        depth_cap, trace)


def approx_min_cut(net: SimNetwork, seed: int,
                   const_scale: float = 707.0) -> tuple[int, list[VerifyResult]]:
    """Doubling search on lambda'; returns the first value rejected."""
    g = net.topology
    min_deg = min(len(g.adj()[v]) for v in range(g.n))
    lam = 1
    history = []
    while True:
        res = verify_lambda_connectivity(net, lam, seed, const_scale)
        history.append(res)
        if not res.answers[0]:
            return lam, history
        if lam > 2 * min_deg:
            # min cut <= min degree, so the estimate is already an upper range
            return lam, history
        lam *= 2


# ---------------------------------------------------------------------------
# low-congestion shortcuts

@dataclass
class ShortcutSet:
    parts: list[list[int]]
    shortcut_edges: list[set[int]]     # H_i per part
    small: list[bool]
    alpha: int
    beta: float
    t_small: int
    eta: int
    trace: RoundTrace


def _part_metrics(g: MultiGraph, parts, shortcut_edges):
    """Exact alpha (edge multiplicity over augmented parts) and beta (diameter)."""
    induced = []
    for members, extra in zip(parts, shortcut_edges):
        mem = set(members)
        eids = {e for e in range(g.m)
                if g.edges[e][0] in mem and g.edges[e][1] in mem}
        induced.append(eids | extra)
    alpha = 0
    count: dict[int, int] = {}
    for eids in induced:
        for e in eids:
            count[e] = count.get(e, 0) + 1
    alpha = max(count.values(), default=0)
    beta = 0.0
    for members, eids in zip(parts, induced):
        leader = min(members)
        tree = bfs_tree(g, leader, allowed=eids)
        if all(v in tree.level for v in members):
            beta = max(beta, float(max(tree.level[v] for v in members)))
        else:
            beta = float("inf")
    return alpha, beta


def build_shortcuts(net: SimNetwork, parts: list[list[int]], k: int, D: int,
                    seed: int, const_scale: float = 101.0) -> ShortcutSet:
    """Small parts keep H_i empty; large parts hash-select a shared sampled G_j."""
    g = net.topology
    n = g.n
    for idx, members in enumerate(parts):
        mem = set(members)
        eids = {e for e in range(g.m)
                if g.edges[e][0] in mem and g.edges[e][1] in mem}
        tree = bfs_tree(g, min(members), allowed=eids)
        if not all(v in tree.level for v in members):
            raise SimError(f"part {idx} induces a disconnected subgraph")
    lnn = math.log(max(2, n))
    eta = max(1, math.ceil(const_scale * lnn * k / n ** (1 / (2 * D + 1))))
    eta = min(eta, k)
    t_small = math.ceil(min((n / k) ** 0.5 + n ** (D / (2 * D + 1)), n / k))
    # the sampling constant is 7x the shortcut constant (707 vs 101 defaults)
    tool = distributed_basic_tool(net, k, eta, seed,
                                  const_scale=7 * const_scale, depth_cap=n)
    member = hash_family_sample(gamma=max(1, len(parts).bit_length()),
                                beta_bits=max(1, k.bit_length()),
                                d=2, seed=seed)
    shortcut_edges: list[set[int]] = []
    small_flags: list[bool] = []
    for idx, members in enumerate(parts):
        mem = set(members)
        eids = {e for e in range(g.m)
                if g.edges[e][0] in mem and g.edges[e][1] in mem}
        tree = bfs_tree(g, min(members), allowed=eids)
        ecc = max(tree.level[v] for v in members)
        small = ecc <= t_small
        small_flags.append(small)
        if small:
            shortcut_edges.append(set())
        else:
            j = hash_eval(member, idx) % k
            shortcut_edges.append(set(tool.subgraphs[j]))
    alpha, beta = _part_metrics(g, parts, shortcut_edges)
    return ShortcutSet(parts, shortcut_edges, small_flags, alpha, beta,
                       t_small, eta, tool.trace)


# ---------------------------------------------------------------------------
# information dissemination

@dataclass
class DisseminateResult:
    payload: str
    received: str
    rounds: int
    chunks: int
    rerouted: list[int]
    formula: float
    trace: RoundTrace


class _Router(NodeProgram):
    """Store-and-forward of bit segments along fixed per-chunk routes."""

    def __init__(self, routes: dict[int, list[tuple[int, int]]],
                 segments: dict[int, list[str]], s: int, t: int, B: int):
        self.routes = routes      # chunk -> [(node, eid), ...] hops in order
        self.segments = segments  # chunk -> list of bit strings (<= B bits)
        self.s = s
        self.t = t
        self.B = B
        self.next_hop = {}        # (node, chunk) -> eid
        for cid, hops in routes.items():
            for node, eid in hops:
                self.next_hop[(node, cid)] = eid

    def setup(self, node, net):
        queues: dict[int, list] = {}
        if node == self.s:
            for cid, segs in self.segments.items():
                if not self.routes[cid]:
                    continue
                eid = self.next_hop[(node, cid)]
                for si, seg in enumerate(segs):
                    queues.setdefault(eid, []).append((cid, si, seg))
        expect = sum(len(v) for v in self.segments.values())
        return {"queues": queues, "got": {}, "expect": expect}

    def step(self, node, state, inbox, rnd):
        for eid, sender, payload, _ in inbox:
            cid, si, seg = payload
            if node == self.t:
                state["got"][(cid, si)] = seg
            elif (node, cid) in self.next_hop:
                out = self.next_hop[(node, cid)]
                state["queues"].setdefault(out, []).append(payload)
        sends = []
        for eid in sorted(state["queues"]):
            q = state["queues"][eid]
            if q:
                cid, si, seg = q.pop(0)
                sends.append((eid, (cid, si, seg), len(seg), f"chunk-{cid}"))
        return sends

    def done(self, node, state):
        if any(state["queues"].values()):
            return False
        if node == self.t:
            return len(state["got"]) == state["expect"]
        return True


def disseminate(net: SimNetwork, s: int, t: int, payload: str, k: int, D: int,
                seed: int, const_scale: float = 101.0) -> DisseminateResult:
    """Split the payload into k chunks and pipeline them along k sampled trees."""
    if s == t:
        raise SimError("s and t must differ")
    if any(c not in "01" for c in payload):
        raise SimError("payload must be a bit string")
    g = net.topology
    n = g.n
    N = len(payload)
    chi = max(1.0, N ** (1 / (D + 1)) / (const_scale * math.log(max(2, n))))
    eta = max(1, min(k, math.ceil(k / chi)))
    tool = distributed_basic_tool(net, k, eta, seed,
                                  const_scale=7 * const_scale,
                                  root=s, depth_cap=n)
    fallback = bfs_tree(g, s)
    if t not in fallback.level:
        raise SimError("t unreachable from s")
    B = net.bandwidth_bits
    chunk_len = math.ceil(N / k)
    routes = {}
    segments = {}
    rerouted = []
    for i in range(k):
        chunk = payload[i * chunk_len:(i + 1) * chunk_len]
        tree = tool.trees[i]
        if t not in tree.level:
            tree = fallback
            rerouted.append(i)
        hops = []
        path = []
        v = t
        while v != s:
            p, eid = tree.parent[v]
            path.append((p, eid))
            v = p
        hops = list(reversed(path))
        routes[i] = hops
        segments[i] = [chunk[j:j + B] for j in range(0, len(chunk), B)] or []
    prog = _Router(routes, segments, s, t, B)
    max_rounds = n + k * (math.ceil(chunk_len / B) + 1) + 4
    trace, states = run_rounds(net, prog, max_rounds=max_rounds * 4)
    got = states[t]["got"]
    pieces = {}
    for (cid, si), seg in got.items():
        pieces.setdefault(cid, {})[si] = seg
    received = "".join(
        "".join(pieces[cid][si] for si in sorted(pieces[cid]))
        for cid in sorted(pieces))
    formula = N ** (1 - 1 / (D + 1)) + N / k
    return DisseminateResult(payload, received, trace.rounds, k, rerouted,
                             formula, trace)
