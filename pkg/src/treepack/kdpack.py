"""Packing k trees of diameter O(D log n) in (k,D)-connected graphs.

Three phases: hop-bounded flow via column generation (the pricing oracle is
the hop-bounded shortest-path DP over dual edge lengths), a bipartition local
search that turns flows into layered structure, and randomized rounding of
layer flows into k trees.  Flow values are kept as exact fractions so the
per-edge load ledger is reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .graph import (
    GraphError,
    InfeasibleError,
    MultiGraph,
    bfs_tree,
    extract_hop_path,
    hop_tables,
)
from .packing import TreePacking, verify_packing
from .rng import stream


@dataclass
class KDConfig:
    congestion_slack: float = 0.1      # epsilon: accept per-edge load <= 2(1+eps)
    round_exponent: int = 3            # c: path values rounded up to multiples of 1/n^c
    cg_iteration_cap: int = 200
    dual_tol: float = 1e-9
    local_search_cap: int = 200_000


@dataclass
class PathFlow:
    """Weighted hop-bounded paths with exact per-edge and per-endpoint ledgers."""

    hop_bound: int
    paths: list[tuple[tuple[int, ...], tuple[int, ...], Fraction]] = field(default_factory=list)
    load: dict[int, Fraction] = field(default_factory=dict)
    per_endpoint: dict[int, Fraction] = field(default_factory=dict)

    def add_path(self, verts: Sequence[int], eids: Sequence[int], value: Fraction) -> None:
        if len(eids) > self.hop_bound:
            raise GraphError(f"path with {len(eids)} hops exceeds bound {self.hop_bound}")
        if len(verts) != len(eids) + 1:
            raise GraphError("vertex/edge count mismatch")
        value = Fraction(value)
        self.paths.append((tuple(verts), tuple(eids), value))
        for e in eids:
            self.load[e] = self.load.get(e, Fraction(0)) + value
        for v in (verts[0], verts[-1]):
            self.per_endpoint[v] = self.per_endpoint.get(v, Fraction(0)) + value

    def recompute_ledgers(self) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
        load: dict[int, Fraction] = {}
        per_endpoint: dict[int, Fraction] = {}
        for verts, eids, value in self.paths:
            for e in eids:
                load[e] = load.get(e, Fraction(0)) + value
            for v in (verts[0], verts[-1]):
                per_endpoint[v] = per_endpoint.get(v, Fraction(0)) + value
        return load, per_endpoint

    @property
    def max_load(self) -> Fraction:
        return max(self.load.values(), default=Fraction(0))

    def to_json(self) -> dict:
        return {"hop_bound": self.hop_bound,
                "paths": [{"vertices": list(v), "eids": list(e),
                           "value_num": val.numerator, "value_den": val.denominator}
                          for v, e, val in self.paths]}


def _solve_restricted_lp(columns, terminals, k):
    """Min-t LP over the current path columns; returns (t*, values, y, ell).

    Constraints: endpoint totals >= k per terminal, per-edge load <= 2t.
    """
    n_cols = len(columns)
    term_index = {u: i for i, u in enumerate(terminals)}
    edge_rows = sorted({e for _, eids in columns for e in eids})
    edge_index = {e: len(terminals) + i for i, e in enumerate(edge_rows)}
    n_rows = len(terminals) + len(edge_rows)
    A = np.zeros((n_rows, n_cols + 1))
    b = np.zeros(n_rows)
    for u, i in term_index.items():
        b[i] = -float(k)
    for j, (ends, eids) in enumerate(columns):
        for u in ends:
            if u in term_index:
                A[term_index[u], j] -= 1.0
        for e in eids:
            A[edge_index[e], j] += 1.0
    A[len(terminals):, n_cols] = -2.0
    c = np.zeros(n_cols + 1)
    c[n_cols] = 1.0
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(0, None)] * (n_cols + 1), method="highs")
    if not res.success:
        raise InfeasibleError(f"restricted LP failed: {res.message}")
    y = {u: max(0.0, -res.ineqlin.marginals[i]) for u, i in term_index.items()}
    ell = {e: max(0.0, -res.ineqlin.marginals[i]) for e, i in edge_index.items()}
    return res.x[n_cols], res.x[:n_cols], y, ell


def find_flow(g: MultiGraph, U: set[int], s: int, k: int, D: int,
              cfg: Optional[KDConfig] = None) -> PathFlow:
    """Flow sending >= k units from every terminal in U, on <= 2D-hop paths.

    Column generation: the restricted master minimizes the congestion scale t
    (per-edge load <= 2t); new columns are cheapest hop-bounded paths under
    the dual edge lengths.  Accepts t <= 1 + congestion_slack.
    """
    cfg = cfg or KDConfig()
    if s in U:
        raise GraphError("s must not belong to U")
    U = sorted(U)
    hop = 2 * D
    unit = [1] * g.m
    columns: list[tuple[tuple[int, int], tuple[int, ...], tuple[int, ...]]] = []
    col_paths: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    def add_column(verts, eids):
        key = (tuple(verts), tuple(eids))
        if key in seen_cols:
            return False
        seen_cols.add(key)
        col_paths.append(key)
        return True

    seen_cols: set = set()
    for u in U:
        tables = hop_tables(g, unit, u, hop)
        res = extract_hop_path(g, unit, tables, u, s)
        if res is None:
            raise InfeasibleError(f"terminal {u} cannot reach {s} within {hop} hops")
        add_column(res[0], res[1])
    t_star, values, y, ell = 0.0, [], {}, {}
    for _ in range(cfg.cg_iteration_cap):
        lp_cols = [((verts[0], verts[-1]), eids) for verts, eids in col_paths]
        t_star, values, y, ell = _solve_restricted_lp(lp_cols, U, k)
        lengths = [ell.get(e, 0.0) for e in range(g.m)]
        improved = False
        for a in U:
            tables = hop_tables(g, lengths, a, hop)
            ya = y.get(a, 0.0)
            for b in U + [s]:
                if b == a:
                    continue
                target = ya + y.get(b, 0.0)
                if target <= cfg.dual_tol:
                    continue
                dist = tables[-1].get(b)
                if dist is None or dist >= target - cfg.dual_tol:
                    continue
                res = extract_hop_path(g, lengths, tables, a, b)
                if res is not None and add_column(res[0], res[1]):
                    improved = True
        if not improved:
            break
    if t_star > 1.0 + cfg.congestion_slack:
        worst = max(U, key=lambda u: y.get(u, 0.0))
        raise InfeasibleError(
            f"no flow within congestion slack (t={t_star:.4f}); most-violated vertex {worst}")
    flow = PathFlow(hop_bound=hop)
    for (verts, eids), val in zip(col_paths, values):
        if val > 1e-9:
            flow.add_path(verts, eids, Fraction(float(val)))
    return flow


def _round_up(value: Fraction, denom: int) -> Fraction:
    return Fraction(math.ceil(value * denom), denom)


def bipartition_flow(g: MultiGraph, S: set[int], k: int, D: int,
                     cfg: Optional[KDConfig] = None) -> tuple[set[int], set[int], PathFlow]:
    """Split S into (S', S'') with a directed flow S''->S'.

    After rounding path values up to multiples of 1/n^c, a local search flips
    vertices whose same-side flow exceeds their cross flow (each flip raises
    the cross flow by >= 1/n^c, so it terminates).  Every vertex of S'' then
    sends >= k/2 units into S', and |S'| <= |S|/2 + 1.
    """
    cfg = cfg or KDConfig()
    S = set(S)
    if len(S) < 2:
        raise GraphError("need |S| >= 2")
    s = min(S)
    flow = find_flow(g, S - {s}, s, k, D, cfg)
    if len(S) == 2:
        other = max(S)
        directed = PathFlow(hop_bound=flow.hop_bound)
        for verts, eids, val in flow.paths:
            if verts[0] == s:
                verts, eids = verts[::-1], eids[::-1]
            directed.add_path(verts, eids, val)
        return {s}, {other}, directed
    denom = g.n ** cfg.round_exponent
    rounded = [(verts, eids, _round_up(val, denom)) for verts, eids, val in flow.paths]
    # local search on side assignment; side[v] in {0,1}
    incident: dict[int, list[tuple[int, Fraction]]] = {v: [] for v in S}
    for verts, eids, val in rounded:
        a, b = verts[0], verts[-1]
        if a in incident:
            incident[a].append((b, val))
        if b in incident:
            incident[b].append((a, val))
    side = {v: 1 for v in S}
    side[s] = 0
    steps = 0
    while True:
        moved = False
        for v in sorted(S):
            own = sum(val for w, val in incident[v] if side.get(w) == side[v])
            cross = sum(val for w, val in incident[v] if side.get(w) == 1 - side[v])
            if own > cross:
                side[v] = 1 - side[v]
                moved = True
                steps += 1
                if steps > cfg.local_search_cap:
                    raise GraphError("local search exceeded iteration cap")
                break
        if not moved:
            break
    side0 = {v for v in S if side[v] == 0}
    side1 = S - side0
    smaller = side0 if len(side0 - {s}) <= len(side1 - {s}) else side1
    sprime = smaller | {s}
    sdouble = S - sprime
    directed = PathFlow(hop_bound=flow.hop_bound)
    for verts, eids, val in rounded:
        a, b = verts[0], verts[-1]
        if a in sdouble and b in sprime:
            directed.add_path(verts, eids, val)
        elif b in sdouble and a in sprime:
            directed.add_path(verts[::-1], eids[::-1], val)
    return sprime, sdouble, directed


@dataclass
class Layers:
    layer_of: dict[int, int]
    flows: dict[int, PathFlow]   # layer index -> flow into lower layers
    h: int
    root: int

    def members(self, i: int) -> list[int]:
        return sorted(v for v, li in self.layer_of.items() if li == i)


def build_layers(g: MultiGraph, k: int, D: int,
                 cfg: Optional[KDConfig] = None) -> Layers:
    """Iterated bipartition: peel S'' off as the next outer layer until |S|=1."""
    cfg = cfg or KDConfig()
    S = set(range(g.n))
    groups: list[tuple[set[int], Optional[PathFlow]]] = []
    while len(S) > 1:
        try:
            sprime, sdouble, flow = bipartition_flow(g, S, k, D, cfg)
        except InfeasibleError as exc:
            raise InfeasibleError(f"layering stalled at |S|={len(S)}: {exc}") from exc
        groups.append((sdouble, flow))
        S = sprime
    groups.append((S, None))
    h = len(groups)
    if g.n > 1 and h > max(2, math.ceil(2 * math.log2(g.n))):
        raise GraphError(f"layer count {h} exceeds 2 log2 n")
    layer_of: dict[int, int] = {}
    flows: dict[int, PathFlow] = {}
    for idx, (grp, flow) in enumerate(groups):
        li = h - idx
        for v in grp:
            layer_of[v] = li
        if flow is not None:
            flows[li] = flow
    root = next(iter(groups[-1][0]))
    return Layers(layer_of, flows, h, root)


def round_paths(g: MultiGraph, layers: Layers, k: int, seed: int,
                cfg: Optional[KDConfig] = None) -> TreePacking:
    """k independent path draws per vertex; tree j is the union of draws j."""
    cfg = cfg or KDConfig()
    menus: dict[int, list[tuple[tuple[int, ...], tuple[int, ...], Fraction]]] = {}
    for li, flow in layers.flows.items():
        for verts, eids, val in flow.paths:
            v = verts[0]
            assert layers.layer_of[v] == li
            menus.setdefault(v, []).append((verts, eids, val))
    threshold = Fraction(k, 2) * Fraction(1 - cfg.congestion_slack).limit_denominator(10 ** 6)
    for v in sorted(layers.layer_of):
        if v == layers.root:
            continue
        total = sum((val for _, _, val in menus.get(v, [])), Fraction(0))
        if total < threshold:
            raise InfeasibleError(f"vertex {v} has endpoint flow {float(total):.3f} < k/2")
    tree_edges: list[set[int]] = [set() for _ in range(k)]
    for v in sorted(menus):
        menu = menus[v]
        total = sum((val for _, _, val in menu), Fraction(0))
        rng = stream(seed, "round", v)
        for j in range(k):
            r = Fraction(rng.random()).limit_denominator(10 ** 12) * total
            acc = Fraction(0)
            chosen = menu[-1]
            for item in menu:
                acc += item[2]
                if r < acc:
                    chosen = item
                    break
            tree_edges[j].update(chosen[1])
    trees = [bfs_tree(g, layers.root, allowed=eids) for eids in tree_edges]
    packing = TreePacking.from_trees(g, trees, notes={"seed": seed, "k": k, "h": layers.h})
    return packing


def pack_kd(g: MultiGraph, k: int, D: int, seed: int,
            cfg: Optional[KDConfig] = None):
    """Full pipeline: layering then rounding; returns (packing, report)."""
    cfg = cfg or KDConfig()
    layers = build_layers(g, k, D, cfg)
    packing = round_paths(g, layers, k, seed, cfg)
    report = verify_packing(g, packing)
    logn = max(1.0, math.log2(g.n))
    report.notes.update({
        "h": layers.h,
        "diameter_budget": 4 * D * logn,
        "congestion_budget": 120 * logn,
        "seed": seed,
    })
    return packing, report, layers
