"""Command-line front end: generate instances, pack trees, run simulations.

Every output artifact embeds the full configuration that produced it, so any
run can be reproduced bit-for-bit from its own files.
Exit codes: 0 success, 2 infeasible, 3 invariant violation, 4 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .graph import (
    GraphError,
    InfeasibleError,
    MultiGraph,
    graph_from_json,
    graph_to_json,
    read_edgelist,
    write_edgelist,
)
from .lowerbound import (
    full_wary_tree,
    gen_Fmk,
    gen_Gwd,
    gen_shortcut_lb,
    gen_simple_Gwd,
)
from .packing import (
    karger_partition_packing,
    pack_edge_disjoint_trees,
    pack_low_diam_congestion2,
    verify_packing,
)
from .kdpack import pack_kd
from .plots import render_instance_figure, render_packing_figure, render_trace_figure
from .rng import stream
from .sim import (
    SimError,
    SimNetwork,
    approx_min_cut,
    build_shortcuts,
    disseminate,
    distributed_basic_tool,
    verify_lambda_connectivity,
)
from .cyclecover import secure_broadcast


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write_json(path: str, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _load_instance(path: str) -> MultiGraph:
    if path.endswith(".json"):
        with open(path) as fh:
            data = json.load(fh)
        return graph_from_json(data.get("graph", data))
    return read_edgelist(path)


def _config(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _build_parser() -> _Parser:
    p = _Parser(prog="treepack")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance family member")
    g.add_argument("family", choices=["wary-tree", "gwd", "simple-gwd", "fmk",
                                      "shortcut-lb"])
    g.add_argument("--w", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--alpha", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".")
    g.add_argument("--format", choices=["edgelist", "json"], default="edgelist")

    k = sub.add_parser("pack", help="compute a tree packing with report + figure")
    k.add_argument("method", choices=["disjoint", "congestion2", "karger", "kd"])
    k.add_argument("--in", dest="infile", required=True)
    k.add_argument("--t", type=int, help="tree count for the disjoint method")
    k.add_argument("--k", type=int)
    k.add_argument("--d", type=int)
    k.add_argument("--c-sample", dest="c_sample", type=float, default=707.0)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--const-scale", dest="const_scale", type=float, default=1.0)
    k.add_argument("--out", default=".")
    k.add_argument("--format", choices=["edgelist", "json"], default="json")

    s = sub.add_parser("sim", help="run a distributed task on an instance")
    s.add_argument("task", choices=["verify-conn", "min-cut", "shortcuts",
                                    "disseminate", "secure-broadcast",
                                    "basic-tool"])
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--lam", "--lambda", dest="lam", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--d", type=int)
    s.add_argument("--eta", type=int)
    s.add_argument("--n-bits", dest="n_bits", type=int)
    s.add_argument("--s", dest="src", type=int, default=0)
    s.add_argument("--t", dest="dst", type=int)
    s.add_argument("--partition", help="JSON file: list of vertex lists")
    s.add_argument("--adversary-edges", dest="adversary",
                   help="comma-separated edge ids")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--const-scale", dest="const_scale", type=float, default=707.0)
    s.add_argument("--bandwidth-bits", dest="bandwidth_bits", type=int, default=32)
    s.add_argument("--max-rounds", dest="max_rounds", type=int,
                   help="fail (exit 3) if the measured rounds exceed this")
    s.add_argument("--out", default=".")
    return p


# ---------------------------------------------------------------------------

def _cmd_gen(args) -> int:
    fam = args.family
    cfg = _config(args, ["family", "w", "d", "k", "n", "m", "alpha", "eta",
                         "seed", "format"])

    def need(*names):
        missing = [x for x in names if getattr(args, x) is None]
        if missing:
            raise UsageError(f"{fam} requires --{', --'.join(missing)}")

    if fam == "wary-tree":
        need("w", "d")
        tree = full_wary_tree(args.w, args.d)
        g = MultiGraph(tree.N, [(v, tree.parent[v]) for v in range(tree.N - 1)])
        inst = None
    elif fam == "gwd":
        need("w", "d", "k")
        inst = gen_Gwd(args.w, args.d, args.k)
        g = inst.graph
    elif fam == "simple-gwd":
        need("w", "d", "k", "n")
        inst = gen_simple_Gwd(args.w, args.d, args.k, args.n,
                              alpha=args.alpha, eta=args.eta)
        g = inst.graph
    elif fam == "fmk":
        need("m", "k")
        inst = gen_Fmk(args.m, args.k)
        g = inst.graph
    else:  # shortcut-lb
        need("k", "alpha", "eta", "d", "n")
        inst = gen_shortcut_lb(args.k, int(args.alpha), int(args.eta),
                               args.d, args.n)
        g = inst.graph

    os.makedirs(args.out, exist_ok=True)
    base = os.path.join(args.out, fam)
    if args.format == "edgelist":
        data_path = base + ".edges"
        write_edgelist(g, data_path)
    else:
        data_path = base + ".graph.json"
        _write_json(data_path, graph_to_json(g))
    meta = {"config": cfg, "n": g.n, "m": g.m}
    if inst is not None:
        meta.update({"special": inst.special, "params": {
            key: val for key, val in inst.params.items()
            if isinstance(val, (int, float, str, bool))},
            "blue": sorted(inst.blue), "red": sorted(inst.red)})
        if inst.partition is not None:
            meta["partition"] = inst.partition
    _write_json(base + ".meta.json", meta)
    render_instance_figure(g, base + ".png")
    print(f"wrote {data_path} ({g.n} vertices, {g.m} edges)")
    return 0


def _cmd_pack(args) -> int:
    g = _load_instance(args.infile)
    cfg = _config(args, ["method", "infile", "t", "k", "d", "c_sample",
                         "seed", "const_scale"])
    if args.method == "disjoint":
        if args.t is None:
            raise UsageError("disjoint requires --t")
        packing = pack_edge_disjoint_trees(g, args.t)
        report = verify_packing(g, packing)
    elif args.method == "congestion2":
        packing, report = pack_low_diam_congestion2(g, args.seed)
    elif args.method == "karger":
        packing, report = karger_partition_packing(g, args.seed,
                                                   c_sample=args.c_sample,
                                                   k=args.k)
    else:  # kd
        if args.k is None or args.d is None:
            raise UsageError("kd requires --k and --d")
        packing, report, _ = pack_kd(g, args.k, args.d, args.seed)
    os.makedirs(args.out, exist_ok=True)
    base = os.path.join(args.out, "packing")
    pj = packing.to_json()
    pj["config"] = cfg
    _write_json(base + ".json", pj)
    rj = report.to_json()
    rj["config"] = cfg
    _write_json(os.path.join(args.out, "report.json"), rj)
    with open(os.path.join(args.out, "report.csv"), "w") as fh:
        fh.write("tree,diameter,spanning\n")
        for i, (dia, sp) in enumerate(zip(report.per_tree_diameter,
                                          report.spanning)):
            fh.write(f"{i},{dia},{int(sp)}\n")
    render_packing_figure(report, os.path.join(args.out, "report.png"))
    print(f"{len(packing.trees)} trees, max diameter {report.max_diameter},"
          f" max congestion {report.max_congestion}")
    return 0


def _write_trace(trace, out_dir: str) -> None:
    with open(os.path.join(out_dir, "trace.jsonl"), "w") as fh:
        for rnd, eid, sender, bits, tag in trace.records:
            fh.write(json.dumps({"round": rnd, "eid": eid, "sender": sender,
                                 "bits": bits, "tag": tag}) + "\n")
    render_trace_figure(trace, os.path.join(out_dir, "trace.png"))


def _cmd_sim(args) -> int:
    g = _load_instance(args.infile)
    net = SimNetwork(g, bandwidth_bits=args.bandwidth_bits)
    cfg = _config(args, ["task", "infile", "lam", "k", "d", "eta", "n_bits",
                         "src", "dst", "partition", "adversary", "seed",
                         "const_scale", "bandwidth_bits", "max_rounds"])
    task = args.task
    summary = {"config": cfg}
    if task == "verify-conn":
        if args.lam is None:
            raise UsageError("verify-conn requires --lam")
        res = verify_lambda_connectivity(net, args.lam, args.seed,
                                         const_scale=args.const_scale)
        trace = res.trace
        summary.update({"answer": "YES" if res.answers[0] else "NO",
                        "good": res.good, "trials": res.trials, "p": res.p})
    elif task == "min-cut":
        est, history = approx_min_cut(net, args.seed,
                                      const_scale=args.const_scale)
        trace = history[-1].trace
        summary.update({"estimate": est, "probes": len(history)})
    elif task == "basic-tool":
        if args.k is None or args.eta is None:
            raise UsageError("basic-tool requires --k and --eta")
        res = distributed_basic_tool(net, args.k, args.eta, args.seed,
                                     const_scale=args.const_scale)
        trace = res.trace
        summary.update({"p": res.p, "clamped": res.clamped,
                        "spanning": res.spanning,
                        "subgraph_sizes": [len(s) for s in res.subgraphs]})
    elif task == "shortcuts":
        if args.k is None or args.d is None or args.partition is None:
            raise UsageError("shortcuts requires --k, --d and --partition")
        with open(args.partition) as fh:
            parts = json.load(fh)
        sc = build_shortcuts(net, parts, args.k, args.d, args.seed,
                             const_scale=args.const_scale)
        trace = sc.trace
        summary.update({"alpha": sc.alpha, "beta": sc.beta,
                        "t_small": sc.t_small, "eta": sc.eta,
                        "small": sc.small})
    elif task == "disseminate":
        if args.k is None or args.d is None or args.dst is None \
                or args.n_bits is None:
            raise UsageError("disseminate requires --k, --d, --t and --n-bits")
        rng = stream(args.seed, "payload")
        payload = "".join(str(rng.getrandbits(1)) for _ in range(args.n_bits))
        res = disseminate(net, args.src, args.dst, payload, args.k, args.d,
                          args.seed, const_scale=args.const_scale)
        trace = res.trace
        summary.update({"rounds": res.rounds, "exact": res.received == payload,
                        "rerouted": res.rerouted, "formula": res.formula})
    else:  # secure-broadcast
        if args.k is None or args.n_bits is None:
            raise UsageError("secure-broadcast requires --k and --n-bits")
        packing = pack_edge_disjoint_trees(g, args.k)
        rng = stream(args.seed, "message")
        message = "".join(str(rng.getrandbits(1)) for _ in range(args.n_bits))
        adversary = set()
        if args.adversary:
            adversary = {int(x) for x in args.adversary.split(",")}
        res = secure_broadcast(net, args.src, message, packing, adversary,
                               args.seed)
        trace = res.trace
        ok = all(v == message for v in res.received.values())
        summary.update({"reconstructed": ok,
                        "observed_shares": res.observed_shares,
                        "share_count": len(res.shares)})
    summary["rounds"] = trace.rounds
    summary["messages"] = len(trace.records)
    summary["max_bits_per_round"] = trace.max_bits_per_round()
    os.makedirs(args.out, exist_ok=True)
    _write_trace(trace, args.out)
    _write_json(os.path.join(args.out, "summary.json"), summary)
    print(json.dumps({k: v for k, v in summary.items() if k != "config"},
                     sort_keys=True))
    if args.max_rounds is not None and trace.rounds > args.max_rounds:
        print(f"round budget exceeded: {trace.rounds} > {args.max_rounds}",
              file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "pack":
            return _cmd_pack(args)
        return _cmd_sim(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 4
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except (GraphError, SimError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
