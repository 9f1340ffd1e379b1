"""Figure rendering for packing reports and simulation traces."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_packing_figure(report, out_path: str) -> str:
    """Bar chart of per-tree diameters with the congestion ceiling annotated."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    diams = [d if d != float("inf") else -1 for d in report.per_tree_diameter]
    colors = ["tab:blue" if s else "tab:red" for s in report.spanning]
    ax.bar(range(len(diams)), diams, color=colors)
    ax.set_xlabel("tree index")
    ax.set_ylabel("diameter")
    ax.set_title(f"max congestion {report.max_congestion}"
                 f" / max diameter {report.max_diameter}")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_trace_figure(trace, out_path: str) -> str:
    """Messages per round over the whole trace."""
    counts: dict[int, int] = {}
    for rnd, _, _, _, _ in trace.records:
        counts[rnd] = counts.get(rnd, 0) + 1
    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = sorted(counts)
    ax.plot(xs, [counts[x] for x in xs], drawstyle="steps-mid")
    ax.set_xlabel("round")
    ax.set_ylabel("messages")
    ax.set_title(f"{trace.rounds} rounds, {len(trace.records)} messages")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def render_instance_figure(g, out_path: str) -> str:
    """Degree histogram of a generated instance."""
    degs = [len(nb) for nb in g.adj()]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.hist(degs, bins=min(30, max(3, len(set(degs)))))
    ax.set_xlabel("degree")
    ax.set_ylabel("vertices")
    ax.set_title(f"n={g.n}, m={g.m}")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
