"""Low-diameter spanning-tree packings, lower-bound generators, and a CONGEST simulator."""

from .graph import (
    GraphError,
    InfeasibleError,
    MultiGraph,
    RootedTree,
    SampledSubgraph,
    bfs_tree,
    diameter,
    global_min_cut,
    hop_bounded_shortest_path,
    is_kd_connected,
    sample_subgraph,
    tree_path,
)
from .packing import (
    PackingReport,
    TreePacking,
    fix_diameter,
    karger_partition_packing,
    pack_edge_disjoint_trees,
    pack_low_diam_congestion2,
    plant_random_tree,
    verify_packing,
)
from .kdpack import KDConfig, PathFlow, build_layers, find_flow, pack_kd
from .lowerbound import (
    LBInstance,
    WaryTree,
    audit_packing_lower_bound,
    fmk_decode_via_mst,
    full_wary_tree,
    gen_Fmk,
    gen_Gwd,
    gen_shortcut_lb,
    gen_simple_Gwd,
    leaf_cut_blue_count,
    weight_variant,
)
from .hashing import HashFamilyMember, hash_eval, hash_family_sample
from .sim import (
    RoundTrace,
    SimError,
    SimNetwork,
    approx_min_cut,
    build_shortcuts,
    disseminate,
    distributed_basic_tool,
    random_delay_schedule,
    run_rounds,
    verify_lambda_connectivity,
)
from .cyclecover import (
    CycleCover,
    audit_cover,
    fundamental_cycle_cover,
    high_conn_cycle_cover,
    secure_broadcast,
)

__all__ = [
    "GraphError", "InfeasibleError", "MultiGraph", "RootedTree",
    "SampledSubgraph", "bfs_tree", "diameter", "global_min_cut",
    "hop_bounded_shortest_path", "is_kd_connected", "sample_subgraph",
    "tree_path",
    "PackingReport", "TreePacking", "fix_diameter", "karger_partition_packing",
    "pack_edge_disjoint_trees", "pack_low_diam_congestion2",
    "plant_random_tree", "verify_packing",
    "KDConfig", "PathFlow", "build_layers", "find_flow", "pack_kd",
    "LBInstance", "WaryTree", "audit_packing_lower_bound",
    "fmk_decode_via_mst", "full_wary_tree", "gen_Fmk", "gen_Gwd",
    "gen_shortcut_lb", "gen_simple_Gwd", "leaf_cut_blue_count",
    "weight_variant",
    "HashFamilyMember", "hash_eval", "hash_family_sample",
    "RoundTrace", "SimError", "SimNetwork", "approx_min_cut",
    "build_shortcuts", "disseminate", "distributed_basic_tool",
    "random_delay_schedule", "run_rounds", "verify_lambda_connectivity",
    "CycleCover", "audit_cover", "fundamental_cycle_cover",
    "high_conn_cycle_cover", "secure_broadcast",
]
