from torch_bmst.mst.graph import WeightedGraph, complete_graph, nearest_neighbors, random_complete_graph
from torch_bmst.mst.kruskal import (
    MergeProfile, SpanningTree, ck_integral, component_integral, kruskal, merge_profile_from_tree, mst_cost,
    save_tree, tree_rows, tree_summary,
)
from torch_bmst.mst.bipartite import (
    BRUTE_EDGE_LIMIT, MSTSolver, bipartite_graph, bipartite_mst, bottleneck_threshold, euclidean_mst,
)
from torch_bmst.mst.gk_reduction import GkReduction, gk_reduction
