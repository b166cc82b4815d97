from torch_bmst.beta_series.configurations import (
    Configuration, theta_membership, theta_membership_batch, union_ball_volume, union_ball_volumes,
)
from torch_bmst.beta_series.series import (
    BetaEstimate, SeriesTermEstimate, estimate_E, estimate_beta, estimate_cluster_term, random_bipartite_trees,
    singleton_term, tail_extrapolation, term_coefficient, term_domination, term_rows, term_table,
    threshold_tree_counts, write_term_table,
)
