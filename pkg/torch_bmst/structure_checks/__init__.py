from torch_bmst.structure_checks.report import LemmaReport, write_reports
from torch_bmst.structure_checks.lemmas import (
    check_bottleneck_mono_to_bi, check_bottleneck_optimality, check_bounded_difference, check_cut_property,
    check_empty_cone, check_mono_to_bi_bound, check_p_invariance, check_torus_cube_transfer, mono_to_bi_constant,
)
from torch_bmst.structure_checks.hilbert import HILBERT_ORDER, hilbert_chain_bound, hilbert_order
from torch_bmst.structure_checks.corruption import (
    CORRUPTIONS, corrupt_bad_reconnect, corrupt_max_tree, corrupt_swap_edge,
)
from torch_bmst.structure_checks.suite import CHECKS, run_all_checks
