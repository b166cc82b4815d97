from torch_bmst.experiments.plan import (
    ExperimentPlan, ExperimentRecord, RECORD_FIELDS, TailCheck, read_records, record_rows, split_counts,
    write_records, write_summary,
)
from torch_bmst.experiments.runner import TrialJob, measure_trial, plan_jobs, run_trials
from torch_bmst.experiments.scans import (
    FRIEZE_LIMIT, concentration_regime, concentration_scan, count_inversions, degree_scan, direct_beta,
    extrapolate_plateau, follows_trend, frieze_calibration, mono_scaling_scan, rate_statistics, scaling_scan,
)
from torch_bmst.experiments.tails import (
    chernoff_bound, chernoff_rate, occupancy_tail_check, uniform_cube_bound, uniform_cube_levels,
    uniform_cube_tail_check,
)
