import logging
from dataclasses import dataclass

from torch_bmst.experiments.plan import ExperimentRecord, split_counts
from torch_bmst.geometry.instance import sample_uniform
from torch_bmst.geometry.metrics import MetricKind, hausdorff, nn_max
from torch_bmst.mst.bipartite import bipartite_mst, euclidean_mst
from torch_bmst.torch_utils.parallel import map_jobs
from torch_bmst.torch_utils.seed import derive_seed
from torch_bmst.torch_utils.torch_timer import Timer

logger = logging.getLogger(__name__)


OBSERVABLES = ('tree', 'hausdorff', 'nn_max', 'mono')


@dataclass(frozen=True)
class TrialJob:
    experiment: str
    n: int
    d: int
    p: float
    alpha_r: float
    metric: str
    seed: int
    trial: int
    observables: tuple = ('tree',)
    solver: str = None


def measure_trial(job):
    """
    Samples the instance of one trial and measures the requested observables.
    The point set depends only on the seed, so cube and torus jobs of a trial share it.
    """
    n_red, n_blue = split_counts(job.n, job.alpha_r)
    instance = sample_uniform(n_red, n_blue, job.d, metric=job.metric, seed=job.seed)
    values = {}
    with Timer() as timer:
        if 'tree' in job.observables:
            tree = bipartite_mst(instance, solver=job.solver)
            values.update(cost_p=tree.cost(job.p), max_degree=tree.max_degree, bottleneck=tree.bottleneck)
        if 'hausdorff' in job.observables:
            values['hausdorff'] = hausdorff(instance.red, instance.blue, instance.metric)
        if 'nn_max' in job.observables and n_red >= 2:
            values['nn_max_red'] = nn_max(instance.red, instance.metric)
        if 'mono' in job.observables and n_red >= 2:
            values['mono_cost_p'] = euclidean_mst(instance.red, instance.metric, solver=job.solver).cost(job.p)
    return ExperimentRecord(
        experiment=job.experiment, n=job.n, n_R=n_red, n_B=n_blue, d=job.d, p=job.p, alpha_r=job.alpha_r,
        metric=MetricKind.parse(job.metric).value, seed=job.seed, trial=job.trial, wall_time=timer.elapsed, **values,
    )


def plan_jobs(plan, observables=('tree',), metrics=None, solver=None):
    """
    One job per (n, metric, trial); the seed is derived from (experiment, master seed, n, trial) alone.
    """
    metrics = [plan.metric] if metrics is None else [MetricKind.parse(m).value for m in metrics]
    jobs = []
    for n in plan.n_schedule:
        for metric in metrics:
            for trial in range(plan.trials):
                jobs.append(TrialJob(
                    experiment=plan.experiment, n=n, d=plan.d, p=plan.p, alpha_r=plan.alpha_r, metric=metric,
                    seed=derive_seed(plan.seed, plan.key, n, trial), trial=trial,
                    observables=tuple(observables), solver=solver,
                ))
    return jobs


def run_trials(plan, observables=('tree',), metrics=None, workers=1, solver=None):
    jobs = plan_jobs(plan, observables=observables, metrics=metrics, solver=solver)
    logger.info(f'{plan.experiment}: {len(jobs)} trials over n={plan.n_schedule} with {workers} worker(s)')
    with Timer(output=logger.debug, prefix=f'{plan.experiment}:'):
        records = map_jobs(measure_trial, jobs, workers=workers)
    return records
