import concurrent.futures
import logging

import torch

logger = logging.getLogger(__name__)


def _init_worker():
    # one intra-op thread per process, parallelism comes from the pool
    torch.set_num_threads(1)


def map_jobs(fn, jobs, workers=1):
    """
    Applies fn to every job and returns the results in job order.
    workers <= 1 runs inline in the calling process; results do not depend on the worker count.
    """
    jobs = list(jobs)
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    logger.debug(f'dispatching {len(jobs)} jobs to {workers} workers')
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as executor:
        return list(executor.map(fn, jobs))
