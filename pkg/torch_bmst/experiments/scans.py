import logging
import math
import warnings
from collections import defaultdict

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.special import zeta
from scipy.stats import linregress

from torch_bmst.beta_series.series import BetaEstimate
from torch_bmst.errors import PreconditionError, UnsupportedRegimeError
from torch_bmst.experiments.plan import ExperimentPlan
from torch_bmst.experiments.runner import run_trials
from torch_bmst.mst.graph import random_complete_graph
from torch_bmst.mst.kruskal import kruskal
from torch_bmst.torch_utils.parallel import map_jobs
from torch_bmst.torch_utils.seed import derive_seed, make_generator

logger = logging.getLogger(__name__)


FRIEZE_LIMIT = float(zeta(3))
FRIEZE_KEY = 0xF12E


def count_inversions(values, decreasing=True):
    """ Adjacent pairs moving against the expected direction. """
    diffs = np.diff(np.asarray(values, dtype=np.float64))
    return int(np.sum(diffs > 0)) if decreasing else int(np.sum(diffs < 0))


def follows_trend(values, decreasing=True, max_inversions=1):
    if len(values) < 2:
        raise PreconditionError(f'[follows_trend]: a trend needs at least 2 values, got {len(values)}')
    return count_inversions(values, decreasing=decreasing) <= max_inversions


def group_by(records, *keys):
    groups = defaultdict(list)
    for record in records:
        groups[tuple(getattr(record, k) for k in keys)].append(record)
    return dict(sorted(groups.items()))


def _mean_stderr(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return float(values.mean()), math.nan
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def normalized_cost(record, cost_field='cost_p', n_field='n'):
    return getattr(record, cost_field) / getattr(record, n_field) ** (1.0 - record.p / record.d)


def _frieze_trial(job):
    n, seed = job
    tree, _ = kruskal(random_complete_graph(n, make_generator(seed)))
    return tree.cost(1.0)


def frieze_calibration(n, trials, seed=0, workers=1):
    """
    Mean MST cost of K_n with i.i.d. uniform(0, 1) weights, which tends to zeta(3).
    """
    if n < 2:
        raise PreconditionError(f'[frieze_calibration]: n must be >= 2, got {n}')
    if trials < 1:
        raise PreconditionError(f'[frieze_calibration]: trials must be >= 1, got {trials}')
    costs = map_jobs(_frieze_trial, [(n, derive_seed(seed, FRIEZE_KEY, n, t)) for t in range(trials)], workers=workers)
    mean, stderr = _mean_stderr(costs)
    logger.info(f'frieze n={n}: mean {mean:.5f} +- {stderr:.5f} (limit {FRIEZE_LIMIT:.7f})')
    return {'n': n, 'trials': trials, 'mean': mean, 'stderr': stderr, 'limit': FRIEZE_LIMIT,
            'relative_error': abs(mean - FRIEZE_LIMIT) / FRIEZE_LIMIT}


def degree_scan(plan, workers=1, records=None):
    """
    Per n the distribution of max degree / log n, plus a linear fit of the median degree against log n.
    """
    if records is None:
        records = run_trials(plan, observables=('tree',), workers=workers)
    rows = []
    for (n,), group in group_by(records, 'n').items():
        degrees = np.array([r.max_degree for r in group], dtype=np.float64)
        ratio = degrees / math.log(n)
        rows.append({'n': n, 'median_degree': float(np.median(degrees)), 'median': float(np.median(ratio)),
                     'min': float(ratio.min()), 'max': float(ratio.max())})
    medians = [row['median'] for row in rows]
    summary = {'rows': rows, 'band_ratio': max(medians) / min(medians)}
    if len(rows) >= 3:
        fit = linregress([math.log(row['n']) for row in rows], [row['median_degree'] for row in rows])
        summary['fit'] = {'slope': fit.slope, 'intercept': fit.intercept, 'r_squared': fit.rvalue ** 2}
    return summary, records


def scaling_scan(plan, workers=1, metrics=('cube', 'torus'), records=None):
    """
    Mean and stderr of cost_p / n^{1 - p/d} per (metric, n). Both metrics see the same point sets.
    """
    if plan.p >= plan.d:
        raise UnsupportedRegimeError(f'[scaling_scan]: normalization n^(1-p/d) needs p < d, got p={plan.p}, d={plan.d}')
    if records is None:
        records = run_trials(plan, observables=('tree',), metrics=metrics, workers=workers)
    rows = []
    summary = {'rows': rows, 'plateau_ratio': {}, 'drift': {}}
    for (metric,), group in group_by(records, 'metric').items():
        means = []
        for (n,), cell in group_by(group, 'n').items():
            mean, stderr = _mean_stderr([normalized_cost(r) for r in cell])
            rows.append({'metric': metric, 'n': n, 'mean': mean, 'stderr': stderr})
            means.append(mean)
        if len(means) >= 2:
            summary['plateau_ratio'][metric] = means[-1] / means[-2]
        summary['drift'][metric] = abs(means[-1] - means[0]) / means[-1]
    return summary, records


def mono_scaling_scan(plan, workers=1, records=None):
    """
    Single color reference: C^p(R) / n_R^{1 - p/d} per n.
    """
    if plan.p >= plan.d:
        raise UnsupportedRegimeError(f'[mono_scaling_scan]: needs p < d, got p={plan.p}, d={plan.d}')
    if records is None:
        records = run_trials(plan, observables=('mono',), workers=workers)
    rows = []
    for (n,), group in group_by(records, 'n').items():
        mean, stderr = _mean_stderr([normalized_cost(r, 'mono_cost_p', 'n_R') for r in group])
        rows.append({'n': n, 'mean': mean, 'stderr': stderr})
    return {'rows': rows}, records


def _power_law(n, a, b, gamma):
    return a + b * np.power(n, -gamma)


def extrapolate_plateau(ns, means, stderrs):
    """
    Fits a + b n^{-gamma} with gamma free and returns (a, stderr of a, fit details).
    Falls back to the last mean when the fit fails or runs away from the data.
    """
    ns, means, stderrs = (np.asarray(x, dtype=np.float64) for x in (ns, means, stderrs))
    last, last_err = float(means[-1]), float(stderrs[-1])
    sigma = stderrs if np.all(np.isfinite(stderrs) & (stderrs > 0)) else None
    spread = float(abs(means[-1] - means[0]))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', OptimizeWarning)
            popt, pcov = curve_fit(_power_law, ns, means, p0=(last, (means[0] - last) * ns[0] ** 0.5, 0.5),
                                   sigma=sigma, absolute_sigma=sigma is not None,
                                   bounds=([-np.inf, -np.inf, 0.05], [np.inf, np.inf, 4.0]), maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        logger.warning(f'plateau fit failed ({exc}), using the last mean')
        return last, last_err, {'fit': 'failed'}
    a, b, gamma = (float(x) for x in popt)
    if not math.isfinite(a) or abs(a - last) > max(spread, 3.0 * last_err):
        logger.warning(f'plateau fit a={a:.5g} runs away from the data, using the last mean')
        return last, last_err, {'fit': 'rejected', 'a': a, 'b': b, 'gamma': gamma}
    a_err = float(math.sqrt(pcov[0, 0])) if np.isfinite(pcov[0, 0]) else math.nan
    if not math.isfinite(a_err):
        a_err = last_err
    return a, max(a_err, last_err), {'fit': 'power_law', 'a': a, 'b': b, 'gamma': gamma}


def direct_beta(d, p, alpha_r, n_schedule, trials, seed=0, workers=1, records=None):
    """
    Direct estimate of beta_bMST(d, p) from the extrapolated torus plateau of cost_p / n^{1 - p/d}.
    """
    if p >= d:
        raise UnsupportedRegimeError(f'[direct_beta]: needs p < d, got p={p}, d={d}')
    if len(n_schedule) < 3:
        raise PreconditionError(f'[direct_beta]: extrapolation needs at least 3 schedule points, got {len(n_schedule)}')
    plan = ExperimentPlan('direct_beta', n_schedule, d=d, p=p, alpha_r=alpha_r, metric='torus', trials=trials, seed=seed)
    summary, records = scaling_scan(plan, workers=workers, metrics=('torus',), records=records)
    rows = summary['rows']
    value, std_error, fit = extrapolate_plateau([r['n'] for r in rows], [r['mean'] for r in rows],
                                                [r['stderr'] for r in rows])
    fit['rows'] = rows
    fit['extrapolation_form'] = 'a + b n^-gamma, gamma fitted'
    estimate = BetaEstimate(d=d, p=p, alpha_r=alpha_r, value=value, std_error=std_error, K_max=0,
                            tail_bound=0.0, method='direct', details=fit)
    logger.info(f'direct beta(d={d}, p={p}, alpha={alpha_r}) = {value:.6g} +- {std_error:.2g}')
    return estimate, records


def rate_statistics(plan, workers=1, records=None):
    """
    Per n medians of hausdorff (n / log n)^{1/d} and nn_max (n / log n)^{1/d}.
    """
    if records is None:
        records = run_trials(plan, observables=('hausdorff', 'nn_max'), workers=workers)
    rows = []
    for (n,), group in group_by(records, 'n').items():
        scale = (n / math.log(n)) ** (1.0 / plan.d)
        rows.append({'n': n, 'hausdorff': float(np.median([r.hausdorff for r in group])) * scale,
                     'nn_max': float(np.nanmedian([r.nn_max_red for r in group])) * scale})
    summary = {'rows': rows}
    for key in ('hausdorff', 'nn_max'):
        values = [row[key] for row in rows]
        summary[f'{key}_band_ratio'] = max(values) / min(values)
    return summary, records


def concentration_regime(d, p):
    """ Whether (d, p) lies where complete convergence of the normalized cost is proved. """
    return p < d / 2 if d <= 2 else p < d


def concentration_scan(plan, workers=1, records=None, max_inversions=1):
    """
    Relative deviation std / mean of cost_p / n^{1 - p/d} per n and whether it trends down.
    """
    if len(plan.n_schedule) < 2:
        raise PreconditionError('[concentration_scan]: a trend needs an n schedule of length >= 2')
    if plan.trials < 2:
        raise PreconditionError('[concentration_scan]: a deviation needs at least 2 trials per n')
    if records is None:
        records = run_trials(plan, observables=('tree',), workers=workers)
    rows = []
    for (n,), group in group_by(records, 'n').items():
        values = np.array([normalized_cost(r) for r in group])
        rows.append({'n': n, 'mean': float(values.mean()), 'relative_deviation': float(values.std(ddof=1) / values.mean())})
    deviations = [row['relative_deviation'] for row in rows]
    inside = concentration_regime(plan.d, plan.p)
    if not inside:
        logger.warning(f'd={plan.d}, p={plan.p} lies outside the proved concentration regime')
    summary = {'rows': rows, 'decreasing': follows_trend(deviations, max_inversions=max_inversions),
               'inversions': count_inversions(deviations), 'final_over_initial': deviations[-1] / deviations[0],
               'regime': 'inside' if inside else 'outside'}
    return summary, records
