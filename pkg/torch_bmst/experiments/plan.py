import csv
import json
import math
import zlib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import torch_bmst
from torch_bmst.errors import InvalidPlanError
from torch_bmst.geometry.metrics import MetricKind
from torch_bmst.utils.files import dump_json


@dataclass
class ExperimentPlan:
    experiment: str
    n_schedule: List[int]
    d: int = 2
    p: float = 1.0
    alpha_r: float = 0.5
    metric: str = 'cube'
    trials: int = 20
    seed: int = 0
    out: Optional[str] = None

    def __post_init__(self):
        self.n_schedule = [int(n) for n in self.n_schedule]
        if not self.n_schedule:
            raise InvalidPlanError(f'[ExperimentPlan]: {self.experiment}: empty n schedule')
        if any(b <= a for a, b in zip(self.n_schedule, self.n_schedule[1:])):
            raise InvalidPlanError(f'[ExperimentPlan]: n schedule must be strictly increasing, got {self.n_schedule}')
        if self.n_schedule[0] < 2:
            raise InvalidPlanError(f'[ExperimentPlan]: every n must be >= 2, got {self.n_schedule[0]}')
        if self.trials < 1:
            raise InvalidPlanError(f'[ExperimentPlan]: trials must be >= 1, got {self.trials}')
        if not 0.0 < self.alpha_r < 1.0:
            raise InvalidPlanError(f'[ExperimentPlan]: alpha_R must lie in (0, 1), got {self.alpha_r}')
        if self.d < 1:
            raise InvalidPlanError(f'[ExperimentPlan]: dimension must be >= 1, got {self.d}')
        if self.p <= 0:
            raise InvalidPlanError(f'[ExperimentPlan]: p must be positive, got {self.p}')
        self.metric = MetricKind.parse(self.metric).value

    @property
    def key(self):
        """ Stable integer id of the experiment name, the first index of every trial seed. """
        return zlib.crc32(self.experiment.encode('utf-8'))

    def to_dict(self):
        return asdict(self)

    def header(self):
        return f'# plan={json.dumps(self.to_dict(), sort_keys=True)} version={torch_bmst.__version__}'


def split_counts(n, alpha_r):
    """ n_R = round(alpha_R n), kept in [1, n - 1] so that both colors are present. """
    n_red = int(math.floor(alpha_r * n + 0.5))
    n_red = min(max(n_red, 1), n - 1)
    return n_red, n - n_red


@dataclass
class ExperimentRecord:
    experiment: str
    n: int
    n_R: int
    n_B: int
    d: int
    p: float
    alpha_r: float
    metric: str
    seed: int
    trial: int
    # observables that were not measured are nan
    cost_p: float = math.nan
    max_degree: float = math.nan
    bottleneck: float = math.nan
    hausdorff: float = math.nan
    nn_max_red: float = math.nan
    mono_cost_p: float = math.nan
    wall_time: float = math.nan

    def __post_init__(self):
        assert self.n_R + self.n_B == self.n

    def to_dict(self):
        return asdict(self)


RECORD_FIELDS = tuple(f.name for f in fields(ExperimentRecord))
_FIELD_TYPES = {'experiment': str, 'metric': str, 'n': int, 'n_R': int, 'n_B': int, 'd': int, 'seed': int, 'trial': int}


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_records(records, path, plan, timings=False):
    """
    Raw per-trial records as CSV behind a `# plan=... version=...` comment line.
    wall_time is only written with timings=True so that reruns stay byte-identical.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = [c for c in RECORD_FIELDS if timings or c != 'wall_time']
    with open(path, 'w', newline='') as f:
        f.write(plan.header() + '\n')
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction='ignore')
        writer.writeheader()
        for record in records:
            writer.writerow({key: _format(value) for key, value in record.to_dict().items()})
    return path


def record_rows(records, timings=False):
    rows = [record.to_dict() for record in records]
    if not timings:
        for row in rows:
            row.pop('wall_time')
    return rows


def read_records(path):
    """
    :return: (plan dict, list of ExperimentRecord)
    """
    with open(path, 'r', newline='') as f:
        first = f.readline()
        if not first.startswith('# plan='):
            raise InvalidPlanError(f'[read_records]: {path} has no plan header')
        plan_json = first[len('# plan='):].rsplit(' version=', 1)[0]
        plan = json.loads(plan_json)
        records = []
        for row in csv.DictReader(f):
            values = {key: _FIELD_TYPES.get(key, float)(value) for key, value in row.items()}
            records.append(ExperimentRecord(**values))
    return plan, records


def write_summary(summary, path, plan):
    payload = {'plan': plan.to_dict(), 'version': torch_bmst.__version__, 'summary': summary}
    return dump_json(payload, path)


@dataclass
class TailCheck:
    """
    Empirical exceedance frequency of an occupancy event next to its Chernoff bound.
    """
    volume: float
    t: float
    side: str
    frequency: float
    bound: float
    trials: int
    level: int = 0
    passed: bool = True
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        assert 0.0 <= self.frequency <= 1.0

    @property
    def stderr(self):
        b = min(self.bound, 1.0)
        return math.sqrt(b * (1.0 - b) / self.trials)

    def to_dict(self):
        d = asdict(self)
        d['stderr'] = self.stderr
        return d
