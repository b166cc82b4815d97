import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

from torch_bmst.errors import InvalidPlanError
from torch_bmst.experiments.plan import ExperimentPlan
from torch_bmst.geometry.metrics import MetricKind
from torch_bmst.utils.files import dump_json, load_default_config, load_yaml

logger = logging.getLogger(__name__)


EFFECTIVE_CONFIG = 'effective_config.json'


@dataclass
class RunConfig:
    """
    Every parameter a subcommand can read. Values are merged as
    flags > --config file > data/configs/<command>.yaml > the defaults below.
    """
    command: str
    n: int = 1000
    n_schedule: List[int] = field(default_factory=lambda: [1024, 2048, 4096])
    d: int = 2
    p: float = 1.0
    alpha: float = 0.5
    metric: str = 'cube'
    trials: int = 20
    seed: int = 0
    out: str = 'out'
    workers: int = 1
    format: str = 'csv'
    solver: Optional[str] = None
    instance: Optional[str] = None
    # verify
    all: bool = False
    checks: Optional[List[str]] = None
    corrupt: Optional[str] = None
    delta: Optional[float] = None
    # beta-series
    kmax: int = 8
    samples: int = 100000
    inner_samples: int = 10000
    # tail-check
    level: int = 6
    ts: List[float] = field(default_factory=lambda: [0.25, 0.5, 2.0, 4.0])
    volume: Optional[float] = None
    # scan-scaling
    mono: bool = False
    timings: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidPlanError(f'[RunConfig]: alpha must lie in (0, 1), got {self.alpha}')
        if self.workers < 1:
            raise InvalidPlanError(f'[RunConfig]: workers must be >= 1, got {self.workers}')
        if self.format not in ('csv', 'json'):
            raise InvalidPlanError(f'[RunConfig]: format must be csv or json, got {self.format!r}')
        if self.n < 2:
            raise InvalidPlanError(f'[RunConfig]: n must be >= 2, got {self.n}')
        if self.trials < 1:
            raise InvalidPlanError(f'[RunConfig]: trials must be >= 1, got {self.trials}')
        self.metric = MetricKind.parse(self.metric).value
        self.n_schedule = [int(n) for n in self.n_schedule]

    @property
    def out_path(self):
        return Path(self.out)

    def to_plan(self, experiment, metric=None):
        return ExperimentPlan(experiment, self.n_schedule, d=self.d, p=self.p, alpha_r=self.alpha,
                              metric=metric or self.metric, trials=self.trials, seed=self.seed, out=self.out)

    def to_dict(self):
        return asdict(self)


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {'command'}


def _checked(values, source):
    unknown = set(values) - CONFIG_KEYS
    if unknown:
        raise InvalidPlanError(f'[RunConfig]: unknown keys {sorted(unknown)} in {source}')
    return values


def resolve_config(command, flags, config_path=None):
    """
    :param flags: only the options given on the command line
    """
    values = {}
    values.update(_checked(load_default_config(command.replace('-', '_')), f'defaults of {command}'))
    if config_path is not None:
        values.update(_checked(load_yaml(config_path), config_path))
    values.update(_checked(flags, 'command line flags'))
    config = RunConfig(command=command, **values)
    logger.debug(f'effective config: {config.to_dict()}')
    return config


def write_effective_config(config):
    return dump_json(config.to_dict(), config.out_path / EFFECTIVE_CONFIG)
