import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional


@dataclass
class LemmaReport:
    """
    Outcome of one structural check. A failing report always carries a witness.
    """
    lemma: str
    instance: dict
    passed: bool
    witness: Optional[dict] = None
    slack: Optional[float] = None
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError(f'[LemmaReport]: failing report for {self.lemma} needs a witness')
        if self.slack is not None and not math.isfinite(self.slack):
            self.slack = None

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, default=float)


def write_reports(reports, path):
    """ JSON lines, one report per line. """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        for report in reports:
            f.write(report.to_json() + '\n')
    return path
