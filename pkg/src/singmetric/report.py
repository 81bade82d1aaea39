"""Machine-readable results of verification runs."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class Report:
    """Outcome of one suite run.

    ``violations == 0`` means pass.  ``artifacts`` holds serialized
    counterexamples, each carrying the trial seed that reproduces it.
    ``margins`` (optional) are per-trial margins for the CSV export.
    """

    suite: str
    trials: int
    violations: int
    worst_margin: float
    seed: int | None
    runtime_ms: int
    artifacts: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    margins: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("margins")
        d["passed"] = self.passed
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Report":
        d = dict(d)
        d.pop("passed", None)
        return cls(**d)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, default=_jsonable)

    def write(self, path, csv_path=None) -> None:
        Path(path).write_text(self.dumps())
        if csv_path is not None:
            with open(csv_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["trial", "margin"])
                for i, m in enumerate(self.margins):
                    w.writerow([i, repr(float(m))])

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.suite}: {status} trials={self.trials} violations={self.violations} "
                f"worst_margin={self.worst_margin:.6g} seed={self.seed} runtime_ms={self.runtime_ms}")


def _jsonable(x):
    from fractions import Fraction

    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "item"):
        return x.item()
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


def load(path) -> Report:
    return Report.from_json(json.loads(Path(path).read_text()))
