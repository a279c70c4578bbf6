"""
Training records and the metrics CSV.
"""

import csv
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from core.performance_monitor import ResourceSample

COLUMNS = ("batch", "train_ppl", "train_coarse", "train_fine", "test_coarse", "test_fine")


@dataclass(frozen=True)
class TrainRecord:
    """One row of the training curve; unmeasured fields are None."""
    batch: int
    train_ppl: Optional[float] = None
    train_coarse: Optional[float] = None
    train_fine: Optional[float] = None
    test_coarse: Optional[float] = None
    test_fine: Optional[float] = None

    def as_row(self) -> Dict[str, Any]:
        return {name: ("" if value is None else value) for name, value in asdict(self).items()}


@dataclass
class TrainLog:
    """Records in batch order, resource samples and the best checkpoint seen."""
    records: List[TrainRecord] = field(default_factory=list)
    resources: List[ResourceSample] = field(default_factory=list)
    best_batch: Optional[int] = None
    best_ppl: float = math.inf
    best_checkpoint: Optional[str] = None

    def append(self, record: TrainRecord):
        if self.records and record.batch <= self.records[-1].batch:
            raise ValueError(f"batch {record.batch} does not follow batch {self.records[-1].batch}")
        self.records.append(record)

    @property
    def final_ppl(self) -> Optional[float]:
        for record in reversed(self.records):
            if record.train_ppl is not None:
                return record.train_ppl
        return None

    def last_accuracy(self) -> Optional[TrainRecord]:
        for record in reversed(self.records):
            if record.test_coarse is not None:
                return record
        return None

    def curve(self) -> List[Dict[str, Any]]:
        return [asdict(r) for r in self.records]


class MetricsWriter:
    """Appends TrainRecords to a CSV, writing the header once."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def write(self, record: TrainRecord):
        new_file = not self.path.exists() or self.path.stat().st_size == 0
        with open(self.path, "a", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=COLUMNS)
            if new_file:
                writer.writeheader()
            writer.writerow(record.as_row())


def read_metrics(path: Union[str, Path]) -> List[TrainRecord]:
    """Parse a metrics CSV back into records."""
    converters = {f.name: (int if f.name == "batch" else float) for f in fields(TrainRecord)}
    with open(path, encoding="utf-8", newline="") as f:
        return [TrainRecord(**{k: (converters[k](v) if v != "" else None) for k, v in row.items()})
                for row in csv.DictReader(f)]
