"""
Learning-rate grid search.

Each learning rate trains in its own worker process and output directory
``<output_dir>/lr_<rate>/``. Results are merged into ``grid_results.csv``
and the run whose best checkpoint has the lowest average training perplexity
is selected.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config.schema import LEARNING_RATE_GRID, ExperimentConfig
from core.exceptions import NdsqError
from utils.logger import get_logger, setup_logging

from .trainer import run_experiment, worker_threads

logger = get_logger(__name__)

GRID_RESULTS = "grid_results.csv"


@dataclass(frozen=True)
class GridPoint:
    learning_rate: float
    output_dir: str
    final_ppl: Optional[float]
    best_ppl: Optional[float]
    test_coarse: Optional[float]
    test_fine: Optional[float]
    error: str = ""

    @property
    def score(self) -> Tuple[float, float]:
        """Best-window perplexity, then final perplexity; missing values sort last."""
        return (self.best_ppl if self.best_ppl is not None else math.inf,
                self.final_ppl if self.final_ppl is not None else math.inf)


def rate_dir(output_dir: Path, rate: float) -> Path:
    return output_dir / f"lr_{rate:g}"


def _train_point(config_data: Dict[str, Any]) -> Dict[str, Any]:
    config = ExperimentConfig(**config_data)
    out = Path(config.output_dir)
    setup_logging(config.log_level, str(out / "logs"))
    try:
        result = run_experiment(config, out, threads=1)
    except NdsqError as e:
        return asdict(GridPoint(config.learning_rate, str(out), None, None, None, None, str(e)))
    last = result.log.last_accuracy()
    best = result.log.best_ppl if math.isfinite(result.log.best_ppl) else None
    return asdict(GridPoint(config.learning_rate, str(out), result.log.final_ppl, best,
                            last.test_coarse if last else None, last.test_fine if last else None))


def grid_search(experiment: ExperimentConfig, learning_rates: Sequence[float] = LEARNING_RATE_GRID,
                max_workers: Optional[int] = None) -> List[GridPoint]:
    """
    Train one run per learning rate and merge the results.

    Returns:
        GridPoints in ``learning_rates`` order; the best is ``select_best(points)``
    """
    out = Path(experiment.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for rate in learning_rates:
        data = experiment.model_dump(mode="json")
        data.update(learning_rate=rate, grid=False, output_dir=str(rate_dir(out, rate)))
        jobs.append(data)

    workers = max(1, min(max_workers or worker_threads(), len(jobs)))
    logger.info(f"Grid search over {len(jobs)} learning rates with {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        points = [GridPoint(**r) for r in pool.map(_train_point, jobs)]

    write_grid_results(out / GRID_RESULTS, points)
    best = select_best(points)
    if best is not None:
        logger.info(f"Best learning rate {best.learning_rate:g}",
                    extra={"context": {"best_ppl": best.best_ppl, "final_ppl": best.final_ppl,
                                       "dir": best.output_dir}})
    return points


def select_best(points: Sequence[GridPoint]) -> Optional[GridPoint]:
    """Lowest best-window average training perplexity; failed runs never win."""
    finished = [p for p in points if p.best_ppl is not None]
    return min(finished, key=lambda p: p.score) if finished else None


def write_grid_results(path: Path, points: Sequence[GridPoint]):
    names = list(asdict(points[0])) if points else list(GridPoint.__dataclass_fields__)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=names)
        writer.writeheader()
        for point in points:
            writer.writerow({k: ("" if v is None else v) for k, v in asdict(point).items()})
