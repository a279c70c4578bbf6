"""
Batched evaluation: sample, decode greedily, score.
"""

import json
from concurrent.futures import Executor
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

from seqmodel.decoding import DecodeResult, default_max_len, greedy_decode
from tasks.streams import TransductionTask
from utils.logger import get_logger

from .metrics import EvalReport, accuracy

logger = get_logger(__name__)

DecodeFn = Callable[..., DecodeResult]


def run_eval(model, task: TransductionTask, n: int, length_range: Tuple[int, int], seed: int,
             decode_fn: Optional[DecodeFn] = None, max_len: Optional[int] = None,
             stream_id: int = 0, executor: Optional[Executor] = None) -> EvalReport:
    """
    Evaluate ``model`` on ``n`` fresh examples.

    Args:
        model: TransductionModel
        task: task that generates the examples
        n: number of examples
        length_range: source length range
        seed: seed of the example stream
        decode_fn: decoder with the signature of ``greedy_decode``
        max_len: decode cap; defaults to twice the longest target the range allows, plus two
        stream_id: stream key, so several evaluations can share one seed
        executor: optional executor to decode in parallel

    Returns:
        EvalReport
    """
    decode = decode_fn or greedy_decode
    examples = task.batch(n, length_range, seed, stream_id)
    cap = max_len if max_len is not None else default_max_len(task.max_target_len(length_range))

    def predict(example):
        return decode(model, example.source, cap).prediction()

    if executor is None:
        predictions = [predict(ex) for ex in examples]
    else:
        predictions = list(executor.map(predict, examples))
    report = accuracy(zip(predictions, (ex.target_with_eos() for ex in examples)))
    logger.debug(f"Evaluated {n} {task.name} examples",
                 extra={"context": {"range": length_range, "coarse": report.coarse, "fine": report.fine}})
    return report


def write_report(path: Union[str, Path], report: EvalReport, **fields) -> Path:
    """Write the report (plus any extra fields) as JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({**fields, **report.to_dict()}, f, indent=2)
    return path
