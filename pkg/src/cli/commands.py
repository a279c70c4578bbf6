"""
Command implementations. Each takes the parsed experiment configuration and
the command's own arguments, writes under ``config.output_dir`` and prints
its result to stdout. Failures are raised for the dispatcher to report.
"""

import json
import math
from argparse import Namespace
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict

import numpy as np

from config import ExperimentConfig, save_config
from controller import count_parameters
from core.exceptions import AcceptanceError, CheckpointError, NumericError
from evaluation import run_eval, write_report
from memory import discrete_limit_mismatch, random_binary_signals
from tasks import build_task, write_dataset
from training import (
    MetricsWriter, TrainRecord, grid_search, load_checkpoint, run_experiment, run_gradcheck_suite,
    select_best,
)
from training.trainer import CONTROL_STREAM, TEST_STREAM, TRAIN_STREAM, worker_threads

DISCRETE_LIMIT_TOLERANCE = 1e-9


def _emit(data: Dict[str, Any]):
    print(json.dumps(data, indent=2, sort_keys=True))


def _split_range(config: ExperimentConfig, split: str):
    return config.sample_config(split).length_range


def cmd_gen(config: ExperimentConfig, args: Namespace) -> int:
    """Write ``n`` examples of one split as line-delimited JSON."""
    task = build_task(config.task, config.vocab_size, config.grammar_file, config.max_attempts)
    stream_id = TRAIN_STREAM if args.split == "train" else TEST_STREAM
    examples = task.batch(args.n, _split_range(config, args.split), config.seed, stream_id)
    out = Path(config.output_dir)
    path = out / f"{task.name}_{args.split}.jsonl"
    write_dataset(path, examples)
    with open(out / "vocabulary.json", "w", encoding="utf-8") as f:
        json.dump(task.vocab.to_dict(), f, indent=2)
    _emit({"dataset": str(path), "examples": len(examples), "split": args.split})
    return 0


def cmd_train(config: ExperimentConfig, args: Namespace) -> int:
    """Train one configuration, or the learning-rate grid with ``--grid``."""
    save_config(config)
    if config.grid:
        points = grid_search(config, max_workers=worker_threads())
        best = select_best(points)
        _emit({"grid": [asdict(p) for p in points],
               "best": asdict(best) if best is not None else None})
        if best is None:
            raise NumericError("every learning rate in the grid failed")
        return 0

    result = run_experiment(config)
    last = result.log.last_accuracy()
    _emit({
        "batches": config.max_batches,
        "final_train_ppl": result.log.final_ppl,
        "best_train_ppl": result.log.best_ppl if math.isfinite(result.log.best_ppl) else None,
        "best_batch": result.log.best_batch,
        "best_checkpoint": result.log.best_checkpoint,
        "last_accuracy": asdict(last) if last is not None else None,
        "resources": asdict(result.log.resources[-1]) if result.log.resources else None,
    })
    return 0


def cmd_eval(config: ExperimentConfig, args: Namespace) -> int:
    """Evaluate a checkpoint and write ``eval_report.json``."""
    checkpoint = load_checkpoint(args.checkpoint)
    model = checkpoint.model
    task = build_task(config.task, model.vocab.source_size, config.grammar_file, config.max_attempts)
    if task.vocab != model.vocab:
        raise CheckpointError(
            f"checkpoint vocabulary does not match task '{config.task.value}'", checkpoint=args.checkpoint)

    n = args.n or config.eval_samples
    length_range = _split_range(config, args.split)
    report = run_eval(model, task, n, length_range, config.seed,
                      stream_id=TEST_STREAM if args.split == "test" else CONTROL_STREAM)
    out = Path(config.output_dir)
    write_report(out / "eval_report.json", report, checkpoint=str(args.checkpoint),
                 batch=checkpoint.batch, split=args.split, length_range=list(length_range))
    if args.split == "test":
        row = TrainRecord(batch=checkpoint.batch, test_coarse=report.coarse, test_fine=report.fine)
    else:
        row = TrainRecord(batch=checkpoint.batch, train_coarse=report.coarse, train_fine=report.fine)
    MetricsWriter(out / "metrics.csv").write(row)
    _emit({"coarse": report.coarse, "fine": report.fine, "count": report.count, "split": args.split})
    return 0


def cmd_gradcheck(config: ExperimentConfig, args: Namespace) -> int:
    """Gradient checks for the model kind plus a short discrete-limit sweep."""
    reports, passed = run_gradcheck_suite(config.model, args.trials, args.tolerance, seed=config.seed)
    result: Dict[str, Any] = {"reports": [r.to_dict() for r in reports]}

    kind = config.model.memory_kind
    if kind is not None:
        rng = np.random.default_rng(config.seed)
        worst = max(discrete_limit_mismatch(kind, random_binary_signals(
            kind, int(rng.integers(1, 17)), 3, rng)) for _ in range(args.trials * 10))
        result["discrete_limit"] = {"max_mismatch": worst, "tolerance": DISCRETE_LIMIT_TOLERANCE}
        passed = passed and worst < DISCRETE_LIMIT_TOLERANCE

    result["passed"] = passed
    _emit(result)
    if not passed:
        raise AcceptanceError(f"gradient check failed for {config.model.value}",
                              failing=[g for r in reports for g in r.failing_groups])
    return 0


def cmd_params(config: ExperimentConfig, args: Namespace) -> int:
    """Print the trainable parameter breakdown."""
    task = build_task(config.task, config.vocab_size, config.grammar_file, config.max_attempts)
    model_config = config.build_model_config(task.vocab.source_size, task.vocab.target_size)
    count = count_parameters(model_config)
    _emit({"model": config.model.value, "hidden": config.hidden, **count.as_dict(),
           "table_comparable": "core_total"})
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "params": cmd_params,
}
