"""
Training loop.

Each batch draws fresh examples from the training stream, backpropagates
through the whole joint sequence, clips elementwise and takes one RMSProp
step. Average training perplexity is recorded every ``ppl_every`` batches;
coarse/fine accuracy on a training-distribution control set and on the
test range every ``acc_every`` batches.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

from config.schema import ExperimentConfig, TrainConfig
from core.exceptions import NumericError, TrainingDivergedError
from core.performance_monitor import RunMonitor
from evaluation.runner import run_eval
from seqmodel.model import TransductionModel, batch_gradients, build_model
from tasks.streams import TransductionTask, build_task
from utils.logger import get_logger

from .checkpoint import save_checkpoint
from .metrics_log import MetricsWriter, TrainLog, TrainRecord
from .optimizer import OptimizerState, clip_gradients, rmsprop_update

TRAIN_STREAM = 0
CONTROL_STREAM = 1
TEST_STREAM = 2

BEST_CHECKPOINT = "best.ndsq"
FINAL_CHECKPOINT = "final.ndsq"
LAST_GOOD_CHECKPOINT = "last_good.ndsq"
METRICS_FILE = "metrics.csv"


def worker_threads() -> int:
    """Worker cap from NDSQ_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("NDSQ_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class TrainResult:
    model: TransductionModel
    log: TrainLog
    optimizer: OptimizerState


class Trainer:
    """
    Runs one training configuration.

    Args:
        task: example generator
        config: optimizer and cadence settings
        train_range: training source lengths
        test_range: test source lengths
        output_dir: where checkpoints and metrics.csv go; nothing is written when None
        threads: workers for per-example gradients within a batch
    """

    def __init__(self, task: TransductionTask, config: TrainConfig,
                 train_range: Tuple[int, int], test_range: Tuple[int, int],
                 output_dir: Optional[Union[str, Path]] = None, threads: int = 1):
        self.task = task
        self.config = config
        self.train_range = train_range
        self.test_range = test_range
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
        self.metrics = MetricsWriter(self.output_dir / METRICS_FILE) if self.output_dir else None
        self.monitor = RunMonitor(config.batch_size)
        self.logger = get_logger("training.trainer")

    def train(self, model: TransductionModel) -> TrainResult:
        """
        Train ``model`` for ``config.max_batches`` batches.

        Raises:
            TrainingDivergedError: when a batch produces a non-finite loss or
                gradient; carries the last good model and its checkpoint path
        """
        cfg = self.config
        stream = self.task.stream(self.train_range, cfg.seed, TRAIN_STREAM)
        opt_state = OptimizerState.zeros(model.params)
        log = TrainLog()
        window_nll = 0.0
        window_positions = 0.0

        self.logger.info(
            f"Training {model.config.kind.value} on {self.task.name}",
            extra={"context": {"lr": cfg.learning_rate, "batches": cfg.max_batches,
                               "batch_size": cfg.batch_size, "seed": cfg.seed}})

        for batch in range(1, cfg.max_batches + 1):
            examples = [next(stream) for _ in range(cfg.batch_size)]
            try:
                result = batch_gradients(model, examples, self.executor)
                if not math.isfinite(result.nll):
                    raise NumericError("non-finite batch loss")
            except NumericError as e:
                raise self._diverged(model, batch, e) from e

            grads = clip_gradients(result.grads, cfg.clip)
            params, opt_state = rmsprop_update(model.params, grads, opt_state, cfg.learning_rate,
                                               cfg.rmsprop_decay, cfg.rmsprop_eps)
            if not params.is_finite():
                raise self._diverged(model, batch, NumericError("non-finite parameters after update"))
            model = model.with_params(params)
            window_nll += result.nll
            window_positions += result.positions

            record_ppl = batch % cfg.ppl_every == 0
            record_acc = batch % cfg.acc_every == 0
            if not (record_ppl or record_acc):
                continue

            fields = {}
            if record_ppl:
                fields["train_ppl"] = math.exp(window_nll / window_positions) if window_positions else 1.0
                window_nll = window_positions = 0.0
                self._track_best(model, batch, fields["train_ppl"], log)
            if record_acc:
                fields.update(self._evaluate(model))
            record = TrainRecord(batch=batch, **fields)
            log.append(record)
            sample = self.monitor.sample(batch)
            log.resources.append(sample)
            if self.metrics:
                self.metrics.write(record)
            self.logger.info(f"Batch {batch}: " + ", ".join(f"{k}={v:.4f}" for k, v in fields.items()),
                             extra={"context": sample.as_context()})

        if self.output_dir:
            save_checkpoint(self.output_dir / FINAL_CHECKPOINT, model, cfg.max_batches)
        return TrainResult(model, log, opt_state)

    def _evaluate(self, model: TransductionModel):
        cfg = self.config
        control = run_eval(model, self.task, cfg.eval_samples, self.train_range, cfg.seed,
                           stream_id=CONTROL_STREAM, executor=self.executor)
        test = run_eval(model, self.task, cfg.eval_samples, self.test_range, cfg.seed,
                        stream_id=TEST_STREAM, executor=self.executor)
        return {"train_coarse": control.coarse, "train_fine": control.fine,
                "test_coarse": test.coarse, "test_fine": test.fine}

    def _track_best(self, model: TransductionModel, batch: int, ppl: float, log: TrainLog):
        if ppl >= log.best_ppl:
            return
        log.best_ppl, log.best_batch = ppl, batch
        if self.output_dir:
            path = save_checkpoint(self.output_dir / BEST_CHECKPOINT, model, batch, {"train_ppl": ppl})
            log.best_checkpoint = str(path)

    def _diverged(self, model: TransductionModel, batch: int, cause: Exception) -> TrainingDivergedError:
        path = None
        if self.output_dir:
            path = str(save_checkpoint(self.output_dir / LAST_GOOD_CHECKPOINT, model, batch - 1))
        self.logger.warning(f"Training diverged at batch {batch}: {cause}",
                            extra={"context": {"batch": batch, "checkpoint": path}})
        return TrainingDivergedError(f"training diverged at batch {batch}: {cause}", batch=batch,
                                     last_good_model=model, checkpoint_path=path,
                                     cause=str(cause))

    def shutdown(self):
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None


def train(model: TransductionModel, task: TransductionTask, config: TrainConfig,
          train_range: Tuple[int, int], test_range: Tuple[int, int],
          output_dir: Optional[Union[str, Path]] = None, threads: int = 1) -> TrainResult:
    """Train with a temporary ``Trainer``."""
    trainer = Trainer(task, config, train_range, test_range, output_dir, threads)
    try:
        return trainer.train(model)
    finally:
        trainer.shutdown()


def build_experiment(config: ExperimentConfig) -> Tuple[TransductionTask, TransductionModel]:
    """Task and freshly initialized model for an experiment configuration."""
    task = build_task(config.task, config.vocab_size, config.grammar_file, config.max_attempts)
    model_config = config.build_model_config(task.vocab.source_size, task.vocab.target_size)
    return task, build_model(model_config, task.vocab, config.seed)


def run_experiment(config: ExperimentConfig, output_dir: Optional[Union[str, Path]] = None,
                   threads: Optional[int] = None) -> TrainResult:
    """Build the task and model for ``config`` and train it."""
    task, model = build_experiment(config)
    out = Path(output_dir if output_dir is not None else config.output_dir)
    return train(model, task, config.train_config(), config.sample_config("train").length_range,
                 config.sample_config("test").length_range, out,
                 threads if threads is not None else worker_threads())
