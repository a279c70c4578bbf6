"""
Training Module

RMSProp with elementwise clipping, the training loop, checkpoints, the
metrics CSV, learning-rate grid search and finite-difference gradient
checks.
"""

from .checkpoint import MAGIC, Checkpoint, load_checkpoint, save_checkpoint
from .gradcheck import (
    GradCheckReport, check_memory_gradients, grad_check, relative_error, run_gradcheck_suite,
    tiny_model_config,
)
from .grid import GridPoint, grid_search, select_best, write_grid_results
from .metrics_log import COLUMNS, MetricsWriter, TrainLog, TrainRecord, read_metrics
from .optimizer import OptimizerState, clip_gradients, rmsprop_update
from .trainer import TrainResult, Trainer, build_experiment, run_experiment, train, worker_threads

__all__ = [
    'clip_gradients', 'rmsprop_update', 'OptimizerState',
    'Trainer', 'TrainResult', 'train', 'build_experiment', 'run_experiment', 'worker_threads',
    'TrainLog', 'TrainRecord', 'MetricsWriter', 'read_metrics', 'COLUMNS',
    'save_checkpoint', 'load_checkpoint', 'Checkpoint', 'MAGIC',
    'grad_check', 'check_memory_gradients', 'run_gradcheck_suite', 'GradCheckReport',
    'relative_error', 'tiny_model_config',
    'grid_search', 'select_best', 'GridPoint', 'write_grid_results',
]
