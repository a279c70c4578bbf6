"""
Transduction model: forward pass, loss and backpropagation through time.

The model reads the whole joint sequence one symbol per step. Only the
predictions made from SEP up to the last target symbol are scored: each
predicts the next target symbol, the last one predicts EOS.
"""

from concurrent.futures import Executor
from dataclasses import dataclass, replace
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from config.schema import ModelConfig
from controller import ParameterSet, init_parameters, recurrent_layer
from core.exceptions import DimensionError, NumericError, StaleTraceError
from memory import step_tie_margin

from .vocabulary import TransductionExample, Vocabulary


@dataclass(frozen=True, eq=False)
class TransductionModel:
    """Configuration, vocabulary and parameters of one model."""
    config: ModelConfig
    vocab: Vocabulary
    params: ParameterSet

    def with_params(self, params: ParameterSet) -> "TransductionModel":
        return replace(self, params=params)


def build_model(config: ModelConfig, vocab: Vocabulary, seed: int = 0) -> TransductionModel:
    """Initialize a model whose vocabulary sizes match ``vocab``."""
    if config.source_vocab != vocab.source_size or config.target_vocab != vocab.target_size:
        raise DimensionError(
            f"config vocabularies {config.source_vocab}/{config.target_vocab} do not match "
            f"vocabulary {vocab.source_size}/{vocab.target_size}")
    return TransductionModel(config, vocab, init_parameters(config, seed))


@dataclass(frozen=True)
class LossReport:
    """Summed negative log-likelihood in nats over the scored positions."""
    nll: float
    positions: float
    per_position: np.ndarray

    @property
    def perplexity(self) -> float:
        if self.positions <= 0:
            return 1.0
        return float(np.exp(self.nll / self.positions))


@dataclass(frozen=True, eq=False)
class StepTrace:
    """Everything the backward pass replays; tied to one model and example."""
    params: ParameterSet
    joint: Tuple[int, ...]
    rows: np.ndarray
    caches: List[Any]
    final_state: Any
    scored_outputs: np.ndarray
    probs: np.ndarray
    labels: np.ndarray
    mask: np.ndarray

    def __len__(self) -> int:
        return len(self.caches)

    @property
    def first_scored(self) -> int:
        return len(self.joint) - 1 - self.labels.shape[0]

    def tie_margin(self) -> float:
        """Closest approach of any memory step to a min/max switching point."""
        margins = [step_tie_margin(c.prev_memory, c.signals) for c in self.caches
                   if hasattr(c, "prev_memory")]
        return min(margins, default=float("inf"))


@dataclass(frozen=True, eq=False)
class ForwardResult:
    logits: np.ndarray
    loss: LossReport
    trace: StepTrace


def _input_rows(model: TransductionModel, example: TransductionExample) -> np.ndarray:
    sep = example.separator_position
    vocab = model.vocab
    return np.array([vocab.input_row(token, t > sep) for t, token in enumerate(example.joint)])


def model_forward(model: TransductionModel, example: TransductionExample,
                  mask: Optional[Sequence[float]] = None) -> ForwardResult:
    """
    Run the model over ``example.joint`` and score the target positions.

    Args:
        model: the model
        example: encoded example
        mask: optional weight per scored position (|target| + 1 entries)

    Returns:
        ForwardResult with logits of shape (|target| + 1, |target vocab| + 1)

    Raises:
        NumericError: if an activation becomes non-finite
    """
    model.vocab.check_source(example.source)
    model.vocab.check_target(example.target)
    scored = example.scored_positions
    if mask is None:
        mask = np.ones(scored)
    else:
        mask = np.asarray(mask, dtype=np.float64)
        if mask.shape != (scored,):
            raise DimensionError(f"mask has shape {mask.shape}, expected ({scored},)")

    layer = recurrent_layer(model.config)
    embedding = model.params["embedding.input"]
    rows = _input_rows(model, example)
    first = example.separator_position

    state = layer.initial_state(model)
    caches = []
    outputs = []
    for t, row in enumerate(rows):
        state, o, cache = layer.step(model, state, embedding[row])
        if not np.all(np.isfinite(o)):
            raise NumericError(f"non-finite controller output at position {t}",
                               position=t, token=example.joint[t])
        caches.append(cache)
        if first <= t < first + scored:
            outputs.append(o)

    scored_outputs = np.stack(outputs)
    logits = scored_outputs @ model.params["output.W_softmax"].T + model.params["output.b_softmax"]
    log_probs = logits - logsumexp(logits, axis=1, keepdims=True)
    labels = np.array([model.vocab.output_class(example.joint[t + 1])
                       for t in range(first, first + scored)])
    per_position = -log_probs[np.arange(scored), labels] * mask
    if not np.all(np.isfinite(per_position)):
        bad = int(np.flatnonzero(~np.isfinite(per_position))[0])
        raise NumericError(f"non-finite loss at scored position {bad}", position=first + bad)

    loss = LossReport(float(np.sum(per_position)), float(np.count_nonzero(mask)), per_position)
    trace = StepTrace(model.params, tuple(example.joint), rows, caches, state,
                      scored_outputs, np.exp(log_probs), labels, mask)
    return ForwardResult(logits, loss, trace)


def model_backward(model: TransductionModel, trace: StepTrace, example: TransductionExample) -> ParameterSet:
    """
    Gradients of the summed loss with respect to every parameter.

    Raises:
        StaleTraceError: if the trace came from other parameters or another example
        NumericError: if a gradient becomes non-finite
    """
    if trace.params is not model.params:
        raise StaleTraceError("trace was recorded with different parameters")
    if trace.joint != tuple(example.joint):
        raise StaleTraceError("trace was recorded for a different example")

    params = model.params
    grads = params.zeros_like()
    layer = recurrent_layer(model.config)

    d_logits = trace.probs.copy()
    d_logits[np.arange(trace.labels.shape[0]), trace.labels] -= 1.0
    d_logits *= trace.mask[:, None]
    grads["output.W_softmax"] += d_logits.T @ trace.scored_outputs
    grads["output.b_softmax"] += d_logits.sum(axis=0)
    d_scored = d_logits @ params["output.W_softmax"]

    first = trace.first_scored
    zero_o = np.zeros(model.config.hidden)
    embedding_grad = grads["embedding.input"]
    d_state = layer.zero_adjoint(trace.final_state)
    for t in reversed(range(len(trace))):
        k = t - first
        d_o = d_scored[k] if 0 <= k < d_scored.shape[0] else zero_o
        d_i, d_state = layer.step_backward(model, trace.caches[t], d_o, d_state, grads)
        embedding_grad[trace.rows[t]] += d_i
    layer.finish_backward(model, d_state, grads)

    if not grads.is_finite():
        raise NumericError("non-finite gradient")
    return grads


@dataclass(frozen=True, eq=False)
class BatchResult:
    grads: ParameterSet
    nll: float
    positions: float


def _example_gradients(model: TransductionModel, example: TransductionExample):
    result = model_forward(model, example)
    return model_backward(model, result.trace, example), result.loss


def accumulate_gradients(grads: Sequence[ParameterSet]) -> ParameterSet:
    """Sum per-example gradients."""
    if not grads:
        raise DimensionError("nothing to accumulate")
    total = grads[0].copy()
    for g in grads[1:]:
        total.add_(g)
    return total


def batch_gradients(model: TransductionModel, examples: Sequence[TransductionExample],
                    executor: Optional[Executor] = None) -> BatchResult:
    """
    Summed gradients and loss over a batch.

    Examples are independent given the parameters, so an executor may map
    them in parallel; the reduction happens here.
    """
    if executor is None:
        results = [_example_gradients(model, ex) for ex in examples]
    else:
        results = list(executor.map(lambda ex: _example_gradients(model, ex), examples))
    grads = accumulate_gradients([g for g, _ in results])
    return BatchResult(grads, sum(l.nll for _, l in results), sum(l.positions for _, l in results))
