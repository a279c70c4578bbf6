"""
Finite-difference gradient checking.

Analytic gradients are compared with central differences
``(L(x + h) - L(x - h)) / 2h`` coordinate by coordinate. The relative error
of a coordinate is ``|a - n| / max(|a|, |n|, 1e-3)``. Trials that sit within
``TIE_MARGIN`` of a min/max switching point are redrawn, since the loss is
not differentiable there.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config.schema import ModelConfig
from controller.parameters import ParameterSet, group_of, init_parameters
from core.exceptions import ConfigError
from core.types import MemoryKind, ModelKind, Precision
from memory import MemorySignals, MemoryUpstream, empty_state, memory_step, memory_step_backward, step_tie_margin
from seqmodel.model import TransductionModel, model_backward, model_forward
from seqmodel.vocabulary import RESERVED, Vocabulary, encode_example
from utils.logger import get_logger

logger = get_logger(__name__)

STEP = 1e-6
DENOMINATOR_FLOOR = 1e-3
TIE_MARGIN = 1e-4
MAX_REDRAWS = 100


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), DENOMINATOR_FLOOR)


@dataclass
class GradCheckReport:
    """Largest relative error per parameter group over all trials."""
    scope: str
    kind: str
    trials: int
    tolerance: float
    max_errors: Dict[str, float] = field(default_factory=dict)
    redraws: int = 0
    near_tie_trials: List[int] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max(self.max_errors.values(), default=0.0)

    @property
    def failing_groups(self) -> List[str]:
        return [g for g, e in self.max_errors.items() if not e < self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failing_groups

    def record(self, group: str, error: float):
        self.max_errors[group] = max(self.max_errors.get(group, 0.0), error)

    def to_dict(self):
        return {
            "scope": self.scope, "kind": self.kind, "trials": self.trials,
            "tolerance": self.tolerance, "max_errors": dict(self.max_errors),
            "max_error": self.max_error, "redraws": self.redraws,
            "near_tie_trials": list(self.near_tie_trials), "passed": self.passed,
        }


def _warn_near_tie(report: GradCheckReport, seed: int, trial: int):
    report.near_tie_trials.append(trial)
    logger.warning(f"{report.scope} gradient check ({report.kind}): trial {trial} still within "
                   f"{TIE_MARGIN:g} of a min/max switch after {MAX_REDRAWS} redraws",
                   extra={"context": {"seed": seed, "trial": trial}})


def _compare(report: GradCheckReport, loss: Callable[[ParameterSet], float], point: ParameterSet,
             analytic: ParameterSet, group: Callable[[str], str], coords_per_param: Optional[int],
             rng: np.random.Generator):
    for name, array in point.items():
        indices = np.arange(array.size)
        if coords_per_param is not None and array.size > coords_per_param:
            indices = rng.choice(array.size, size=coords_per_param, replace=False)
        for flat in indices:
            shifted = point.copy()
            target = shifted[name].reshape(-1)
            original = target[flat]
            target[flat] = original + STEP
            plus = loss(shifted)
            target[flat] = original - STEP
            minus = loss(shifted)
            numeric = (plus - minus) / (2 * STEP)
            report.record(group(name), relative_error(float(analytic[name].reshape(-1)[flat]), numeric))


# Memory-only checks

def _random_signals(kind: MemoryKind, steps: int, width: int, rng: np.random.Generator) -> ParameterSet:
    signals = ParameterSet()
    for suffix in (("", "_bot") if kind is MemoryKind.DEQUE else ("",)):
        signals[f"value{suffix}"] = rng.uniform(-1.0, 1.0, size=(steps, width))
        signals[f"pop{suffix}"] = rng.uniform(0.05, 0.95, size=steps)
        signals[f"push{suffix}"] = rng.uniform(0.05, 0.95, size=steps)
    return signals


def _signals_at(arrays: ParameterSet, t: int) -> MemorySignals:
    if "value_bot" in arrays:
        return MemorySignals(arrays["value"][t], float(arrays["pop"][t]), float(arrays["push"][t]),
                             arrays["value_bot"][t], float(arrays["pop_bot"][t]), float(arrays["push_bot"][t]))
    return MemorySignals(arrays["value"][t], float(arrays["pop"][t]), float(arrays["push"][t]))


def _memory_run(kind: MemoryKind, arrays: ParameterSet):
    steps, width = arrays["value"].shape
    states = [empty_state(kind, width)]
    reads = []
    for t in range(steps):
        state, read = memory_step(states[-1], _signals_at(arrays, t))
        states.append(state)
        reads.append(read)
    return states, reads


def _memory_loss(kind: MemoryKind, arrays: ParameterSet, weights: ParameterSet) -> float:
    _, reads = _memory_run(kind, arrays)
    total = sum(float(weights["read"][t] @ r.read) for t, r in enumerate(reads))
    if kind is MemoryKind.DEQUE:
        total += sum(float(weights["read_bot"][t] @ r.read_bot) for t, r in enumerate(reads))
    return total


def _memory_gradients(kind: MemoryKind, arrays: ParameterSet, weights: ParameterSet) -> ParameterSet:
    states, reads = _memory_run(kind, arrays)
    grads = arrays.zeros_like()
    d_values = d_strengths = None
    for t in reversed(range(len(reads))):
        upstream = MemoryUpstream(
            d_read=weights["read"][t], d_values=d_values, d_strengths=d_strengths,
            d_read_bot=weights["read_bot"][t] if kind is MemoryKind.DEQUE else None)
        adj = memory_step_backward(states[t], _signals_at(arrays, t), states[t + 1], reads[t], upstream)
        grads["value"][t] = adj.d_value
        grads["pop"][t] = adj.d_pop
        grads["push"][t] = adj.d_push
        if kind is MemoryKind.DEQUE:
            grads["value_bot"][t] = adj.d_value_bot
            grads["pop_bot"][t] = adj.d_pop_bot
            grads["push_bot"][t] = adj.d_push_bot
        d_values, d_strengths = adj.d_values, adj.d_strengths
    return grads


def _memory_margin(kind: MemoryKind, arrays: ParameterSet) -> float:
    states, _ = _memory_run(kind, arrays)
    return min(step_tie_margin(states[t], _signals_at(arrays, t)) for t in range(len(states) - 1))


def check_memory_gradients(kind: MemoryKind, trials: int = 10, tolerance: float = 1e-6,
                           width: int = 3, steps: int = 5, seed: int = 0) -> GradCheckReport:
    """
    Check one memory structure's backward step against central differences.

    The loss is a random linear function of every read over ``steps`` steps;
    the checked inputs are all values, pops and pushes.
    """
    kind = MemoryKind(kind)
    rng = np.random.default_rng(seed)
    report = GradCheckReport("memory", kind.value, trials, tolerance)
    for trial in range(trials):
        for _ in range(MAX_REDRAWS):
            arrays = _random_signals(kind, steps, width, rng)
            if _memory_margin(kind, arrays) >= TIE_MARGIN:
                break
            report.redraws += 1
        else:
            _warn_near_tie(report, seed, trial)
        weights = ParameterSet({"read": rng.uniform(-1.0, 1.0, size=(steps, width)),
                                "read_bot": rng.uniform(-1.0, 1.0, size=(steps, width))})
        analytic = _memory_gradients(kind, arrays, weights)
        _compare(report, lambda a: _memory_loss(kind, a, weights), arrays, analytic,
                 lambda name: name, None, rng)
    logger.info(f"Memory gradient check ({kind.value}): max error {report.max_error:.3e}",
                extra={"context": {"trials": trials, "redraws": report.redraws}})
    return report


# Full-model checks

def tiny_model_config(kind: ModelKind, hidden: int = 4, vocab: int = 5, memory_width: int = 3,
                      embedding: int = 3) -> ModelConfig:
    return ModelConfig(kind=kind, hidden=hidden, memory_width=memory_width, embedding=embedding,
                       source_vocab=vocab, target_vocab=vocab, precision=Precision.FLOAT64)


def _perturbed_model(config: ModelConfig, vocab: Vocabulary, rng: np.random.Generator) -> TransductionModel:
    params = init_parameters(config, int(rng.integers(2**31)))
    params = params.map(lambda a: a + rng.uniform(-0.3, 0.3, size=a.shape))
    return TransductionModel(config, vocab, params)


def grad_check(model_config: ModelConfig, trials: int = 10, tolerance: float = 1e-4,
               length: int = 4, coords_per_param: Optional[int] = 8, seed: int = 0) -> GradCheckReport:
    """
    Check full-model backpropagation through time.

    Each trial perturbs a freshly initialized model, draws a random example
    with source and target of ``length`` symbols, and compares analytic and
    central-difference gradients of the summed loss on up to
    ``coords_per_param`` random coordinates of every parameter array.

    Raises:
        ConfigError: unless the model runs in 64-bit precision
    """
    if model_config.precision is not Precision.FLOAT64:
        raise ConfigError("gradient checks need float64 precision")
    if model_config.source_vocab != model_config.target_vocab:
        raise ConfigError("gradient checks use one synthetic vocabulary for both sides")
    rng = np.random.default_rng(seed)
    vocab = Vocabulary.synthetic(model_config.source_vocab)
    report = GradCheckReport("model", model_config.kind.value, trials, tolerance)

    for trial in range(trials):
        for _ in range(MAX_REDRAWS):
            model = _perturbed_model(model_config, vocab, rng)
            example = encode_example(rng.integers(RESERVED, RESERVED + vocab.source_size, size=length),
                                     rng.integers(RESERVED, RESERVED + vocab.target_size, size=length),
                                     vocab)
            forward = model_forward(model, example)
            if forward.trace.tie_margin() >= TIE_MARGIN:
                break
            report.redraws += 1
        else:
            _warn_near_tie(report, seed, trial)
        analytic = model_backward(model, forward.trace, example)

        def loss(params: ParameterSet, model=model, example=example) -> float:
            return model_forward(model.with_params(params), example).loss.nll

        _compare(report, loss, model.params, analytic, group_of, coords_per_param, rng)

    logger.info(f"Model gradient check ({model_config.kind.value}): max error {report.max_error:.3e}",
                extra={"context": {"trials": trials, "redraws": report.redraws}})
    return report


def run_gradcheck_suite(kind: ModelKind, trials: int = 10, tolerance: float = 1e-4,
                        memory_tolerance: float = 1e-6, seed: int = 0) -> Tuple[List[GradCheckReport], bool]:
    """Memory-level checks for the model's memory kind plus a tiny full-model check."""
    kind = ModelKind.parse(kind) if not isinstance(kind, ModelKind) else kind
    reports = []
    if kind.memory_kind is not None:
        reports.append(check_memory_gradients(kind.memory_kind, trials, memory_tolerance, seed=seed))
    reports.append(grad_check(tiny_model_config(kind), trials, tolerance, seed=seed))
    return reports, all(r.passed for r in reports)
