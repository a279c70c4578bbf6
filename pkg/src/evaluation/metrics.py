"""
Coarse and fine sequence accuracy.

Predictions are compared with the target (EOS included) position by
position. Fine accuracy is the share of the target produced before the
first error; coarse accuracy counts sequences with no error at all.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from core.exceptions import EvalError
from seqmodel.vocabulary import EOS


@dataclass(frozen=True)
class EvalReport:
    coarse: float
    fine: float
    count: int
    first_errors: Tuple[Optional[int], ...]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["first_errors"] = list(self.first_errors)
        return data


def first_error(prediction: Sequence[int], target: Sequence[int]) -> Optional[int]:
    """Index of the first target position the prediction gets wrong, or None."""
    for position, expected in enumerate(target):
        if position >= len(prediction) or int(prediction[position]) != int(expected):
            return position
    return None


def accuracy(pairs: Iterable[Tuple[Sequence[int], Sequence[int]]]) -> EvalReport:
    """
    Score (prediction, target) pairs; every target must end with EOS.

    Raises:
        EvalError: for an empty batch or a target without EOS
    """
    errors: List[Optional[int]] = []
    coarse = 0
    fine = 0.0
    for index, (prediction, target) in enumerate(pairs):
        if len(target) == 0 or int(target[-1]) != EOS:
            raise EvalError(f"target {index} does not end with EOS", index=index)
        error = first_error(prediction, target)
        errors.append(error)
        if error is None:
            coarse += 1
            fine += 1.0
        else:
            fine += error / len(target)
    if not errors:
        raise EvalError("cannot score an empty batch")
    n = len(errors)
    return EvalReport(coarse / n, fine / n, n, tuple(errors))
