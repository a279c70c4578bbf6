"""
Pop and read kernels in reading-end-first order.

Every kernel takes strengths ordered from the end being popped or read
(index 0 first). The stack calls them on its reversed strengths, the queue
on its strengths as stored, and the deque on both orders.

Derivatives at min/max ties follow the left argument, so ``max(0, x)`` has
zero slope at ``x == 0`` and ``min(s, room)`` follows ``s`` when equal.
"""

from typing import Tuple

import numpy as np


def exclusive_cumsum(x: np.ndarray) -> np.ndarray:
    """``out[i] = sum(x[:i])``."""
    out = np.zeros_like(x)
    if x.size > 1:
        np.cumsum(x[:-1], out=out[1:])
    return out


def reverse_exclusive_cumsum(x: np.ndarray) -> np.ndarray:
    """``out[i] = sum(x[i+1:])``."""
    return exclusive_cumsum(x[::-1])[::-1]


def pop(strengths: np.ndarray, amount: float) -> np.ndarray:
    """Remove ``amount`` of strength starting at index 0."""
    excess = amount - exclusive_cumsum(strengths)
    return np.maximum(0.0, strengths - np.maximum(0.0, excess))


def read_weights(strengths: np.ndarray) -> np.ndarray:
    """Weights of a unit-mass read starting at index 0."""
    room = np.maximum(0.0, 1.0 - exclusive_cumsum(strengths))
    return np.minimum(strengths, room)


def pop_backward(strengths: np.ndarray, amount: float, d_out: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Adjoints of ``pop``.

    Args:
        strengths: strengths before the pop (reading end first)
        amount: pop amount
        d_out: dL/d(popped strengths)

    Returns:
        (dL/d strengths, dL/d amount)
    """
    excess = amount - exclusive_cumsum(strengths)
    kept = strengths - np.maximum(0.0, excess)
    d_kept = np.where(kept > 0.0, d_out, 0.0)
    d_excess = np.where(excess > 0.0, -d_kept, 0.0)
    d_strengths = d_kept - reverse_exclusive_cumsum(d_excess)
    return d_strengths, float(np.sum(d_excess))


def read_weights_backward(strengths: np.ndarray, d_weights: np.ndarray) -> np.ndarray:
    """Adjoint of ``read_weights`` with respect to the strengths."""
    slack = 1.0 - exclusive_cumsum(strengths)
    room = np.maximum(0.0, slack)
    through_strength = strengths <= room
    d_strengths = np.where(through_strength, d_weights, 0.0)
    d_slack = np.where(~through_strength & (slack > 0.0), d_weights, 0.0)
    return d_strengths - reverse_exclusive_cumsum(d_slack)


def pop_tie_margin(strengths: np.ndarray, amount: float) -> float:
    """Distance to the nearest switching point of ``pop``."""
    excess = amount - exclusive_cumsum(strengths)
    kept = strengths - np.maximum(0.0, excess)
    live = strengths != 0.0
    candidates = [np.abs(excess)]
    if np.any(live):
        candidates.append(np.abs(kept[live]))
    return _smallest(candidates)


def read_tie_margin(strengths: np.ndarray) -> float:
    """Distance to the nearest switching point of ``read_weights``."""
    slack = 1.0 - exclusive_cumsum(strengths)
    room = np.maximum(0.0, slack)
    live = strengths != 0.0
    candidates = [np.abs(slack)]
    if np.any(live):
        candidates.append(np.abs(strengths[live] - room[live]))
    return _smallest(candidates)


def _smallest(arrays) -> float:
    values = [float(np.min(a)) for a in arrays if a.size]
    return min(values) if values else float("inf")
