"""
Append-only value storage shared by successive memory states.

A ``ValueBuffer`` holds rows in one array with free capacity at both ends.
A state owns the half-open row range ``[start, stop)``. Extending a state
that sits at the live frontier writes the new rows in place; extending any
other state (an older state, or a sibling already extended) forks a copy.
Rows inside a state's range are never written again.
"""

import threading
from typing import Optional, Tuple

import numpy as np

_MIN_CAPACITY = 16


class ValueBuffer:
    """Two-ended, amortized-growth row storage."""

    def __init__(self, width: int, dtype, capacity: int = _MIN_CAPACITY, rows: Optional[np.ndarray] = None):
        n = 0 if rows is None else rows.shape[0]
        capacity = max(capacity, _MIN_CAPACITY, 2 * n + 4)
        self.width = width
        self._storage = np.zeros((capacity, width), dtype=dtype)
        self._head = (capacity - n) // 2
        self._tail = self._head + n
        if n:
            self._storage[self._head:self._tail] = rows
        self._lock = threading.Lock()

    @property
    def dtype(self):
        return self._storage.dtype

    @property
    def capacity(self) -> int:
        return self._storage.shape[0]

    @property
    def extent(self) -> Tuple[int, int]:
        """Current live range ``(head, tail)``."""
        with self._lock:
            return self._head, self._tail

    def view(self, start: int, stop: int) -> np.ndarray:
        rows = self._storage[start:stop]
        rows.flags.writeable = False
        return rows

    def extend(self, start: int, stop: int, bottom: Optional[np.ndarray] = None,
               top: Optional[np.ndarray] = None) -> Tuple["ValueBuffer", int, int]:
        """
        Add a bottom and/or top row to the range ``[start, stop)``.

        Returns:
            (buffer, new_start, new_stop); the buffer is ``self`` when the rows
            were written in place and a fresh copy otherwise.
        """
        with self._lock:
            fits_bottom = bottom is None or (start == self._head and start > 0)
            fits_top = top is None or (stop == self._tail and stop < self.capacity)
            if fits_bottom and fits_top:
                if bottom is not None:
                    start -= 1
                    self._storage[start] = bottom
                    self._head = start
                if top is not None:
                    self._storage[stop] = top
                    stop += 1
                    self._tail = stop
                return self, start, stop
            rows = self._storage[start:stop].copy()

        fork = ValueBuffer(self.width, self.dtype, capacity=2 * (rows.shape[0] + 2), rows=rows)
        head, tail = fork.extent
        return fork.extend(head, tail, bottom=bottom, top=top)
