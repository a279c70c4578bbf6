"""
Run Resource Monitoring for NDSQ

Records wall time, throughput and process resource usage at every training
checkpoint so long runs can be compared and troubleshot after the fact.
"""

import threading
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import psutil


@dataclass
class ResourceSample:
    """Resource usage at one checkpoint."""
    batch: int
    elapsed_s: float
    examples_per_s: float
    rss_mb: float
    cpu_time_s: float

    def as_context(self) -> Dict[str, Any]:
        return {
            "elapsed_s": round(self.elapsed_s, 2),
            "examples_per_s": round(self.examples_per_s, 1),
            "rss_mb": round(self.rss_mb, 1),
        }


class RunMonitor:
    """Collects a ResourceSample whenever the trainer reaches a checkpoint."""

    def __init__(self, batch_size: int):
        self.batch_size = batch_size
        self._process = psutil.Process()
        self._start = time.perf_counter()
        self._lock = threading.Lock()
        self.samples: List[ResourceSample] = []

    def sample(self, batch: int) -> ResourceSample:
        elapsed = time.perf_counter() - self._start
        cpu = self._process.cpu_times()
        sample = ResourceSample(
            batch=batch,
            elapsed_s=elapsed,
            examples_per_s=(batch * self.batch_size / elapsed) if elapsed > 0 else 0.0,
            rss_mb=self._process.memory_info().rss / (1024 * 1024),
            cpu_time_s=cpu.user + cpu.system,
        )
        with self._lock:
            self.samples.append(sample)
        return sample

    def latest(self) -> Optional[ResourceSample]:
        with self._lock:
            return self.samples[-1] if self.samples else None

    def summary(self) -> Dict[str, Any]:
        with self._lock:
            if not self.samples:
                return {"samples": 0}
            last = self.samples[-1]
            return {
                "samples": len(self.samples),
                "elapsed_s": last.elapsed_s,
                "peak_rss_mb": max(s.rss_mb for s in self.samples),
                "examples_per_s": last.examples_per_s,
                "history": [asdict(s) for s in self.samples],
            }
