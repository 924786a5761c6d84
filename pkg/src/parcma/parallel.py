"""Fork-join batch evaluation of one generation's candidate points.

A generation produces a batch of independent evaluations whose cost is
assumed to dominate the strategy update, so the batch is fanned out to a
pool of worker processes and gathered behind a barrier: `evaluate` never
returns before every point has a result, and results are re-associated
with candidates by index, never by completion order. Objectives must be
pure and picklable; with one worker everything runs in-process.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import WorkerFailure
from .validation import as_points, check_count

__all__ = [
    "BatchResult",
    "BatchEvaluator",
    "evaluate_batch",
    "speedup",
    "default_workers",
]

WORKERS_ENV_VAR = "PARCMA_WORKERS"


@dataclass(frozen=True, eq=False)
class BatchResult:
    """Objective values for one batch, index-aligned with its points."""

    fvals: np.ndarray
    wall_time: float
    eval_times: np.ndarray | None = None


def default_workers() -> int:
    """Worker count from the PARCMA_WORKERS env var, else the CPU count."""
    env = os.environ.get(WORKERS_ENV_VAR)
    if env is not None:
        return check_count(int(env), WORKERS_ENV_VAR)
    return os.cpu_count() or 1


def _timed_eval(objective, x):
    tic = time.perf_counter()
    f = objective(x)
    return float(f), time.perf_counter() - tic


class BatchEvaluator:
    """Reusable fork-join evaluator backed by a process pool.

    The pool is created lazily on first use and lives until `close`, so
    one evaluator amortizes worker startup across all generations of a
    run. The evaluator serves one batch at a time; it is not meant to be
    shared between concurrently stepping optimizers.
    """

    def __init__(self, workers: int | None = None):
        self.workers = default_workers() if workers is None else check_count(workers, "workers")
        self._pool: ProcessPoolExecutor | None = None

    def evaluate(self, objective, points) -> BatchResult:
        """Evaluate ``objective`` at every point; block until all done.

        Results come back in point order regardless of completion order.
        If any evaluation raises, the whole batch is still drained before
        a `WorkerFailure` carrying the lowest failing index is raised, so
        one bad point cannot corrupt the others' results.
        """
        pts = as_points(points)
        if pts.shape[0] < 1:
            raise ValueError("points must contain at least one vector")
        tic = time.perf_counter()
        if self.workers == 1:
            outcomes = [self._guarded(objective, x) for x in pts]
        else:
            if self._pool is None:
                self._pool = ProcessPoolExecutor(max_workers=self.workers)
            futures = [self._pool.submit(_timed_eval, objective, x) for x in pts]
            outcomes = []
            for future in futures:
                try:
                    outcomes.append((True, future.result()))
                except Exception as exc:
                    outcomes.append((False, exc))
        wall = time.perf_counter() - tic

        for index, (ok, payload) in enumerate(outcomes):
            if not ok:
                raise WorkerFailure(index) from payload
        fvals = np.array([payload[0] for _, payload in outcomes])
        times = np.array([payload[1] for _, payload in outcomes])
        return BatchResult(fvals=fvals, wall_time=wall, eval_times=times)

    @staticmethod
    def _guarded(objective, x):
        try:
            return True, _timed_eval(objective, x)
        except Exception as exc:
            return False, exc

    __call__ = evaluate

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self) -> "BatchEvaluator":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def evaluate_batch(objective, points, workers: int = 1) -> BatchResult:
    """One-shot batch evaluation; see `BatchEvaluator.evaluate`."""
    with BatchEvaluator(workers) as evaluator:
        return evaluator.evaluate(objective, points)


def speedup(t1: float, tp: float, p: int) -> tuple[float, float]:
    """Parallel speedup S = t1/tp and efficiency E = S/p."""
    if t1 <= 0 or tp <= 0:
        raise ValueError(f"wall times must be positive, got t1={t1!r}, tp={tp!r}")
    p = check_count(p, "p")
    s = t1 / tp
    return s, s / p
