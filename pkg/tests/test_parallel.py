import os
import time

import numpy as np
import pytest

from parcma.errors import ObjectiveFailure, WorkerFailure
from parcma.objectives import sphere
from parcma.parallel import (
    BatchEvaluator,
    default_workers,
    evaluate_batch,
    speedup,
)


# Callables handed to the pool live at module scope so they pickle.


class SleepInverted:
    """Sleeps longest for the lowest index, so completion order is the
    reverse of submission order."""

    def __call__(self, x):
        rank = int(x[0])
        time.sleep(0.12 if rank == 0 else 0.12 / (rank + 3))
        return float(rank)


class ExplodeAt:
    def __init__(self, bad):
        self.bad = bad

    def __call__(self, x):
        if int(x[0]) in self.bad:
            raise RuntimeError(f"boom at {int(x[0])}")
        return float(x[0])


class DropMarker:
    """Writes <index>.done into a directory before returning."""

    def __init__(self, directory):
        self.directory = str(directory)

    def __call__(self, x):
        rank = int(x[0])
        time.sleep(0.01 * (rank % 3))
        with open(os.path.join(self.directory, f"{rank}.done"), "w") as fh:
            fh.write("ok")
        return float(rank)


class ReturnsNan:
    def __call__(self, x):
        return float("nan") if int(x[0]) == 1 else 0.0


class Napper:
    def __call__(self, x):
        time.sleep(0.01)
        return float(np.sum(x))


def test_serial_matches_pool_bitwise():
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((12, 5))
    serial = evaluate_batch(sphere, pts, workers=1)
    pooled = evaluate_batch(sphere, pts, workers=2)
    assert np.array_equal(serial.fvals, pooled.fvals)


def test_results_align_by_index_not_completion_order():
    pts = np.arange(4.0)[:, None]
    result = evaluate_batch(SleepInverted(), pts, workers=4)
    assert np.array_equal(result.fvals, [0.0, 1.0, 2.0, 3.0])


def test_evaluate_blocks_until_every_point_done(tmp_path):
    pts = np.arange(6.0)[:, None]
    result = evaluate_batch(DropMarker(tmp_path), pts, workers=3)
    done = sorted(p.name for p in tmp_path.glob("*.done"))
    assert done == [f"{k}.done" for k in range(6)]
    assert result.fvals.shape == (6,)


@pytest.mark.parametrize("workers", [1, 2])
def test_failure_reports_lowest_failing_index(workers):
    pts = np.arange(5.0)[:, None]
    with pytest.raises(WorkerFailure) as excinfo:
        evaluate_batch(ExplodeAt({3, 1}), pts, workers=workers)
    assert excinfo.value.index == 1
    assert "1" in str(excinfo.value)
    assert isinstance(excinfo.value, ObjectiveFailure)


def test_failure_still_drains_the_batch(tmp_path):
    # the crash at index 0 must not stop the other points from running
    class_ = DropMarker(tmp_path)
    pts = np.arange(4.0)[:, None]

    both = _FailThenMark(class_)
    with pytest.raises(WorkerFailure):
        evaluate_batch(both, pts, workers=2)
    assert sorted(p.name for p in tmp_path.glob("*.done")) == [
        "1.done",
        "2.done",
        "3.done",
    ]


class _FailThenMark:
    def __init__(self, marker):
        self.marker = marker

    def __call__(self, x):
        if int(x[0]) == 0:
            raise RuntimeError("boom")
        return self.marker(x)


def test_nonfinite_values_are_data_not_errors():
    result = evaluate_batch(ReturnsNan(), np.arange(3.0)[:, None], workers=2)
    assert np.isnan(result.fvals[1])
    assert result.fvals[0] == 0.0 and result.fvals[2] == 0.0


def test_batch_result_timing_fields():
    pts = np.zeros((4, 2))
    result = evaluate_batch(Napper(), pts, workers=1)
    assert result.wall_time > 0.0
    assert result.eval_times.shape == (4,)
    assert np.all(result.eval_times > 0.0)
    assert result.wall_time >= result.eval_times.max() * 0.5


def test_evaluator_is_reusable_and_closable():
    pts = np.ones((3, 2))
    ev = BatchEvaluator(2)
    first = ev(sphere, pts)
    second = ev(sphere, pts)
    assert np.array_equal(first.fvals, second.fvals)
    ev.close()
    ev.close()  # idempotent
    third = ev.evaluate(sphere, pts)  # pool comes back lazily
    assert np.array_equal(third.fvals, first.fvals)
    ev.close()


def test_context_manager_closes_pool():
    with BatchEvaluator(2) as ev:
        ev(sphere, np.ones((2, 2)))
        assert ev._pool is not None
    assert ev._pool is None


def test_empty_batch_rejected():
    with pytest.raises(ValueError):
        evaluate_batch(sphere, np.zeros((0, 3)), workers=1)


def test_invalid_worker_count_rejected():
    for bad in (0, -2, 1.5):
        with pytest.raises(ValueError):
            BatchEvaluator(bad)


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("PARCMA_WORKERS", "3")
    assert default_workers() == 3
    assert BatchEvaluator().workers == 3
    monkeypatch.delenv("PARCMA_WORKERS")
    assert default_workers() == (os.cpu_count() or 1)
    monkeypatch.setenv("PARCMA_WORKERS", "0")
    with pytest.raises(ValueError):
        default_workers()
    monkeypatch.setenv("PARCMA_WORKERS", "many")
    with pytest.raises(ValueError):
        default_workers()


def test_speedup_arithmetic():
    assert speedup(8.0, 2.0, 4) == (4.0, 1.0)
    assert speedup(10.0, 4.0, 4) == (2.5, 0.625)
    s, e = speedup(5.0, 5.0, 8)
    assert s == 1.0 and e == 0.125
    for t1, tp, p in ((0.0, 1.0, 2), (1.0, -1.0, 2), (1.0, 1.0, 0)):
        with pytest.raises(ValueError):
            speedup(t1, tp, p)
