"""Black-box objective contract and the classical benchmark suite.

Each benchmark below is the standard formulation found in the global
optimization literature, stated in its docstring together with the usual
box domain; every one attains f = 0 at its optimum. The registry is
addressable by string name (see `benchmark`) and deliberately contains
only functions with a single widely agreed formulation.

Objectives are pure functions: same input, same output, no observable side
effects. That purity is what lets the batch evaluator fan them out to
worker processes without changing any result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnknownBenchmark
from .validation import as_vector, check_count

__all__ = [
    "Objective",
    "EvalResult",
    "as_objective",
    "benchmark",
    "benchmark_names",
    "make_expensive",
    "sphere",
    "hyperellipsoid",
    "rosenbrock",
    "rastrigin",
    "ackley",
    "griewank",
    "schwefel_2_22",
    "step",
    "alpine",
]


def sphere(x) -> float:
    """Sum of squares, f(x) = sum(x_i^2); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * x))


def hyperellipsoid(x) -> float:
    """Axis-parallel hyper-ellipsoid, f(x) = sum(i * x_i^2); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.arange(1, x.size + 1) * x * x))


def rosenbrock(x) -> float:
    """Banana valley, f(x) = sum(100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2).

    Minimum 0 at (1, ..., 1); for n >= 4 a local minimum lurks near
    (-1, 1, ..., 1).
    """
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x) -> float:
    """Highly multimodal, f(x) = 10 n + sum(x_i^2 - 10 cos(2 pi x_i)); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def ackley(x) -> float:
    """Nearly flat outer region with a central funnel; minimum 0 at the origin.

    f(x) = -20 exp(-0.2 sqrt(mean(x^2))) - exp(mean(cos(2 pi x))) + 20 + e
    """
    x = np.asarray(x, dtype=float)
    return float(
        -20.0 * np.exp(-0.2 * np.sqrt(np.mean(x * x)))
        - np.exp(np.mean(np.cos(2.0 * np.pi * x)))
        + 20.0
        + math.e
    )


def griewank(x) -> float:
    """f(x) = 1 + sum(x_i^2)/4000 - prod(cos(x_i / sqrt(i))); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    i = np.arange(1, x.size + 1)
    return float(1.0 + np.sum(x * x) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))))


def schwefel_2_22(x) -> float:
    """f(x) = sum(|x_i|) + prod(|x_i|); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    return float(np.sum(a) + np.prod(a))


def step(x) -> float:
    """Plateau function, f(x) = sum(floor(x_i + 0.5)^2); minimum 0 around the origin."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.floor(x + 0.5) ** 2))


def alpine(x) -> float:
    """f(x) = sum(|x_i sin(x_i) + 0.1 x_i|); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.abs(x * np.sin(x) + 0.1 * x)))


@dataclass(frozen=True, eq=False)
class EvalResult:
    """One evaluation: the value paired with an exact echo of the query point.

    Keeping the point alongside the value preserves the candidate/fitness
    correspondence even when evaluations complete out of order.
    """

    point: np.ndarray
    f: float


@dataclass(frozen=True, eq=False)
class Objective:
    """A black-box objective: a pure function plus its metadata.

    ``bounds`` is the (lo, hi) box applied to every coordinate, used only
    by the initialization heuristics; the optimizer itself never clips.
    ``known_optimum`` is the (point, value) pair where the function attains
    its optimum, when one is known.
    """

    name: str
    dim: int
    func: "callable"
    bounds: tuple[float, float] | None = None
    known_optimum: tuple[np.ndarray, float] | None = None

    def __call__(self, x) -> float:
        return float(self.func(np.asarray(x, dtype=float)))

    def evaluate(self, x) -> EvalResult:
        point = np.array(x, dtype=float)
        return EvalResult(point=point, f=float(self.func(point)))


# name -> (function, (lo, hi), optimum point builder, minimum dimension)
_REGISTRY = {
    "sphere": (sphere, (-100.0, 100.0), np.zeros, 1),
    "hyperellipsoid": (hyperellipsoid, (-5.12, 5.12), np.zeros, 1),
    "rosenbrock": (rosenbrock, (-30.0, 30.0), np.ones, 2),
    "rastrigin": (rastrigin, (-5.12, 5.12), np.zeros, 1),
    "ackley": (ackley, (-32.768, 32.768), np.zeros, 1),
    "griewank": (griewank, (-600.0, 600.0), np.zeros, 1),
    "schwefel_2_22": (schwefel_2_22, (-10.0, 10.0), np.zeros, 1),
    "step": (step, (-100.0, 100.0), np.zeros, 1),
    "alpine": (alpine, (-10.0, 10.0), np.zeros, 1),
}


def benchmark_names() -> list[str]:
    """Registered benchmark names, sorted."""
    return sorted(_REGISTRY)


def benchmark(name: str, dim: int) -> Objective:
    """Instantiate a registered benchmark at the given dimension."""
    try:
        func, bounds, optimum_at, min_dim = _REGISTRY[name]
    except KeyError:
        raise UnknownBenchmark(
            f"unknown benchmark {name!r}; available: {', '.join(benchmark_names())}"
        ) from None
    dim = check_count(dim, "dim", minimum=min_dim)
    return Objective(
        name=name,
        dim=dim,
        func=func,
        bounds=bounds,
        known_optimum=(optimum_at(dim), 0.0),
    )


def as_objective(obj, dim: int | None = None, name: str | None = None) -> Objective:
    """Coerce a plain callable into an `Objective`; pass `Objective`s through."""
    if isinstance(obj, Objective):
        return obj
    if not callable(obj):
        raise TypeError(f"objective must be callable, got {type(obj).__name__}")
    if dim is None:
        dim = getattr(obj, "dim", None)
    if dim is None:
        raise ValueError("dim is required to wrap a plain callable")
    return Objective(
        name=name or getattr(obj, "__name__", "objective"),
        dim=check_count(dim, "dim"),
        func=obj,
        bounds=getattr(obj, "bounds", None),
    )


_burn_sink = 0.0


def _burn(work_units: int) -> None:
    # Harmonic partial sum: a data-dependent float accumulation the
    # interpreter cannot elide, parked in a sink no caller reads.
    s = 0.0
    for i in range(1, work_units + 1):
        s += 1.0 / i
    global _burn_sink
    _burn_sink = s


@dataclass(frozen=True, eq=False)
class ExpensiveObjective:
    """Wrapper that burns deterministic busy-work per evaluation.

    The returned value is bitwise identical to the inner objective's; only
    wall time changes, which makes it a controllable stand-in for genuinely
    expensive simulations in timing studies.
    """

    inner: Objective
    work_units: int

    @property
    def name(self) -> str:
        return self.inner.name

    @property
    def dim(self) -> int:
        return self.inner.dim

    @property
    def bounds(self) -> tuple[float, float] | None:
        return self.inner.bounds

    @property
    def known_optimum(self):
        return self.inner.known_optimum

    def __call__(self, x) -> float:
        f = self.inner(x)
        _burn(self.work_units)
        return f

    def evaluate(self, x) -> EvalResult:
        result = self.inner.evaluate(x)
        _burn(self.work_units)
        return result


def make_expensive(inner: Objective, work_units: int) -> ExpensiveObjective:
    """Make ``inner`` artificially expensive by ``work_units`` loop iterations."""
    if work_units < 0:
        raise ValueError(f"work_units must be >= 0, got {work_units}")
    return ExpensiveObjective(inner=inner, work_units=int(work_units))
