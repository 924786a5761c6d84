"""Scikit-learn flavored front end.

`CmaEs` is a plain estimator: hyperparameters live in ``__init__``,
``fit(objective)`` runs the optimization, fitted attributes (trailing
underscore) carry the result. There is no transform/predict pair because
an optimizer maps an objective to a point, not data to data. `minimize`
is the one-call functional form of the same thing.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .objectives import as_objective
from .strategy import Solution, Termination, default_params, run

__all__ = ["CmaEs", "minimize"]


class CmaEs(BaseEstimator):
    """Rank-based stochastic search with an adaptive Gaussian proposal.

    Each generation samples a population from N(m, sigma^2 C), ranks it on
    the objective, and moves the mean, the covariance C, and the step size
    sigma toward the directions that produced the best points.

    Parameters
    ----------
    max_evals : total objective-evaluation budget (includes the final mean).
    popsize : population size per generation; None picks 4 + floor(3 ln n).
    sigma0 : initial step size, or "auto" to derive it from the objective's
        bounds.
    x0 : initial mean; None derives it from the bounds.
    seed : seed for the run's random stream.
    workers : process count for batch evaluation; 1 evaluates in-process.
    target_f : stop once the best value seen is at or below this.
    max_generations : optional hard cap on generations.
    step_size_rule : "clamped" or "expected-norm".

    Attributes
    ----------
    x_, f_ : final distribution mean and its objective value.
    best_x_, best_f_ : best point actually evaluated.
    n_evals_, n_generations_, history_, params_, solution_ : run records.
    """

    def __init__(
        self,
        max_evals: int = 10_000,
        *,
        popsize: int | None = None,
        sigma0="auto",
        x0=None,
        seed: int = 0,
        workers: int | None = 1,
        target_f: float | None = None,
        max_generations: int | None = None,
        step_size_rule: str = "clamped",
    ):
        self.max_evals = max_evals
        self.popsize = popsize
        self.sigma0 = sigma0
        self.x0 = x0
        self.seed = seed
        self.workers = workers
        self.target_f = target_f
        self.max_generations = max_generations
        self.step_size_rule = step_size_rule

    def fit(self, objective, y=None):
        """Minimize ``objective`` (an `Objective` or callable exposing ``dim``)."""
        obj = as_objective(objective)
        params = default_params(obj.dim, self.popsize)
        solution = run(
            obj,
            params,
            Termination(
                max_evals=self.max_evals,
                target_f=self.target_f,
                max_generations=self.max_generations,
            ),
            x0=self.x0,
            sigma0=self.sigma0,
            seed=self.seed,
            workers=self.workers,
            step_size_variant=self.step_size_rule,
        )
        self.params_ = params
        self.solution_ = solution
        self.x_ = solution.x
        self.f_ = solution.f
        self.best_x_ = solution.best_x
        self.best_f_ = solution.best_f
        self.n_evals_ = solution.n_evals
        self.n_generations_ = solution.n_generations
        self.history_ = solution.history
        return self


def minimize(
    objective,
    dim: int | None = None,
    *,
    max_evals: int = 10_000,
    popsize: int | None = None,
    sigma0="auto",
    x0=None,
    seed: int = 0,
    workers: int | None = 1,
    target_f: float | None = None,
    max_generations: int | None = None,
    step_size_rule: str = "clamped",
) -> Solution:
    """Minimize a callable and return the `Solution` directly.

    ``dim`` may be omitted when the callable exposes one or when ``x0``
    pins it down.
    """
    if dim is None and x0 is not None:
        dim = len(x0)
    obj = as_objective(objective, dim=dim)
    params = default_params(obj.dim, popsize)
    termination = Termination(
        max_evals=max_evals, target_f=target_f, max_generations=max_generations
    )
    return run(
        obj,
        params,
        termination,
        x0=x0,
        sigma0=sigma0,
        seed=seed,
        workers=workers,
        step_size_variant=step_size_rule,
    )
