"""The CMA-ES strategy: parameters, state, the one-generation update, and
the outer optimization loop.

One generation samples a population from a Gaussian search distribution,
ranks it on the objective, recombines the best points into a new mean, and
then adapts the distribution: two cumulated evolution paths drive the
rank-one covariance term and the step-size rule, the selected steps drive
the rank-mu covariance term.

All update operations are pure functions of an explicit state; `step`
composes them in the canonical order and returns a fresh state, so a run
is fully reproducible from (seed, parameters, objective).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import NonPositiveStepSize, ObjectiveFailure
from .linalg import EigenFactors, condition_number, eigen_decompose, inverse_sqrt, make_rng
from .parallel import BatchEvaluator
from .validation import as_points, as_vector, check_count

__all__ = [
    "StrategyParams",
    "CmaState",
    "Population",
    "Termination",
    "GenerationRecord",
    "Solution",
    "default_params",
    "variance_effective_mass",
    "init_state",
    "initial_guess_from_bounds",
    "auto_step_size",
    "sample_points",
    "sample_population",
    "ranked_fitness",
    "rank_select",
    "recombine_mean",
    "update_sigma_path",
    "update_cov_path",
    "update_covariance",
    "update_step_size",
    "step",
    "run",
]

logger = logging.getLogger(__name__)

# Step-size rules: "clamped" multiplies sigma by
# exp(min(0.6, (c_sigma/d_sigma) * (|p|^2/n - 1)/2)), comparing the squared
# path length against its expectation n and capping growth at exp(0.6);
# "expected-norm" uses the unclamped textbook form with the path norm
# against E|N(0,I)| ~ sqrt(n) (1 - 1/(4n) + 1/(21 n^2)).
STEP_SIZE_RULES = ("clamped", "expected-norm")


@dataclass(frozen=True, eq=False)
class StrategyParams:
    """Fixed per-run constants of the strategy.

    Attributes
    ----------
    n : int
        Problem dimension.
    popsize : int
        Number of points sampled per generation.
    n_parents : int
        Number of best-ranked points recombined into the new mean.
    weights : ndarray
        Positive, non-increasing recombination weights summing to one,
        one per parent.
    mu_eff : float
        Variance effective mass, 1 / sum(weights**2); lies in
        [1, n_parents].
    c_c : float
        Smoothing rate of the covariance evolution path.
    c_sigma : float
        Smoothing rate of the conjugate (whitened) path.
    c_1 : float
        Rank-one covariance learning rate.
    c_mu : float
        Rank-mu covariance learning rate.
    d_sigma : float
        Step-size damping.
    """

    n: int
    popsize: int
    n_parents: int
    weights: np.ndarray
    mu_eff: float
    c_c: float
    c_sigma: float
    c_1: float
    c_mu: float
    d_sigma: float

    def __post_init__(self):
        check_count(self.n, "n")
        check_count(self.popsize, "popsize")
        check_count(self.n_parents, "n_parents")
        if self.n_parents > self.popsize:
            raise ValueError(
                f"n_parents ({self.n_parents}) cannot exceed popsize ({self.popsize})"
            )
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.n_parents,):
            raise ValueError(
                f"weights must have shape ({self.n_parents},), got {w.shape}"
            )
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        if np.any(np.diff(w) > 0):
            raise ValueError("weights must be non-increasing")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        if not (1.0 - 1e-9 <= self.mu_eff <= self.n_parents + 1e-9):
            raise ValueError(
                f"mu_eff must lie in [1, n_parents], got {self.mu_eff!r}"
            )
        if not (0.0 < self.c_c <= 1.0):
            raise ValueError(f"c_c must lie in (0, 1], got {self.c_c!r}")
        if not (0.0 < self.c_sigma <= 1.0):
            raise ValueError(f"c_sigma must lie in (0, 1], got {self.c_sigma!r}")
        if self.c_1 < 0.0 or self.c_mu < 0.0:
            raise ValueError("c_1 and c_mu must be nonnegative")
        if self.c_1 + self.c_mu > 1.0:
            raise ValueError(
                f"c_1 + c_mu must not exceed 1, got {self.c_1 + self.c_mu!r}"
            )
        if not (np.isfinite(self.d_sigma) and self.d_sigma > 0.0):
            raise ValueError(f"d_sigma must be positive, got {self.d_sigma!r}")


@dataclass(eq=False)
class CmaState:
    """Evolving state of the search distribution.

    ``factors`` and ``inv_sqrt_C`` always hold the factorization of ``C``
    that was current when the last population was sampled; `step` refreshes
    them after every covariance update.
    """

    m: np.ndarray
    sigma: float
    C: np.ndarray
    factors: "EigenFactors"
    inv_sqrt_C: np.ndarray
    p_c: np.ndarray
    p_sigma: np.ndarray
    g: int = 0
    evals: int = 0


@dataclass(frozen=True, eq=False)
class Population:
    """One generation's candidates, their objective values, and the ranking.

    ``order`` is the permutation that sorts the ranked objective values
    ascending; ties (and non-finite values, which rank as +inf) are broken
    by the lower original sample index.
    """

    points: np.ndarray
    fvals: np.ndarray
    order: np.ndarray

    @classmethod
    def from_evaluations(cls, points, fvals) -> "Population":
        pts = as_points(points)
        f = np.asarray(fvals, dtype=float)
        if f.shape != (pts.shape[0],):
            raise ValueError(
                f"fvals must have shape ({pts.shape[0]},), got {f.shape}"
            )
        order = np.argsort(ranked_fitness(f), kind="stable")
        return cls(points=pts, fvals=f, order=order)

    def best_f(self) -> float:
        """Ranked objective value of the best candidate (+inf if all bad)."""
        return float(ranked_fitness(self.fvals)[self.order[0]])

    def best_x(self) -> np.ndarray:
        return self.points[self.order[0]].copy()


@dataclass(frozen=True)
class Termination:
    """Stopping rule: evaluation budget, optional target value, optional
    generation cap."""

    max_evals: int
    target_f: float | None = None
    max_generations: int | None = None

    def __post_init__(self):
        check_count(self.max_evals, "max_evals")
        if self.max_generations is not None:
            check_count(self.max_generations, "max_generations")


@dataclass(frozen=True)
class GenerationRecord:
    """Per-generation log row emitted by `run`."""

    generation: int
    evals: int
    best_f_gen: float
    best_f_so_far: float
    sigma: float
    cond_c: float
    wall_ms: float


@dataclass(frozen=True, eq=False)
class Solution:
    """Result of a full optimization run.

    ``x``/``f`` are the final distribution mean and its objective value
    (the mean costs one extra evaluation, included in ``n_evals``);
    ``best_x``/``best_f`` track the best point actually evaluated,
    including the final mean.
    """

    x: np.ndarray
    f: float
    best_x: np.ndarray
    best_f: float
    n_evals: int
    n_generations: int
    history: tuple[GenerationRecord, ...]


def variance_effective_mass(weights) -> float:
    """Effective number of parents implied by the weights, 1 / sum(w**2)."""
    w = as_vector(weights, name="weights")
    return float(1.0 / np.sum(w**2))


def default_params(n: int, popsize: int | None = None) -> StrategyParams:
    """Build the default strategy constants for dimension ``n``.

    Population size defaults to 4 + floor(3 ln n); half of it is
    recombined with log-rank weights. The learning rates and damping
    follow the standard dimension-dependent heuristics.
    """
    n = check_count(n, "n")
    if popsize is None:
        popsize = 4 + int(3 * math.log(n))
    popsize = check_count(popsize, "popsize", minimum=2)
    n_parents = popsize // 2
    ranks = np.arange(1, n_parents + 1)
    w = np.log(n_parents + 0.5) - np.log(ranks)
    w = w / w.sum()
    mu_eff = variance_effective_mass(w)
    c_c = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
    c_sigma = (mu_eff + 2) / (n + mu_eff + 5)
    c_1 = 2 / ((n + 1.3) ** 2 + mu_eff)
    c_mu = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((n + 2) ** 2 + mu_eff))
    d_sigma = 2 * mu_eff / popsize + 0.3 + c_sigma
    return StrategyParams(
        n=n,
        popsize=popsize,
        n_parents=n_parents,
        weights=w,
        mu_eff=mu_eff,
        c_c=c_c,
        c_sigma=c_sigma,
        c_1=c_1,
        c_mu=c_mu,
        d_sigma=d_sigma,
    )


def init_state(params: StrategyParams, x0, sigma0) -> CmaState:
    """Fresh state: mean at ``x0``, identity covariance, zero paths."""
    m = as_vector(x0, n=params.n, name="x0")
    try:
        s0 = float(sigma0)
    except (TypeError, ValueError) as exc:
        raise NonPositiveStepSize(f"sigma0 must be a positive number, got {sigma0!r}") from exc
    if not (math.isfinite(s0) and s0 > 0.0):
        raise NonPositiveStepSize(f"sigma0 must be positive and finite, got {sigma0!r}")
    C = np.eye(params.n)
    factors = eigen_decompose(C)
    return CmaState(
        m=m.copy(),
        sigma=s0,
        C=C,
        factors=factors,
        inv_sqrt_C=inverse_sqrt(factors),
        p_c=np.zeros(params.n),
        p_sigma=np.zeros(params.n),
        g=0,
        evals=0,
    )


def auto_step_size(bounds) -> float:
    """Initial step size heuristic sqrt((hi - lo) / 2); 0.5 without bounds."""
    if bounds is None:
        logger.warning(
            "objective has no bounds; falling back to initial step size 0.5"
        )
        return 0.5
    lo, hi = float(bounds[0]), float(bounds[1])
    if not hi > lo:
        raise ValueError(f"bounds must satisfy lo < hi, got ({lo}, {hi})")
    return math.sqrt((hi - lo) / 2.0)


def initial_guess_from_bounds(bounds, n: int, rng: np.random.Generator) -> np.ndarray:
    """Initial mean heuristic: midpoint of the box plus one N(0, I) draw."""
    mid = 0.0 if bounds is None else (float(bounds[0]) + float(bounds[1])) / 2.0
    return mid * np.ones(n) + rng.standard_normal(n)


def sample_points(state: CmaState, rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` points x = m + sigma * B diag(D) z with z ~ N(0, I).

    The whitened draws are shaped through the eigenfactorization held in
    the state, so sampling and whitening always share one decomposition.
    """
    count = check_count(count, "count")
    B, D = state.factors
    z = rng.standard_normal((count, state.m.shape[0]))
    return state.m + state.sigma * ((z * D) @ B.T)


def sample_population(
    state: CmaState, params: StrategyParams, rng: np.random.Generator
) -> np.ndarray:
    """Sample one generation of ``params.popsize`` candidate points."""
    return sample_points(state, rng, params.popsize)


def ranked_fitness(fvals) -> np.ndarray:
    """Objective values with non-finite entries replaced by +inf for ranking."""
    f = np.asarray(fvals, dtype=float)
    return np.where(np.isfinite(f), f, np.inf)


def rank_select(population: Population, z: int) -> tuple[np.ndarray, np.ndarray]:
    """The ``z`` best candidates in ascending objective order.

    Returns (points, indices) where ``points[i]`` is the rank-i candidate
    (pairing with ``weights[i]``) and ``indices[i]`` its original sample
    index.
    """
    z = check_count(z, "z")
    if z > population.points.shape[0]:
        raise ValueError(
            f"cannot select {z} from population of {population.points.shape[0]}"
        )
    idx = population.order[:z]
    return population.points[idx].copy(), idx.copy()


def recombine_mean(selected, weights) -> np.ndarray:
    """Weighted recombination of the selected points into the new mean."""
    S = as_points(selected, name="selected")
    w = as_vector(weights, n=S.shape[0], name="weights")
    return w @ S


def update_sigma_path(
    state: CmaState, params: StrategyParams, new_mean
) -> tuple[np.ndarray, int]:
    """Cumulate the conjugate (whitened) evolution path and its stall flag.

    The mean step is whitened with the inverse square root of the
    covariance that generated the current population, making the expected
    path length direction-independent. The stall flag ``h_sigma`` drops to
    0 when the normalized squared path length exceeds 2 + 4/(n+1), which
    suppresses the covariance path update while the step size is far from
    adapted.
    """
    n = params.n
    cs = params.c_sigma
    delta = (as_vector(new_mean, n=n, name="new_mean") - state.m) / state.sigma
    p = (1 - cs) * state.p_sigma + math.sqrt(cs * (2 - cs) * params.mu_eff) * (
        state.inv_sqrt_C @ delta
    )
    # 1 - (1-cs)^(2(g+1)) corrects for the path still filling up during the
    # first generations.
    normalizer = 1.0 - (1.0 - cs) ** (2 * (state.g + 1))
    h_sigma = int(float(p @ p) / normalizer / n < 2.0 + 4.0 / (n + 1))
    return p, h_sigma


def update_cov_path(
    state: CmaState, params: StrategyParams, new_mean, h_sigma: int
) -> np.ndarray:
    """Cumulate the covariance evolution path from the raw mean step.

    With ``h_sigma`` = 0 the new-step term is suppressed and the path only
    decays, preventing covariance blow-up from an over-long conjugate path.
    """
    cc = params.c_c
    delta = (as_vector(new_mean, n=params.n, name="new_mean") - state.m) / state.sigma
    return (1 - cc) * state.p_c + h_sigma * math.sqrt(
        cc * (2 - cc) * params.mu_eff
    ) * delta


def update_covariance(
    state: CmaState, params: StrategyParams, selected_steps, h_sigma: int
) -> np.ndarray:
    """Combined rank-one plus rank-mu covariance update.

    ``selected_steps`` are the selected points' steps already divided by
    the sampling-time step size; ``state.p_c`` must hold the path cumulated
    for this generation. When ``h_sigma`` = 0, the lost rank-one variance
    c_1 c_c (2 - c_c) is folded back into the decay factor so the total
    variance stays balanced.
    """
    Y = as_points(selected_steps, name="selected_steps")
    if Y.shape != (params.n_parents, params.n):
        raise ValueError(
            f"selected_steps must have shape ({params.n_parents}, {params.n}), "
            f"got {Y.shape}"
        )
    c1, cmu, cc = params.c_1, params.c_mu, params.c_c
    rank_mu = (Y * params.weights[:, None]).T @ Y
    decay = 1.0 - c1 - cmu + (1 - h_sigma * h_sigma) * c1 * cc * (2 - cc)
    C = decay * state.C + c1 * np.outer(state.p_c, state.p_c) + cmu * rank_mu
    return (C + C.T) / 2.0


def update_step_size(
    state: CmaState,
    params: StrategyParams,
    p_sigma,
    variant: str = "clamped",
) -> float:
    """Multiplicative step-size update from the conjugate path length."""
    p = as_vector(p_sigma, n=params.n, name="p_sigma")
    ratio = params.c_sigma / params.d_sigma
    if variant == "clamped":
        arg = min(0.6, ratio * (float(p @ p) / params.n - 1.0) / 2.0)
    elif variant == "expected-norm":
        n = params.n
        chi_n = math.sqrt(n) * (1.0 - 1.0 / (4 * n) + 1.0 / (21 * n**2))
        arg = ratio * (float(np.linalg.norm(p)) / chi_n - 1.0)
    else:
        raise ValueError(
            f"unknown step-size rule {variant!r}; expected one of {STEP_SIZE_RULES}"
        )
    return state.sigma * math.exp(arg)


def step(
    state: CmaState,
    params: StrategyParams,
    objective,
    rng: np.random.Generator,
    evaluator,
    *,
    step_size_variant: str = "clamped",
) -> tuple[CmaState, Population]:
    """Advance the strategy by one full generation.

    Samples the population, blocks on the batch evaluation of all points,
    then applies the updates in order: mean, conjugate path, covariance
    path, covariance, step size, and finally refreshes the
    eigenfactorization for the next generation's sampling.
    """
    points = sample_population(state, params, rng)
    batch = evaluator(objective, points)
    population = Population.from_evaluations(points, batch.fvals)
    if not np.any(np.isfinite(population.fvals)):
        logger.warning(
            "all %d objective values non-finite in generation %d; "
            "recombining by sample index",
            params.popsize,
            state.g + 1,
        )
    selected, _ = rank_select(population, params.n_parents)
    new_mean = recombine_mean(selected, params.weights)
    p_sigma, h_sigma = update_sigma_path(state, params, new_mean)
    p_c = update_cov_path(state, params, new_mean, h_sigma)
    cumulated = replace(state, p_sigma=p_sigma, p_c=p_c)
    C = update_covariance(
        cumulated, params, (selected - state.m) / state.sigma, h_sigma
    )
    sigma = update_step_size(cumulated, params, p_sigma, variant=step_size_variant)
    factors = eigen_decompose(C)
    new_state = CmaState(
        m=new_mean,
        sigma=sigma,
        C=C,
        factors=factors,
        inv_sqrt_C=inverse_sqrt(factors),
        p_c=p_c,
        p_sigma=p_sigma,
        g=state.g + 1,
        evals=state.evals + params.popsize,
    )
    return new_state, population


def run(
    objective,
    params: StrategyParams | None,
    termination: Termination,
    *,
    x0=None,
    sigma0=None,
    seed: int = 0,
    workers: int | None = 1,
    evaluator=None,
    step_size_variant: str = "clamped",
) -> Solution:
    """Minimize ``objective`` until the termination rule fires.

    Generations run while another full population still fits in the
    evaluation budget and neither the target value nor the generation cap
    has been reached. The final mean is evaluated once more and reported
    as the solution.

    ``x0`` and ``sigma0`` default to the bounds-derived heuristics (box
    midpoint plus a standard-normal draw, and sqrt((hi - lo)/2)); explicit
    values always win. Pass either a ``workers`` count (an evaluator is
    created and closed internally) or a ready ``evaluator``, whose
    lifecycle then stays with the caller.
    """
    if params is None:
        dim = getattr(objective, "dim", None)
        if dim is None:
            raise ValueError(
                "params is required when the objective does not expose a dimension"
            )
        params = default_params(dim)
    if termination.max_evals < params.popsize:
        raise ValueError(
            f"max_evals ({termination.max_evals}) must cover at least one "
            f"population of {params.popsize}"
        )

    rng = make_rng(seed)
    bounds = getattr(objective, "bounds", None)
    if x0 is None:
        x0 = initial_guess_from_bounds(bounds, params.n, rng)
    if sigma0 is None or (isinstance(sigma0, str) and sigma0 == "auto"):
        sigma0 = auto_step_size(bounds)
    state = init_state(params, x0, sigma0)

    own_evaluator = evaluator is None
    if own_evaluator:
        evaluator = BatchEvaluator(workers)

    history: list[GenerationRecord] = []
    best_f = math.inf
    best_x = state.m.copy()
    try:
        while state.evals + params.popsize <= termination.max_evals:
            if (
                termination.max_generations is not None
                and state.g >= termination.max_generations
            ):
                break
            tic = time.perf_counter()
            state, population = step(
                state,
                params,
                objective,
                rng,
                evaluator,
                step_size_variant=step_size_variant,
            )
            wall_ms = (time.perf_counter() - tic) * 1e3
            gen_best = population.best_f()
            if gen_best < best_f:
                best_f = gen_best
                best_x = population.best_x()
            history.append(
                GenerationRecord(
                    generation=state.g,
                    evals=state.evals,
                    best_f_gen=gen_best,
                    best_f_so_far=best_f,
                    sigma=state.sigma,
                    cond_c=condition_number(state.factors),
                    wall_ms=wall_ms,
                )
            )
            if termination.target_f is not None and best_f <= termination.target_f:
                break
    finally:
        if own_evaluator:
            evaluator.close()

    try:
        final_f = float(objective(state.m.copy()))
    except Exception as exc:
        raise ObjectiveFailure(f"evaluation of the final mean failed: {exc}") from exc
    if float(ranked_fitness([final_f])[0]) < best_f:
        best_f = final_f
        best_x = state.m.copy()
    return Solution(
        x=state.m.copy(),
        f=final_f,
        best_x=best_x,
        best_f=best_f,
        n_evals=state.evals + 1,
        n_generations=state.g,
        history=tuple(history),
    )
