"""Dense symmetric-matrix kernels and seeded Gaussian sampling.

This module collects the numerical primitives the optimizer is built on:
eigendecomposition of a symmetric covariance matrix, its inverse square
root (the whitening transform), an inverse Cholesky factor as an
alternative whitening route, two classical covariance estimators, and a
seedable source of standard-normal draws.

Everything here is a pure function of its inputs; the only mutable object
is the random stream, which is owned by exactly one caller at a time.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DegenerateCovariance, InsufficientPoints, NotPositiveDefinite
from .validation import as_points, as_sym_matrix, as_vector, symmetrize

__all__ = [
    "EigenFactors",
    "make_rng",
    "sample_standard_normal",
    "eigen_decompose",
    "inverse_sqrt",
    "inverse_factor_cholesky",
    "empirical_covariance",
    "step_covariance",
    "condition_number",
]

# Eigenvalues in [-EIG_CLAMP_REL * max_eig, 0) are treated as round-off and
# clamped to zero; anything more negative means the matrix is genuinely broken.
EIG_CLAMP_REL = 1e-8


class EigenFactors(NamedTuple):
    """Spectral factorization of a symmetric PSD matrix, C = B diag(D**2) B.T.

    ``B`` holds orthonormal eigenvectors as columns; ``D`` holds the
    nonnegative square roots of the eigenvalues, sorted ascending.
    """

    B: np.ndarray
    D: np.ndarray


def make_rng(seed: int) -> np.random.Generator:
    """Create the package's random stream: PCG64 seeded with ``seed``.

    Normal draws come from numpy's ziggurat implementation of
    ``standard_normal``; for a fixed seed the draw sequence is identical
    across runs and platforms, which the optimizer relies on for
    reproducible trajectories.
    """
    return np.random.default_rng(seed)


def sample_standard_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` independent standard-normal values from ``rng``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return rng.standard_normal(n)


def eigen_decompose(C) -> EigenFactors:
    """Factor a symmetric matrix as B diag(D**2) B.T.

    Slightly negative eigenvalues (within ``EIG_CLAMP_REL`` of the largest
    one, relatively) are clamped to zero before taking square roots, since
    symmetric matrices drift marginally indefinite under floating-point
    updates.

    Raises
    ------
    DegenerateCovariance
        If the decomposition fails or an eigenvalue is more negative than
        round-off can explain.
    """
    M = as_sym_matrix(C)
    try:
        evals, B = scipy.linalg.eigh(M)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise DegenerateCovariance(f"eigendecomposition failed: {exc}") from exc
    if not np.all(np.isfinite(evals)):
        raise DegenerateCovariance("eigendecomposition produced non-finite eigenvalues")
    floor = -EIG_CLAMP_REL * max(evals[-1], 0.0)
    if evals[0] < floor:
        raise DegenerateCovariance(
            f"covariance matrix lost positive semidefiniteness: "
            f"min eigenvalue {evals[0]:.3e} below tolerance {floor:.3e}"
        )
    # Canonicalize each eigenvector's sign (largest-magnitude entry made
    # positive). LAPACK's per-column sign choice is arbitrary and can flip
    # under infinitesimal input perturbations; since sampling consumes B
    # directly, an unpinned sign would make nearly identical covariances
    # produce wildly different draws from the same random stream.
    pivot = np.argmax(np.abs(B), axis=0)
    signs = np.sign(B[pivot, np.arange(B.shape[1])])
    signs[signs == 0] = 1.0
    return EigenFactors(B=B * signs, D=np.sqrt(np.clip(evals, 0.0, None)))


def inverse_sqrt(factors: EigenFactors) -> np.ndarray:
    """Inverse square root B diag(1/(D + eps)) B.T from an eigenfactorization.

    ``eps`` is double-precision machine epsilon, added to every entry of D
    as a guard against exact zeros; for well-conditioned matrices the
    perturbation is below the last significant digit.
    """
    d = 1.0 / (factors.D + np.finfo(float).eps)
    return symmetrize((factors.B * d) @ factors.B.T)


def inverse_factor_cholesky(C) -> np.ndarray:
    """Inverse of the lower Cholesky factor of an SPD matrix.

    With C = L L.T, the returned L^-1 whitens in the same sense as the
    eigen-based inverse square root: ||L^-1 y|| equals ||C^(-1/2) y|| for
    every vector y (both are sqrt(y.T C^-1 y)), though the two matrices
    themselves differ by an orthogonal factor.

    Raises
    ------
    NotPositiveDefinite
        If a Cholesky pivot is not strictly positive.
    """
    M = as_sym_matrix(C)
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}") from exc
    return scipy.linalg.solve_triangular(L, np.eye(M.shape[0]), lower=True)


def empirical_covariance(points) -> np.ndarray:
    """Unbiased sample covariance around the sample mean, 1/(k-1) normalized."""
    X = as_points(points)
    k = X.shape[0]
    if k < 2:
        raise InsufficientPoints(f"need at least 2 points, got {k}")
    dev = X - X.mean(axis=0)
    return symmetrize(dev.T @ dev / (k - 1))


def step_covariance(points, m) -> np.ndarray:
    """Covariance of steps around a fixed reference mean ``m``, 1/k normalized.

    Unlike `empirical_covariance` this measures the spread of the sampled
    steps x_i - m around the distribution mean that generated them, not the
    spread within the realized sample.
    """
    X = as_points(points)
    k = X.shape[0]
    if k < 1:
        raise InsufficientPoints("need at least 1 point")
    mu = as_vector(m, n=X.shape[1], name="m")
    dev = X - mu
    return symmetrize(dev.T @ dev / k)


def condition_number(factors: EigenFactors) -> float:
    """Condition number of the factored matrix, max(D**2) / min(D**2)."""
    d2 = factors.D**2
    lo = d2.min()
    if lo == 0.0:
        return np.inf
    return float(d2.max() / lo)
