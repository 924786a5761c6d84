"""Input validation helpers used across the package.

All helpers return validated numpy arrays (copies where normalization is
applied) and raise ``ValueError`` with a parameter name in the message, so
call sites can stay terse.
"""

from __future__ import annotations

import numpy as np


def as_vector(x, n: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float array, optionally of length ``n``."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


def as_points(points, name: str = "points") -> np.ndarray:
    """Coerce a sequence of equal-length vectors to a finite (k, n) array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :] if pts.size else pts.reshape(0, 0)
    if pts.ndim != 2:
        raise ValueError(f"{name} must be a sequence of vectors, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} must be finite")
    return pts


def as_sym_matrix(C, name: str = "C") -> np.ndarray:
    """Coerce ``C`` to a finite square float matrix and enforce symmetry.

    Symmetry is enforced by averaging with the transpose, which prevents the
    slow drift that square matrices accumulate under repeated floating-point
    updates of a symmetric recurrence.
    """
    M = np.asarray(C, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} must be finite")
    return symmetrize(M)


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Return (M + M.T) / 2."""
    return (M + M.T) / 2.0


def check_positive(value, name: str = "value") -> float:
    """Require a strictly positive finite scalar; return it as float."""
    v = float(value)
    if not np.isfinite(v) or v <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return v


def check_count(value, name: str = "value", minimum: int = 1) -> int:
    """Require an integer >= ``minimum``; return it as int."""
    v = int(value)
    if v != value or v < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return v
