"""Input validation helpers shared across the package.

All user-facing validation failures raise :class:`ValidationError` so callers
(and the CLI, which maps them to exit code 2) can tell bad input apart from
internal runtime failures.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "ValidationError",
    "check_probability",
    "check_in_range",
    "check_positive",
    "check_confusion_matrix",
    "check_density_matrix",
]


class ValidationError(ValueError):
    """Raised when an input violates a documented invariant."""


def check_probability(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ValidationError(f"{name} must be a probability in [0, 1], got {value}")
    return value


def check_in_range(name: str, value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not (lo <= value <= hi) or math.isnan(value):
        raise ValidationError(f"{name} must lie in [{lo}, {hi}], got {value}")
    return value


def check_positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0.0 or math.isnan(value):
        raise ValidationError(f"{name} must be > 0, got {value}")
    return value


def check_confusion_matrix(matrix, *, context: str = "confusion matrix") -> np.ndarray:
    """Validate a 2x2 readout confusion matrix.

    Layout: rows are observed outcomes, columns are prepared states, so each
    column must sum to 1 and every entry must be a probability.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise ValidationError(f"{context} must be 2x2, got shape {m.shape}")
    if np.any(m < 0.0) or np.any(m > 1.0):
        raise ValidationError(f"{context} entries must lie in [0, 1]: {m.tolist()}")
    col_sums = m.sum(axis=0)
    if not np.allclose(col_sums, 1.0, atol=1e-9):
        raise ValidationError(
            f"{context} columns must each sum to 1 (prepared-state columns), "
            f"got sums {col_sums.tolist()}"
        )
    return m


def check_density_matrix(
    rho: np.ndarray,
    *,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-10,
    eig_floor: float = -1e-9,
    context: str = "density matrix",
) -> None:
    """Assert Hermiticity, unit trace and positivity of a density matrix.

    The eigenvalue floor tolerates accumulated floating-point error; anything
    below it aborts with a diagnostic.
    """
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"{context} must be square, got shape {rho.shape}")
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > herm_tol:
        raise ValidationError(f"{context} not Hermitian: max deviation {herm_dev:.3e}")
    trace_dev = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    if trace_dev > trace_tol:
        raise ValidationError(f"{context} trace deviates from 1 by {trace_dev:.3e}")
    min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0).min())
    if min_eig < eig_floor:
        raise ValidationError(f"{context} not PSD: min eigenvalue {min_eig:.3e}")
