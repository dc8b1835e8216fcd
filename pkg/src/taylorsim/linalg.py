"""Dense complex matrix helpers and the ground-truth matrix exponential.

Everything here works on plain ``numpy.ndarray`` objects of dtype complex128.
The exponential in :func:`exact_evolution` is a self-contained
scaling-and-squaring Taylor evaluation so that it shares no code with the
series and LCU machinery it is used to check.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import InvalidInputError

#: Tolerance used for unitarity / Hermiticity checks on inputs.
STRUCTURE_TOL = 1e-12
#: Accumulated float64 noise tolerated when comparing against analytic bounds.
NOISE_FLOOR = 1e-13


def as_matrix(M, name="matrix") -> np.ndarray:
    """Return ``M`` as a finite, square complex128 array or raise."""
    try:
        arr = np.asarray(M, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidInputError(f"{name} must be square with dim >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(M).T


def spectral_norm(M) -> float:
    """Largest singular value of ``M``."""
    arr = as_matrix(M)
    return float(np.linalg.norm(arr, 2))


def operator_distance(X, Y) -> float:
    """Spectral-norm distance ``||X - Y||``."""
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    if X.shape != Y.shape:
        raise InvalidInputError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return float(np.linalg.norm(X - Y, 2))


def hermiticity_residual(M: np.ndarray) -> float:
    return float(np.linalg.norm(M - dagger(M), 2))


def unitarity_residual(M: np.ndarray) -> float:
    return float(np.linalg.norm(dagger(M) @ M - np.eye(M.shape[0]), 2))


def is_hermitian(M, tol=STRUCTURE_TOL) -> bool:
    M = as_matrix(M)
    return hermiticity_residual(M) <= tol * max(1.0, float(np.abs(M).max()))


def require_hermitian(H, name="H") -> np.ndarray:
    H = as_matrix(H, name)
    if not is_hermitian(H):
        raise InvalidInputError(
            f"{name} is not Hermitian (residual {hermiticity_residual(H):.3e})"
        )
    return H


def exact_evolution(H, t: float) -> np.ndarray:
    """Return ``exp(-i H t)`` for Hermitian ``H``.

    The argument is halved until its 1-norm is at most 1/2, a Taylor series
    is summed until the next term falls below machine epsilon relative to the
    partial sum, and the result is squared back up.
    """
    H = require_hermitian(H)
    dim = H.shape[0]
    X = -1j * float(t) * H
    norm1 = float(np.abs(X).sum(axis=0).max())
    squarings = max(0, math.ceil(math.log2(norm1 / 0.5))) if norm1 > 0.5 else 0
    X = X / (2.0**squarings)

    result = np.eye(dim, dtype=np.complex128)
    term = np.eye(dim, dtype=np.complex128)
    # ||X|| <= 1/2, so 30 terms leave a remainder far below 1e-16
    for k in range(1, 30):
        term = term @ X / k
        result = result + term
        if np.abs(term).max() < 1e-18:
            break
    for _ in range(squarings):
        result = result @ result
    return result


def materialize_series(coeffs, H) -> np.ndarray:
    """Evaluate ``sum_k c_k (-iH)^k`` by Horner's scheme.

    ``coeffs`` may be a :class:`~taylorsim.series.PowerSeries` or any
    sequence of complex coefficients.
    """
    H = require_hermitian(H)
    c = np.asarray(getattr(coeffs, "coeffs", coeffs), dtype=np.complex128)
    if not np.all(np.isfinite(c)):
        raise InvalidInputError("series has non-finite coefficients")
    dim = H.shape[0]
    eye = np.eye(dim, dtype=np.complex128)
    if c.size == 0:
        return np.zeros((dim, dim), dtype=np.complex128)
    X = -1j * H
    result = c[-1] * eye
    for ck in c[-2::-1]:
        result = result @ X + ck * eye
    return result
