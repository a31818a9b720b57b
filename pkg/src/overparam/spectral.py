"""Dense symmetric linear algebra in float64.

Inputs are symmetrized as ``(A + A.T) / 2`` rather than rejected, since
Monte-Carlo averages pick up round-off asymmetry.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import InputError, SingularMatrixError

SPD_TOL = 1e-12


class EigenSystem(NamedTuple):
    values: np.ndarray  # ascending
    vectors: np.ndarray  # columns are orthonormal eigenvectors


def sym_matrix(a) -> np.ndarray:
    """Validate ``a`` as a finite square matrix and return its symmetric part."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InputError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return 0.5 * (a + a.T)


def sym_eig(a) -> EigenSystem:
    a = sym_matrix(a)
    values, vectors = np.linalg.eigh(a)
    return EigenSystem(values, vectors)


def eigenvalues(a) -> np.ndarray:
    return np.linalg.eigvalsh(sym_matrix(a))


def spectral_norm(a) -> float:
    """Largest absolute eigenvalue."""
    vals = eigenvalues(a)
    return float(max(abs(vals[0]), abs(vals[-1])))


def min_eigenvalue(a) -> float:
    return float(eigenvalues(a)[0])


def max_eigenvalue(a) -> float:
    return float(eigenvalues(a)[-1])


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64), "fro"))


def solve_spd(a, b) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a``.

    Raises :class:`SingularMatrixError` when the smallest eigenvalue is at or
    below ``1e-12``.
    """
    a = sym_matrix(a)
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != a.shape[0]:
        raise InputError(f"rhs length {b.shape[0]} does not match order {a.shape[0]}")
    lam = min_eigenvalue(a)
    if lam <= SPD_TOL:
        raise SingularMatrixError(lam)
    c, low = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    x = scipy.linalg.cho_solve((c, low), b, check_finite=False)
    # one step of iterative refinement keeps the residual well under 1e-8 |b|
    r = b - a @ x
    x = x + scipy.linalg.cho_solve((c, low), r, check_finite=False)
    return x
