"""Dense complex matrix helpers and matricial half-plane predicates.

Matrices are plain two-dimensional ``numpy`` arrays of complex dtype.  The
upper half-plane ``H+`` of ``M_n(C)`` is the set of ``B`` whose imaginary
part ``(B - B*)/2i`` is positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every module.

    Tests may build a tighter instance and pass it explicitly.
    """

    hermitian: float = 1e-12
    half_plane: float = 1e-14
    max_condition: float = 1e14
    inverse_residual: float = 1e-10


TOLERANCES = Tolerances()


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a matrix is too ill-conditioned to invert."""

    def __init__(self, condition: float):
        super().__init__(f"matrix is numerically singular (condition estimate {condition:.3e})")
        self.condition = condition


class NotHermitianError(ValueError):
    pass


def as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    return A


def scale(A: np.ndarray) -> float:
    return 1.0 + float(np.max(np.abs(A)))


def inverse(A, tol: Tolerances = TOLERANCES) -> np.ndarray:
    """Inverse of a square complex matrix.

    Raises :class:`SingularMatrixError` when the 2-norm condition estimate
    exceeds ``tol.max_condition``.
    """
    A = as_square(A)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > tol.max_condition:
        raise SingularMatrixError(cond)
    return np.linalg.inv(A)


def imaginary_part(B) -> np.ndarray:
    B = as_square(B)
    return (B - B.conj().T) / 2j


def half_plane_margin(B) -> float:
    """Smallest eigenvalue of ``Im(B)``; positive iff ``B`` lies in ``H+``."""
    return float(np.linalg.eigvalsh(imaginary_part(B))[0])


def in_upper_half_plane(B, tol: Tolerances = TOLERANCES) -> bool:
    B = as_square(B)
    return half_plane_margin(B) > tol.half_plane * scale(B)


def in_lower_half_plane(B, tol: Tolerances = TOLERANCES) -> bool:
    return in_upper_half_plane(-as_square(B), tol)


def normalized_trace(A) -> complex:
    A = as_square(A)
    return complex(np.trace(A)) / A.shape[0]


def is_hermitian(A, tol: Tolerances = TOLERANCES) -> bool:
    A = as_square(A)
    return float(np.max(np.abs(A - A.conj().T))) <= tol.hermitian * scale(A)


def hermitian_eigenvalues(A, tol: Tolerances = TOLERANCES) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in non-increasing order."""
    A = as_square(A)
    if not is_hermitian(A, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh((A + A.conj().T) / 2)[::-1]


def singular_values(A) -> np.ndarray:
    """Singular values (non-increasing) as square roots of eigenvalues of A*A."""
    A = np.asarray(A, dtype=complex)
    gram = A.conj().T @ A
    ev = np.linalg.eigvalsh((gram + gram.conj().T) / 2)[::-1]
    return np.sqrt(np.clip(ev, 0.0, None))


def operator_norm(A) -> float:
    return float(singular_values(A)[0])


def diagonal_matrix(d) -> np.ndarray:
    return np.diag(np.asarray(d, dtype=complex))


def is_diagonal(A, rel: float = 1e-12) -> bool:
    A = as_square(A)
    off = A - np.diag(np.diag(A))
    return float(np.max(np.abs(off))) <= rel * scale(A)
