"""Closed-form operator-valued Cauchy transforms over M_d(C).

Two evaluation modes are supported by :class:`MatrixCauchyMap`:

* dense: a ``(d, d)`` complex matrix in, a ``(d, d)`` matrix out;
* diagonal: an array of shape ``(..., d)`` holding the diagonals of a batch
  of diagonal arguments, mapped to the diagonals of the results.

The diagonal mode is what the channel pipeline uses.  Indices are 0-based
throughout; a permutation ``perm`` denotes the matrix with ``P[i, perm[i]] = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .matrix import (TOLERANCES, as_square, diagonal_matrix, half_plane_margin, inverse,
                     is_diagonal, scale)
from .scalar import ScalarMeasure, mp_transform, measure_transform


class HalfPlaneError(ValueError):
    """Argument lies in neither matricial half-plane, or an iterate left H+."""


def _row_side(d: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Per-row half-plane label for batched diagonals: +1, -1, or 0 (mixed)."""
    im = d.imag
    up = np.all(im > tol, axis=-1)
    lo = np.all(im < -tol, axis=-1)
    return np.where(up, 1, np.where(lo, -1, 0))


@dataclass(frozen=True)
class MatrixCauchyMap:
    """Runtime representation of an operator-valued Cauchy transform.

    ``analytic`` marks closed forms whose formula is already the analytic
    continuation to both half-planes, so no reflection is needed off H+.
    """

    dim: int
    evaluate: Callable | None = None
    evaluate_diagonal: Callable | None = None
    diagonal_preserving: bool = False
    analytic: bool = False
    name: str = ""

    def __call__(self, B):
        B = as_square(B)
        if B.shape[0] != self.dim:
            raise ValueError(f"{self.name or 'map'} acts on dimension {self.dim}, got {B.shape[0]}")
        diag = is_diagonal(B)
        if self.evaluate_diagonal is not None and diag:
            return diagonal_matrix(self.evaluate_diagonal(np.diag(B)))
        if self.evaluate is None:
            raise NotImplementedError(f"{self.name or 'map'} only has a diagonal closed form")
        return self.evaluate(B)

    def diag(self, d):
        d = np.asarray(d, dtype=complex)
        if self.evaluate_diagonal is not None:
            return self.evaluate_diagonal(d)
        if d.ndim == 1:
            return np.diag(self.evaluate(diagonal_matrix(d)))
        flat = d.reshape(-1, self.dim)
        out = np.stack([np.diag(self.evaluate(diagonal_matrix(row))) for row in flat])
        return out.reshape(d.shape)

    # evaluation anywhere off the real axis -----------------------------

    def extended(self, B):
        """Dense evaluation in H+ directly and in H- by reflection."""
        B = as_square(B)
        if self.analytic:
            return self(B)
        m_up = half_plane_margin(B)
        if m_up > 0:
            return self(B)
        if half_plane_margin(-B) > 0:
            return self(B.conj().T).conj().T
        raise HalfPlaneError(f"{self.name or 'map'}: argument in neither half-plane (margin {m_up:.3e})")

    def extended_diag(self, d):
        """Batched diagonal evaluation with per-row reflection."""
        d = np.asarray(d, dtype=complex)
        if self.analytic:
            return self.diag(d)
        side = _row_side(d)
        if np.any(side == 0):
            raise HalfPlaneError(f"{self.name or 'map'}: diagonal argument with mixed imaginary signs")
        flip = (side < 0)[..., None]
        out = self.diag(np.where(flip, d.conj(), d))
        return np.where(flip, out.conj(), out)

    # simple constructors --------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "MatrixCauchyMap":
        """Transform of the zero variable, G(B) = B^-1."""
        return cls(dim, evaluate=lambda B: inverse(B), evaluate_diagonal=lambda d: 1.0 / d,
                   diagonal_preserving=True, analytic=True, name="zero")

    @classmethod
    def deterministic(cls, C) -> "MatrixCauchyMap":
        """Transform of a constant matrix C, G(B) = (B - C)^-1."""
        C = as_square(C)
        dim = C.shape[0]
        diag_c = np.diag(C).copy() if is_diagonal(C) else None
        ev_diag = (lambda d: 1.0 / (d - diag_c)) if diag_c is not None else None
        return cls(dim, evaluate=lambda B: inverse(B - C), evaluate_diagonal=ev_diag,
                   diagonal_preserving=diag_c is not None, analytic=True, name="deterministic")

    @classmethod
    def scalar(cls, G: Callable, name: str = "scalar") -> "MatrixCauchyMap":
        """Dimension-1 map from a scalar evaluator valid on H+."""
        return cls(1, evaluate=lambda B: np.array([[G(B[0, 0])]], dtype=complex),
                   evaluate_diagonal=lambda d: np.asarray(G(d[..., 0]), dtype=complex)[..., None],
                   diagonal_preserving=True, analytic=False, name=name)


# closed forms ---------------------------------------------------------------


def cauchy_r_times_unit(mu_r: ScalarMeasure, k: int, n: int, B, tol=TOLERANCES) -> np.ndarray:
    """Transform of ``r E_kk`` in M_{2n} where ``r`` has law ``mu_r``.

    With beta = [B^-1]_kk, the value is
    B^-1 + beta^-2 (G(1/beta) - beta) B^-1 E_kk B^-1, with G the Cauchy
    transform of ``mu_r`` continued analytically off H+.
    """
    B = as_square(B)
    if B.shape[0] != 2 * n:
        raise ValueError(f"B must have dimension 2n = {2 * n}")
    if not 0 <= k < 2 * n:
        raise IndexError(f"k = {k} out of range for dimension {2 * n}")
    Bi = inverse(B, tol)
    beta = Bi[k, k]
    if abs(beta) <= 1e-14 * scale(Bi):
        raise ZeroDivisionError("[B^-1]_kk vanishes; degenerate evaluation point")
    g = measure_transform(mu_r, 1.0 / beta)
    coef = (g - beta) / beta**2
    return Bi + coef * np.outer(Bi[:, k], Bi[k, :])


def unit_measure_map(mu: ScalarMeasure, k: int, dim: int) -> MatrixCauchyMap:
    """MatrixCauchyMap of ``r E_kk`` (dense form via the rank-one correction)."""
    if dim % 2:
        raise ValueError("dimension must be even (2n)")

    def ev_diag(d):
        out = 1.0 / d
        out[..., k] = measure_transform(mu, d[..., k])
        return out

    return MatrixCauchyMap(dim, evaluate=lambda B: cauchy_r_times_unit(mu, k, dim // 2, B),
                           evaluate_diagonal=ev_diag, diagonal_preserving=True, analytic=True,
                           name=f"unit[{k}]")


def q_diagonal_values(measures: Sequence[ScalarMeasure], d) -> np.ndarray:
    """Batched diagonal of G_Q: entry m is G_{measures[m]}(d[..., m])."""
    d = np.asarray(d, dtype=complex)
    if d.shape[-1] != len(measures):
        raise ValueError(f"expected {len(measures)} diagonal entries, got {d.shape[-1]}")
    out = np.empty_like(d)
    for m, mu in enumerate(measures):
        out[..., m] = measure_transform(mu, d[..., m])
    return out


def cauchy_Q_diagonal(r_measures: Sequence[ScalarMeasure], t_measures: Sequence[ScalarMeasure], D) -> np.ndarray:
    """G_Q at a diagonal argument, for Q = diag(r_1^2..r_n^2, t_1^2..t_n^2).

    The measures are the laws of the squared correlations.  ``D`` is a
    diagonal matrix of dimension 2n with positive imaginary part.
    """
    D = as_square(D)
    if not is_diagonal(D):
        raise ValueError("cauchy_Q_diagonal needs a diagonal argument")
    d = np.diag(D)
    if np.any(d.imag <= 0):
        raise HalfPlaneError("diagonal argument must lie in H+")
    return diagonal_matrix(q_diagonal_values(list(r_measures) + list(t_measures), d))


def q_map(r_measures: Sequence[ScalarMeasure], t_measures: Sequence[ScalarMeasure]) -> MatrixCauchyMap:
    measures = list(r_measures) + list(t_measures)
    if len(r_measures) != len(t_measures):
        raise ValueError("need the same number of r and t measures")
    return MatrixCauchyMap(len(measures), evaluate=None,
                           evaluate_diagonal=lambda d: q_diagonal_values(measures, d),
                           diagonal_preserving=True, analytic=True, name="Q")


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    perm = check_permutation(perm)
    P = np.zeros((perm.size, perm.size))
    P[np.arange(perm.size), perm] = 1.0
    return P


def check_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm)
    if perm.ndim != 1 or not np.issubdtype(perm.dtype, np.integer) and not np.all(perm == np.round(perm)):
        raise ValueError("permutation must be a 1-d integer sequence")
    perm = perm.astype(int)
    if sorted(perm.tolist()) != list(range(perm.size)):
        raise ValueError(f"{perm.tolist()} is not a permutation of 0..{perm.size - 1}")
    return perm


def xhat_kl_values(weights: np.ndarray, perm: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Batched diagonal of the circular block transform.

    ``weights[i] = variance * |D_i|^2`` couples upper coordinate i with lower
    coordinate n + perm[i].  Zero weights give the free resolvent 1/J.
    """
    J = np.asarray(J, dtype=complex)
    n = weights.size
    if J.shape[-1] != 2 * n:
        raise ValueError(f"J must have 2n = {2 * n} diagonal entries")
    J1, J2 = J[..., :n], J[..., n:]
    J2p = J2[..., perm]
    out = np.empty_like(J)
    live = weights > 0
    safe = np.where(live, weights, 1.0)
    g = mp_transform(J1 * J2p / safe)
    upper = np.where(live, J2p / safe * g, 1.0 / J1)
    lower_at_perm = np.where(live, J1 / safe * g, 1.0 / J2p)
    out[..., :n] = upper
    out[..., n + perm] = lower_at_perm
    return out


def cauchy_Xhat_kl(D_kl, perm: Sequence[int], J, variance: float = 1.0) -> np.ndarray:
    """Transform of the hermitized circular block with M = D P at diagonal J.

    ``D_kl`` may be a vector or a diagonal matrix of dimension n; ``J`` a
    diagonal matrix (returns a matrix) or a vector / batch of diagonals
    (returns the same shape).
    """
    Dv = np.diag(as_square(D_kl)) if np.ndim(D_kl) == 2 else np.asarray(D_kl, dtype=complex)
    perm = check_permutation(perm)
    if Dv.size != perm.size:
        raise ValueError("D_kl and the permutation must have the same size")
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    weights = variance * np.abs(Dv) ** 2
    if np.ndim(J) == 2 and np.shape(J)[0] == np.shape(J)[1] == 2 * perm.size:
        Jm = as_square(J)
        if not is_diagonal(Jm):
            raise ValueError("J must be diagonal")
        return diagonal_matrix(xhat_kl_values(weights, perm, np.diag(Jm)))
    return xhat_kl_values(weights, perm, J)


def xhat_kl_map(D_kl, perm: Sequence[int], variance: float = 1.0) -> MatrixCauchyMap:
    Dv = np.asarray(D_kl, dtype=complex)
    perm = check_permutation(perm)
    weights = variance * np.abs(Dv) ** 2
    return MatrixCauchyMap(2 * perm.size, evaluate=None,
                           evaluate_diagonal=lambda J: xhat_kl_values(weights, perm, J),
                           diagonal_preserving=True, analytic=True, name="Xhat_kl")


def hermitization(M) -> np.ndarray:
    """The self-adjoint embedding [[0, M], [M*, 0]]."""
    M = np.asarray(M, dtype=complex)
    a, b = M.shape
    out = np.zeros((a + b, a + b), dtype=complex)
    out[:a, a:] = M
    out[a:, :a] = M.conj().T
    return out


# r, h transforms and reflection --------------------------------------------


def _as_map(G) -> MatrixCauchyMap:
    if isinstance(G, MatrixCauchyMap):
        return G
    raise TypeError("expected a MatrixCauchyMap")


def r_transform(G: MatrixCauchyMap, B) -> np.ndarray:
    """r(B) = G(B)^-1 - B."""
    G = _as_map(G)
    B = as_square(B)
    return inverse(G.extended(B)) - B


def h_transform(G: MatrixCauchyMap, B) -> np.ndarray:
    """h(B) = B^-1 - G(B^-1)^-1."""
    G = _as_map(G)
    Bi = inverse(B)
    return Bi - inverse(G.extended(Bi))


def r_transform_diag(G: MatrixCauchyMap, d):
    return 1.0 / G.extended_diag(d) - d


def h_transform_diag(G: MatrixCauchyMap, d):
    di = 1.0 / np.asarray(d, dtype=complex)
    return di - 1.0 / G.extended_diag(di)


def extend_reflect(G: MatrixCauchyMap, B) -> np.ndarray:
    """Value at a lower half-plane argument through G(B) = G(B*)*."""
    G = _as_map(G)
    B = as_square(B)
    if half_plane_margin(-B) <= 0:
        if half_plane_margin(B) > 0:
            raise HalfPlaneError("extend_reflect expects an argument in H-, got one in H+")
        raise HalfPlaneError("argument lies in neither half-plane")
    return G(B.conj().T).conj().T
