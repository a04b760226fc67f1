"""Subordination fixed points for operator-valued free sums and products.

Both solvers run a damped Picard iteration.  In the dense mode the unknown
is one ``(d, d)`` matrix.  In the diagonal mode it is a batch of diagonals
of shape ``(K, d)``; each row is iterated until it individually converges,
so converged rows stop costing map evaluations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .matrix import as_square, half_plane_margin, inverse
from .opvalued import HalfPlaneError, MatrixCauchyMap, _row_side

log = logging.getLogger(__name__)

MIN_DAMPING = 2.0**-12
RESTORE_AFTER = 8
RISE = 0.1
UPPER_SLACK = 1e-12
ABS_CAP = 10.0


@dataclass(frozen=True)
class FixedPointConfig:
    tolerance: float = 1e-12
    max_iterations: int = 10000
    damping: float = 1.0
    adaptive: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be a positive integer")


@dataclass
class FixedPointResult:
    """Outcome of a Picard solve.

    ``omega`` has shape ``(d, d)`` (dense) or ``(K, d)`` (diagonal batch).
    ``residual`` is ``max|f(omega) - omega|`` per row; ``damping_history``
    lists ``(iteration, row, damping)`` events.  ``value`` is the transform
    of the sum or product at the requested point(s).
    """

    omega: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray
    converged: np.ndarray
    damping_history: list = field(default_factory=list)
    value: np.ndarray | None = None

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, result: FixedPointResult | None = None):
        super().__init__(message)
        self.result = result


def picard(f: Callable, W0, cfg: FixedPointConfig, batch: bool) -> FixedPointResult:
    """Damped Picard iteration W <- W + damping * (f(W) - W).

    Dense mode calls ``f(W)``.  Batch mode calls ``f(W_active, idx)`` with
    the indices of the rows still iterating.  A row stops when
    ``max|f(W) - W| <= tol * max(1, max|W|)`` and that W is returned.
    Damping halves after two consecutive residual increases and doubles back
    towards ``cfg.damping`` after a run of decreases.
    """
    W = np.array(W0, dtype=complex, copy=True)
    if not batch:
        W = W[None]
        call = lambda Wa, idx: f(Wa[0])[None]  # noqa: E731
    else:
        call = f
    K = W.shape[0]
    axes = tuple(range(1, W.ndim))
    bshape = (-1,) + (1,) * (W.ndim - 1)
    damp = np.full(K, float(cfg.damping))
    prev = np.full(K, np.inf)
    ups = np.zeros(K, dtype=int)
    downs = np.zeros(K, dtype=int)
    iters = np.zeros(K, dtype=int)
    resid = np.full(K, np.inf)
    done = np.zeros(K, dtype=bool)
    history = []
    for it in range(1, int(cfg.max_iterations) + 1):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        Wa = W[act]
        step = call(Wa, act) - Wa
        r = np.max(np.abs(step), axis=axes)
        if not np.all(np.isfinite(r)):
            raise ConvergenceError(f"non-finite iterate in rows {act[~np.isfinite(r)].tolist()} at iteration {it}")
        resid[act] = r
        iters[act] = it
        scale = np.minimum(np.maximum(1.0, np.max(np.abs(Wa), axis=axes)), ABS_CAP)
        fin = r <= cfg.tolerance * scale
        done[act[fin]] = True
        go = ~fin
        a = act[go]
        if a.size == 0:
            break
        inc = r[go] > (1.0 + RISE) * prev[a]
        ups[a] = np.where(inc, ups[a] + 1, 0)
        downs[a] = np.where(inc, 0, downs[a] + 1)
        halve = a[ups[a] >= 2] if cfg.adaptive else a[:0]
        if halve.size:
            damp[halve] = np.maximum(damp[halve] / 2, MIN_DAMPING)
            ups[halve] = 0
            history += [(it, int(i), float(damp[i])) for i in halve]
        grow = a[(downs[a] >= RESTORE_AFTER) & (damp[a] < cfg.damping)] if cfg.adaptive else a[:0]
        if grow.size:
            damp[grow] = np.minimum(damp[grow] * 2, cfg.damping)
            downs[grow] = 0
            history += [(it, int(i), float(damp[i])) for i in grow]
        prev[a] = r[go]
        W[a] = Wa[go] + damp[a].reshape(bshape) * step[go]
        _check_upper(W[a], a, it)
    if batch:
        return FixedPointResult(W, iters, resid, done, history)
    return FixedPointResult(W[0], iters[0], resid[0], done[0], history)


def _check_upper(W, rows, it):
    if W.ndim == 2:  # batch of diagonals
        bad = np.any(W.imag < -UPPER_SLACK * (1 + np.abs(W)), axis=1)
        if np.any(bad):
            raise HalfPlaneError(f"iterate left H+ in rows {rows[bad].tolist()} at iteration {it}")
    else:
        for M in W:
            if half_plane_margin(M) < -UPPER_SLACK * (1 + np.max(np.abs(M))):
                raise HalfPlaneError(f"iterate left H+ at iteration {it}")


def _finish(res: FixedPointResult, kind: str, strict: bool) -> FixedPointResult:
    it = np.atleast_1d(res.iterations)
    rs = np.atleast_1d(res.residual)
    log.debug("solve=%s points=%d iterations_max=%d residual_max=%.3e converged=%d damping_events=%d "
              "damping_min=%.4g", kind, it.size, int(it.max()), float(rs.max()), int(np.sum(res.converged)),
              len(res.damping_history), min([h[2] for h in res.damping_history], default=1.0))
    if strict and not res.all_converged:
        bad = np.flatnonzero(~np.atleast_1d(res.converged))
        raise ConvergenceError(f"{kind} subordination did not converge at {bad.size} point(s); "
                               f"max residual {float(rs[bad].max()):.3e}", res)
    return res


# additive --------------------------------------------------------------------


def additive_subordinator(G_X: MatrixCauchyMap, G_Y: MatrixCauchyMap, B, cfg: FixedPointConfig = FixedPointConfig(),
                          diagonal: bool = False, omega0=None, strict: bool = True) -> FixedPointResult:
    """Subordinator omega_1 of X + Y at B, with value G_{X+Y}(B) = G_X(omega_1).

    Iterates f_B(W) = r_Y(r_X(W) + B) + B starting from W = B (or
    ``omega0``).  With ``diagonal=True`` the argument ``B`` is a ``(K, d)``
    batch of diagonals and both maps must preserve diagonals.
    """
    if G_X.dim != G_Y.dim:
        raise ValueError("transforms act on different dimensions")
    if diagonal:
        B = np.atleast_2d(np.asarray(B, dtype=complex))
        if B.shape[-1] != G_X.dim:
            raise ValueError(f"expected diagonals of length {G_X.dim}")
        if np.any(_row_side(B) != 1):
            raise HalfPlaneError("additive_subordinator needs B in H+")

        def f(W, idx):
            Bs = B[idx]
            A = 1.0 / G_X.extended_diag(W) - W + Bs
            return 1.0 / G_Y.extended_diag(A) - A + Bs

        res = picard(f, B if omega0 is None else omega0, cfg, batch=True)
        res.value = G_X.extended_diag(res.omega)
        return _finish(res, "additive", strict)

    B = as_square(B)
    if half_plane_margin(B) <= 0:
        raise HalfPlaneError("additive_subordinator needs B in H+")

    def fd(W):
        A = inverse(G_X.extended(W)) - W + B
        return inverse(G_Y.extended(A)) - A + B

    res = picard(fd, B if omega0 is None else as_square(omega0), cfg, batch=False)
    res.value = G_X.extended(res.omega)
    return _finish(res, "additive", strict)


def additive_residual(G_X, G_Y, B, W, diagonal: bool = False) -> float:
    """max|f_B(W) - W| for the additive map, evaluated independently."""
    if diagonal:
        A = 1.0 / G_X.extended_diag(W) - W + B
        return float(np.max(np.abs(1.0 / G_Y.extended_diag(A) - A + B - W)))
    A = inverse(G_X.extended(W)) - W + B
    return float(np.max(np.abs(inverse(G_Y.extended(A)) - A + B - W)))


# multiplicative ------------------------------------------------------------


def multiplicative_subordinator(G_X: MatrixCauchyMap, G_Y: MatrixCauchyMap, zeta, cfg: FixedPointConfig = FixedPointConfig(),
                                diagonal: bool = False, omega0=None, strict: bool = True) -> FixedPointResult:
    """G_{XY}(zeta I) for positive X free from Y.

    The subordination map g_b(W) = b h_X(h_Y(W) b) is iterated at
    b = 1/conj(zeta), a point of H+, starting from W = b.  With the fixed
    point omega, h_XY(b) = b^-1 omega h_Y(omega), reflection gives
    h_XY(1/zeta) = h_XY(b)*, and G_XY(zeta) = (zeta - h_XY(1/zeta))^-1.

    ``zeta`` is a scalar (dense mode) or a length-K array (diagonal mode,
    returning ``(K, d)`` diagonals in ``value``).
    """
    if G_X.dim != G_Y.dim:
        raise ValueError("transforms act on different dimensions")
    d = G_X.dim
    if diagonal:
        z = np.atleast_1d(np.asarray(zeta, dtype=complex))
        if np.any(z.imag <= 0):
            raise HalfPlaneError("multiplicative_subordinator needs zeta in H+")
        b = np.repeat((1.0 / z.conj())[:, None], d, axis=1)

        def hY(W):
            Wi = 1.0 / W
            return Wi - 1.0 / G_Y.extended_diag(Wi)

        def f(W, idx):
            bb = b[idx]
            arg = hY(W) * bb
            ai = 1.0 / arg
            return bb * (ai - 1.0 / G_X.extended_diag(ai))

        res = picard(f, b if omega0 is None else omega0, cfg, batch=True)
        h_b = res.omega * hY(res.omega) / b
        res.value = 1.0 / (z[:, None] - h_b.conj())
        return _finish(res, "multiplicative", strict)

    z = complex(zeta)
    if z.imag <= 0:
        raise HalfPlaneError("multiplicative_subordinator needs zeta in H+")
    b = 1.0 / z.conjugate()
    eye = np.eye(d, dtype=complex)

    def hYd(W):
        Wi = inverse(W)
        return Wi - inverse(G_Y.extended(Wi))

    def fd(W):
        ai = inverse(hYd(W) * b)
        return b * (ai - inverse(G_X.extended(ai)))

    res = picard(fd, b * eye if omega0 is None else as_square(omega0), cfg, batch=False)
    h_b = res.omega @ hYd(res.omega) / b
    res.value = inverse(z * eye - h_b.conj().T)
    return _finish(res, "multiplicative", strict)


def multiplicative_residual(G_X, G_Y, zeta, W, diagonal: bool = False) -> float:
    if diagonal:
        z = np.atleast_1d(np.asarray(zeta, dtype=complex))
        b = (1.0 / z.conj())[:, None]
        Wi = 1.0 / W
        ai = 1.0 / ((Wi - 1.0 / G_Y.extended_diag(Wi)) * b)
        return float(np.max(np.abs(b * (ai - 1.0 / G_X.extended_diag(ai)) - W)))
    b = 1.0 / complex(zeta).conjugate()
    Wi = inverse(W)
    ai = inverse((Wi - inverse(G_Y.extended(Wi))) * b)
    return float(np.max(np.abs(b * (ai - inverse(G_X.extended(ai))) - W)))
