"""From a channel model to the spectrum of HH* and its mutual information.

The hermitization of H = R X T has the spectrum of Q X^, where Q collects
the squared correlations and X^ the hermitized circular part.  G_Q and the
per-block transforms of X^ are closed forms; the blocks are summed with the
additive subordinator and the product is taken with the multiplicative one.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .opvalued import MatrixCauchyMap, check_permutation, q_diagonal_values, xhat_kl_map
from .scalar import DensityEstimate, ScalarMeasure, default_eta, stieltjes_invert
from .subordination import (ConvergenceError, FixedPointConfig, additive_subordinator,
                            multiplicative_subordinator)

log = logging.getLogger(__name__)

EDGE_DENSITY = 1e-8
MAX_DOUBLINGS = 12
PROBE_ETA = 1e-10
ATOM_FLOOR = 1e-2
ATOM_PROBES = (1e-4, 1e-6)


@dataclass(frozen=True)
class Block:
    """One circular summand: covariance pattern M = diag(D) P with P[i, perm[i]] = 1."""

    variance: float
    diagonal: np.ndarray
    permutation: np.ndarray

    def __post_init__(self):
        v = float(self.variance)
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"block variance must be a finite nonnegative number, got {self.variance}")
        D = np.asarray(self.diagonal, dtype=float)
        if D.ndim != 1 or np.any(D < 0) or not np.all(np.isfinite(D)):
            raise ValueError("block diagonal must be a 1-d array of nonnegative reals")
        perm = check_permutation(self.permutation)
        if perm.size != D.size:
            raise ValueError("block diagonal and permutation sizes differ")
        object.__setattr__(self, "variance", v)
        object.__setattr__(self, "diagonal", D)
        object.__setattr__(self, "permutation", perm)

    @property
    def weights(self) -> np.ndarray:
        """variance * |D_i|^2, the variance of entry (i, perm[i])."""
        return self.variance * self.diagonal**2

    def pattern(self) -> np.ndarray:
        M = np.zeros((self.diagonal.size,) * 2)
        M[np.arange(self.diagonal.size), self.permutation] = self.diagonal
        return M


def _pad(measures, n, label):
    measures = list(measures)
    if len(measures) > n:
        raise ValueError(f"{label}: {len(measures)} measures for dimension {n}")
    return tuple(measures) + tuple(ScalarMeasure.point(0.0) for _ in range(n - len(measures)))


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Operator-valued Kronecker model H = R X T.

    ``r_measures``/``t_measures`` are the laws of r_k^2 and t_k^2.  They
    are padded with point masses at 0 up to n = max(n_R, n_T).  The factor
    gamma^2 multiplies every block variance at evaluation time.
    """

    n_R: int
    n_T: int
    r_measures: tuple
    t_measures: tuple
    blocks: tuple
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.n_R) < 1 or int(self.n_T) < 1:
            raise ValueError("n_R and n_T must be positive")
        n = max(self.n_R, self.n_T)
        if len(self.r_measures) not in (self.n_R, n) or len(self.t_measures) not in (self.n_T, n):
            raise ValueError("need n_R receive and n_T transmit measures")
        object.__setattr__(self, "r_measures", _pad(self.r_measures, n, "r_measures"))
        object.__setattr__(self, "t_measures", _pad(self.t_measures, n, "t_measures"))
        for k in range(self.n_R, n):
            if self.r_measures[k].moment(2) > 0:
                raise ValueError(f"padded receive coordinate {k} must carry the point mass at 0")
        for k in range(self.n_T, n):
            if self.t_measures[k].moment(2) > 0:
                raise ValueError(f"padded transmit coordinate {k} must carry the point mass at 0")
        for mu in self.r_measures + self.t_measures:
            if mu.support()[0] < 0:
                raise ValueError("squared-correlation laws must live on [0, inf)")
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("at least one covariance block is required")
        for i, b in enumerate(blocks):
            if not isinstance(b, Block):
                raise TypeError(f"blocks[{i}] is not a Block")
            if b.diagonal.size != n:
                raise ValueError(f"blocks[{i}] has dimension {b.diagonal.size}, model has n = {n}")
        object.__setattr__(self, "blocks", blocks)
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "gamma", float(self.gamma))
        cov = self.covariance()
        lo = float(np.linalg.eigvalsh(cov)[0])
        if lo < -1e-10 * (1 + np.abs(cov).max()):
            raise ValueError(f"assembled covariance is not positive semidefinite (min eigenvalue {lo:.3e})")

    @property
    def n(self) -> int:
        return max(self.n_R, self.n_T)

    @property
    def is_square(self) -> bool:
        return self.n_R == self.n_T

    def covariance(self) -> np.ndarray:
        """gamma^2 E(vec X vec X*) as an n^2 x n^2 matrix (row-major vec)."""
        n = self.n
        S = np.zeros((n * n, n * n))
        for b in self.blocks:
            v = b.pattern().reshape(-1)
            S += b.variance * np.outer(v, v)
        return self.gamma**2 * S

    def entry_variances(self) -> np.ndarray:
        """gamma^2 E|X_ij|^2."""
        W = np.zeros((self.n, self.n))
        for b in self.blocks:
            W[np.arange(self.n), b.permutation] += b.weights
        return self.gamma**2 * W

    def merged_blocks(self) -> tuple:
        """Blocks with equal permutation combined into one (same covariance)."""
        acc: dict = {}
        for b in self.blocks:
            key = tuple(b.permutation.tolist())
            acc[key] = acc.get(key, 0.0) + b.weights
        return tuple(Block(1.0, np.sqrt(w), np.array(k)) for k, w in acc.items())

    def mean_eigenvalue(self) -> float:
        """First moment of the HH* spectrum under the normalized n_R trace."""
        r2 = np.array([mu.moment(1) for mu in self.r_measures])
        t2 = np.array([mu.moment(1) for mu in self.t_measures])
        return float(r2 @ self.entry_variances() @ t2) / self.n_R

    def is_zero(self) -> bool:
        return float(self.mean_eigenvalue()) == 0.0

    def to_dict(self) -> dict:
        def meas(mu):
            d = {"atoms": mu.atoms.tolist(), "weights": mu.weights.tolist()}
            if mu.has_density:
                d["density_grid"] = mu.density_grid.tolist()
                d["density_values"] = mu.density_values.tolist()
            return d

        return {
            "n_R": int(self.n_R), "n_T": int(self.n_T), "gamma": self.gamma,
            "r_measures": [meas(m) for m in self.r_measures],
            "t_measures": [meas(m) for m in self.t_measures],
            "blocks": [{"variance": b.variance, "diagonal": b.diagonal.tolist(),
                        "permutation": b.permutation.tolist()} for b in self.blocks],
        }

    def __eq__(self, other):
        return isinstance(other, ChannelModel) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))


def transposition(n: int, k: int, l: int) -> np.ndarray:
    perm = np.arange(n)
    perm[k], perm[l] = l, k
    return perm


def blocks_from_entry_variances(sigma2) -> list:
    """One single-entry block per nonzero (k, l), with perm the transposition (k l)."""
    S = np.asarray(sigma2, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("entry variance matrix must be square")
    if np.any(S < 0) or not np.all(np.isfinite(S)):
        raise ValueError("entry variances must be finite and nonnegative")
    n = S.shape[0]
    out = []
    for k in range(n):
        for l in range(n):
            if S[k, l] > 0:
                D = np.zeros(n)
                D[k] = 1.0
                out.append(Block(S[k, l], D, transposition(n, k, l)))
    if not out:
        out.append(Block(0.0, np.zeros(n), np.arange(n)))
    return out


def build_model(n_R: int, n_T: int, r_measures: Sequence[ScalarMeasure], t_measures: Sequence[ScalarMeasure],
                blocks=None, entry_variances=None, gamma: float = 1.0) -> ChannelModel:
    """Assemble a ChannelModel from explicit blocks or an entrywise variance matrix."""
    if (blocks is None) == (entry_variances is None):
        raise ValueError("give exactly one of blocks or entry_variances")
    n = max(n_R, n_T)
    if entry_variances is not None:
        S = np.asarray(entry_variances, dtype=float)
        if S.shape != (n, n):
            raise ValueError(f"entry_variances must be {n}x{n}")
        blocks = blocks_from_entry_variances(S)
    else:
        blocks = [b if isinstance(b, Block) else Block(*b) for b in blocks]
    return ChannelModel(n_R, n_T, tuple(r_measures), tuple(t_measures), tuple(blocks), gamma)


# operator-valued transforms of the model ---------------------------------------


def block_maps(model: ChannelModel, merge: bool = True, drop=None) -> list:
    """Per-block transforms of X^ (gamma^2 applied).

    ``drop`` is a boolean mask over the 2n coordinates; weights touching a
    dropped coordinate are zeroed, which decouples it.
    """
    blocks = model.merged_blocks() if merge else model.blocks
    g2 = model.gamma**2
    n = model.n
    out = []
    for b in blocks:
        D = b.diagonal.astype(float)
        if drop is not None:
            D = np.where(drop[:n] | drop[n + b.permutation], 0.0, D)
        out.append(xhat_kl_map(D, b.permutation, b.variance * g2))
    return out


def null_coordinates(model: ChannelModel) -> np.ndarray:
    """Coordinates of the hermitization that vanish identically.

    Upper coordinate i is null when r_i = 0 or row i of X has zero variance;
    lower coordinate n + j when t_j = 0 or column j of X has zero variance.
    """
    W = model.entry_variances()
    zero_q = np.array([mu.support() == (0.0, 0.0) for mu in model.r_measures + model.t_measures])
    zero_x = np.concatenate([W.sum(axis=1) == 0, W.sum(axis=0) == 0])
    return zero_q | zero_x


def reduced_maps(model: ChannelModel, cfg: FixedPointConfig = FixedPointConfig(), merge: bool = True):
    """(G_Q, G_X^, keep) compressed to the coordinates that are not null.

    On a null coordinate the hermitized channel is zero, and zeroing the
    circular weights touching it leaves H unchanged, so Q X^ splits into its
    compression to ``keep`` plus a zero part.
    """
    drop = null_coordinates(model)
    keep = ~drop
    measures = [mu for mu, k in zip(model.r_measures + model.t_measures, keep) if k]
    GQ = MatrixCauchyMap(len(measures), evaluate=None, evaluate_diagonal=lambda d: q_diagonal_values(measures, d),
                         diagonal_preserving=True, analytic=True, name="Q[keep]")
    full = folded_map(block_maps(model, merge, drop if drop.any() else None), cfg)
    if not drop.any():
        return GQ, full, keep

    def ev(J):
        J = np.asarray(J, dtype=complex)
        big = np.full(J.shape[:-1] + (2 * model.n,), 1j, dtype=complex)
        big[..., keep] = J
        return full.diag(big)[..., keep]

    GX = MatrixCauchyMap(int(keep.sum()), evaluate=None, evaluate_diagonal=ev, diagonal_preserving=True,
                         analytic=False, name="Xhat[keep]")
    return GQ, GX, keep


def folded_map(maps: list, cfg: FixedPointConfig) -> MatrixCauchyMap:
    """Left fold of free summands through the additive subordinator."""
    G = maps[0]
    for idx, Gn in enumerate(maps[1:], start=1):
        G = _fold_step(G, Gn, idx, cfg)
    return G


def _fold_step(G_left, G_right, idx, cfg):
    def ev(J):
        J = np.asarray(J, dtype=complex)
        flat = J.reshape(-1, J.shape[-1])
        try:
            res = additive_subordinator(G_left, G_right, flat, cfg, diagonal=True)
        except ConvergenceError as exc:
            raise ConvergenceError(f"block {idx}: {exc}", exc.result) from exc
        return res.value.reshape(J.shape)

    return MatrixCauchyMap(G_left.dim, evaluate=None, evaluate_diagonal=ev, diagonal_preserving=True,
                           analytic=False, name=f"Xhat[0..{idx}]")


def xhat_map(model: ChannelModel, cfg: FixedPointConfig = FixedPointConfig(), merge: bool = True) -> MatrixCauchyMap:
    return folded_map(block_maps(model, merge), cfg)


def cauchy_Xhat(model: ChannelModel, J, cfg: FixedPointConfig = FixedPointConfig(), merge: bool = True):
    """G of the hermitized circular part at a diagonal J.

    ``J`` is a diagonal ``(2n, 2n)`` matrix (a matrix is returned) or a
    vector / ``(K, 2n)`` batch of diagonals (same shape returned).
    """
    G = xhat_map(model, cfg, merge)
    J = np.asarray(J, dtype=complex)
    if J.ndim == 2 and J.shape == (2 * model.n, 2 * model.n) and np.count_nonzero(J - np.diag(np.diag(J))) == 0:
        return np.diag(G.diag(np.diag(J)[None])[0])
    return G.diag(J)


@dataclass
class HHStarTransform:
    """Scalar transforms at a batch of points.

    ``value`` is G_F(zeta) for the HH* spectrum on the n_R receive
    coordinates.  ``upper``/``lower`` are the normalized traces of the two
    n-blocks of G_{Q X^}(sqrt zeta)/sqrt zeta (used for diagnostics).
    """

    zeta: np.ndarray
    value: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray


def eta_ladder(target: float) -> list:
    levels = []
    L = 1e-1
    while L > target * 1.0001:
        levels.append(L)
        L /= 10
    return levels


def _solve_product(GQ, GX, zeta, cfg, ladder):
    """Multiplicative solve at w = sqrt(zeta) with continuation in Im zeta."""
    d = GQ.dim
    x, y = zeta.real, zeta.imag
    omega = None
    if ladder:
        levels = eta_ladder(float(y.min())) if y.size else []
        if levels:
            omega = np.repeat((1.0 / np.sqrt(zeta).conj())[:, None], d, axis=1)
            warm = np.zeros(zeta.size, dtype=bool)
        for L in levels:
            rows = y < L
            if not np.any(rows):
                continue
            w = np.sqrt(x[rows] + 1j * L)
            start = np.where(warm[rows][:, None], omega[rows], np.repeat((1.0 / w.conj())[:, None], d, axis=1))
            res = multiplicative_subordinator(GQ, GX, w, cfg, diagonal=True, omega0=start, strict=False)
            omega[rows] = res.omega
            warm |= rows
    w = np.sqrt(zeta)
    return multiplicative_subordinator(GQ, GX, w, cfg, diagonal=True, omega0=omega, strict=False), w


def _chunks(n, jobs):
    jobs = max(1, min(int(jobs), n))
    edges = np.linspace(0, n, jobs + 1).astype(int)
    return [slice(edges[i], edges[i + 1]) for i in range(jobs) if edges[i + 1] > edges[i]]


def scalar_cauchy_HHstar(model: ChannelModel, zeta, cfg: FixedPointConfig = FixedPointConfig(), ladder: bool = True,
                         merge: bool = True, jobs: int = 1, strict: bool = True, details: bool = False):
    """Scalar Cauchy transform of the HH* spectrum at points of H+.

    Returns a complex array shaped like ``zeta`` (or an :class:`HHStarTransform`
    with ``details=True``).  Non-convergence raises ConvergenceError carrying
    the partial HHStarTransform when ``strict``.
    """
    z = np.asarray(zeta, dtype=complex)
    shape = z.shape
    z = z.reshape(-1)
    if np.any(z.imag <= 0):
        raise ValueError("scalar_cauchy_HHstar requires Im(zeta) > 0")
    n, nR = model.n, model.n_R
    if model.is_zero():
        g = 1.0 / z
        out = HHStarTransform(z, g, g, g, np.ones(z.size, bool), np.zeros(z.size, int), np.zeros(z.size))
        return out if details else g.reshape(shape)
    log.debug("product=Q*Xhat hypothesis=E(Xhat)_invertible status=violated mean_Xhat=0")
    GQ, GX, keep = reduced_maps(model, cfg, merge)

    def run(sl):
        return _solve_product(GQ, GX, z[sl], cfg, ladder)

    parts = _chunks(z.size, jobs)
    if len(parts) > 1:
        with ThreadPoolExecutor(len(parts)) as pool:
            results = list(pool.map(run, parts))
    else:
        results = [run(parts[0])] if parts else []
    w = np.concatenate([w for _, w in results])
    G = np.repeat((1.0 / w)[:, None], 2 * n, axis=1)
    G[:, keep] = np.concatenate([r.value for r, _ in results])
    conv = np.concatenate([np.atleast_1d(r.converged) for r, _ in results])
    iters = np.concatenate([np.atleast_1d(r.iterations) for r, _ in results])
    resid = np.concatenate([np.atleast_1d(r.residual) for r, _ in results])
    Gsq = G / w[:, None]
    full = Gsq.mean(axis=1)
    value = (n * full - (n - nR) / z) / nR
    upper = Gsq[:, :nR].mean(axis=1)
    lower = Gsq[:, n:n + model.n_T].mean(axis=1)
    out = HHStarTransform(z, value, upper, lower, conv, iters, resid)
    if strict and not np.all(conv):
        bad = z[~conv]
        raise ConvergenceError(f"product subordination failed at {bad.size} point(s), first zeta={bad[0]:.6g}", out)
    return out if details else value.reshape(shape)


# density and mutual information ------------------------------------------------


def _density_at(model, x, eta, cfg, merge, jobs, strict=True):
    zeta = np.asarray(x, dtype=float) + 1j * eta
    return scalar_cauchy_HHstar(model, zeta, cfg, merge=merge, jobs=jobs, strict=strict, details=True)


def auto_xmax(model: ChannelModel, cfg: FixedPointConfig = FixedPointConfig(), merge: bool = True) -> float:
    """Double a moment-based bound until the density there is below EDGE_DENSITY.

    The probe uses a tiny imaginary part so that the smoothing tail of the
    inversion does not mask the edge of the support.
    """
    xmax = 4.0 * max(model.mean_eigenvalue(), 1e-12)
    for _ in range(MAX_DOUBLINGS):
        g = _density_at(model, [xmax], PROBE_ETA * xmax, cfg, merge, 1).value[0]
        if -g.imag / np.pi < EDGE_DENSITY:
            return xmax
        xmax *= 2
    return xmax


def zero_atom(model: ChannelModel, scale: float, cfg: FixedPointConfig = FixedPointConfig(),
              merge: bool = True) -> float:
    """Mass of the HH* spectrum at 0, read off as lim iy G(iy).

    Near 0 the continuous part adds O(sqrt y) to Re(iy G(iy)); two probes a
    factor 100 apart and Richardson extrapolation in sqrt(y) remove it.
    Estimates below ATOM_FLOOR count as 0.
    """
    y = np.array([ATOM_PROBES[0], ATOM_PROBES[1]]) * scale
    g = scalar_cauchy_HHstar(model, 1j * y, cfg, merge=merge)
    a = (1j * y * g).real
    r = np.sqrt(y[0] / y[1])
    est = float((r * a[1] - a[0]) / (r - 1))
    return min(est, 1.0) if est > ATOM_FLOOR else 0.0


def account_mass(model: ChannelModel, F: DensityEstimate, cfg: FixedPointConfig = FixedPointConfig(),
                 merge: bool = True) -> DensityEstimate:
    """Split the mass missing from the grid into the atom at 0 and the head segment.

    Valid for grids of the form xi_max * k / points whose right edge is past
    the support, so that the tail beyond it is negligible.  Modifies ``F``.
    """
    atom = zero_atom(model, float(F.grid[-1]), cfg, merge)
    if atom > 0:
        # remove the smoothed atom so that it is carried only by mass_at_zero
        F.values = np.maximum(F.values - atom * F.eta / (np.pi * (F.grid**2 + F.eta**2)), 0.0)
    F.mass_at_zero = atom
    F.head_mass = max(0.0, 1.0 - atom - F.grid_mass())
    F.meta["head_mass"] = F.head_mass
    return F


def spectral_density(model: ChannelModel, xi_max="auto", points: int = 800, eta: float | None = None,
                     cfg: FixedPointConfig = FixedPointConfig(), merge: bool = True, jobs: int = 1,
                     strict: bool = True) -> DensityEstimate:
    """Density of the HH* spectrum on the uniform grid xi_k = xi_max * k / points.

    ``mass_at_zero`` is the atom of the spectrum at 0 (see ``zero_atom``) and
    ``head_mass`` the continuous mass below the first grid point.

    With ``strict=False`` non-converged grid points are kept and listed in
    ``meta["unconverged"]`` instead of raising.
    """
    if int(points) < 16:
        raise ValueError("points must be at least 16")
    points = int(points)
    if eta is not None and not eta > 0:
        raise ValueError("eta must be positive")
    if model.is_zero():
        grid = np.arange(1, points + 1) / points * (1.0 if xi_max == "auto" else float(xi_max))
        return DensityEstimate(grid, np.zeros(points), eta if eta else default_eta(grid), 1.0)
    if xi_max == "auto":
        xi_max = auto_xmax(model, cfg, merge)
    xi_max = float(xi_max)
    if not xi_max > 0:
        raise ValueError("xi_max must be positive")
    grid = xi_max * np.arange(1, points + 1) / points
    if eta is None:
        eta = default_eta(grid)
    holder = {}

    def G(zeta):
        res = scalar_cauchy_HHstar(model, zeta, cfg, merge=merge, jobs=jobs, strict=strict, details=True)
        holder["res"] = res
        return res.value

    F = stieltjes_invert(G, grid, eta)
    res = holder.get("res")
    account_mass(model, F, cfg, merge)
    F.meta.update({"xi_max": xi_max, "points": points})
    if res is not None:
        F.meta["max_iterations_used"] = int(res.iterations.max())
        F.meta["max_residual"] = float(res.residual.max())
        if not np.all(res.converged):
            F.meta["unconverged"] = grid[~res.converged].tolist()
    return F


def mutual_information(F: DensityEstimate, P: float) -> float:
    """Trapezoid integral of log(1 + P xi) against the density (nats)."""
    if not P > 0:
        raise ValueError("power must be positive")
    if F.grid.size < 2:
        return 0.0
    # the head segment contributes about P * int xi f(xi) there since log1p(P xi) ~ P xi
    head = min(P * F.head()[1], F.head()[0] * np.log1p(P * F.grid[0]))
    return float(np.trapezoid(np.log1p(P * F.grid) * F.values, F.grid)) + head


@dataclass
class MutualInfoCurve:
    powers: np.ndarray
    info: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.powers = np.asarray(self.powers, dtype=float)
        self.info = np.asarray(self.info, dtype=float)

    @property
    def points(self):
        return list(zip(self.powers.tolist(), self.info.tolist()))

    def is_monotone(self, slack: float = 1e-12) -> bool:
        order = np.argsort(self.powers)
        return bool(np.all(np.diff(self.info[order]) >= -slack))

    def to_csv_rows(self):
        return [f"{p:.12g},{i:.12g}" for p, i in self.points]


def mutual_information_curve(F: DensityEstimate, powers, label: str = "") -> MutualInfoCurve:
    powers = np.asarray(powers, dtype=float)
    return MutualInfoCurve(powers, np.array([mutual_information(F, p) for p in powers]), label)


def classical_kronecker_reference(r2: ScalarMeasure, t2: ScalarMeasure, P_grid, points: int = 4000,
                                  eta: float | None = 1e-4, xi_max="auto",
                                  cfg: FixedPointConfig = FixedPointConfig()) -> MutualInfoCurve:
    """Mutual information of the n = 1 model R X T with laws r2, t2 of r^2, t^2."""
    model = ChannelModel(1, 1, (r2,), (t2,), (Block(1.0, np.ones(1), np.zeros(1, int)),))
    F = spectral_density(model, xi_max, points, eta, cfg)
    curve = mutual_information_curve(F, P_grid, "classical")
    curve.meta["density"] = F
    return curve


def classical_from_entry_variances(sigma2) -> tuple:
    """Separable fit of an entrywise variance matrix: laws of r^2 and t^2.

    For sigma2 = a b^T the laws put mass 1/n on each a_k (rows) and on each
    b_l (columns), with b rescaled so that the mean of b is one.  This is
    exact for separable variance profiles.
    """
    S = np.asarray(sigma2, dtype=float)
    a = S.mean(axis=1)
    b = S.mean(axis=0) / a.mean()
    return ScalarMeasure.from_atoms(a), ScalarMeasure.from_atoms(b)


def classical_laws(model: ChannelModel) -> tuple:
    """Laws of r^2, t^2 for the n = 1 baseline matching the model's variance profile.

    The profile is E r_i^2 * E|X_ij|^2 * E t_j^2 on the n_R x n_T antennas.
    """
    r2 = np.array([mu.moment(1) for mu in model.r_measures])[:model.n_R]
    t2 = np.array([mu.moment(1) for mu in model.t_measures])[:model.n_T]
    prof = r2[:, None] * model.entry_variances()[:model.n_R, :model.n_T] * t2[None, :]
    return classical_from_entry_variances(prof)
