"""Scalar Cauchy transforms, the Marchenko-Pastur law and Stieltjes inversion."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

MASS_TOL = 1e-6
DENSITY_MASS_TOL = 0.02
NEGATIVE_DENSITY_WARN = -1e-6
HEAD_MAX_EXPONENT = 0.9


class DomainError(ValueError):
    """Argument outside the domain of a transform (e.g. not in H+)."""


@dataclass(frozen=True)
class ScalarMeasure:
    """Compactly supported probability measure on the real line.

    A finite set of atoms plus an optional absolutely continuous part given
    by density samples on an increasing grid (integrated with the trapezoid
    rule).
    """

    atoms: np.ndarray
    weights: np.ndarray
    density_grid: np.ndarray | None = None
    density_values: np.ndarray | None = None

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.atoms, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if a.shape != w.shape or a.ndim != 1:
            raise ValueError("atoms and weights must be 1-d arrays of equal length")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("atom weights must lie in [0, 1]")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(w))):
            raise ValueError("atoms and weights must be finite")
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "weights", w)
        if (self.density_grid is None) != (self.density_values is None):
            raise ValueError("density grid and values must be given together")
        if self.density_grid is not None:
            g = np.asarray(self.density_grid, dtype=float)
            v = np.asarray(self.density_values, dtype=float)
            if g.ndim != 1 or g.shape != v.shape or g.size < 2:
                raise ValueError("density part needs matching 1-d grid and values (>= 2 points)")
            if np.any(np.diff(g) <= 0):
                raise ValueError("density grid must be strictly increasing")
            if np.any(v < 0):
                raise ValueError("density values must be nonnegative")
            object.__setattr__(self, "density_grid", g)
            object.__setattr__(self, "density_values", v)
        m = self.mass()
        if abs(m - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {m:.9g} is not 1")

    @classmethod
    def point(cls, location: float) -> "ScalarMeasure":
        return cls(np.array([float(location)]), np.array([1.0]))

    @classmethod
    def from_atoms(cls, atoms, weights=None) -> "ScalarMeasure":
        atoms = np.asarray(atoms, dtype=float)
        if weights is None:
            weights = np.full(atoms.shape, 1.0 / atoms.size)
        return cls(atoms, np.asarray(weights, dtype=float))

    @property
    def has_density(self) -> bool:
        return self.density_grid is not None

    @property
    def is_atomic(self) -> bool:
        return not self.has_density

    def mass(self) -> float:
        m = float(self.weights.sum())
        if self.has_density:
            m += float(np.trapezoid(self.density_values, self.density_grid))
        return m

    def moment(self, k: int) -> float:
        m = float(np.sum(self.weights * self.atoms**k))
        if self.has_density:
            m += float(np.trapezoid(self.density_values * self.density_grid**k, self.density_grid))
        return m

    def support(self) -> tuple[float, float]:
        pts = [self.atoms[self.weights > 0]]
        if self.has_density:
            pts.append(self.density_grid[[0, -1]])
        allp = np.concatenate(pts)
        return float(allp.min()), float(allp.max())

    def squared(self) -> "ScalarMeasure":
        """Push-forward under x -> x**2 (atomic measures only)."""
        if self.has_density:
            raise NotImplementedError("squaring is only implemented for atomic measures")
        return ScalarMeasure(self.atoms**2, self.weights.copy())

    def scaled(self, c: float) -> "ScalarMeasure":
        """Push-forward under x -> c*x for c > 0."""
        if c <= 0:
            raise ValueError("scale must be positive")
        if self.has_density:
            return ScalarMeasure(c * self.atoms, self.weights, c * self.density_grid, self.density_values / c)
        return ScalarMeasure(c * self.atoms, self.weights.copy())

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw i.i.d. samples (inverse CDF on the density grid for the continuous part)."""
        size = int(np.prod(size)) if np.ndim(size) else int(size)
        wa = float(self.weights.sum())
        u = rng.random(size)
        out = np.empty(size)
        from_atoms = u < wa if self.has_density else np.ones(size, dtype=bool)
        k = int(from_atoms.sum())
        if k:
            p = self.weights / wa
            out[from_atoms] = self.atoms[rng.choice(self.atoms.size, size=k, p=p)]
        if self.has_density and k < size:
            g, v = self.density_grid, self.density_values
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(g))])
            out[~from_atoms] = np.interp(rng.random(size - k) * cum[-1], cum, g)
        return out


def _atoms_transform(mu: ScalarMeasure, z: np.ndarray) -> np.ndarray:
    """sum_i w_i / (z - a_i), analytic off the atoms."""
    w = mu.weights
    a = mu.atoms
    out = np.zeros(z.shape, dtype=complex)
    # chunk over atoms to bound memory for large batches
    for lo in range(0, a.size, 256):
        out += np.sum(w[lo:lo + 256] / (z[..., None] - a[lo:lo + 256]), axis=-1)
    if mu.has_density:
        g, v = mu.density_grid, mu.density_values
        out += np.trapezoid(v / (z[..., None] - g), g, axis=-1)
    return out


def measure_transform(mu: ScalarMeasure, z) -> np.ndarray:
    """Cauchy transform of ``mu`` continued to all of C minus the support.

    Satisfies ``G(conj z) = conj G(z)``, which is the reflection rule.
    """
    z = np.asarray(z, dtype=complex)
    return _atoms_transform(mu, z)


def cauchy_of_measure(mu: ScalarMeasure, zeta):
    """Cauchy transform G(zeta) = int dmu(x)/(zeta - x) for Im(zeta) > 0.

    Accepts a scalar or an array of points.
    """
    z = np.asarray(zeta, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("Cauchy transform requires Im(zeta) > 0")
    out = _atoms_transform(mu, z)
    return complex(out) if out.ndim == 0 else out


def cauchy_extended(G, zeta):
    """Evaluate an H+ evaluator anywhere off the real axis by reflection."""
    z = np.asarray(zeta, dtype=complex)
    if np.any(z.imag == 0):
        raise DomainError("argument on the real axis")
    flip = z.imag < 0
    out = np.asarray(G(np.where(flip, z.conj(), z)), dtype=complex)
    out = np.where(flip, out.conj(), out)
    return complex(out) if out.ndim == 0 else out


def mp_transform(z) -> np.ndarray:
    """Unit-rate Marchenko-Pastur Cauchy transform on C minus [0, 4].

    Uses sqrt(z)*sqrt(z-4) with principal roots, which is the analytic
    branch behaving like z at infinity everywhere off the cut.  Written as
    2 / (z + root) to avoid cancellation for large |z|.
    """
    z = np.asarray(z, dtype=complex)
    return 2.0 / (z + np.sqrt(z) * np.sqrt(z - 4.0))


def cauchy_mp(zeta):
    """Marchenko-Pastur Cauchy transform for Im(zeta) > 0.

    The principal root of (zeta-2)^2 - 4 is taken and its sign flipped
    wherever the candidate fails Im(G) < 0.
    """
    z = np.asarray(zeta, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("cauchy_mp requires Im(zeta) > 0")
    s = np.sqrt((z - 2.0) ** 2 - 4.0)
    # (z -+ s) / (2z) rewritten as 2 / (z +- s)
    g = 2.0 / (z + s)
    bad = g.imag >= 0
    g = np.where(bad, 2.0 / (z - s), g)
    return complex(g) if g.ndim == 0 else g


def semicircle_transform(z, variance: float = 1.0) -> np.ndarray:
    """Cauchy transform of the centered semicircle law, analytic off its support."""
    z = np.asarray(z, dtype=complex)
    a = 2.0 * np.sqrt(variance)
    return 2.0 / (z + np.sqrt(z - a) * np.sqrt(z + a))


def mp_density(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 4)
    xi = x[inside]
    out[inside] = np.sqrt(xi * (4.0 - xi)) / (2.0 * np.pi * xi)
    return out


def mp_cdf(x) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), 0.0, 4.0)
    phi = np.arcsin(np.sqrt(x) / 2.0)
    return (2.0 / np.pi) * (phi + np.sin(phi) * np.cos(phi))


@dataclass
class DensityEstimate:
    grid: np.ndarray
    values: np.ndarray
    eta: float
    mass_at_zero: float = 0.0
    meta: dict = field(default_factory=dict)
    head_mass: float | None = None

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("density values must be nonnegative")
        if self.mass_at_zero < 0:
            raise ValueError("mass_at_zero must be nonnegative")
        if self.head_mass is not None and self.head_mass < 0:
            raise ValueError("head_mass must be nonnegative")

    def _head_exponent(self) -> float:
        g, v = self.grid, self.values
        a = np.log(v[0] / v[1]) / np.log(g[1] / g[0]) if v[0] > 0 and v[1] > 0 else 0.0
        return float(np.clip(a, 0.0, HEAD_MAX_EXPONENT))

    def head(self) -> tuple:
        """(mass, first moment) of the segment between 0 and the first grid point.

        Only defined when the grid starts within about one spacing of 0.  The
        density there is modelled as c * x**-a with the exponent fitted from
        the first two grid values (clipped to [0, 0.9]), which captures the
        inverse square-root growth of hard-edge spectra.  A known
        ``head_mass`` replaces the fitted mass; the shape still sets the moment.
        """
        g, v = self.grid, self.values
        if g.size < 2 or g[0] <= 0 or g[0] > 1.5 * (g[1] - g[0]):
            return 0.0, 0.0
        a = self._head_exponent()
        mass = v[0] * g[0] / (1 - a) if self.head_mass is None else self.head_mass
        return mass, mass * g[0] * (1 - a) / (2 - a)

    def grid_mass(self) -> float:
        return float(np.trapezoid(self.values, self.grid)) if self.grid.size > 1 else 0.0

    def continuous_mass(self) -> float:
        """Grid mass plus the modelled head segment."""
        return self.grid_mass() + self.head()[0]

    def total_mass(self) -> float:
        return self.continuous_mass() + self.mass_at_zero

    def cdf(self, x, normalize: bool = True) -> np.ndarray:
        """CDF implied by the atom at zero plus the integrated density.

        Below the first grid point the head mass follows the same power law
        as ``head``.  With ``normalize`` the result reaches 1.
        """
        x = np.asarray(x, dtype=float)
        g, v = self.grid, self.values
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(g))])
        head = self.head()[0]
        if g[0] > 0:
            knots = np.concatenate([[0.0], g])
            vals = np.concatenate([[0.0], head + cum])
        else:
            knots, vals = g, cum
        F = self.mass_at_zero + np.interp(x, knots, vals, left=0.0, right=vals[-1])
        if head > 0:
            frac = np.clip(x / g[0], 0.0, 1.0) ** (1.0 - self._head_exponent())
            F = np.where(x < g[0], self.mass_at_zero + head * frac, F)
        F = np.where(x < 0, 0.0, F)
        if normalize:
            F = F / (self.mass_at_zero + vals[-1])
        return F

    def to_csv(self, path_or_file, extra_comments=()):
        lines = [f"# {c}" for c in extra_comments]
        lines.append(f"# eta={self.eta:.6g} mass_at_zero={self.mass_at_zero:.9g}")
        lines.append("xi,density")
        lines += [f"{x:.12g},{y:.12g}" for x, y in zip(self.grid, self.values)]
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w") as fh:
                fh.write(text)


class EvaluationError(RuntimeError):
    def __init__(self, point, cause):
        super().__init__(f"transform evaluation failed at zeta={point!r}: {cause}")
        self.point = point
        self.cause = cause


def default_eta(grid) -> float:
    grid = np.asarray(grid, dtype=float)
    span = float(grid[-1] - grid[0]) if grid.size > 1 else 1.0
    return 1e-3 * span / max(grid.size, 1)


def stieltjes_invert(G, grid, eta: float | None = None, vectorized: bool = True) -> DensityEstimate:
    """Density -Im G(x + i eta)/pi on ``grid`` with clamping at zero.

    Mass not accounted for by the density (grid plus head segment) is
    assigned to ``mass_at_zero`` when it exceeds DENSITY_MASS_TOL.

    ``G`` maps an array of points in H+ to an array of transform values.
    With ``vectorized=False`` it is called point by point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a non-empty 1-d array")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if eta is None:
        eta = default_eta(grid)
    if not eta > 0:
        raise ValueError("eta must be positive")
    zeta = grid + 1j * eta
    if vectorized:
        try:
            vals = np.asarray(G(zeta), dtype=complex)
        except Exception:
            vals = None
    else:
        vals = None
    if vals is None:
        vals = np.empty(grid.size, dtype=complex)
        for i, z in enumerate(zeta):
            try:
                vals[i] = complex(G(z))
            except Exception as exc:
                raise EvaluationError(z, exc) from exc
    dens = -vals.imag / np.pi
    worst = float(dens.min())
    if worst < NEGATIVE_DENSITY_WARN:
        x_bad = float(grid[int(np.argmin(dens))])
        warnings.warn(f"negative density {worst:.3e} at xi={x_bad:.6g}; possible branch or convergence issue",
                      RuntimeWarning, stacklevel=2)
    dens = np.maximum(dens, 0.0)
    F = DensityEstimate(grid, dens, float(eta))
    resid = 1.0 - F.continuous_mass()
    F.mass_at_zero = resid if resid > DENSITY_MASS_TOL else 0.0
    return F


def discretize_uniform01(n_atoms: int) -> ScalarMeasure:
    """Midpoint quantile discretization of Uniform[0, 1]."""
    if int(n_atoms) != n_atoms or n_atoms < 2:
        raise ValueError("n_atoms must be an integer >= 2")
    n = int(n_atoms)
    return ScalarMeasure((np.arange(n) + 0.5) / n, np.full(n, 1.0 / n))
