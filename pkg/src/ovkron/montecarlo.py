"""Monte Carlo ground truth for the channel model and the small-gamma bounds.

Realizations use block size N: R and T are block diagonal with N x N
blocks U diag(sqrt(a)) U*, where ``a`` is sampled from the law of r_k^2
(resp. t_k^2) and U is Haar; the circular part is
X = sum_b gamma * sqrt(v_b) * (M_b kron C_b) with C_b an N x N matrix of
i.i.d. standard complex Gaussians.  Spectra are those of HH*/N.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .matrix import hermitian_eigenvalues, operator_norm, singular_values
from .pipeline import ChannelModel

log = logging.getLogger(__name__)

BOUND_FP_SLACK = 1e-9


def default_jobs() -> int:
    env = os.environ.get("OVKRON_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class McConfig:
    block_size: int
    trials: int
    seed: int
    model: ChannelModel

    def __post_init__(self):
        if int(self.block_size) < 1:
            raise ValueError("block_size must be a positive integer")
        if int(self.trials) < 1:
            raise ValueError("trials must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def haar_unitary(rng: np.random.Generator, N: int) -> np.ndarray:
    """Haar unitary from the QR factorization of a Ginibre matrix (phase-corrected)."""
    Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    Qm, Rm = np.linalg.qr(Z)
    d = np.diag(Rm)
    return Qm * (d / np.abs(d))


def _correlation_block(rng, mu, N):
    a = np.sqrt(np.clip(mu.sample(rng, N), 0, None))
    if np.all(a == a[0]):
        return np.diag(a.astype(complex))
    U = haar_unitary(rng, N)
    return (U * a) @ U.conj().T


def _one_trial(model: ChannelModel, N: int, rng: np.random.Generator) -> np.ndarray:
    n, nR, nT = model.n, model.n_R, model.n_T
    Rb = [_correlation_block(rng, model.r_measures[k], N) for k in range(nR)]
    Tb = [_correlation_block(rng, model.t_measures[k], N) for k in range(nT)]
    X = np.zeros((nR * N, nT * N), dtype=complex)
    for b in model.blocks:
        w = model.gamma * np.sqrt(b.variance) * b.diagonal
        if not np.any(w):
            continue
        C = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
        for i in range(n):
            j = b.permutation[i]
            if i < nR and j < nT and w[i] != 0:
                X[i * N:(i + 1) * N, j * N:(j + 1) * N] += w[i] * C
    # H = R X T with block-diagonal R, T
    for i in range(nR):
        X[i * N:(i + 1) * N] = Rb[i] @ X[i * N:(i + 1) * N]
    for j in range(nT):
        X[:, j * N:(j + 1) * N] = X[:, j * N:(j + 1) * N] @ Tb[j]
    return X


def _trial_rngs(cfg: McConfig):
    children = np.random.SeedSequence(int(cfg.seed)).spawn(int(cfg.trials))
    return [np.random.default_rng(c) for c in children]


def _run_trials(cfg: McConfig, fn, jobs: int | None):
    rngs = _trial_rngs(cfg)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))

    def work(t):
        return fn(_one_trial(cfg.model, int(cfg.block_size), rngs[t]))

    if jobs == 1 or cfg.trials == 1:
        return [work(t) for t in range(cfg.trials)]
    with ThreadPoolExecutor(min(jobs, cfg.trials)) as pool:
        return list(pool.map(work, range(cfg.trials)))


def sample_channel(cfg: McConfig, jobs: int | None = 1) -> list:
    """Channel realizations of shape (n_R N, n_T N), one per trial."""
    return _run_trials(cfg, lambda H: H, jobs)


def gram_eigenvalues(H, block_size: int) -> np.ndarray:
    G = H @ H.conj().T / block_size
    return np.sort(np.clip(np.linalg.eigvalsh(G), 0, None))


def channel_eigenvalues(cfg: McConfig, jobs: int | None = 1) -> np.ndarray:
    """Eigenvalues of HH*/N per trial, shape (trials, n_R N), without keeping H."""
    N = int(cfg.block_size)
    return np.stack(_run_trials(cfg, lambda H: gram_eigenvalues(H, N), jobs))


def entrywise_eigenvalues(sigma2, trials: int, seed: int, chunk: int = 20000) -> np.ndarray:
    """Eigenvalues of HH* for a small matrix with independent CN(0, sigma2_ij) entries.

    Vectorized over trials; chunk k uses its own child stream of ``seed``.
    """
    S = np.asarray(sigma2, dtype=float)
    nchunks = -(-int(trials) // chunk)
    children = np.random.SeedSequence(int(seed)).spawn(nchunks)
    out = []
    for c, ss in enumerate(children):
        m = min(chunk, trials - c * chunk)
        rng = np.random.default_rng(ss)
        H = (rng.standard_normal((m,) + S.shape) + 1j * rng.standard_normal((m,) + S.shape)) / np.sqrt(2)
        H = H * np.sqrt(S)
        out.append(np.linalg.eigvalsh(H @ np.conj(np.swapaxes(H, 1, 2))))
    return np.clip(np.concatenate(out), 0, None)


@dataclass
class EmpiricalSpectrum:
    eigenvalues: np.ndarray
    edges: np.ndarray
    counts: np.ndarray

    @property
    def frequency(self) -> np.ndarray:
        return self.counts / max(self.counts.sum(), 1)

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.eigenvalues, np.asarray(x, dtype=float), side="right") / self.eigenvalues.size

    def ks_distance(self, cdf) -> float:
        """sup |F_emp - F| for a continuous reference CDF (evaluated at the jumps)."""
        x = self.eigenvalues
        F = np.asarray(cdf(x), dtype=float)
        m = x.size
        hi = np.arange(1, m + 1) / m
        lo = np.arange(0, m) / m
        return float(max(np.max(np.abs(hi - F)), np.max(np.abs(F - lo))))

    def histogram_rows(self):
        f = self.frequency
        return [f"{a:.12g},{b:.12g},{int(c)},{fr:.12g}"
                for a, b, c, fr in zip(self.edges[:-1], self.edges[1:], self.counts, f)]


def spectrum_from_eigenvalues(eigs, bins: int = 100, value_range=None) -> EmpiricalSpectrum:
    ev = np.sort(np.asarray(eigs, dtype=float).reshape(-1))
    if ev.size == 0:
        raise ValueError("no eigenvalues")
    counts, edges = np.histogram(ev, bins=bins, range=value_range)
    return EmpiricalSpectrum(ev, edges, counts)


def empirical_spectrum(samples, block_size: int = 1, bins: int = 100, value_range=None) -> EmpiricalSpectrum:
    """Pooled eigenvalues of HH*/block_size over a list of realizations."""
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    eigs = [hermitian_eigenvalues(np.asarray(H) @ np.asarray(H).conj().T / block_size) for H in samples]
    return spectrum_from_eigenvalues(np.clip(np.concatenate(eigs), 0, None), bins, value_range)


def mutual_info_from_eigenvalues(eigs, P: float) -> tuple:
    """Mean and standard error of (1/m) sum log(1 + P lambda) over trials (rows)."""
    if not P > 0:
        raise ValueError("power must be positive")
    E = np.atleast_2d(np.asarray(eigs, dtype=float))
    per_trial = np.log1p(P * E).mean(axis=1)
    if not np.all(np.isfinite(per_trial)):
        raise FloatingPointError("non-finite log-determinant")
    se = per_trial.std(ddof=1) / np.sqrt(per_trial.size) if per_trial.size > 1 else float("nan")
    return float(per_trial.mean()), float(se)


def mc_mutual_info(samples, P: float, block_size: int = 1) -> tuple:
    """Mean and standard error of (1/(n_R N)) log det(I + (P/N) HH*) over samples."""
    eigs = [hermitian_eigenvalues(np.asarray(H) @ np.asarray(H).conj().T / block_size) for H in samples]
    return mutual_info_from_eigenvalues(np.clip(np.stack(eigs), 0, None), P)


# small-gamma (entrywise exponential) regime ------------------------------------


class BoundViolation(AssertionError):
    def __init__(self, report):
        super().__init__(f"{report.quantity}: lhs={report.lhs:.6e} exceeds rhs={report.rhs:.6e}")
        self.report = report


@dataclass(frozen=True)
class BoundReport:
    quantity: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + BOUND_FP_SLACK * max(1.0, abs(self.rhs))

    def row(self) -> str:
        return f"{self.quantity},{self.lhs:.12g},{self.rhs:.12g},{self.slack:.12g}"


def entrywise_exp(A, gamma: float) -> np.ndarray:
    """Entries exp(i gamma A_kl)."""
    return np.exp(1j * gamma * np.asarray(A, dtype=complex))


def _check_gamma(gamma):
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")


def gamma_bulk_bound_check(A, gamma: float, strict: bool = True) -> BoundReport:
    """(1/N) sum_{k>=2} |s_k(X/gamma) - s_k(A)| <= gamma e^{|A|} + 2|A|/N for X = exp(i gamma A)."""
    _check_gamma(gamma)
    A = np.asarray(A, dtype=complex)
    N = A.shape[0]
    sX = singular_values(entrywise_exp(A, gamma) / gamma)
    sA = singular_values(A)
    nA = float(sA[0])
    lhs = float(np.sum(np.abs(sX[1:] - sA[1:]))) / N
    rep = BoundReport("bulk", lhs, gamma * np.exp(nA) + 2 * nA / N)
    if strict and not rep.holds:
        raise BoundViolation(rep)
    return rep


def gamma_top_singular_check(A, gamma: float, strict: bool = True) -> BoundReport:
    """|s_1(X/gamma) / (N/gamma) - 1| <= gamma (gamma e^{|A|} + |A|)."""
    _check_gamma(gamma)
    A = np.asarray(A, dtype=complex)
    N = A.shape[0]
    s1 = float(singular_values(entrywise_exp(A, gamma) / gamma)[0])
    nA = operator_norm(A)
    rep = BoundReport("top", abs(s1 / (N / gamma) - 1.0), gamma * (gamma * np.exp(nA) + nA))
    if strict and not rep.holds:
        raise BoundViolation(rep)
    return rep


@dataclass(frozen=True)
class MomentEstimate:
    closed_form: float
    mc_mean: complex
    mc_stderr: float

    @property
    def z_score(self) -> float:
        return abs(self.mc_mean - self.closed_form) / self.mc_stderr if self.mc_stderr > 0 else float("inf")


def gamma_infinity_moment(R, T, exponents, gamma: float, trials: int = 0, seed: int = 0) -> MomentEstimate:
    """Joint moment E prod A_ij^{n_ij} of A = exp(i gamma R X T), X real standard Gaussian.

    Closed form exp(-(gamma^2/2) ||R^T n T^T||_F^2); with ``trials > 0`` a
    Monte Carlo estimate and its standard error are returned as well.
    """
    R = np.asarray(R, dtype=float)
    T = np.asarray(T, dtype=float)
    n_ = np.asarray(exponents)
    if not np.issubdtype(n_.dtype, np.integer):
        if not np.all(n_ == np.round(n_)):
            raise ValueError("exponents must be integers")
        n_ = n_.astype(int)
    N = R.shape[0]
    if R.shape != (N, N) or T.shape != (N, N) or n_.shape != (N, N):
        raise ValueError("R, T and exponents must be N x N")
    if np.linalg.matrix_rank(R) < N or np.linalg.matrix_rank(T) < N:
        raise ValueError("R and T must be full rank")
    C = R.T @ n_ @ T.T
    closed = float(np.exp(-0.5 * gamma**2 * np.sum(C**2)))
    if trials <= 0:
        return MomentEstimate(closed, complex("nan"), float("nan"))
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((int(trials), N, N))
    A = entrywise_exp(R @ X @ T, gamma)
    vals = np.prod(A ** n_, axis=(1, 2))
    se = float(np.sqrt(np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)) / np.sqrt(trials))
    return MomentEstimate(closed, complex(vals.mean()), se)
