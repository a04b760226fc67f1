"""Command-line interface: ``ovkron {spectrum,mutualinfo,mc,gamma-study}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
non-convergence (partial CSV output is kept and marked with a comment).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, dump_normalized, load
from .montecarlo import (McConfig, channel_eigenvalues, default_jobs, gamma_bulk_bound_check,
                         gamma_infinity_moment, gamma_top_singular_check, mutual_info_from_eigenvalues,
                         spectrum_from_eigenvalues)
from .pipeline import (ChannelModel, account_mass, auto_xmax, classical_kronecker_reference, classical_laws,
                       mutual_information_curve, scalar_cauchy_HHstar)
from .scalar import DensityEstimate, default_eta
from .subordination import ConvergenceError, FixedPointConfig

log = logging.getLogger("ovkron")

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2
CHUNK = 64


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_power_grid(spec: str) -> np.ndarray:
    """``start:stop:count`` with an optional ``:log`` suffix."""
    parts = spec.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise UsageError(f"power grid must be start:stop:count[:log], got {spec!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad power grid {spec!r}: {exc}") from None
    if start <= 0 or stop <= 0:
        raise UsageError("powers must be positive")
    if count < 1 or stop < start:
        raise UsageError("power grid needs count >= 1 and stop >= start")
    if len(parts) == 4:
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def _positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {s}")
    return v


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _xmax(s):
    return "auto" if s == "auto" else _positive_float(s)


def resolve_jobs(arg) -> int:
    # the environment variable wins over the flag
    if arg is None or os.environ.get("OVKRON_JOBS"):
        return default_jobs()
    return max(1, int(arg))


class Output:
    """CSV writer that always leads with the reproducibility comment."""

    def __init__(self, path, params: dict):
        self.path = path
        self.lines = [f"# ovkron {__version__} params={json.dumps(params, sort_keys=True)}"]

    def comment(self, text):
        self.lines.append(f"# {text}")

    def row(self, text):
        self.lines.append(text)

    def close(self):
        text = "\n".join(self.lines) + "\n"
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w") as fh:
                fh.write(text)


def _solver_cfg(args) -> FixedPointConfig:
    return FixedPointConfig(tolerance=args.tolerance, max_iterations=args.max_iterations)


def _load_model(args) -> ChannelModel:
    model = load(args.model)
    if args.dump_normalized:
        print(json.dumps(dump_normalized(model), indent=2))
        raise SystemExit(EXIT_OK)
    return model


def _params(args, model=None) -> dict:
    p = {k: v for k, v in vars(args).items() if k not in ("func", "dump_normalized") and v is not None}
    if model is not None:
        p["model_normalized"] = dump_normalized(model)
    return p


def _density(model, xmax, points, eta, cfg, jobs):
    """Density on the uniform grid, chunk by chunk; returns (estimate, error or None)."""
    if xmax == "auto":
        xmax = auto_xmax(model, cfg) if not model.is_zero() else 1.0
    grid = xmax * np.arange(1, points + 1) / points
    eta = default_eta(grid) if eta is None else eta
    if model.is_zero():
        return DensityEstimate(grid, np.zeros(points), float(eta), 1.0, {"xi_max": float(xmax)}), None
    vals = []
    err = None
    for lo in range(0, points, CHUNK):
        z = grid[lo:lo + CHUNK] + 1j * eta
        try:
            res = scalar_cauchy_HHstar(model, z, cfg, jobs=jobs, strict=False, details=True)
        except (ConvergenceError, ArithmeticError, ValueError) as exc:
            err = f"{type(exc).__name__} in grid chunk starting at xi={grid[lo]:.6g}: {exc}"
            break
        v = np.maximum(-res.value.imag / np.pi, 0.0)
        if not np.all(res.converged):
            k = int(np.flatnonzero(~res.converged)[0])
            vals.append(v[:k])
            err = f"non-convergence at xi={grid[lo + k]:.6g} (residual {res.residual[k]:.3e})"
            break
        vals.append(v)
    v = np.concatenate(vals) if vals else np.zeros(0)
    F = DensityEstimate(grid[:v.size], v, float(eta), 0.0, {"xi_max": float(xmax)})
    if err is None:
        try:
            account_mass(model, F, cfg)
        except ConvergenceError as exc:
            err = f"atom probe at 0: {exc}"
    return F, err


def run_spectrum(args) -> int:
    model = _load_model(args)
    cfg = _solver_cfg(args)
    F, err = _density(model, args.xmax, args.points, args.eta, cfg, resolve_jobs(args.jobs))
    out = Output(args.out, _params(args, model))
    out.comment(f"eta={F.eta:.6g} mass_at_zero={F.mass_at_zero:.9g}")
    out.row("xi,density")
    for x, y in zip(F.grid, F.values):
        out.row(f"{x:.12g},{y:.12g}")
    if err:
        out.comment(f"FAILED: {err}")
    out.close()
    return EXIT_NONCONVERGENCE if err else EXIT_OK


def run_mutualinfo(args) -> int:
    powers = parse_power_grid(args.power)
    model = _load_model(args)
    cfg = _solver_cfg(args)
    F, err = _density(model, args.xmax, args.points, args.eta, cfg, resolve_jobs(args.jobs))
    out = Output(args.out, _params(args, model))
    curve = mutual_information_curve(F, powers) if not err else None
    if args.classical:
        out.row("P,info_nats,classical_info_nats")
    else:
        out.row("P,info_nats")
    if err:
        out.comment(f"FAILED: {err}")
        out.close()
        return EXIT_NONCONVERGENCE
    classical = None
    if args.classical:
        r2, t2 = classical_laws(model)
        try:
            classical = classical_kronecker_reference(r2, t2, powers, points=args.points,
                                                      eta=args.eta, xi_max=args.xmax, cfg=cfg)
        except ConvergenceError as exc:
            out.comment(f"FAILED: classical baseline: {exc}")
            out.close()
            return EXIT_NONCONVERGENCE
    for i, (p, v) in enumerate(curve.points):
        row = f"{p:.12g},{v:.12g}"
        if classical is not None:
            row += f",{classical.info[i]:.12g}"
        out.row(row)
    out.close()
    return EXIT_OK


def run_mc(args) -> int:
    model = _load_model(args)
    mc = McConfig(args.block_size, args.trials, args.seed, model)
    eigs = channel_eigenvalues(mc, jobs=resolve_jobs(args.jobs))
    spec = spectrum_from_eigenvalues(eigs, bins=args.bins)
    params = _params(args, model)
    out = Output(args.out, params)
    out.row("bin_left,bin_right,count,frequency")
    for r in spec.histogram_rows():
        out.row(r)
    out.close()
    if args.power:
        mi = Output(args.out_mi, params)
        mi.row("P,info_nats,stderr")
        for p in parse_power_grid(args.power):
            m, se = mutual_info_from_eigenvalues(eigs, p)
            mi.row(f"{p:.12g},{m:.12g},{se:.12g}")
        mi.close()
    return EXIT_OK


def run_gamma_study(args) -> int:
    if not 0 < args.gamma < 1:
        raise UsageError("gamma must lie in (0, 1)")
    rng = np.random.default_rng(args.seed)
    out = Output(args.out, _params(args))
    out.row("quantity,lhs,rhs,slack")
    N = args.n
    violations = 0
    for t in range(args.trials):
        A = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2 * N)
        for check in (gamma_bulk_bound_check, gamma_top_singular_check):
            rep = check(A, args.gamma, strict=False)
            violations += not rep.holds
            out.row(f"{rep.quantity}[{t}],{rep.lhs:.12g},{rep.rhs:.12g},{rep.slack:.12g}")
    n3 = args.moment_n
    R = rng.standard_normal((n3, n3)) / np.sqrt(n3) + np.eye(n3)
    T = rng.standard_normal((n3, n3)) / np.sqrt(n3) + np.eye(n3)
    expo = rng.integers(-1, 2, (n3, n3))
    if not np.any(expo):
        expo[0, 0] = 1
    big = gamma_infinity_moment(R, T, expo, args.moment_gamma)
    out.row(f"moment_closed_form_gamma{args.moment_gamma:g},{big.closed_form:.12g},1e-08,{1e-8 - big.closed_form:.12g}")
    est = gamma_infinity_moment(R, T, expo, 1.0, trials=args.moment_trials, seed=args.seed)
    dev = abs(est.mc_mean - est.closed_form)
    out.row(f"moment_mc_gamma1,{dev:.12g},{3 * est.mc_stderr:.12g},{3 * est.mc_stderr - dev:.12g}")
    if violations:
        out.comment(f"VIOLATIONS: {violations}")
    out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = Parser(prog="ovkron", description="Spectra and mutual information of operator-valued Kronecker channels.")
    p.add_argument("--version", action="version", version=f"ovkron {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log solver diagnostics (repeat for debug)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help="JSON model configuration")
            sp.add_argument("--dump-normalized", action="store_true",
                            help="print the normalized configuration and exit")
        sp.add_argument("--jobs", type=_positive_int, default=None,
                        help="worker threads (default: all cores; OVKRON_JOBS overrides)")
        sp.add_argument("--out", default="-", help="output CSV path (default stdout)")

    def solver(sp):
        sp.add_argument("--tolerance", type=_positive_float, default=1e-12)
        sp.add_argument("--max-iterations", type=_positive_int, default=10000)
        sp.add_argument("--xmax", type=_xmax, default="auto", help="right end of the grid or 'auto'")
        sp.add_argument("--eta", type=_positive_float, default=None,
                        help="imaginary offset for inversion (default 1e-3*span/points)")

    s = sub.add_parser("spectrum", help="density of the HH* spectrum")
    common(s)
    solver(s)
    s.add_argument("--points", type=_positive_int, default=800)
    s.set_defaults(func=run_spectrum)

    m = sub.add_parser("mutualinfo", help="isotropic mutual information curve (nats per receive antenna)")
    common(m)
    solver(m)
    m.add_argument("--power", required=True, help="start:stop:count[:log]")
    m.add_argument("--points", type=_positive_int, default=2000)
    m.add_argument("--classical", action="store_true", help="add the n = 1 Kronecker baseline column")
    m.set_defaults(func=run_mutualinfo)

    c = sub.add_parser("mc", help="Monte Carlo eigenvalue histogram and mutual information")
    common(c)
    c.add_argument("--block-size", type=_positive_int, default=500)
    c.add_argument("--trials", type=_positive_int, default=20)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--bins", type=_positive_int, default=100)
    c.add_argument("--power", default=None, help="also write MC mutual information at start:stop:count[:log]")
    c.add_argument("--out-mi", default="-", help="mutual information CSV path")
    c.set_defaults(func=run_mc)

    g = sub.add_parser("gamma-study", help="check the small-gamma singular value bounds")
    common(g, model=False)
    g.add_argument("--n", type=_positive_int, default=100)
    g.add_argument("--gamma", type=_positive_float, default=0.01)
    g.add_argument("--trials", type=_positive_int, default=50)
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--moment-n", type=_positive_int, default=3)
    g.add_argument("--moment-gamma", type=_positive_float, default=100.0)
    g.add_argument("--moment-trials", type=_positive_int, default=20000)
    g.set_defaults(func=run_gamma_study)
    return p


def _exit_code(exc: SystemExit) -> int:
    return exc.code if isinstance(exc.code, int) else (EXIT_OK if exc.code is None else EXIT_USAGE)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return _exit_code(exc)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s %(message)s")
    try:
        return args.func(args)
    except SystemExit as exc:
        return _exit_code(exc)
    except (ConfigError, UsageError) as exc:
        print(f"ovkron: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"ovkron: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
