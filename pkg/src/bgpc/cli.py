"""Command-line interface: ``bgpc <subcommand> ...``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, cmatrix, harness, synth
from .core import Dims, EtaVector, ProblemInstance, gains_from_eta, rsnr, safe_reciprocal, unpack_eta
from .initializer import initialize
from .operators import CalibrationOperator, resolve_beta
from .projections import Hybrid, JointRows, PerColumn
from .rendering import sh_basis
from .solvers import DegenerateIterationError, SolverConfig, baseline_eta0, phase_informed_eta0, power_iteration, \
    truncated_power_iteration

REPORT_SCHEMA = 1
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _json_num(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _beta_arg(text: str):
    if text in ("estimated", "theory"):
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("beta must be 'estimated', 'theory' or a positive number") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("beta must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bgpc", description="Blind gain and phase calibration by power iteration.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a calibration problem from cmatrix files")
    s.add_argument("--a", required=True, help="measurement matrix A (n x m)")
    s.add_argument("--y", required=True, help="observations Y (n x N)")
    s.add_argument("--solver", choices=["pi", "tpi", "ls", "l1", "l21"], default="pi")
    s.add_argument("--s1", type=int, help="sparsity level (required for tpi)")
    s.add_argument("--sparsity", choices=["column", "joint", "hybrid"], default="column")
    s.add_argument("--init", nargs="+", default=["ones"], metavar="KIND",
                   help="'ones', 'alg3' or 'phases FILE' (one phase in radians per line)")
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=_beta_arg, default="estimated")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--max-iters", type=int, default=1000)
    s.add_argument("--truth", help="unit-norm ground-truth eta (cmatrix, one column) to score against")
    s.add_argument("--out", required=True, help="output prefix")

    for name in ("experiment", "phase-transition"):
        e = sub.add_parser(name, help=f"run a Monte-Carlo {name}")
        src = e.add_mutually_exclusive_group()
        src.add_argument("--config", help="JSON experiment config (schema 1)")
        src.add_argument("--preset", choices=sorted(harness.PRESETS))
        e.add_argument("--full", action="store_true", help="100 trials per cell (figure scale)")
        e.add_argument("--fast", action="store_true", help="20 trials per cell")
        e.add_argument("--trials", type=int)
        e.add_argument("--workers", type=int, default=1)
        e.add_argument("--seed", type=int)
        e.add_argument("--out", help="summary CSV path; a .trials.csv sidecar is written next to it")
        e.add_argument("--no-timing", action="store_true", help="omit wall times from the sidecar")
        if name == "experiment":
            e.add_argument("--emit-instance", metavar="PREFIX", help="write one synthetic instance and exit")
            e.add_argument("--n", type=int, default=32)
            e.add_argument("--m", type=int, default=8)
            e.add_argument("--N", type=int, default=8)
            e.add_argument("--signal", choices=sorted(synth.SIGNALS), default="dense")
            e.add_argument("--s0", type=int)
            e.add_argument("--sigma-w", type=float, default=0.0)
            e.add_argument("--delta", type=float, default=0.1)

    i = sub.add_parser("init", help="spectral initialization from cmatrix files")
    i.add_argument("--a", required=True)
    i.add_argument("--y", required=True)
    i.add_argument("--s1", type=int, required=True)
    i.add_argument("--joint", action="store_true", help="rank rows by norms summed over snapshots")
    i.add_argument("--alpha", type=float)
    i.add_argument("--out", required=True)

    b = sub.add_parser("sh-basis", help="9-term spherical-harmonic basis from surface normals")
    b.add_argument("--normals", required=True, help="text file with n rows of 3 floats")
    b.add_argument("--out", required=True)

    c = sub.add_parser("convert", help="convert between .cmat and .csv (re,im pairs)")
    c.add_argument("src")
    c.add_argument("dst")
    return p


def _read(path) -> np.ndarray:
    return cmatrix.read(path)


def _init_eta(args, inst: ProblemInstance, alpha: float) -> tuple[EtaVector, np.ndarray]:
    kind = args.init[0]
    if kind == "ones" and len(args.init) == 1:
        eta0 = baseline_eta0(inst.dims, alpha)
        return eta0, np.ones(inst.dims.n, dtype=complex)
    if kind == "phases" and len(args.init) == 2:
        phases = np.loadtxt(args.init[1], dtype=float, ndmin=1)
        eta0 = phase_informed_eta0(phases, inst.dims, alpha)
        return eta0, np.exp(-1j * phases)
    if kind == "alg3" and len(args.init) == 1:
        if args.s1 is None:
            raise UsageError("--init alg3 needs --s1")
        rep = initialize(inst, args.s1, alpha, joint=args.sparsity == "joint")
        return rep.eta0, -alpha * rep.eta0.tail
    raise UsageError("--init must be 'ones', 'alg3' or 'phases FILE'")


def cmd_solve(args) -> int:
    if args.solver == "tpi" and args.s1 is None:
        raise UsageError("--solver tpi requires --s1")
    inst = ProblemInstance(_read(args.a), _read(args.y))
    alpha = math.sqrt(inst.dims.n) if args.alpha is None else args.alpha
    t0 = time.perf_counter()
    report = {"schema": REPORT_SCHEMA, "solver": args.solver}
    if args.solver == "ls":
        res = baselines.least_squares(inst)
        gamma, X = res.gamma, res.X
        report.update(iterations=0, converged=True)
        eta = _pair_eta(X, gamma, alpha)
        lam = safe_reciprocal(gamma)
    else:
        eta0, gamma0 = _init_eta(args, inst, alpha)
        if args.solver in ("l1", "l21"):
            fn = baselines.l1_admm if args.solver == "l1" else baselines.l21_admm
            res = fn(inst, gamma0, baselines.AdmmConfig(max_iters=args.max_iters))
            gamma, X = res.gamma, res.X
            report.update(iterations=res.iterations, converged=res.converged)
            eta = _pair_eta(X, gamma, alpha)
            lam = safe_reciprocal(gamma)
        else:
            mode = None
            if args.solver == "tpi":
                mode = {"column": PerColumn, "joint": JointRows, "hybrid": Hybrid}[args.sparsity](args.s1)
            cfg = SolverConfig(alpha=alpha, beta=args.beta, max_iters=args.max_iters, tol=args.tol, sparsity=mode)
            fn = power_iteration if mode is None else truncated_power_iteration
            res = fn(inst, eta0, cfg)
            eta = res.eta
            X, _ = unpack_eta(eta)
            lam = gains_from_eta(eta)
            report.update(iterations=res.iterations, converged=res.converged, beta=res.beta)
    report["wall_time_s"] = time.perf_counter() - t0
    if args.truth:
        truth = _read(args.truth).reshape(-1)
        report["rsnr_db"] = _json_num(rsnr(truth / np.linalg.norm(truth), eta.data))
    report["config"] = {"alpha": alpha, "beta": args.beta, "tol": args.tol, "max_iters": args.max_iters,
                        "s1": args.s1, "sparsity": args.sparsity, "init": args.init[0]}
    out = Path(args.out)
    cmatrix.write(f"{out}.lambda.cmat", lam.reshape(-1, 1))
    cmatrix.write(f"{out}.x.cmat", X)
    Path(f"{out}.report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


def _pair_eta(X, gamma, alpha) -> EtaVector:
    from .core import pack_eta
    return pack_eta(X, gamma, alpha).normalized()


def _experiment_spec(args) -> harness.ExperimentSpec:
    if args.config:
        spec = harness.load_spec(args.config)
        if args.full:
            spec = harness.with_trials(spec, 100)
        elif args.fast:
            spec = harness.with_trials(spec, 20)
    elif args.preset:
        spec = harness.preset(args.preset, full=args.full)
    else:
        raise UsageError("give --config or --preset")
    if args.trials:
        spec = harness.with_trials(spec, args.trials)
    if args.seed is not None:
        spec.base = {**spec.base, "seed": args.seed}
    return spec


def _emit_instance(args) -> int:
    d = {"n": args.n, "m": args.m, "N": args.N, "signal": args.signal, "sigma_w": args.sigma_w,
         "delta": args.delta, "seed": args.seed or 0}
    if args.signal != "dense":
        if args.s0 is None:
            raise UsageError(f"--signal {args.signal} needs --s0")
        d["s0"] = args.s0
    inst, truth = synth.gen_instance(synth.EnsembleSpec.from_dict(d))
    pre = args.emit_instance
    cmatrix.write(f"{pre}.a.cmat", inst.A)
    cmatrix.write(f"{pre}.y.cmat", inst.Y)
    cmatrix.write(f"{pre}.eta.cmat", truth.eta_dot.data.reshape(-1, 1))
    cmatrix.write(f"{pre}.lambda.cmat", truth.lam.reshape(-1, 1))
    np.savetxt(f"{pre}.phases.txt", truth.phases, fmt="%.17g")
    return 0


def cmd_experiment(args, two_axes: bool = False) -> int:
    if getattr(args, "emit_instance", None):
        return _emit_instance(args)
    spec = _experiment_spec(args)
    if two_axes and len(spec.axes) != 2:
        raise UsageError("phase-transition needs a config with exactly two axes")
    result = harness.run_experiment(spec, workers=args.workers)
    if args.out:
        harness.write_csv(result, args.out, timing=not args.no_timing)
    else:
        sys.stdout.write(harness.summary_csv(result))
    return 0


def cmd_init(args) -> int:
    inst = ProblemInstance(_read(args.a), _read(args.y))
    rep = initialize(inst, args.s1, args.alpha, joint=args.joint)
    cmatrix.write(f"{args.out}.eta0.cmat", rep.eta0.data.reshape(-1, 1))
    info = {"schema": REPORT_SCHEMA, "singular_value": rep.singular_value, "iterations": rep.iterations,
            "supports": [T.tolist() for T in rep.supports]}
    Path(f"{args.out}.init.json").write_text(json.dumps(info) + "\n")
    return 0


def cmd_sh_basis(args) -> int:
    try:
        normals = np.loadtxt(args.normals, dtype=float, ndmin=2)
    except ValueError as exc:
        raise cmatrix.ParseError(str(exc), path=args.normals) from None
    cmatrix.write(args.out, sh_basis(normals))
    return 0


def cmd_convert(args) -> int:
    src, dst = Path(args.src), Path(args.dst)
    if src.suffix == ".cmat" and dst.suffix == ".csv":
        dst.write_text(cmatrix.to_csv_pairs(cmatrix.read(src)))
    elif src.suffix == ".csv" and dst.suffix == ".cmat":
        cmatrix.write(dst, cmatrix.from_csv_pairs(src.read_text()))
    else:
        raise UsageError("convert maps .cmat <-> .csv")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "experiment": cmd_experiment,
        "phase-transition": lambda a: cmd_experiment(a, two_axes=True),
        "init": cmd_init,
        "sh-basis": cmd_sh_basis,
        "convert": cmd_convert,
    }
    try:
        return handlers[args.cmd](args)
    except (UsageError, cmatrix.ParseError, FileNotFoundError, ValueError) as exc:
        if isinstance(exc, ValueError) and not isinstance(exc, cmatrix.ParseError) and _numeric(exc):
            print(f"bgpc: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"bgpc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateIterationError, baselines.AdmmDivergenceError, np.linalg.LinAlgError) as exc:
        print(f"bgpc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _numeric(exc: ValueError) -> bool:
    msg = str(exc)
    return any(k in msg for k in ("zero matrix", "numerically zero", "zero operator", "singular", "annihilated"))


if __name__ == "__main__":
    sys.exit(main())
