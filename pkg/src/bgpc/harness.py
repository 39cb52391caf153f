"""Monte-Carlo success-rate experiments and phase-transition grids.

Trial ``t`` of cell ``c`` always uses seed ``derive_seed(base_seed, c, t)``,
and records are sorted by ``(cell, trial)`` before aggregation, so output
does not depend on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines, synth
from .core import Dims, EtaVector, pack_eta, rsnr
from .initializer import initialize
from .projections import Hybrid, JointRows, PerColumn
from .solvers import SolverConfig, phase_informed_eta0, power_iteration, truncated_power_iteration

SCHEMA = 1
DEFAULT_THRESHOLDS = {0.0: 30.0, 0.1: 20.0, 0.2: 14.0, 0.5: 6.0}
AXIS_NAMES = ("n", "m", "N", "s0", "sigma_w", "delta")
SOLVERS = ("pi", "tpi", "ls", "l1", "l21")
MODES = {"column": PerColumn, "joint": JointRows, "hybrid": Hybrid}


@dataclass
class ExperimentSpec:
    """One experiment: a base ensemble, one or two swept axes and a solver.

    ``couplings`` derive parameters from others per cell, e.g.
    ``{"m": "2*n"}``.  ``init`` is ``ones``, ``phases``, ``corrupted:<fraction>``
    or ``alg3``.  ``s1`` is an integer or a rule ``"<k>*s0"``.
    """

    base: dict
    axes: list
    trials: int = 100
    solver: str = "pi"
    sparsity: str = "column"
    s1: object = "2*s0"
    init: str = "ones"
    couplings: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    max_iters: int = 1000
    tol: float = 1e-9
    beta: object = "estimated"
    alpha: float | None = None
    admm: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("an experiment sweeps one or two axes")
        axes = []
        for name, values in self.axes:
            if name not in AXIS_NAMES:
                raise ValueError(f"unknown axis {name!r}; choose from {AXIS_NAMES}")
            if not len(values):
                raise ValueError(f"axis {name!r} has no values")
            axes.append((name, list(values)))
        self.axes = axes
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.sparsity not in MODES:
            raise ValueError(f"unknown sparsity mode {self.sparsity!r}")
        self.thresholds = {float(k): float(v) for k, v in self.thresholds.items()}
        _parse_init(self.init)
        for target, rule in self.couplings.items():
            if target not in AXIS_NAMES:
                raise ValueError(f"unknown coupling target {target!r}")
            _parse_rule(rule)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = SCHEMA
        d["axes"] = [[k, v] for k, v in self.axes]
        d["thresholds"] = {str(k): v for k, v in self.thresholds.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        schema = d.pop("schema", SCHEMA)
        if schema != SCHEMA:
            raise ValueError(f"unsupported config schema {schema}")
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def cells(self) -> list[dict]:
        """Parameter overrides for every grid cell, first axis slowest."""
        (n1, v1), *rest = self.axes
        out = []
        for a in v1:
            if rest:
                n2, v2 = rest[0]
                for b in v2:
                    out.append({n1: a, n2: b})
            else:
                out.append({n1: a})
        return out


def load_spec(path) -> ExperimentSpec:
    return ExperimentSpec.from_dict(json.loads(Path(path).read_text()))


def save_spec(spec: ExperimentSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")


def _parse_rule(rule) -> tuple[float, str | None]:
    """``"2*n"`` -> ``(2.0, "n")``; a bare number -> ``(value, None)``."""
    if isinstance(rule, (int, float)):
        return float(rule), None
    text = str(rule).replace(" ", "")
    if "*" in text:
        k, name = text.split("*", 1)
        if name not in AXIS_NAMES:
            raise ValueError(f"bad rule {rule!r}")
        return float(k), name
    if text in AXIS_NAMES:
        return 1.0, text
    return float(text), None


def _eval_rule(rule, params: dict) -> float:
    k, name = _parse_rule(rule)
    return k if name is None else k * params[name]


def _parse_init(init: str) -> tuple[str, float]:
    if init in ("ones", "phases", "alg3"):
        return init, 0.0
    if init.startswith("corrupted:"):
        frac = float(init.split(":", 1)[1])
        if not 0 <= frac <= 1:
            raise ValueError("corrupted fraction must lie in [0, 1]")
        return "corrupted", frac
    raise ValueError(f"unknown init {init!r}")


def cell_params(spec: ExperimentSpec, overrides: dict) -> dict:
    p = dict(spec.base)
    p.update(overrides)
    for target, rule in spec.couplings.items():
        p[target] = _eval_rule(rule, p)
    for k in ("n", "m", "N", "s0"):
        if k in p and p[k] is not None:
            p[k] = int(round(p[k]))
    return p


def threshold_for(spec: ExperimentSpec, sigma_w: float) -> float:
    for k, v in spec.thresholds.items():
        if math.isclose(k, sigma_w, rel_tol=1e-9, abs_tol=1e-12):
            return v
    raise KeyError(f"no success threshold configured for sigma_w={sigma_w}")


@dataclass
class TrialRecord:
    cell: int
    coords: tuple
    trial: int
    seed: int
    rsnr_db: float
    success: bool
    iterations: int
    wall_time_s: float
    reason: str = ""


def _eta_from_pair(gamma, X, alpha) -> EtaVector:
    return pack_eta(X, gamma, alpha).normalized()


def run_trial(spec: ExperimentSpec, cell: int, trial: int) -> TrialRecord:
    """Generate one instance, solve it and score the result."""
    overrides = spec.cells()[cell]
    coords = tuple(overrides[name] for name, _ in spec.axes)
    p = cell_params(spec, overrides)
    seed = synth.derive_seed(int(p.get("seed", 0)), cell, trial)
    thr = threshold_for(spec, float(p.get("sigma_w", 0.0)))
    t0 = time.perf_counter()
    try:
        ens = synth.EnsembleSpec.from_dict({**p, "seed": seed})
        inst, truth = synth.gen_instance(ens)
        eta_hat, iters = _solve(spec, p, inst, truth, seed)
        score = rsnr(truth.eta_dot, eta_hat)
        reason = ""
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        score, iters, reason = -math.inf, 0, f"{type(exc).__name__}: {exc}".replace("\n", " ")
    wall = time.perf_counter() - t0
    return TrialRecord(cell, coords, trial, seed, score, bool(score > thr), iters, wall, reason)


def _initial(spec: ExperimentSpec, p: dict, inst, truth, seed: int, alpha: float):
    """Return ``(eta0, gamma0)`` for the configured initialization."""
    kind, frac = _parse_init(spec.init)
    dims = inst.dims
    if kind == "ones":
        phases = np.zeros(dims.n)
    elif kind == "phases":
        phases = truth.phases
    elif kind == "corrupted":
        phases = synth.corrupt_phases(truth.phases, frac, seed)
    else:
        rep = initialize(inst, _s1(spec, p, dims.m), alpha, joint=spec.sparsity == "joint")
        gamma0 = -alpha * rep.eta0.tail
        return rep.eta0, gamma0
    return phase_informed_eta0(phases, dims, alpha), np.exp(-1j * phases)


def _s1(spec: ExperimentSpec, p: dict, m: int) -> int:
    return min(int(round(_eval_rule(spec.s1, p))), m)


def _solve(spec: ExperimentSpec, p: dict, inst, truth, seed: int):
    dims = inst.dims
    alpha = math.sqrt(dims.n) if spec.alpha is None else spec.alpha
    if spec.solver == "ls":
        res = baselines.least_squares(inst)
        return _eta_from_pair(res.gamma, res.X, alpha), 0
    eta0, gamma0 = _initial(spec, p, inst, truth, seed, alpha)
    if spec.solver in ("l1", "l21"):
        cfg = baselines.AdmmConfig(**spec.admm)
        fn = baselines.l1_admm if spec.solver == "l1" else baselines.l21_admm
        res = fn(inst, gamma0, cfg)
        return _eta_from_pair(res.gamma, res.X, alpha), res.iterations
    mode = None
    if spec.solver == "tpi":
        mode = MODES[spec.sparsity](_s1(spec, p, dims.m))
    cfg = SolverConfig(alpha=alpha, beta=spec.beta, max_iters=spec.max_iters, tol=spec.tol, sparsity=mode)
    if mode is None:
        res = power_iteration(inst, eta0, cfg)
    else:
        res = truncated_power_iteration(inst, eta0, cfg)
    return res.eta, res.iterations


@dataclass
class CellResult:
    coords: tuple
    success_rate: float
    trials: int


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    cells: list[CellResult]
    records: list[TrialRecord]

    def rates(self) -> dict:
        return {c.coords: c.success_rate for c in self.cells}


def _run_task(args):
    spec_dict, cell, trial = args
    return run_trial(ExperimentSpec.from_dict(spec_dict), cell, trial)


def run_experiment(spec: ExperimentSpec, workers: int = 1, progress=None) -> ExperimentResult:
    """Run every ``(cell, trial)`` pair and aggregate success rates per cell.

    Solver failures are recorded as unsuccessful trials with a reason tag.
    """
    cells = spec.cells()
    tasks = [(c, t) for c in range(len(cells)) for t in range(spec.trials)]
    if workers <= 1:
        records = []
        for c, t in tasks:
            records.append(run_trial(spec, c, t))
            if progress:
                progress(len(records), len(tasks))
    else:
        payload = spec.to_dict()
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_run_task, [(payload, c, t) for c, t in tasks], chunksize=1))
    records.sort(key=lambda r: (r.cell, r.trial))
    out = []
    for c, overrides in enumerate(cells):
        recs = [r for r in records if r.cell == c]
        coords = tuple(overrides[name] for name, _ in spec.axes)
        out.append(CellResult(coords, sum(r.success for r in recs) / len(recs), len(recs)))
    return ExperimentResult(spec, out, records)


def phase_transition(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    if len(spec.axes) != 2:
        raise ValueError("a phase transition needs exactly two axes")
    return run_experiment(spec, workers)


def _g(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.6g}"


def summary_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    k = len(result.spec.axes)
    w.writerow([f"axis{i + 1}" for i in range(k)] + ["success_rate", "trials"])
    for c in result.cells:
        w.writerow([_g(v) for v in c.coords] + [_g(c.success_rate), _g(c.trials)])
    return buf.getvalue()


TRIAL_COLUMNS = ("cell", "coords", "trial", "seed", "rsnr_db", "success", "iterations", "wall_time_s", "reason")


def trials_csv(result: ExperimentResult, timing: bool = True) -> str:
    """Per-trial records; ``timing=False`` drops the nondeterministic wall-time column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = [c for c in TRIAL_COLUMNS if timing or c != "wall_time_s"]
    w.writerow(cols)
    for r in result.records:
        row = {"cell": _g(r.cell), "coords": " ".join(_g(v) for v in r.coords), "trial": _g(r.trial),
               "seed": str(r.seed), "rsnr_db": _g(r.rsnr_db), "success": _g(r.success),
               "iterations": _g(r.iterations), "wall_time_s": _g(r.wall_time_s), "reason": r.reason}
        w.writerow([row[c] for c in cols])
    return buf.getvalue()


def write_csv(result: ExperimentResult, path, timing: bool = True) -> tuple[Path, Path]:
    """Write ``path`` (cell summary) and the ``*.trials.csv`` sidecar."""
    path = Path(path)
    path.write_text(summary_csv(result))
    side = path.with_suffix(".trials.csv")
    side.write_text(trials_csv(result, timing))
    return path, side


# Grids mirror the figure tick values; "full" uses the 100 trials of the original protocol.
PRESETS = {
    "subspace": dict(base=dict(n=128, m=32, N=16, signal="dense"), axes=[["m", list(range(8, 65, 8))]], solver="pi"),
    "subspace_ls": dict(base=dict(n=128, m=32, N=16, signal="dense"), axes=[["m", list(range(8, 65, 8))]], solver="ls"),
    "subspace_pt_n": dict(base=dict(n=128, m=32, N=16, signal="dense"), axes=[["m", list(range(16, 129, 16))], ["n", [64, 128, 192, 256]]], solver="pi"),
    "subspace_pt_N": dict(base=dict(n=64, m=32, N=16, signal="dense"), axes=[["m", list(range(8, 129, 8))], ["N", [2, 4, 6, 8]]], couplings={"n": "2*m"}, solver="pi"),
    "sparse": dict(base=dict(n=128, m=256, N=16, s0=16, signal="sparse"), axes=[["s0", list(range(8, 65, 8))]], solver="tpi", init="phases"),
    "sparse_l1": dict(base=dict(n=128, m=256, N=16, s0=16, signal="sparse"), axes=[["s0", list(range(8, 65, 8))]], solver="l1", init="phases"),
    "sparse_bad_phase": dict(base=dict(n=128, m=256, N=16, s0=16, signal="sparse"), axes=[["s0", list(range(4, 33, 4))]], solver="tpi", init="corrupted:0.5"),
    "joint": dict(base=dict(n=128, m=256, N=16, s0=16, signal="joint"), axes=[["s0", list(range(8, 65, 8))]], solver="tpi", sparsity="hybrid", init="phases"),
    "joint_l21": dict(base=dict(n=128, m=256, N=16, s0=16, signal="joint"), axes=[["s0", list(range(8, 65, 8))]], solver="l21", init="phases"),
    "sparse_pt_n": dict(base=dict(n=128, m=256, N=16, s0=16, signal="sparse"), axes=[["s0", list(range(4, 41, 4))], ["n", [64, 128, 192, 256]]], couplings={"m": "2*n"}, solver="tpi", init="phases"),
    "sparse_pt_N": dict(base=dict(n=64, m=128, N=16, s0=16, signal="sparse"), axes=[["s0", list(range(4, 41, 4))], ["N", [2, 4, 6, 8]]], couplings={"n": "4*s0", "m": "2*n"}, solver="tpi", init="phases"),
    "init_compare": dict(base=dict(n=128, m=256, N=32, s0=16, sigma_w=0.1, signal="sparse"), axes=[["s0", list(range(4, 41, 4))]], solver="tpi", init="alg3"),
    "init_pt": dict(base=dict(n=256, m=512, N=32, s0=20, sigma_w=0.1, signal="sparse"), axes=[["s0", list(range(4, 41, 4))], ["n", [64, 128, 192, 256]]], couplings={"m": "2*n"}, solver="tpi", init="alg3"),
}


def preset(name: str, full: bool = False, **overrides) -> ExperimentSpec:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    d = json.loads(json.dumps(PRESETS[name]))
    d["trials"] = 100 if full else 20
    d.update(overrides)
    return ExperimentSpec.from_dict(d)


def with_trials(spec: ExperimentSpec, trials: int) -> ExperimentSpec:
    return replace(spec, trials=trials)


__all__ = [
    "ExperimentSpec", "TrialRecord", "ExperimentResult", "run_experiment", "phase_transition",
    "run_trial", "summary_csv", "trials_csv", "write_csv", "preset", "load_spec", "save_spec", "Dims",
]
