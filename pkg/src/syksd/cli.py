"""Command-line interface: ``syksd {solve,scan,phase,free,fit}``.

Every run reads an optional JSON config (flat object, field names as in
``RunConfig``), applies command-line overrides of the same names, and writes
the fully resolved config to ``<output_dir>/config.json`` beside its outputs.

Exit codes: 0 success, 1 usage or config error, 2 no qualifying solution.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .action import ActionValue, Scheme, on_shell_action
from .model import ModelParams, free_green_matrix, heisenberg_evolve
from .observables import DecayFit, extract_all, stationarity
from .solver import SolutionRecord, SolverConfig, self_energy
from .sweep import (
    Continuation,
    SweepSpec,
    continuation_scan,
    phase_diagram,
    solve_point,
)
from .symmetry import LABEL_ORDER, Symmetry, TwoPointFunction, classify
from .timegrid import TimeGrid

log = logging.getLogger("syksd")

EXIT_OK, EXIT_CONFIG, EXIT_NO_SOLUTION = 0, 1, 2
COMPONENT_NAMES = ("pp", "pm", "mp", "mm")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # model
    v: float = 1.0
    gamma: float = 4.0
    J: float = 5.0
    m: float = 1.0
    q: int = 4
    # grid
    period: float = 50.0
    n_points: int = 4096
    # solver
    alpha: float = 0.5
    max_iterations: int = 5000
    convergence_tol: float = 1e-9
    regularizer: float = 0.0
    min_alpha: float = 1 / 64
    patience: Optional[int] = 400
    # sweep
    v_values: list = field(default_factory=lambda: [float(v) for v in range(-5, 6)])
    gamma_values: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0, 4.0])
    seeds_per_point: int = 8
    enforcement_set: list = field(default_factory=lambda: [[], ["KMS"], ["CONJ"], ["KMS", "CONJ"]])
    continuation: str = "BIDIRECTIONAL"
    stationarity_threshold: float = 1e-4
    discard_threshold: float = 1e-2
    window_fraction: float = 0.1
    dedup_tol: float = 1e-4
    max_step: float = 0.25
    scheme: str = "RAW"
    # free theory: Heisenberg initial data (X+, P-, X-, P+)
    initial: list = field(default_factory=lambda: [0.0, 0.0, 1.0, 0.0])
    # run
    output_dir: str = "syksd-out"
    base_seed: int = 0

    # ------------------------------------------------------------ conversion
    def params(self) -> ModelParams:
        return ModelParams(v=self.v, gamma=self.gamma, J=self.J, m=self.m, q=self.q)

    def grid(self) -> TimeGrid:
        return TimeGrid(self.period, self.n_points)

    def solver(self) -> SolverConfig:
        return SolverConfig(
            alpha=self.alpha,
            max_iterations=self.max_iterations,
            convergence_tol=self.convergence_tol,
            regularizer=self.regularizer,
            min_alpha=self.min_alpha,
            patience=self.patience,
        )

    def sweep(self) -> SweepSpec:
        return SweepSpec(
            J=self.J,
            q=self.q,
            m=self.m,
            v_values=tuple(self.v_values),
            gamma_values=tuple(self.gamma_values),
            seeds_per_point=self.seeds_per_point,
            enforcement_set=tuple(frozenset(s) for s in self.enforcement_set),
            continuation=Continuation(self.continuation),
            base_seed=self.base_seed,
            grid=self.grid(),
            solver=self.solver(),
            stationarity_threshold=self.stationarity_threshold,
            discard_threshold=self.discard_threshold,
            window_fraction=self.window_fraction,
            dedup_tol=self.dedup_tol,
            max_step=self.max_step,
            scheme=Scheme(self.scheme),
        )

    def validate(self) -> None:
        """Build every derived object once so that errors surface before any output."""
        for name, build in (("model", self.params), ("grid", self.grid), ("solver", self.solver), ("sweep", self.sweep)):
            try:
                build()
            except (ValueError, TypeError, KeyError) as exc:
                raise ConfigError(f"invalid {name} settings: {exc}") from None
        if len(self.initial) != 4:
            raise ConfigError("initial must list 4 numbers (X+, P-, X-, P+)")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value):
    """Check a JSON value against the declared type of field ``name``."""
    f = _FIELDS[name]
    default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
    if name == "patience" and value is None:
        return None
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int) or name == "patience":
        ok = isinstance(value, int) and not isinstance(value, bool) or (isinstance(value, float) and value.is_integer())
        value = int(value) if ok else value
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, list):
        ok = isinstance(value, list)
    else:
        ok = True
    if not ok:
        raise ConfigError(f"field '{name}': expected {type(default).__name__}, got {value!r}")
    return value


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    data = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in data.items()})
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- serialization


def _fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def _fit_dict(fit: Optional[DecayFit]):
    if fit is None:
        return None
    d = {k: getattr(fit, k) for k in ("amplitude", "decay_rate", "frequency", "oscillatory", "fit_residual", "maxima_used")}
    d["component"] = list(fit.component)
    d["imag"] = _fit_dict(fit.imag)
    return d


def _action_dict(a: ActionValue) -> dict:
    return {
        "scheme": a.scheme.value,
        "density": [a.density.real, a.density.imag],
        "logdet_part": [a.logdet_part.real, a.logdet_part.imag],
        "interaction_part": [a.interaction_part.real, a.interaction_part.imag],
    }


def record_metadata(rec: SolutionRecord) -> dict:
    return {
        "params": dataclasses.asdict(rec.params),
        "grid": {"period": rec.G.grid.period, "n_points": rec.G.grid.n_points},
        "label": rec.label.label.value,
        "nu_kms": rec.label.nu_kms,
        "nu_conj": rec.label.nu_conj,
        "action": _action_dict(rec.action) if rec.action is not None else None,
        "stationarity": rec.stationarity,
        "stationary": rec.stationary,
        "converged": rec.converged,
        "iterations": rec.iterations,
        "update_norm": rec.update_norm,
        "regularized": rec.regularized,
        "provenance": rec.provenance,
        "enforce": sorted(s.value for s in rec.config.enforce),
        "fits": [_fit_dict(f) for f in rec.fits],
    }


def write_green_csv(path: Path, grid: TimeGrid, values: np.ndarray) -> None:
    """Columns t, then Re/Im of (++, +-, -+, --), rows in ascending t."""
    order = np.fft.fftshift(np.arange(grid.n_points))
    header = ["t"] + [f"{p}_{c}" for c in COMPONENT_NAMES for p in ("re", "im")]
    flat = values.reshape(4, -1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k in order:
            row = [_fmt(grid.times[k])]
            for c in range(4):
                row += [_fmt(flat[c, k].real), _fmt(flat[c, k].imag)]
            w.writerow(row)


def read_green_csv(path: Path, grid: TimeGrid) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.n_points, 9):
        raise ValueError(f"{path}: expected {grid.n_points} rows of 9 columns, got {data.shape}")
    z = data[:, 1::2] + 1j * data[:, 2::2]
    values = np.fft.ifftshift(z.T, axes=-1).reshape(2, 2, -1)
    return values


def write_solution(out: Path, ident: int, rec: SolutionRecord) -> None:
    meta = record_metadata(rec)
    meta["id"] = ident
    (out / f"solution-{ident}.json").write_text(json.dumps(meta, indent=2) + "\n")
    write_green_csv(out / f"solution-{ident}.csv", rec.G.grid, rec.G.values)


def load_solution(json_path) -> tuple[SolutionRecord, dict]:
    """Rebuild a record from solution-<id>.json/.csv, recomputing label, action and fits."""
    json_path = Path(json_path)
    meta = json.loads(json_path.read_text())
    grid = TimeGrid(**meta["grid"])
    params = ModelParams(**meta["params"])
    G = TwoPointFunction(grid, read_green_csv(json_path.with_suffix(".csv"), grid))
    rec = SolutionRecord(
        G=G,
        sigma=self_energy(G, params),
        params=params,
        config=SolverConfig(enforce=frozenset(meta.get("enforce", []))),
        converged=meta["converged"],
        iterations=meta["iterations"],
        update_norm=meta["update_norm"],
        label=classify(G),
        regularized=meta.get("regularized", False),
        provenance=meta.get("provenance"),
    )
    if meta.get("action") is not None:
        rec.action = on_shell_action(rec, meta["action"]["scheme"])
    rec.stationarity = stationarity(G).value
    rec.stationary = meta.get("stationary")
    rec.fits = extract_all(rec)
    return rec, meta


# ---------------------------------------------------------------- commands


def _prepare_output(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    return out


def cmd_solve(cfg: RunConfig, workers: int) -> int:
    records = solve_point(cfg.params(), cfg.sweep())
    out = _prepare_output(cfg)
    for i, rec in enumerate(records):
        write_solution(out, i, rec)
    good = [r for r in records if r.converged and r.stationary]
    print(f"{len(records)} solution(s), {len(good)} stationary -> {out}")
    return EXIT_OK if good else EXIT_NO_SOLUTION


def _fit_values(fit: Optional[DecayFit]):
    if fit is None:
        return "", ""
    return _fmt(fit.decay_rate), "" if fit.frequency is None else _fmt(fit.frequency)


BRANCH_COLUMNS = [
    "branch_id", "label", "v", "Re_action", "Im_action",
    "Gamma_pp", "Omega_pp", "Gamma_pm", "Omega_pm", "stationarity", "converged",
]


def cmd_scan(cfg: RunConfig, workers: int) -> int:
    spec = cfg.sweep()
    if spec.continuation is not Continuation.BIDIRECTIONAL:
        spec = spec.replace(continuation=Continuation.BIDIRECTIONAL)
    branches = continuation_scan(spec, cfg.gamma)
    out = _prepare_output(cfg)
    with open(out / "branches.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BRANCH_COLUMNS)
        for bid, b in enumerate(branches):
            for v, r in b.points:
                g_pp, o_pp = _fit_values(r.fits[0])
                g_pm, o_pm = _fit_values(r.fits[1])
                w.writerow([
                    bid, b.label.value, _fmt(v), _fmt(r.action.density.real), _fmt(r.action.density.imag),
                    g_pp, o_pp, g_pm, o_pm, _fmt(r.stationarity), int(r.converged),
                ])
    print(f"{len(branches)} branch(es) -> {out / 'branches.csv'}")
    return EXIT_OK if branches else EXIT_NO_SOLUTION


def cmd_phase(cfg: RunConfig, workers: int) -> int:
    points = phase_diagram(cfg.sweep(), workers=workers)
    out = _prepare_output(cfg)
    with open(out / "phase.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "v", "solution_count", "labels", "dominant", "dominance_switch"])
        for p in points:
            labels = ";".join(l.value for l in LABEL_ORDER if l in p.labels)
            w.writerow([_fmt(p.gamma), _fmt(p.v), p.solution_count, labels,
                        p.dominant.value if p.dominant else "", int(p.dominance_switch)])
    print(f"{len(points)} point(s) -> {out / 'phase.csv'}")
    return EXIT_OK if any(p.solution_count for p in points) else EXIT_NO_SOLUTION


def cmd_free(cfg: RunConfig, workers: int) -> int:
    if cfg.v <= 0:
        raise ConfigError(f"free requires v > 0 (oscillatory closed form), got v={cfg.v}")
    params, grid = cfg.params().replace(J=0.0), cfg.grid()
    out = _prepare_output(cfg)
    write_green_csv(out / "free_green.csv", grid, free_green_matrix(params, grid.times))
    t = np.arange(grid.n_points // 2 + 1) * grid.dt
    traj = heisenberg_evolve(params, cfg.initial, t)
    with open(out / "heisenberg.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        names = ("Xp", "Pm", "Xm", "Pp")
        w.writerow(["t"] + [f"{p}_{n}" for n in names for p in ("re", "im")])
        for k in range(t.size):
            row = [_fmt(t[k])]
            for z in traj:
                row += [_fmt(z[k].real), _fmt(z[k].imag)]
            w.writerow(row)
    print(f"free Green's function and trajectories -> {out}")
    return EXIT_OK


def cmd_fit(cfg: RunConfig, workers: int, source: Optional[str] = None) -> int:
    src = Path(source or cfg.output_dir)
    paths = sorted(src.glob("solution-*.json"), key=lambda p: int(p.stem.split("-")[1]))
    if not paths:
        print(f"no solution-*.json files in {src}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    rows = []
    for p in paths:
        rec, meta = load_solution(p)
        for name, fit in zip(COMPONENT_NAMES, rec.fits):
            if fit is None:
                rows.append([meta["id"], name, "", "", "", "", "", ""])
            else:
                rows.append([
                    meta["id"], name, _fmt(fit.amplitude), _fmt(fit.decay_rate),
                    "" if fit.frequency is None else _fmt(fit.frequency),
                    int(fit.oscillatory), _fmt(fit.fit_residual), fit.maxima_used,
                ])
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "fits.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["solution_id", "component", "amplitude", "decay_rate", "frequency",
                    "oscillatory", "fit_residual", "maxima_used"])
        w.writerows(rows)
    print(f"refitted {len(paths)} solution(s) -> {out / 'fits.csv'}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "scan": cmd_scan, "phase": cmd_phase, "free": cmd_free, "fit": cmd_fit}


# ---------------------------------------------------------------- argument parsing


def _list_of_floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()] if text.strip() else []


def _enforcement(text: str) -> list:
    """'none,KMS,CONJ,KMS+CONJ' -> [[], ['KMS'], ['CONJ'], ['KMS', 'CONJ']]"""
    out = []
    for part in text.split(","):
        part = part.strip()
        out.append([] if part.lower() in ("", "none") else [Symmetry(s.strip().upper()).value for s in part.split("+")])
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syksd", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--debug", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, allow_abbrev=False)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $SYK_SD_WORKERS or CPU count)")
        if name == "fit":
            p.add_argument("source", nargs="?", help="directory holding solution-*.json (default: output_dir)")
        for f in dataclasses.fields(RunConfig):
            flag = "--" + f.name.replace("_", "-")
            if f.name in ("v_values", "gamma_values", "initial"):
                p.add_argument(flag, dest=f.name, type=_list_of_floats, metavar="X,Y,...")
            elif f.name == "enforcement_set":
                p.add_argument(flag, dest=f.name, type=_enforcement, metavar="none,KMS,CONJ,KMS+CONJ")
            elif f.name == "v":
                p.add_argument("--v", dest="v", type=float)
            else:
                typ = {int: int, float: float, str: str}.get(type(f.default), float)
                if f.name == "patience":
                    typ = int
                p.add_argument(flag, dest=f.name, type=typ)
    return parser


def resolve_workers(flag: Optional[int]) -> int:
    if flag is not None:
        if flag < 1:
            raise ConfigError("--workers must be >= 1")
        return flag
    env = os.environ.get("SYK_SD_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"SYK_SD_WORKERS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("SYK_SD_WORKERS must be >= 1")
        return n
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.debug else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(RunConfig)}
    try:
        cfg = load_config(args.config, overrides)
        workers = resolve_workers(args.workers)
        if args.command == "fit":
            return cmd_fit(cfg, workers, args.source)
        return COMMANDS[args.command](cfg, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
