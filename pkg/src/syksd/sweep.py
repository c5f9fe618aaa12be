"""Solution discovery: multi-seed searches, continuation along v, phase diagrams.

Every record leaving this module is converged, has passed the stationarity
discard threshold, carries its symmetry label, action and fits, and is unique
up to the symmetry images of a fixed point (KMS, conjugation and both).
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .action import Scheme, dominant, on_shell_action
from .model import ModelParams
from .observables import STATIONARITY_THRESHOLD, extract_all, stationarity
from .solver import (
    DivergenceError,
    RandomInit,
    SingularKernelError,
    SolutionRecord,
    SolverConfig,
    WarmInit,
    iterate,
)
from .symmetry import Label, Symmetry, orbit_distance
from .timegrid import TimeGrid

log = logging.getLogger(__name__)

DEFAULT_ENFORCEMENT = (
    frozenset(),
    frozenset({Symmetry.KMS}),
    frozenset({Symmetry.CONJ}),
    frozenset({Symmetry.KMS, Symmetry.CONJ}),
)


class Continuation(str, Enum):
    NONE = "NONE"
    BIDIRECTIONAL = "BIDIRECTIONAL"


class Provenance(str, Enum):
    CONTINUATION = "CONTINUATION"
    SYMMETRY_SEEDED = "SYMMETRY_SEEDED"


@dataclass(frozen=True)
class SweepSpec:
    J: float = 5.0
    q: int = 4
    m: float = 1.0
    v_values: tuple = tuple(float(v) for v in range(-5, 6))
    gamma_values: tuple = (0.5, 1.0, 2.0, 3.0, 4.0)
    seeds_per_point: int = 8
    enforcement_set: tuple = DEFAULT_ENFORCEMENT
    continuation: Continuation = Continuation.BIDIRECTIONAL
    base_seed: int = 0
    grid: TimeGrid = TimeGrid()
    solver: SolverConfig = SolverConfig(patience=400)
    # records above the flag threshold are kept but marked non-stationary;
    # records above the discard threshold are dropped
    stationarity_threshold: float = STATIONARITY_THRESHOLD
    discard_threshold: float = 1e-2
    window_fraction: float = 0.1
    dedup_tol: float = 1e-4
    # largest v increment taken by a warm start during continuation
    max_step: float = 0.25
    scheme: Scheme = Scheme.RAW

    def __post_init__(self):
        object.__setattr__(self, "v_values", tuple(float(v) for v in self.v_values))
        object.__setattr__(self, "gamma_values", tuple(float(g) for g in self.gamma_values))
        object.__setattr__(
            self, "enforcement_set", tuple(frozenset(Symmetry(e) for e in s) for s in self.enforcement_set)
        )
        object.__setattr__(self, "continuation", Continuation(self.continuation))
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        ModelParams(v=0.0, gamma=0.0, J=self.J, m=self.m, q=self.q)
        if not self.v_values:
            raise ValueError("v_values must not be empty")
        if not self.gamma_values:
            raise ValueError("gamma_values must not be empty")
        if self.seeds_per_point < 0:
            raise ValueError("seeds_per_point must be >= 0")
        if not self.enforcement_set:
            raise ValueError("enforcement_set must contain at least one subset")
        if self.continuation is Continuation.BIDIRECTIONAL and len(self.v_values) > 1:
            d = np.diff(self.v_values)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("v_values must be strictly monotone for continuation")
        if not 0 < self.stationarity_threshold <= self.discard_threshold:
            raise ValueError("need 0 < stationarity_threshold <= discard_threshold")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")

    def params(self, v: float, gamma: float) -> ModelParams:
        return ModelParams(v=v, gamma=gamma, J=self.J, m=self.m, q=self.q)

    def replace(self, **changes) -> "SweepSpec":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return SweepSpec(**fields)


@dataclass
class Branch:
    label: Label
    points: list  # (v, SolutionRecord)
    provenance: Provenance

    @property
    def v(self) -> list:
        return [v for v, _ in self.points]


@dataclass
class PhasePoint:
    gamma: float
    v: float
    solution_count: int
    labels: frozenset
    dominant: Optional[Label]
    dominance_switch: bool = False
    tie: bool = False
    flagged_count: int = 0
    records: list = field(default_factory=list, repr=False)


# ---------------------------------------------------------------- single solves


def trial_seed(base_seed: int, point_index: int, trial_index: int) -> tuple:
    return (int(base_seed), int(point_index), int(trial_index))


def random_init(seed: tuple) -> RandomInit:
    """Start parameters drawn from the trial seed: amplitude and envelope vary per trial."""
    rng = np.random.default_rng(np.random.SeedSequence([*seed, 1]))
    return RandomInit(seed=seed, amplitude=float(10 ** rng.uniform(-1.3, 0.0)), envelope_tau=float(10 ** rng.uniform(-0.5, 0.5)))


def _solve(params, config, grid) -> Optional[SolutionRecord]:
    try:
        rec = iterate(params, config, grid)
    except (DivergenceError, SingularKernelError) as exc:
        log.debug("solve at %s failed: %s", params, exc)
        return None
    return rec if rec.converged else None


def finalize(record: SolutionRecord, spec: SweepSpec) -> SolutionRecord:
    """Attach stationarity, action and fits in place."""
    st = stationarity(record.G, spec.window_fraction).value
    record.stationarity = st
    record.stationary = st <= spec.stationarity_threshold
    if record.action is None:
        record.action = on_shell_action(record, spec.scheme)
    record.fits = extract_all(record)
    return record


def deduplicate(records: list, tol: float = 1e-4) -> list:
    """Keep the first record of every symmetry orbit, in input order."""
    kept = []
    for r in records:
        if all(orbit_distance(k.G, r.G) >= tol for k in kept):
            kept.append(r)
    return kept


def _keep(record: Optional[SolutionRecord], spec: SweepSpec) -> bool:
    if record is None:
        return False
    return stationarity(record.G, spec.window_fraction).value <= spec.discard_threshold


def _point_index(spec: SweepSpec, params: ModelParams) -> int:
    try:
        gi = spec.gamma_values.index(params.gamma)
    except ValueError:
        gi = len(spec.gamma_values)
    try:
        vi = spec.v_values.index(params.v)
    except ValueError:
        vi = len(spec.v_values)
    return gi * (len(spec.v_values) + 1) + vi


def random_trials(params: ModelParams, spec: SweepSpec, point_index: Optional[int] = None) -> list:
    """Every (seed, enforcement subset) pair; converged records passing the discard threshold."""
    if point_index is None:
        point_index = _point_index(spec, params)
    out = []
    for s in range(spec.seeds_per_point):
        init = random_init(trial_seed(spec.base_seed, point_index, s))
        for enforce in spec.enforcement_set:
            rec = _solve(params, spec.solver.replace(init=init, enforce=enforce), spec.grid)
            if _keep(rec, spec):
                rec.provenance = Provenance.SYMMETRY_SEEDED.value
                out.append(rec)
    return out


def _substeps(v0: float, v1: float, max_step: float) -> np.ndarray:
    n = max(1, int(np.ceil(abs(v1 - v0) / max_step - 1e-9)))
    return np.linspace(v0, v1, n + 1)[1:]


def march(start: SolutionRecord, v_targets, gamma: float, spec: SweepSpec, enforce) -> list:
    """Warm-started continuation from ``start`` through ``v_targets`` in order.

    Intermediate substeps keep each increment below ``spec.max_step``.  A failed
    step leaves the previous solution as the warm start; the target is then a gap.
    Returns (v, record or None) for every target.
    """
    G, v_prev = start.G.values, start.params.v
    out = []
    for vt in v_targets:
        rec_at_target = None
        for v in _substeps(v_prev, vt, spec.max_step):
            rec = _solve(spec.params(float(v), gamma), spec.solver.replace(init=WarmInit(G), enforce=enforce), spec.grid)
            if _keep(rec, spec):
                G = rec.G.values
                rec_at_target = rec
            else:
                rec_at_target = None
        if rec_at_target is not None:
            rec_at_target.provenance = Provenance.CONTINUATION.value
        out.append((float(vt), rec_at_target))
        v_prev = vt
    return out


def _endpoint_starts(spec: SweepSpec, gamma: float, v: float, enforce) -> list:
    params = spec.params(v, gamma)
    idx = _point_index(spec, params)
    starts = []
    for s in range(max(spec.seeds_per_point, 1)):
        init = random_init(trial_seed(spec.base_seed, idx, s))
        rec = _solve(params, spec.solver.replace(init=init, enforce=enforce), spec.grid)
        if _keep(rec, spec):
            starts.append(rec)
    return deduplicate(starts, spec.dedup_tol)


def _ladders(spec: SweepSpec, gamma: float, targets: dict) -> dict:
    """Continuation from both ends of v_values; returns {v: [records]} for the requested targets."""
    found = {v: [] for v in targets}
    vs = list(spec.v_values)
    for direction in (vs, vs[::-1]):
        # stop marching once past the last requested target
        last = max(i for i, v in enumerate(direction) if v in targets)
        path = direction[1 : last + 1]
        for enforce in spec.enforcement_set:
            for start in _endpoint_starts(spec, gamma, direction[0], enforce):
                if direction[0] in found:
                    start.provenance = Provenance.CONTINUATION.value
                    found[direction[0]].append(start)
                for v, rec in march(start, path, gamma, spec, enforce):
                    if rec is not None and v in found:
                        found[v].append(rec)
    return found


def solve_point(params: ModelParams, spec: SweepSpec, point_index: Optional[int] = None) -> list:
    """Distinct converged solutions at one parameter point.

    Random starts under each enforcement subset, plus (with bidirectional
    continuation) warm-started ladders from both ends of ``spec.v_values``.
    """
    records = random_trials(params, spec, point_index)
    if spec.continuation is Continuation.BIDIRECTIONAL and len(spec.v_values) > 1:
        lo, hi = min(spec.v_values), max(spec.v_values)
        if lo <= params.v <= hi:
            ladder_spec = spec.replace(
                v_values=tuple(sorted(set(spec.v_values) | {params.v})), gamma_values=(params.gamma,)
            )
            records += _ladders(ladder_spec, params.gamma, {params.v})[params.v]
    return [finalize(r, spec) for r in deduplicate(records, spec.dedup_tol)]


# ---------------------------------------------------------------- scans


def assemble_branches(per_v: list, continuity: float = 0.5) -> list:
    """Link records at consecutive v into branches of one label.

    ``per_v`` is [(v, [records])] in scan order.  A record joins the branch
    whose last point sits at the previous v with the same label and the
    nearest G, provided the relative L2 distance is below ``continuity``.
    """
    branches: list[Branch] = []
    open_: list[Branch] = []
    for v, records in per_v:
        next_open = []
        taken = set()
        for r in records:
            best, best_d = None, continuity
            for b in open_:
                if id(b) in taken or b.label != r.label.label:
                    continue
                g = b.points[-1][1].G
                d = np.linalg.norm(g.values - r.G.values) / max(g.norm(), r.G.norm())
                if d < best_d:
                    best, best_d = b, d
            if best is None:
                best = Branch(r.label.label, [], Provenance(r.provenance or Provenance.SYMMETRY_SEEDED))
                branches.append(best)
            else:
                taken.add(id(best))
            best.points.append((v, r))
            next_open.append(best)
        open_ = next_open
    return branches


def continuation_scan(spec: SweepSpec, gamma: float) -> list:
    """Bidirectional continuation along spec.v_values at fixed gamma; returns branches."""
    if spec.continuation is not Continuation.BIDIRECTIONAL:
        raise ValueError("continuation_scan requires continuation = BIDIRECTIONAL")
    per_v = scan_records(spec, gamma)
    return assemble_branches([(v, per_v[v]) for v in spec.v_values])


def scan_records(spec: SweepSpec, gamma: float, with_random: bool = False) -> dict:
    """{v: distinct finalized records} from the ladders (and optionally random trials)."""
    if len(spec.v_values) == 1:
        v = spec.v_values[0]
        return {v: solve_point(spec.params(v, gamma), spec)}
    found = _ladders(spec, gamma, set(spec.v_values))
    if with_random:
        for v in spec.v_values:
            found[v] = random_trials(spec.params(v, gamma), spec) + found[v]
    return {v: [finalize(r, spec) for r in deduplicate(recs, spec.dedup_tol)] for v, recs in found.items()}


def _phase_column(args) -> list:
    spec, gamma = args
    if spec.continuation is Continuation.BIDIRECTIONAL and len(spec.v_values) > 1:
        per_v = scan_records(spec, gamma, with_random=True)
    else:
        per_v = {v: solve_point(spec.params(v, gamma), spec) for v in spec.v_values}
    return [_phase_point(gamma, v, per_v[v], spec) for v in spec.v_values]


def _phase_point(gamma: float, v: float, records: list, spec: SweepSpec) -> PhasePoint:
    if records:
        i, tie = dominant(records)
        dom = records[i].label.label
    else:
        dom, tie = None, False
    return PhasePoint(
        gamma=gamma,
        v=v,
        solution_count=len(records),
        labels=frozenset(r.label.label for r in records),
        dominant=dom,
        tie=tie,
        flagged_count=sum(1 for r in records if not r.stationary),
        records=records,
    )


def mark_dominance_switches(points: list) -> list:
    """Flag points whose dominant label differs from the next v at the same gamma."""
    by_gamma: dict = {}
    for p in points:
        by_gamma.setdefault(p.gamma, []).append(p)
    for col in by_gamma.values():
        col.sort(key=lambda p: p.v)
        for a, b in zip(col, col[1:]):
            if a.dominant is not None and b.dominant is not None and a.dominant != b.dominant:
                a.dominance_switch = True
    return points


def phase_diagram(spec: SweepSpec, workers: int = 1) -> list:
    """PhasePoints over gamma_values x v_values, sorted by (gamma, v).

    Each gamma column is one work unit (continuation is sequential along v).
    """
    jobs = [(spec, g) for g in spec.gamma_values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            columns = list(pool.map(_phase_column, jobs))
    else:
        columns = [_phase_column(j) for j in jobs]
    points = [p for col in columns for p in col]
    points.sort(key=lambda p: (p.gamma, p.v))
    return mark_dominance_switches(points)
