from types import SimpleNamespace

import numpy as np
import pytest

from syksd.model import ModelParams
from syksd.observables import stationarity
from syksd.solver import fixed_point_residual
from syksd.sweep import (
    Branch,
    Continuation,
    PhasePoint,
    Provenance,
    SweepSpec,
    _substeps,
    assemble_branches,
    deduplicate,
    mark_dominance_switches,
    random_init,
    solve_point,
    trial_seed,
)
from syksd.symmetry import Label, Symmetry, SymmetryLabel, TwoPointFunction, conj_image, kms_image
from syksd.timegrid import TimeGrid

SMALL = TimeGrid(50.0, 64)


def rec(values, label=Label.KC, grid=SMALL, provenance=None):
    return SimpleNamespace(
        G=TwoPointFunction(grid, values), label=SymmetryLabel(label, 0.0, 0.0), provenance=provenance
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(v_values=()),
        dict(gamma_values=()),
        dict(v_values=(0.0, 1.0, 0.5)),
        dict(q=3),
        dict(seeds_per_point=-1),
        dict(enforcement_set=()),
        dict(stationarity_threshold=1e-1, discard_threshold=1e-2),
        dict(max_step=0.0),
        dict(enforcement_set=[["SPIN"]]),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_spec_accepts_non_monotone_without_continuation():
    s = SweepSpec(v_values=(0.0, 1.0, 0.5), continuation="NONE")
    assert s.continuation is Continuation.NONE
    assert s.enforcement_set[1] == frozenset({Symmetry.KMS})


def test_seeds_are_deterministic_and_distinct():
    a = random_init(trial_seed(0, 3, 1))
    assert a == random_init(trial_seed(0, 3, 1))
    others = {random_init(trial_seed(b, p, t)) for b in (0, 1) for p in (0, 3) for t in (0, 1)}
    assert len(others) == 8
    assert 10**-1.3 <= a.amplitude <= 1.0
    assert 10**-0.5 <= a.envelope_tau <= 10**0.5


@pytest.mark.parametrize("v0,v1,step,n", [(0.0, 1.0, 0.25, 4), (1.0, 0.0, 0.3, 4), (0.0, 0.2, 0.25, 1)])
def test_substeps(v0, v1, step, n):
    s = _substeps(v0, v1, step)
    assert len(s) == n and s[-1] == v1
    assert np.all(np.abs(np.diff(np.concatenate([[v0], s]))) <= step + 1e-12)


def test_deduplicate_modulo_symmetry_images(rng):
    base = rng.standard_normal((2, 2, 64)) + 1j * rng.standard_normal((2, 2, 64))
    other = rng.standard_normal((2, 2, 64)) + 1j * rng.standard_normal((2, 2, 64))
    recs = [
        rec(base),
        rec(kms_image(base, SMALL.reflect)),
        rec(conj_image(base)),
        rec(base * (1 + 1e-6)),
        rec(other),
    ]
    kept = deduplicate(recs, 1e-4)
    assert [id(k) for k in kept] == [id(recs[0]), id(recs[4])]


def test_assemble_branches_splits_on_label_and_jumps(rng):
    a = rng.standard_normal((2, 2, 64)) + 0j
    b = rng.standard_normal((2, 2, 64)) + 0j
    per_v = [
        (0.0, [rec(a), rec(b, Label.C)]),
        (1.0, [rec(a * 1.01), rec(b * 1.02, Label.C)]),
        (2.0, [rec(a * 1.02, Label.K), rec(-b, Label.C)]),  # label change, then a jump
    ]
    branches = assemble_branches(per_v)
    summary = sorted((br.label.value, tuple(br.v)) for br in branches)
    assert summary == [("C", (0.0, 1.0)), ("C", (2.0,)), ("K", (2.0,)), ("KC", (0.0, 1.0))]
    assert all(isinstance(br, Branch) and br.provenance is Provenance.SYMMETRY_SEEDED for br in branches)


def test_dominance_switch_flags():
    pts = [PhasePoint(4.0, v, 1, frozenset(), d) for v, d in ((0.0, Label.C), (1.0, Label.K), (2.0, Label.K), (3.0, None))]
    pts.append(PhasePoint(2.0, 0.0, 1, frozenset(), Label.KC))
    mark_dominance_switches(pts)
    assert [p.dominance_switch for p in pts] == [True, False, False, False, False]


@pytest.fixture(scope="module")
def decaying_point():
    spec = SweepSpec(v_values=(-4.0,), gamma_values=(4.0,), seeds_per_point=2, continuation="NONE")
    return spec, solve_point(spec.params(-4.0, 4.0), spec)


def test_single_point_spec_is_multiseed_solve(decaying_point):
    spec, records = decaying_point
    assert len(records) >= 1
    for r in records:
        assert r.converged and r.label.label is Label.KC
        assert fixed_point_residual(r.G, r.params) <= 1e-9
        assert r.stationarity == stationarity(r.G).value <= spec.discard_threshold
        assert r.action is not None and len(r.fits) == 4
        assert r.provenance == Provenance.SYMMETRY_SEEDED.value


def test_solve_point_is_deterministic(decaying_point):
    spec, records = decaying_point
    again = solve_point(spec.params(-4.0, 4.0), spec)
    assert len(again) == len(records)
    for a, b in zip(records, again):
        np.testing.assert_array_equal(a.G.values, b.G.values)
