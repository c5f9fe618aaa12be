import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from syksd.observables import (
    FitError,
    InsufficientMaximaError,
    InsufficientOscillationsError,
    classify_oscillatory,
    extract_all,
    extrema_positions,
    fit_decay,
    fit_frequency,
    stationarity,
)
from syksd.symmetry import TwoPointFunction
from syksd.timegrid import TimeGrid

GRID = TimeGrid()
T = GRID.times


def damped(A, gamma, omega, t=T):
    return A * np.exp(-gamma * np.abs(t)) * np.cos(omega * t)


def test_stationarity_of_zero():
    m = stationarity(TwoPointFunction(GRID, np.zeros((2, 2, GRID.n_points))))
    assert m.value == 0
    assert 0 < m.window[0] < m.window[1] <= GRID.period / 2


def test_stationarity_window_and_value():
    vals = np.ones((2, 2, GRID.n_points))
    m = stationarity(TwoPointFunction(GRID, vals), 0.1)
    assert m.window == pytest.approx((0.9 * 25.0, 25.0))
    n_in = np.count_nonzero(np.arange(GRID.n_points // 2 + 1) * GRID.dt >= 22.5 - 1e-9)
    assert m.value == pytest.approx(GRID.dt * n_in)


@pytest.mark.parametrize("f", [0.0, 0.5, -0.1, 1.0])
def test_stationarity_rejects_bad_fraction(f):
    with pytest.raises(ValueError):
        stationarity(TwoPointFunction(GRID, np.zeros((2, 2, GRID.n_points))), f)


@given(st.integers(0, 2**31), st.floats(1e-3, 5.0), st.floats(0.01, 0.45))
def test_stationarity_monotone_under_damping(seed, eta, f):
    r = np.random.default_rng(seed)
    G = TwoPointFunction(GRID, r.standard_normal((2, 2, GRID.n_points)) + 1j * r.standard_normal((2, 2, GRID.n_points)))
    damped_G = G.with_values(G.values * np.exp(-eta * np.abs(T)))
    assert stationarity(damped_G, f).value <= stationarity(G, f).value


@pytest.mark.parametrize(
    "signal,expected",
    [
        (np.exp(-0.5 * np.abs(T)), False),
        (damped(1.0, 0.5, 5.0), True),
        (np.ones_like(T), False),
        (damped(2.0, 0.1, 1.0), True),
    ],
)
def test_classify_oscillatory(signal, expected):
    assert classify_oscillatory(signal, GRID) is expected


def test_classify_scale_invariant():
    s = damped(1.0, 0.3, 3.0) + 0.2 * np.exp(-np.abs(T))
    for c in (1e-5, -2.0, 3j, 1e5 * (1 - 1j)):
        assert classify_oscillatory(c * s, GRID) == classify_oscillatory(s, GRID)


def test_classify_symmetric_tie_is_oscillatory():
    g = TimeGrid(2 * np.pi, 64)
    s = np.cos(g.times)  # peaks at n = +-1 only
    assert classify_oscillatory(s, g)


def test_classify_zero_raises():
    with pytest.raises(FitError):
        classify_oscillatory(np.zeros_like(T), GRID)


def test_fit_damped_cosine():
    s = damped(3.0, 0.7, 4.0)
    fit = fit_decay(s, GRID, oscillatory=True)
    assert fit.decay_rate == pytest.approx(0.7, rel=1e-3)
    assert fit.maxima_used >= 3
    assert fit_frequency(s, GRID, fit.decay_rate) == pytest.approx(4.0, rel=1e-3)


def test_fit_pure_decay():
    fit = fit_decay(np.exp(-1.2 * np.abs(T)), GRID, oscillatory=False)
    assert fit.decay_rate == pytest.approx(1.2, rel=1e-6)
    assert fit.amplitude == pytest.approx(1.0, rel=1e-6)
    assert fit.frequency is None


def test_fit_zero_raises():
    with pytest.raises(InsufficientMaximaError):
        fit_decay(np.zeros_like(T), GRID, oscillatory=True)


def test_fit_too_few_maxima():
    # one slow half-period in the window
    with pytest.raises(InsufficientMaximaError):
        fit_decay(damped(1.0, 0.05, 0.1), GRID, oscillatory=True)


def test_frequency_needs_oscillation():
    with pytest.raises(InsufficientOscillationsError):
        fit_frequency(np.exp(-1.0 * np.abs(T)), GRID, 1.0)


@pytest.mark.parametrize("gamma,omega", [(0.7, 4.0), (1.5, 3.0), (0.3, 10.0)])
def test_dedamping_removes_extremum_offset(gamma, omega):
    half = GRID.n_points // 2
    t = np.arange(half + 1) * GRID.dt
    raw = damped(1.0, gamma, omega, t)
    floor = 1e-8

    def offsets(signal):
        pos, _ = extrema_positions(signal, GRID.dt, floor)
        pos = pos[pos < 20 / max(gamma, 1.0)]
        return pos - np.round(pos * omega / np.pi) * np.pi / omega

    expected = -np.arctan(gamma / omega) / omega
    np.testing.assert_allclose(offsets(raw), expected, atol=2e-3 / omega)
    assert np.abs(offsets(raw * np.exp(gamma * t))).max() < 2e-3 / omega


@given(
    st.floats(0.1, 10.0),
    st.floats(0.05, 2.0),
    st.floats(0.5, 20.0),
)
def test_fit_round_trip(A, gamma, omega):
    half = GRID.period / 2
    assume(omega * half >= 6 * np.pi and gamma * half <= 20)
    s = damped(A, gamma, omega)
    osc = classify_oscillatory(s, GRID)
    assert osc
    fit = fit_decay(s, GRID, osc)
    assert fit.decay_rate == pytest.approx(gamma, rel=1e-3)
    assert fit_frequency(s, GRID, fit.decay_rate) == pytest.approx(omega, rel=1e-3)


def test_extract_all_synthetic_matrix():
    specs = {(0, 0): (1.0, 0.4, 3.0), (0, 1): (0.5, 0.6, 2.0), (1, 0): (0.5, 0.6, 2.0), (1, 1): (2.0, 0.2, 5.0)}
    vals = np.zeros((2, 2, GRID.n_points), complex)
    for (i, j), (A, g, w) in specs.items():
        vals[i, j] = damped(A, g, w) + 1j * damped(0.3, 2 * g, 1.5 * w)
    fits = extract_all(TwoPointFunction(GRID, vals))
    for fit, (i, j) in zip(fits, [(0, 0), (0, 1), (1, 0), (1, 1)]):
        A, g, w = specs[(i, j)]
        assert fit.component == ((1, -1)[i], (1, -1)[j])
        assert fit.oscillatory
        assert fit.decay_rate == pytest.approx(g, rel=1e-3)
        assert fit.frequency == pytest.approx(w, rel=1e-3)
        assert fit.imag.decay_rate == pytest.approx(2 * g, rel=1e-3)
        assert fit.imag.frequency == pytest.approx(1.5 * w, rel=1e-3)


def test_extract_all_absent_fits():
    vals = np.zeros((2, 2, GRID.n_points), complex)
    vals[0, 0] = damped(1.0, 0.5, 4.0)
    vals[1, 1] = damped(1.0, 0.05, 0.1)  # too few maxima
    fits = extract_all(TwoPointFunction(GRID, vals))
    assert fits[0] is not None
    assert fits[1] is None and fits[2] is None and fits[3] is None
