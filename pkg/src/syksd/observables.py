"""Stationarity filter and decay-rate / frequency extraction.

Components are fitted to A exp(-Gamma t) cos(Omega t) on the positive half
period: Gamma from a log-linear fit through the local maxima of |Re G|,
Omega from the spacing of extrema of the de-damped signal Re G * exp(Gamma t).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import CONTOUR
from .symmetry import TwoPointFunction
from .timegrid import TimeGrid

# relative amplitude below which samples are treated as numerical noise
NOISE_FLOOR = 1e-8
STATIONARITY_THRESHOLD = 1e-4


class FitError(ValueError):
    pass


class InsufficientMaximaError(FitError):
    pass


class InsufficientOscillationsError(FitError):
    pass


@dataclass(frozen=True)
class StationarityMetric:
    value: float
    window: tuple[float, float]


@dataclass(frozen=True)
class DecayFit:
    component: tuple[int, int]
    amplitude: float
    decay_rate: float
    frequency: Optional[float]
    oscillatory: bool
    fit_residual: float
    maxima_used: int
    imag: Optional["DecayFit"] = None


def _positive_half(grid: TimeGrid, values: np.ndarray):
    """Samples on [0, T/2]; the Nyquist sample stands for t = T/2."""
    h = grid.n_points // 2
    t = np.arange(h + 1) * grid.dt
    return t, values[..., : h + 1]


def stationarity(G: TwoPointFunction, window_fraction: float = 0.1) -> StationarityMetric:
    """Late-time weight dt * sum_{t in window} max_ab |G_ab(t)| over [(1-f) T/2, T/2]."""
    if not 0 < window_fraction < 0.5:
        raise ValueError(f"window_fraction must lie in (0, 0.5), got {window_fraction}")
    grid = G.grid
    t, vals = _positive_half(grid, G.values)
    start = (1 - window_fraction) * grid.period / 2
    mask = t >= start - 1e-12 * grid.period
    value = grid.dt * np.abs(vals[..., mask]).max(axis=(0, 1)).sum()
    return StationarityMetric(float(value), (start, grid.period / 2))


def _as_array(component) -> np.ndarray:
    return np.asarray(getattr(component, "values", component), dtype=complex)


def classify_oscillatory(component, grid: TimeGrid) -> bool:
    """True unless |G(w)| peaks at w = 0 alone."""
    values = _as_array(component)
    if not np.any(values):
        raise FitError("cannot classify a zero component")
    spec = np.abs(grid.to_frequency(values))
    peak = spec.max()
    return not (spec[0] == peak and np.count_nonzero(spec >= peak * (1 - 1e-12)) == 1)


def local_maxima(y: np.ndarray) -> np.ndarray:
    """Interior indices where y is a strict-left / weak-right local maximum."""
    return np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1


def _parabola_vertex(y0, y1, y2):
    """Offset (in samples) and height of the parabola through three points."""
    den = y0 - 2 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(den != 0, 0.5 * (y0 - y2) / den, 0.0)
    return off, y1 - 0.25 * (y0 - y2) * off


def extrema_positions(signal: np.ndarray, dt: float, floor: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Refined times and heights of the local maxima of |signal| above ``floor``."""
    y = np.abs(signal)
    idx = local_maxima(y)
    idx = idx[y[idx] > floor]
    off, height = _parabola_vertex(y[idx - 1], y[idx], y[idx + 1])
    return (idx + off) * dt, height


def fit_decay(component, grid: TimeGrid, oscillatory: bool, component_index=(1, 1)) -> DecayFit:
    values = _as_array(component)
    t, vals = _positive_half(grid, values)
    y = vals.real
    scale = np.abs(y).max() if y.size else 0.0
    if scale == 0:
        raise InsufficientMaximaError("component vanishes on the positive half period")
    floor = NOISE_FLOOR * scale
    if oscillatory:
        # log-amplitude is smoother than |y| for the parabola
        ly = np.abs(y)
        idx = local_maxima(ly)
        idx = idx[ly[idx] > floor]
        if idx.size < 3:
            raise InsufficientMaximaError(f"{idx.size} usable maxima, need 3")
        logs = np.log(np.maximum(ly, 1e-300))
        off, lh = _parabola_vertex(logs[idx - 1], logs[idx], logs[idx + 1])
        tt, ll = t[idx] + off * grid.dt, lh
        used = idx.size
    else:
        keep = (np.abs(y) > max(floor, 1e-12)) & (t > 0)
        if np.count_nonzero(keep) < 8:
            raise InsufficientMaximaError("fewer than 8 usable samples for a monotone decay fit")
        tt, ll = t[keep], np.log(np.abs(y[keep]))
        used = int(np.count_nonzero(keep))
    (slope, intercept), res, *_ = np.polyfit(tt, ll, 1, full=True)
    resid = float(np.sqrt(res[0] / len(tt))) if len(res) else 0.0
    return DecayFit(
        component=tuple(component_index),
        amplitude=float(np.sign(y[0] or 1.0) * np.exp(intercept)),
        decay_rate=float(-slope),
        frequency=None,
        oscillatory=oscillatory,
        fit_residual=resid,
        maxima_used=used,
    )


def fit_frequency(component, grid: TimeGrid, decay_rate: float) -> float:
    """Angular frequency of the de-damped signal Re G(t) exp(Gamma t)."""
    values = _as_array(component)
    t, vals = _positive_half(grid, values)
    y = vals.real
    scale = np.abs(y).max()
    if scale == 0:
        raise InsufficientOscillationsError("zero component")
    usable = np.abs(y) > NOISE_FLOOR * scale
    # stop where the raw signal has decayed into noise; de-damping would amplify it
    last = np.flatnonzero(usable)[-1] if usable.any() else 0
    # extend to the next sign change so the final half-period is kept
    g = y[: last + 1] * np.exp(decay_rate * t[: last + 1])
    sign = np.signbit(g[1:]) != np.signbit(g[:-1])
    crossings = np.flatnonzero(sign & (g[1:] != 0))
    if crossings.size < 2:
        raise InsufficientOscillationsError(f"{crossings.size} sign changes, need 2")
    # linear interpolation of zero crossings gives the coarse estimate
    k = crossings
    tz = t[k] - g[k] * (t[k + 1] - t[k]) / (g[k + 1] - g[k])
    omega = np.pi / np.mean(np.diff(tz))
    text, _ = extrema_positions(g, grid.dt, floor=0.0)
    # keep extrema between the first and last crossing; edges are truncated lobes
    text = text[(text > tz[0]) & (text < tz[-1])]
    if text.size >= 2:
        n = np.arange(text.size)
        omega = np.pi / np.polyfit(n, text, 1)[0]
    return float(omega)


def extract_all(record, imaginary: bool = True) -> list[Optional[DecayFit]]:
    """Fits for (++, +-, -+, --); a component that cannot be fitted yields None."""
    G = record.G if hasattr(record, "G") else record
    grid = G.grid
    fits = []
    for i, a in enumerate(CONTOUR):
        for j, b in enumerate(CONTOUR):
            comp = G.values[i, j]
            fit = _fit_component(comp, grid, (a, b))
            if fit is not None and imaginary:
                im = _fit_component(-1j * comp, grid, (a, b))
                fit = DecayFit(**{**fit.__dict__, "imag": im})
            fits.append(fit)
    return fits


def _fit_component(comp: np.ndarray, grid: TimeGrid, ab) -> Optional[DecayFit]:
    try:
        if not np.any(comp.real):
            return None
        osc = classify_oscillatory(comp.real, grid)
        fit = fit_decay(comp, grid, osc, ab)
        if osc:
            omega = fit_frequency(comp, grid, fit.decay_rate)
            fit = DecayFit(**{**fit.__dict__, "frequency": omega})
        return fit
    except FitError:
        return None
