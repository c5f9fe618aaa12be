"""Stationary Schwinger-Dyson fixed-point iteration.

One step of the map is

    Sigma_ab(t) = i (J^2 q / 4) s_ab G_ab(t)^(q-1)  -  i delta(t) M_ab
    D(w)        = (i m w^2 / 2) diag(1, -1) + i Sigma(w)
    G(w)        = -1/2 D(w)^{-1}

The nonlinearity is applied pointwise in time and the inversion pointwise in
frequency; the delta part of Sigma is kept as an exact constant matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .model import CONTOUR_SIGN, ModelParams, dissipation_matrix
from .symmetry import Symmetry, SymmetryLabel, TwoPointFunction, classify, project
from .timegrid import TimeGrid

log = logging.getLogger(__name__)

DET_FLOOR = 1e-14


class SingularKernelError(ArithmeticError):
    pass


class DivergenceError(ArithmeticError):
    pass


@dataclass
class SelfEnergy:
    grid: TimeGrid
    smooth: np.ndarray  # (2, 2, n), time domain
    delta: np.ndarray  # (2, 2), coefficient of delta(t)


@dataclass(frozen=True)
class RandomInit:
    seed: Union[int, tuple] = 0
    amplitude: float = 0.1
    envelope_tau: float = 1.0


@dataclass(frozen=True, eq=False)
class WarmInit:
    G: np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.5
    max_iterations: int = 5000
    convergence_tol: float = 1e-9
    enforce: frozenset = frozenset()
    init: Union[RandomInit, WarmInit] = RandomInit()
    regularizer: float = 0.0
    min_alpha: float = 1 / 64
    divergence_norm: float = 1e10
    # give up early if the best update has not halved within this many steps
    patience: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"mixing alpha must lie in (0, 1], got {self.alpha}")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.regularizer < 0:
            raise ValueError("regularizer must be >= 0")
        object.__setattr__(self, "enforce", frozenset(Symmetry(e) for e in self.enforce))

    def replace(self, **changes) -> "SolverConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return SolverConfig(**fields)


@dataclass
class SolutionRecord:
    G: TwoPointFunction
    sigma: SelfEnergy
    params: ModelParams
    config: SolverConfig
    converged: bool
    iterations: int
    update_norm: float
    label: SymmetryLabel
    regularized: bool = False
    action: Optional[object] = None  # ActionValue, filled by syksd.action
    stationarity: Optional[float] = None  # filled by syksd.observables
    stationary: Optional[bool] = None
    fits: list = field(default_factory=list)
    provenance: Optional[str] = None  # set by syksd.sweep


def self_energy(G: TwoPointFunction, params: ModelParams) -> SelfEnergy:
    return SelfEnergy(G.grid, _smooth_self_energy(G.values, params), -1j * dissipation_matrix(params))


def _smooth_self_energy(g: np.ndarray, params: ModelParams) -> np.ndarray:
    if params.J == 0:
        return np.zeros_like(g)
    coeff = 1j * params.J**2 * params.q / 4
    with np.errstate(over="raise", invalid="raise"):
        try:
            return coeff * CONTOUR_SIGN[:, :, None] * g ** (params.q - 1)
        except FloatingPointError as exc:
            raise DivergenceError(f"|G|^(q-1) overflowed: {exc}") from None


def dyson_kernel(sigma_smooth_w: np.ndarray, params: ModelParams, omega) -> np.ndarray:
    """D(w) from the frequency-domain smooth self-energy, shape (2, 2) + w.shape."""
    omega = np.asarray(omega, dtype=float)
    D = 1j * np.asarray(sigma_smooth_w, dtype=complex) + dissipation_matrix(params).reshape(
        (2, 2) + (1,) * omega.ndim
    )
    kin = 0.5j * params.m * omega**2
    D[0, 0] = D[0, 0] + kin
    D[1, 1] = D[1, 1] - kin
    return D


def kernel_on_grid(sigma: SelfEnergy, params: ModelParams) -> np.ndarray:
    grid = sigma.grid
    return dyson_kernel(grid.to_frequency(sigma.smooth), params, grid.frequencies)


def det2(D: np.ndarray) -> np.ndarray:
    return D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0]


def invert_kernel(D: np.ndarray, omega: np.ndarray, regularizer: float = 0.0):
    """-1/2 D^{-1} per frequency.  Returns (G_w, regularized_flag)."""
    det = det2(D)
    bad = np.abs(det) < DET_FLOOR
    regularized = False
    if bad.any():
        if regularizer == 0:
            w = omega[np.argmax(bad)]
            raise SingularKernelError(f"det D(w) ~ 0 at w = {w:.6g}")
        D = D.copy()
        D[0, 0, bad] -= 1j * regularizer
        D[1, 1, bad] -= 1j * regularizer
        det = det2(D)
        regularized = True
    inv = np.empty_like(D)
    inv[0, 0] = D[1, 1]
    inv[1, 1] = D[0, 0]
    inv[0, 1] = -D[0, 1]
    inv[1, 0] = -D[1, 0]
    return -0.5 * inv / det, regularized


def dyson_step(sigma: SelfEnergy, params: ModelParams, regularizer: float = 0.0) -> TwoPointFunction:
    grid = sigma.grid
    Gw, _ = invert_kernel(kernel_on_grid(sigma, params), grid.frequencies, regularizer)
    return TwoPointFunction(grid, grid.to_time(Gw))


def sd_map(G: TwoPointFunction, params: ModelParams, regularizer: float = 0.0) -> TwoPointFunction:
    """One unprojected Schwinger-Dyson step G -> G'."""
    return dyson_step(self_energy(G, params), params, regularizer)


def fixed_point_residual(G: TwoPointFunction, params: ModelParams, regularizer: float = 0.0) -> float:
    return float(np.abs(sd_map(G, params, regularizer).values - G.values).max())


def random_ansatz(
    grid: TimeGrid, seed=0, amplitude: float = 0.1, envelope_tau: float = 1.0, smoothing: float = 0.2
) -> TwoPointFunction:
    """Smoothed complex Gaussian noise of unit variance under an exp(-|t|/tau) envelope."""
    if not amplitude > 0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    if not envelope_tau > 0:
        raise ValueError(f"envelope_tau must be positive, got {envelope_tau}")
    rng = np.random.default_rng(np.random.SeedSequence(seed if isinstance(seed, int) else list(seed)))
    noise = rng.standard_normal((2, 2, grid.n_points)) + 1j * rng.standard_normal((2, 2, grid.n_points))
    t = grid.times
    kernel = np.exp(-0.5 * (t / smoothing) ** 2)
    # circular convolution
    smooth = grid.to_time(grid.to_frequency(noise) * grid.to_frequency(kernel)) / grid.dt
    smooth /= np.sqrt(np.mean(np.abs(smooth) ** 2, axis=-1, keepdims=True))
    return TwoPointFunction(grid, amplitude * smooth * np.exp(-np.abs(t) / envelope_tau))


class _Stepper:
    """Precomputed pieces of the SD map for a fixed grid and parameter set."""

    def __init__(self, grid: TimeGrid, params: ModelParams, regularizer: float):
        self.grid, self.params, self.regularizer = grid, params, regularizer
        self.omega = grid.frequencies
        self.D0 = dyson_kernel(np.zeros((2, 2, grid.n_points)), params, self.omega)
        self.regularized = False

    def __call__(self, g: np.ndarray) -> np.ndarray:
        grid = self.grid
        sw = grid.to_frequency(_smooth_self_energy(g, self.params))
        Gw, reg = invert_kernel(self.D0 + 1j * sw, self.omega, self.regularizer)
        self.regularized |= reg
        return grid.to_time(Gw)


def iterate(params: ModelParams, config: SolverConfig = SolverConfig(), grid: TimeGrid = TimeGrid()) -> SolutionRecord:
    """Damped fixed-point iteration G <- (1 - a) G + a P(F(G)).

    The mixing a is halved (not below ``min_alpha``) whenever the update norm
    grows and relaxes back toward ``alpha`` while it shrinks.  Non-convergence
    is reported in the record; runaway iterates raise DivergenceError.
    """
    if isinstance(config.init, WarmInit):
        G = TwoPointFunction(grid, np.array(config.init.G, dtype=complex))
    else:
        init = config.init
        G = random_ansatz(grid, init.seed, init.amplitude, init.envelope_tau)
    G = project(G, config.enforce)
    g = G.values
    step = _Stepper(grid, params, config.regularizer)

    a = config.alpha
    prev = best = np.inf
    best_at = 0
    converged = False
    d = np.inf
    it = 0
    for it in range(1, config.max_iterations + 1):
        new = step(g)
        if config.enforce:
            new = project(TwoPointFunction(grid, new), config.enforce).values
        d = float(np.abs(new - g).max())
        if not np.isfinite(d) or np.abs(new).max() > config.divergence_norm:
            raise DivergenceError(f"iterate diverged after {it} steps (update {d:.3g})")
        if d <= config.convergence_tol:
            converged = True
            break
        if d > prev:
            a = max(a / 2, config.min_alpha)
        else:
            a = min(a * 1.05, config.alpha)
        prev = d
        if d < 0.5 * best:
            best, best_at = d, it
        elif config.patience and it - best_at > config.patience:
            break
        g = (1 - a) * g + a * new

    G = TwoPointFunction(grid, g)
    log.debug("iterate %s: converged=%s after %d steps, update %.3g", params, converged, it, d)
    return SolutionRecord(
        G=G,
        sigma=self_energy(G, params),
        params=params,
        config=config,
        converged=converged,
        iterations=it,
        update_norm=d,
        label=classify(G),
        regularized=step.regularized,
    )
