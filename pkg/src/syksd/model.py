"""Model parameters and the exactly solvable J=0 theory.

Kernel convention (used by every module that builds D):

    D(w) = +(i m w^2 / 2) diag(1, -1) + M + i Sigma_smooth(w),   G(w) = -1/2 D(w)^{-1}

with M the dissipation matrix below.  This is the Fourier image of the
second-order operator that annihilates (x, x~) in the Heisenberg equations,
and it is the only sign of the kinetic term for which det D_0(w) vanishes on
the real axis for v > 0 (oscillation) and stays positive for v < 0 (decay).

The closed-form free Green's function equals sqrt(2*pi)/m times
-1/2 D_0^{-1} taken with a principal-value prescription at the poles; the
factor is a normalization carried by the closed form itself, so
D_0 G_free = -(sqrt(2*pi)/(2m)) * I * delta(t).  See ``free_green_scale``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONTOUR = (+1, -1)
# s_ab for (a, b) in CONTOUR x CONTOUR
CONTOUR_SIGN = np.array([[1.0, -1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class ModelParams:
    v: float
    gamma: float
    J: float = 0.0
    m: float = 1.0
    q: int = 4

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got m={self.m}")
        if self.gamma < 0:
            raise ValueError(f"dissipation must be non-negative, got gamma={self.gamma}")
        if self.J < 0:
            raise ValueError(f"disorder strength must be non-negative, got J={self.J}")
        if int(self.q) != self.q or self.q < 2 or self.q % 2:
            raise ValueError(f"interaction order q must be an even integer >= 2, got q={self.q}")

    def replace(self, **changes) -> "ModelParams":
        fields = dict(v=self.v, gamma=self.gamma, J=self.J, m=self.m, q=self.q)
        fields.update(changes)
        return ModelParams(**fields)


def contour_sign(a: int, b: int) -> int:
    if a not in CONTOUR or b not in CONTOUR:
        raise ValueError(f"contour indices must be +1 or -1, got ({a}, {b})")
    return 1 if a == b else -1


def dissipation_matrix(params: ModelParams) -> np.ndarray:
    g, v = params.gamma, params.v
    return np.array([[-g / 2 - 1j * v, g / 2], [g / 2, -g / 2 + 1j * v]])


def free_green_scale(params: ModelParams) -> float:
    """Ratio of the closed-form free G to -1/2 D_0^{-1}."""
    return np.sqrt(2 * np.pi) / params.m


def free_green(params: ModelParams, a: int, b: int, t):
    """Closed-form J=0 Green's function G_ab(t); requires v > 0."""
    if params.v <= 0:
        raise ValueError(f"free_green is defined only for v > 0, got v={params.v}")
    contour_sign(a, b)
    m, v, g = params.m, params.v, params.gamma
    t = np.asarray(t, dtype=float)
    w = np.sqrt(2 * v / m)
    pref = np.sqrt(np.pi) * np.sign(t) / (8 * (m * v) ** 1.5)
    return pref * (-g * t * w * np.cos(w * t) + (g - 2 * (a + b) * 1j * v) * np.sin(w * t))


def free_green_matrix(params: ModelParams, t) -> np.ndarray:
    """All four components, shape (2, 2) + t.shape."""
    return np.array([[free_green(params, a, b, t) for b in CONTOUR] for a in CONTOUR])


def free_kernel(params: ModelParams, omega) -> np.ndarray:
    """D_0(w), shape (2, 2) + w.shape."""
    omega = np.asarray(omega, dtype=float)
    kin = 0.5j * params.m * omega**2
    M = dissipation_matrix(params)
    D = np.empty((2, 2) + omega.shape, dtype=complex)
    D[0, 0] = kin + M[0, 0]
    D[0, 1] = M[0, 1]
    D[1, 0] = M[1, 0]
    D[1, 1] = -kin + M[1, 1]
    return D


def _oscillator_basis(v: float, m: float, t: np.ndarray):
    """C(t), S(t), and the convolution integral (S - tC)/(2 w^2) for w^2 = 2v/m.

    Continued analytically through v = 0 (polynomial) and v < 0 (hyperbolic).
    """
    w2 = 2 * v / m
    if w2 > 0:
        w = np.sqrt(w2)
        C, S = np.cos(w * t), np.sin(w * t) / w
    elif w2 < 0:
        k = np.sqrt(-w2)
        C, S = np.cosh(k * t), np.sinh(k * t) / k
    else:
        C, S = np.ones_like(t), t.copy()
    if w2 == 0:
        SS = t**3 / 6
    else:
        SS = (S - t * C) / (2 * w2)
    return C, S, SS


def heisenberg_evolve(params: ModelParams, initial, t):
    """Exact J=0 evolution of (X+, P-, X-, P+) with X+- = x +- x~, P+- = p +- p~.

    X+' = P-/m, P-' = -2v X+ - 2i gamma X-, X-' = P+/m, P+' = -2v X-.
    The (X-, P+) pair is a free oscillator; it drives (X+, P-) through gamma.
    """
    xp0, pm0, xm0, pp0 = (complex(z) for z in initial)
    m, v, g = params.m, params.v, params.gamma
    t = np.asarray(t, dtype=float)
    C, S, SS = _oscillator_basis(v, m, t)
    w2 = 2 * v / m

    xm = xm0 * C + (pp0 / m) * S
    pp = -2 * v * xm0 * S + pp0 * C

    drive = -2j * g / m
    xp = xp0 * C + (pm0 / m) * S + drive * (xm0 * t * S / 2 + (pp0 / m) * SS)
    pm = (
        -m * w2 * xp0 * S
        + pm0 * C
        + m * drive * (xm0 * (S + t * C) / 2 + (pp0 / m) * t * S / 2)
    )
    return xp, pm, xm, pp
