"""On-shell action density of stationary saddles and dominance among them.

Per unit time and per flavor,

    s = -1/2 (1/T) sum_n log det D(w_n)  +  dt sum_k sum_ab (J^2/4)(q-1) s_ab G_ab(t_k)^q

The complex logarithm is fixed on the principal branch at the most negative
grid frequency (where D is kinetic-dominated) and continued by unwrapping the
phase along increasing w.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import CONTOUR_SIGN
from .solver import DET_FLOOR, SingularKernelError, SolutionRecord, det2, dyson_kernel
from .symmetry import LABEL_ORDER

TIE_TOL = 1e-9


class Scheme(str, Enum):
    RAW = "RAW"
    FREE_SUBTRACTED = "FREE_SUBTRACTED"


class UnwrapError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ActionValue:
    density: complex
    logdet_part: complex
    interaction_part: complex
    scheme: Scheme


def unwrapped_log(z: np.ndarray, max_jump: float = np.pi / 2) -> np.ndarray:
    """log z along a path, principal at z[0], continuous in phase."""
    if np.any(np.abs(z) < DET_FLOOR):
        raise SingularKernelError("log det D evaluated at a singular kernel")
    phase = np.angle(z)
    step = np.angle(z[1:] / z[:-1])
    if np.any(np.abs(step) > max_jump):
        k = int(np.argmax(np.abs(step)))
        raise UnwrapError(f"phase jump {step[k]:.3f} between samples {k} and {k + 1}; refine the grid")
    phase = phase[0] + np.concatenate([[0.0], np.cumsum(step)])
    return np.log(np.abs(z)) + 1j * phase


def logdet_sum(D: np.ndarray, omega: np.ndarray) -> complex:
    order = np.argsort(omega, kind="stable")
    return complex(unwrapped_log(det2(D)[..., order]).sum())


def on_shell_action(record: SolutionRecord, scheme=Scheme.RAW) -> ActionValue:
    scheme = Scheme(scheme)
    G, params = record.G, record.params
    grid = G.grid
    omega = grid.frequencies
    D = dyson_kernel(grid.to_frequency(record.sigma.smooth), params, omega)
    total = logdet_sum(D, omega)
    if scheme is Scheme.FREE_SUBTRACTED:
        total -= logdet_sum(dyson_kernel(np.zeros_like(D), params.replace(J=0.0), omega), omega)
    logdet_part = -0.5 * total / grid.period

    q = params.q
    interaction = grid.dt * np.sum(
        (params.J**2 / 4) * (q - 1) * CONTOUR_SIGN[:, :, None] * G.values**q
    )
    return ActionValue(
        density=complex(logdet_part + interaction),
        logdet_part=complex(logdet_part),
        interaction_part=complex(interaction),
        scheme=scheme,
    )


def dominant(records: list) -> tuple[int, bool]:
    """Index of the saddle with the largest Re(action density), and a tie flag.

    Saddles within TIE_TOL of the maximum are a tie, resolved toward the more
    symmetric label (KC > C > K > NONE).
    """
    if not records:
        raise ValueError("dominant() needs at least one solution")
    re = np.array([r.action.density.real for r in records])
    best = re.max()
    tied = [i for i in range(len(records)) if best - re[i] <= TIE_TOL]
    idx = min(tied, key=lambda i: (LABEL_ORDER.index(records[i].label.label), -re[i]))
    return idx, len(tied) > 1
