"""KMS and modular-conjugation relations of stationary two-point functions.

    KMS:          G_ab(t) = G_ba(-t)
    conjugation:  G_ab(t) = conj(G_{-a,-b}(t))

Both projectors are real-linear, idempotent and commute with each other.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .timegrid import TimeGrid


class Symmetry(str, Enum):
    KMS = "KMS"
    CONJ = "CONJ"


class Label(str, Enum):
    KC = "KC"
    K = "K"
    C = "C"
    NONE = "NONE"


# more symmetric first; used to break ties in dominance
LABEL_ORDER = (Label.KC, Label.C, Label.K, Label.NONE)


@dataclass
class TwoPointFunction:
    """G_ab(t_k) on a grid; ``values[i, j]`` holds (a, b) = (CONTOUR[i], CONTOUR[j])."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (2, 2, self.grid.n_points):
            raise ValueError(
                f"expected shape (2, 2, {self.grid.n_points}), got {self.values.shape}"
            )

    def with_values(self, values: np.ndarray) -> "TwoPointFunction":
        return TwoPointFunction(self.grid, values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __getitem__(self, ab):
        """Component by contour labels, e.g. ``G[+1, -1]``."""
        a, b = ab
        return self.values[(1 - a) // 2, (1 - b) // 2]


def kms_image(values: np.ndarray, reflect: np.ndarray) -> np.ndarray:
    return values.transpose(1, 0, 2)[..., reflect]


def conj_image(values: np.ndarray) -> np.ndarray:
    return values[::-1, ::-1].conj()


def project_kms(G: TwoPointFunction) -> TwoPointFunction:
    return G.with_values(0.5 * (G.values + kms_image(G.values, G.grid.reflect)))


def project_conjugation(G: TwoPointFunction) -> TwoPointFunction:
    return G.with_values(0.5 * (G.values + conj_image(G.values)))


_PROJECTORS = {Symmetry.KMS: project_kms, Symmetry.CONJ: project_conjugation}


def project(G: TwoPointFunction, enforce) -> TwoPointFunction:
    for s in sorted(Symmetry(e) for e in enforce):
        G = _PROJECTORS[s](G)
    return G


def violation(G: TwoPointFunction, which) -> float:
    """Relative L2 distance from the symmetric subspace."""
    norm = G.norm()
    if norm == 0:
        raise ValueError("violation is undefined for G = 0")
    P = _PROJECTORS[Symmetry(which)](G)
    return float(np.linalg.norm(G.values - P.values) / norm)


@dataclass(frozen=True)
class SymmetryLabel:
    label: Label
    nu_kms: float
    nu_conj: float

    @property
    def preserves_kms(self) -> bool:
        return self.label in (Label.KC, Label.K)

    @property
    def preserves_conj(self) -> bool:
        return self.label in (Label.KC, Label.C)


def classify(G: TwoPointFunction, tol: float = 1e-6) -> SymmetryLabel:
    if not tol > 0:
        raise ValueError("tol must be positive")
    nu_k = violation(G, Symmetry.KMS)
    nu_c = violation(G, Symmetry.CONJ)
    k, c = nu_k <= tol, nu_c <= tol
    label = Label.KC if k and c else Label.K if k else Label.C if c else Label.NONE
    return SymmetryLabel(label, nu_k, nu_c)


def symmetry_images(G: TwoPointFunction) -> list[np.ndarray]:
    """G and its images under KMS, conjugation and both.

    Each image of a Schwinger-Dyson fixed point is again a fixed point, so
    solutions are identified up to these maps.
    """
    r = G.grid.reflect
    k = kms_image(G.values, r)
    return [G.values, k, conj_image(G.values), conj_image(k)]


def orbit_distance(G1: TwoPointFunction, G2: TwoPointFunction) -> float:
    """Smallest relative L2 distance between G2 and any symmetry image of G1."""
    ref = max(G1.norm(), G2.norm())
    if ref == 0:
        return 0.0
    return min(float(np.linalg.norm(img - G2.values)) for img in symmetry_images(G1)) / ref
