"""Periodic relative-time grid and the Fourier convention shared by all modules.

Forward:  F(w_n) = dt * sum_k exp(+i w_n t_k) f(t_k)
Inverse:  f(t_k) = (1/T) * sum_n exp(-i w_n t_k) F(w_n)

Arrays are stored in FFT order along the last axis: index k < n/2 holds
t_k = k*dt, index k >= n/2 holds the negative time (k - n)*dt.  The same
ordering is used for frequencies.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.fft

Domain = Literal["time", "frequency"]


@dataclass(frozen=True)
class TimeGrid:
    period: float = 50.0
    n_points: int = 4096

    def __post_init__(self):
        if self.n_points < 16 or self.n_points % 2:
            raise ValueError(f"n_points must be even and >= 16, got {self.n_points}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")

    @property
    def dt(self) -> float:
        return self.period / self.n_points

    @property
    def times(self) -> np.ndarray:
        """Signed times in FFT order."""
        k = np.arange(self.n_points)
        return np.where(k < self.n_points // 2, k, k - self.n_points) * self.dt

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies 2*pi*n/T in FFT order."""
        return 2 * np.pi * scipy.fft.fftfreq(self.n_points, d=self.dt)

    @property
    def reflect(self) -> np.ndarray:
        """Index map k -> -k mod n (t -> -t on the circle)."""
        return (-np.arange(self.n_points)) % self.n_points

    def to_frequency(self, values: np.ndarray) -> np.ndarray:
        # ifft carries exp(+i...) and a 1/n factor
        return self.period * scipy.fft.ifft(values, axis=-1)

    def to_time(self, values: np.ndarray) -> np.ndarray:
        return scipy.fft.fft(values, axis=-1) / self.period

    def delta(self) -> np.ndarray:
        """Discrete delta: 1/dt at t=0."""
        d = np.zeros(self.n_points, dtype=complex)
        d[0] = 1 / self.dt
        return d


@dataclass
class GridFunction:
    grid: TimeGrid
    values: np.ndarray
    domain: Domain = "time"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[-1] != self.grid.n_points:
            raise ValueError(
                f"values length {self.values.shape[-1]} != n_points {self.grid.n_points}"
            )
        if self.domain not in ("time", "frequency"):
            raise ValueError(f"unknown domain {self.domain!r}")


def forward_transform(f: GridFunction) -> GridFunction:
    if f.domain != "time":
        raise ValueError("forward_transform expects a time-domain function")
    return GridFunction(f.grid, f.grid.to_frequency(f.values), "frequency")


def inverse_transform(F: GridFunction) -> GridFunction:
    if F.domain != "frequency":
        raise ValueError("inverse_transform expects a frequency-domain function")
    return GridFunction(F.grid, F.grid.to_time(F.values), "time")
