"""Stationary Schwinger-Dyson solutions of a dissipative bosonic SYK model."""
from .action import ActionValue, Scheme, dominant, on_shell_action
from .model import ModelParams, free_green, free_green_matrix, free_kernel, heisenberg_evolve
from .observables import DecayFit, extract_all, fit_decay, fit_frequency, stationarity
from .solver import RandomInit, SolutionRecord, SolverConfig, WarmInit, iterate
from .sweep import SweepSpec, continuation_scan, phase_diagram, solve_point
from .symmetry import Label, Symmetry, TwoPointFunction, classify
from .timegrid import TimeGrid

__version__ = "0.1.0"
