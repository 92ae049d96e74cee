"""Containers for simulation output."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class Trajectory:
    """Snapshots of a field on a fixed set of nodes at increasing times.

    ``x`` holds the physical positions of the stored nodes and ``dx`` the
    rectangle-rule weight used by the error integrals.
    """

    times: np.ndarray
    steps: np.ndarray
    snapshots: np.ndarray  # shape (n_times, n_nodes), complex
    x: np.ndarray
    dx: float
    region: tuple = ("a", "b")

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.steps = np.asarray(self.steps, dtype=int)
        self.snapshots = np.asarray(self.snapshots, dtype=complex)
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if self.snapshots.shape[0] != self.times.size:
            raise ValueError("one snapshot per time is required")

    def __len__(self):
        return self.times.size

    def truncated(self, n: int) -> "Trajectory":
        return Trajectory(self.times[:n], self.steps[:n], self.snapshots[:n], self.x, self.dx, self.region)


@dataclass
class ErrorSeries:
    kind: str  # inj | ar | abs | rem | cut | tot | ...
    times: np.ndarray
    values: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(self.values)) if len(self.values) else 0.0

    def first_time_above(self, threshold: float) -> float:
        """First time the series exceeds ``threshold``; inf if it never does."""
        idx = np.flatnonzero(np.asarray(self.values) > threshold)
        return float(self.times[idx[0]]) if idx.size else float("inf")


@dataclass
class RunReport:
    """Outcome of one run: norm series, error series and the final split.

    ``transmission`` and ``reflection`` count probability that left the
    active region on the far and injection side respectively, whether it
    was absorbed or still sits in the layer.  ``injection_deficit`` is the
    part of the analytic packet that the lattice never took in.
    """

    mode: str
    config: object
    steps: np.ndarray
    times: np.ndarray
    norms: dict  # interior, left_layer, right_layer, pending, absorbed_left, absorbed_right
    trajectory: Trajectory
    transmission: float
    reflection: float
    residual: float
    pending: float
    n_steps: int
    wall_clock: float
    domain_width: float
    injection_deficit: float = 0.0
    errors: dict = field(default_factory=dict)
    psi0_trajectory: Optional[Trajectory] = None
    full_snapshots: Optional[np.ndarray] = None
    x_full: Optional[np.ndarray] = None

    @property
    def bookkeeping_total(self) -> float:
        return self.transmission + self.reflection + self.residual + self.pending + self.injection_deficit
