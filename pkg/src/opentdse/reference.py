"""
Brute-force reference runs and the error functionals built on them.

Every reference is a single-field leapfrog run that differs from the
full-domain oracle only in what happens beyond b on the far side: nothing
(``full``), a hard wall (``cut``), a remapped layer (``remap``) or a mask
(``absorb``).  Errors are rectangle-rule L2 distances on [a, b].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import SimulationConfig
from .exceptions import MisalignedTrajectories
from .integrator import run, run_combined
from .packets import analytic_free_evolution, gaussian_value
from .results import ErrorSeries, RunReport, Trajectory

__all__ = [
    "run_full_domain",
    "run_absorb_only",
    "run_remap_only",
    "run_truncated",
    "overlap_error",
    "region_norm",
    "noise_floor",
    "ComparisonResult",
    "compare_combined",
    "analytic_errors",
    "absorption_error",
    "remap_errors",
]

_ALIGN_TOL = 1e-9


def _traj(config, mode, n_steps, report):
    rep = run(config, mode, n_steps=n_steps)
    return rep if report else rep.trajectory


def run_full_domain(config: SimulationConfig, n_steps: Optional[int] = None, report: bool = False):
    """Single-field run on [x_min, x_max]; raises BoundaryContamination near the walls."""
    return _traj(config, "full", n_steps, report)


def run_absorb_only(config: SimulationConfig, n_steps: Optional[int] = None, report: bool = False):
    """Masked far layer of width L (no remap); plain grid on the injection side."""
    return _traj(config, "absorb", n_steps, report)


def run_remap_only(config: SimulationConfig, n_steps: Optional[int] = None, report: bool = False):
    """Remapped far layer of width La without a mask."""
    return _traj(config, "remap", n_steps, report)


def run_truncated(config: SimulationConfig, n_steps: Optional[int] = None, report: bool = False):
    """Hard wall at b + La on the far side."""
    return _traj(config, "cut", n_steps, report)


def _check_aligned(a: Trajectory, b: Trajectory):
    if len(a) != len(b) or not np.allclose(a.times, b.times, rtol=0, atol=_ALIGN_TOL):
        raise MisalignedTrajectories("trajectories are recorded at different times")
    if abs(a.dx - b.dx) > _ALIGN_TOL * a.dx:
        raise MisalignedTrajectories(f"grid spacings differ ({a.dx} vs {b.dx})")
    if a.x.shape != b.x.shape or not np.allclose(a.x, b.x, rtol=0, atol=_ALIGN_TOL):
        raise MisalignedTrajectories("trajectories cover different nodes")


def overlap_error(traj_a: Trajectory, traj_b: Trajectory, region=None, kind: str = "") -> ErrorSeries:
    """values[n] = sum over the region of |A_n - B_n|^2 dx.

    ``region`` is an optional (x_lo, x_hi) interval inside the stored nodes.
    """
    _check_aligned(traj_a, traj_b)
    sel = slice(None)
    if region is not None:
        lo, hi = region
        idx = np.flatnonzero((traj_a.x >= lo - _ALIGN_TOL) & (traj_a.x <= hi + _ALIGN_TOL))
        sel = slice(idx[0], idx[-1] + 1) if idx.size else slice(0, 0)
    diff = traj_a.snapshots[:, sel] - traj_b.snapshots[:, sel]
    values = np.sum(diff.real**2 + diff.imag**2, axis=1) * traj_a.dx
    return ErrorSeries(kind, traj_a.times.copy(), values)


def region_norm(field, dx: float, jacobian=None, region: Optional[slice] = None) -> float:
    """Probability sum |f|^2 dx, weighted by dx_physical/dz on remapped nodes."""
    f = np.asarray(field)
    sel = slice(None) if region is None else region
    p = np.abs(f[sel]) ** 2
    if jacobian is not None:
        p = p * np.asarray(jacobian)[sel]
    return float(np.sum(p) * dx)


def noise_floor(region_probability: float = 1.0) -> float:
    """Smallest meaningful squared-difference integral: eps64^2 times the region norm."""
    return float(np.finfo(float).eps) ** 2 * region_probability


@dataclass
class ComparisonResult:
    reduced: RunReport
    oracle: RunReport
    injection: RunReport
    eps_inj: ErrorSeries
    eps_ar: ErrorSeries
    eps_tot: ErrorSeries

    def summary(self) -> dict:
        return {
            "eps_inj_max": self.eps_inj.max,
            "eps_ar_max": self.eps_ar.max,
            "eps_tot_max": self.eps_tot.max,
            "transmission": self.reduced.transmission,
            "reflection": self.reduced.reflection,
            "reduced_width": self.reduced.domain_width,
            "full_width": self.oracle.domain_width,
            "n_steps": self.reduced.n_steps,
        }


def compare_combined(config: SimulationConfig, n_steps: Optional[int] = None) -> ComparisonResult:
    """Reduced run plus the two references that split its error.

    eps_inj compares the full-domain oracle with analytic injection on the
    full domain (injection error only); eps_ar compares the latter with the
    reduced run (absorption and remapping error); eps_tot compares the
    oracle with the reduced run.  The references reuse the reduced run's
    step count so the three trajectories are aligned.
    """
    reduced = run_combined(config, n_steps=n_steps)
    n = reduced.n_steps
    oracle = run(config, "full", n_steps=n)
    injected = run(config, "injection", n_steps=n)
    eps_inj = overlap_error(oracle.trajectory, injected.trajectory, kind="inj")
    eps_ar = overlap_error(injected.trajectory, reduced.trajectory, kind="ar")
    eps_tot = overlap_error(oracle.trajectory, reduced.trajectory, kind="tot")
    for rep, key in ((reduced, "tot"), (reduced, "ar"), (reduced, "inj")):
        rep.errors[key] = {"tot": eps_tot, "ar": eps_ar, "inj": eps_inj}[key]
    return ComparisonResult(reduced, oracle, injected, eps_inj, eps_ar, eps_tot)


def analytic_errors(config: SimulationConfig, n_steps: Optional[int] = None, oracle: Optional[RunReport] = None):
    """Distance of the full-domain solution from psi_G and from the time-corrected psi_an.

    Returns (eps_G, eps_an) over [a, b].  Both analytic fields carry the
    same discrete normalisation as the numerical initial state.
    """
    oracle = oracle or run(config, "full", n_steps=n_steps)
    traj = oracle.trajectory
    from .integrator import _grid_norm

    scale = 1.0 / _grid_norm(config)
    g = np.array([gaussian_value(traj.x, t, config.packet) for t in traj.times]) * scale
    an = (
        np.array(
            [analytic_free_evolution(traj.x, t, config.packet, "tight_binding", config.tb_params) for t in traj.times]
        )
        * scale
    )
    tg = Trajectory(traj.times, traj.steps, g, traj.x, traj.dx)
    ta = Trajectory(traj.times, traj.steps, an, traj.x, traj.dx)
    return overlap_error(traj, tg, kind="G"), overlap_error(traj, ta, kind="an")


def absorption_error(config: SimulationConfig, n_steps: int) -> ErrorSeries:
    """eps_abs series (masked far layer against the oracle); use ``.max`` for the max-over-time form."""
    full = run_full_domain(config, n_steps)
    absorbed = run_absorb_only(config, n_steps)
    return overlap_error(full, absorbed, kind="abs")


def remap_errors(config: SimulationConfig, n_steps: int):
    """(eps_rem, eps_cut) series against the full-domain oracle."""
    full = run_full_domain(config, n_steps)
    rem = run_remap_only(config, n_steps)
    cut = run_truncated(config, n_steps)
    return overlap_error(full, rem, kind="rem"), overlap_error(full, cut, kind="cut")
