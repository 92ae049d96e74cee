"""Open-boundary 1D time-dependent Schroedinger solver.

A Gaussian packet is injected analytically into a small active region and
leaves it through absorbing layers whose coordinate is arctan-contracted,
so the simulated domain stays a few times the width of the region itself.
"""

from .boundaries import build_layer, choose_absorber_length, effective_layer_width
from .config_io import dump_config, load_config, parse_config, with_energy
from .core import (
    BoundarySpec,
    GaussianParams,
    OutputSpec,
    PotentialSpec,
    SimulationConfig,
    max_stable_dt,
    validate_config,
)
from .hamiltonians import dispersion, wavevector_from_energy
from .integrator import run, run_combined
from .reference import compare_combined, overlap_error, run_full_domain
from .results import ErrorSeries, RunReport, Trajectory

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec",
    "ErrorSeries",
    "GaussianParams",
    "OutputSpec",
    "PotentialSpec",
    "RunReport",
    "SimulationConfig",
    "Trajectory",
    "build_layer",
    "choose_absorber_length",
    "compare_combined",
    "dispersion",
    "dump_config",
    "effective_layer_width",
    "load_config",
    "max_stable_dt",
    "overlap_error",
    "parse_config",
    "run",
    "run_combined",
    "run_full_domain",
    "validate_config",
    "wavevector_from_energy",
    "with_energy",
]
