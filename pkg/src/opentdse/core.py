"""
Shared data model: physical constants, grids, configuration and validation.

Units throughout are nm, fs and eV.  Complex fields are plain ``numpy``
arrays of dtype ``complex128`` with one entry per grid node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .exceptions import NonCommensurateGrid

# Largest fraction of the leapfrog stability limit accepted by validate_config.
# At 0.5 and U = 0 the bound is exactly dt * max|E| / hbar = 1; the blow-up
# experiment in tests/test_core.py pins it.
STABILITY_SAFETY = 0.5

# Minimum clearance between the packet centre and the injection edge.
SUPPORT_SIGMAS = 5.0

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 0.6582119569  # eV fs
    electron_mass: float = 5.68563  # eV fs^2 / nm^2

    def __post_init__(self):
        if not (self.hbar > 0 and self.electron_mass > 0):
            raise ValueError("physical constants must be positive")


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
M0 = CONSTANTS.electron_mass


def mass(m_star: float) -> float:
    """Effective mass in eV fs^2/nm^2 from a value in units of m0."""
    return m_star * M0


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid whose nodes include the active-region edges a and b.

    For reduced (layered) grids the node coordinate inside an absorbing
    layer is the remapped coordinate z, not the physical position.
    """

    x_min: float
    x_max: float
    dx: float
    n_points: int
    a: float
    b: float

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    def index(self, x: float) -> int:
        """Index of the node at ``x``; raises if ``x`` is not a node."""
        j = (x - self.x_min) / self.dx
        jr = round(j)
        if abs(j - jr) * self.dx > _GRID_TOL or not 0 <= jr < self.n_points:
            raise NonCommensurateGrid(f"{x} nm is not a node of the grid")
        return int(jr)

    @property
    def ia(self) -> int:
        return self.index(self.a)

    @property
    def ib(self) -> int:
        return self.index(self.b)

    @property
    def interior(self) -> slice:
        """Slice over the active-region nodes a <= x <= b."""
        return slice(self.ia, self.ib + 1)


def _n_intervals(length: float, dx: float, what: str) -> int:
    n = length / dx
    nr = round(n)
    if abs(n - nr) * dx > _GRID_TOL:
        raise NonCommensurateGrid(f"{what} = {length} nm is not a multiple of dx = {dx} nm")
    return int(nr)


def make_grid(x_min: float, x_max: float, dx: float, a: float, b: float) -> Grid:
    if not dx > 0:
        raise NonCommensurateGrid("dx must be positive")
    if not (x_min < a < b <= x_max):
        raise NonCommensurateGrid(f"need x_min < a < b <= x_max, got {x_min}, {a}, {b}, {x_max}")
    n_left = _n_intervals(a - x_min, dx, "a - x_min")
    n_mid = _n_intervals(b - a, dx, "b - a")
    n_right = _n_intervals(x_max - b, dx, "x_max - b")
    return Grid(x_min, x_max, dx, n_left + n_mid + n_right + 1, a, b)


def build_grid(config: "SimulationConfig") -> Grid:
    """Full-domain grid described by ``config``.

    Raises NonCommensurateGrid when a or b fall between nodes.
    """
    return make_grid(config.x_min, config.x_max, config.dx, config.a, config.b)


@dataclass(frozen=True)
class TightBindingParams:
    rho: float  # on-site energy, eV
    u: float  # hopping, eV
    dx: float  # atomic spacing, nm

    def __post_init__(self):
        if self.u == 0:
            raise ValueError("hopping u must be non-zero")


def effective_mass_tb(m_star: float, dx: float) -> TightBindingParams:
    """(rho, u) that make the tight-binding stencil equal the discrete kinetic operator."""
    u = -(HBAR**2) / (2.0 * mass(m_star) * dx**2)
    return TightBindingParams(rho=-2.0 * u, u=u, dx=dx)


@dataclass(frozen=True)
class GaussianParams:
    """Initial Gaussian packet; ``sigma0`` is the std-dev of |psi|^2 at t = 0."""

    sigma0: float
    x0: float
    kx: float
    m_star: float = 0.2
    injection_side: str = "left"
    amplitude: complex = 1.0


@dataclass(frozen=True)
class PotentialSpec:
    """External potential inside the active region (zero elsewhere).

    ``table`` holds one value per active-region node for ``tabulated``, or an
    array of shape (len(table_times), n_interior) for
    ``time_dependent_tabulated`` (linear interpolation in time, clamped).
    """

    kind: str = "flat"
    barrier_center: float = 0.0
    barrier_width: float = 0.0
    barrier_height: float = 0.0
    table: Optional[np.ndarray] = None
    table_times: Optional[np.ndarray] = None

    @property
    def is_static(self) -> bool:
        return self.kind != "time_dependent_tabulated"

    @property
    def max_abs(self) -> float:
        if self.kind == "rectangular_barrier":
            return abs(self.barrier_height)
        if self.kind in ("tabulated", "time_dependent_tabulated") and self.table is not None:
            return float(np.max(np.abs(self.table)))
        return 0.0


def sample_potential(spec: PotentialSpec, x: np.ndarray, grid: Grid, t: float = 0.0) -> np.ndarray:
    """Potential (eV) on physical positions ``x`` of ``grid`` at time ``t``.

    Only nodes inside [a, b] can be non-zero.
    """
    x = np.asarray(x, dtype=float)
    U = np.zeros(x.shape)
    if spec.kind == "flat":
        return U
    inside = (x >= grid.a - _GRID_TOL) & (x <= grid.b + _GRID_TOL)
    if spec.kind == "rectangular_barrier":
        # cell average over [x - dx/2, x + dx/2]; edge nodes get a partial height
        lo = spec.barrier_center - 0.5 * spec.barrier_width
        hi = spec.barrier_center + 0.5 * spec.barrier_width
        overlap = np.clip(np.minimum(x + 0.5 * grid.dx, hi) - np.maximum(x - 0.5 * grid.dx, lo), 0.0, None)
        frac = np.where(overlap > _GRID_TOL, overlap / grid.dx, 0.0)
        U[inside] = spec.barrier_height * np.round(frac[inside], 12)
        return U
    if spec.kind in ("tabulated", "time_dependent_tabulated"):
        n_int = int(round((grid.b - grid.a) / grid.dx)) + 1
        values = _tabulated_at(spec, t)
        if values.shape != (n_int,):
            raise ValueError(f"potential table needs {n_int} values per time, got {values.shape}")
        j = np.rint((x - grid.a) / grid.dx).astype(int)
        U[inside] = values[j[inside]]
        return U
    raise ValueError(f"unknown potential kind {spec.kind!r}")


def _tabulated_at(spec: PotentialSpec, t: float) -> np.ndarray:
    table = np.asarray(spec.table, dtype=float)
    if spec.kind == "tabulated":
        return table
    times = np.asarray(spec.table_times, dtype=float)
    if t <= times[0]:
        return table[0]
    if t >= times[-1]:
        return table[-1]
    k = int(np.searchsorted(times, t, side="right")) - 1
    w = (t - times[k]) / (times[k + 1] - times[k])
    return (1.0 - w) * table[k] + w * table[k + 1]


@dataclass(frozen=True)
class BoundarySpec:
    """Absorbing-layer description for one side of the active region.

    absorb : multiply by the mask 1 - (x/L)^m every step
    L : absorber length (nm); None means 10 de Broglie lengths of ``k_local``
    La : remap layer width (nm); None disables remapping
    width : simulated layer width in the remapped coordinate (nm); None picks
        L_eff (absorb + remap), La (remap only) or L (absorb only)
    k_local : expected outgoing |k| on this side (1/nm); None uses the packet kx
    absorber : "mask" or "imaginary_potential" (per-step exp(-J dt/hbar))
    """

    absorb: bool = True
    L: Optional[float] = None
    m_exp: int = 5
    La: Optional[float] = 20.0
    width: Optional[float] = None
    k_local: Optional[float] = None
    absorber: str = "mask"


@dataclass(frozen=True)
class OutputSpec:
    cadence: int = 100
    formats: tuple = ("csv",)
    out_dir: str = "out"


@dataclass(frozen=True)
class SimulationConfig:
    """Complete description of one experiment.

    ``x_min``/``x_max`` bound the full (oracle) domain; the reduced domain of
    the combined algorithm is derived from ``a``, ``b`` and the boundary specs.
    """

    packet: GaussianParams
    x_min: float = -800.0
    x_max: float = 800.0
    dx: float = 0.2
    a: float = 0.0
    b: float = 50.0
    dt: float = 0.01
    model: str = "effective_mass"
    m_star: float = 0.2
    tb_rho: Optional[float] = None
    tb_u: Optional[float] = None
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    left_boundary: BoundarySpec = field(default_factory=BoundarySpec)
    right_boundary: BoundarySpec = field(default_factory=BoundarySpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    n_steps: Optional[int] = None
    max_steps: int = 2_000_000
    stop_rule: str = "norm"
    stop_threshold: Optional[float] = None
    injection: str = "analytic"
    left_mask_during_injection: bool = True
    contamination_tol: Optional[float] = 1e-10

    @property
    def tb_params(self) -> TightBindingParams:
        if self.model == "effective_mass":
            return effective_mass_tb(self.m_star, self.dx)
        return TightBindingParams(self.tb_rho, self.tb_u, self.dx)

    def replace(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)


def max_stable_dt(tb: TightBindingParams, U_max: float = 0.0) -> float:
    """Largest dt accepted for the explicit leapfrog step.

    For the effective-mass stencil 0.5*(|rho| + 2|u|) equals 2|u_kin|.
    """
    return STABILITY_SAFETY * HBAR / (0.5 * (abs(tb.rho) + 2.0 * abs(tb.u)) + U_max)


def validate_config(config: SimulationConfig, mode: Optional[str] = None) -> list[str]:
    """List every reason ``config`` cannot be run; empty means runnable.

    The packet clearance rule only concerns analytic injection; it is
    checked when ``mode`` is ``combined`` or ``injection``.
    """
    v: list[str] = []
    if not config.dt > 0:
        v.append("dt must be positive")
    if not config.dx > 0:
        v.append("dx must be positive")
        return v
    if config.model not in ("effective_mass", "tight_binding"):
        v.append(f"unknown model {config.model!r}")
        return v
    if not config.m_star > 0:
        v.append("m_star must be positive")
        return v
    try:
        build_grid(config)
    except NonCommensurateGrid as err:
        v.extend(err.violations)
    if config.model == "tight_binding":
        if config.tb_rho is None or config.tb_u is None:
            v.append("tight_binding model needs tb_rho and tb_u")
            return v
        if config.tb_u == 0:
            v.append("hopping u must be non-zero")
            return v
    if config.dt > 0 and config.dt > max_stable_dt(config.tb_params, config.potential.max_abs):
        v.append(
            f"unstable explicit step: dt = {config.dt} fs exceeds "
            f"{max_stable_dt(config.tb_params, config.potential.max_abs):.4g} fs"
        )

    p = config.packet
    if not p.sigma0 > 0:
        v.append("sigma0 must be positive")
    elif config.injection == "analytic" and mode in ("combined", "injection"):
        if p.injection_side not in ("left", "right"):
            v.append(f"unknown injection side {p.injection_side!r}")
        elif p.injection_side == "left":
            if not p.kx > 0:
                v.append("kx must be positive for left injection")
            if config.a - p.x0 < SUPPORT_SIGMAS * p.sigma0:
                v.append(f"packet must start at least {SUPPORT_SIGMAS:g} sigma0 left of a")
        else:
            if not p.kx < 0:
                v.append("kx must be negative for right injection")
            if p.x0 - config.b < SUPPORT_SIGMAS * p.sigma0:
                v.append(f"packet must start at least {SUPPORT_SIGMAS:g} sigma0 right of b")
    if p.sigma0 > 0 and (p.x0 - 8 * p.sigma0 < config.x_min or p.x0 + 8 * p.sigma0 > config.x_max):
        v.append("full domain must cover 8 sigma0 around x0")
    if abs(p.m_star - config.m_star) > 1e-12 * config.m_star:
        v.append("packet m_star differs from model m_star")
    if config.injection not in ("analytic", "numeric"):
        v.append(f"unknown injection mode {config.injection!r}")

    for side, bs in (("left", config.left_boundary), ("right", config.right_boundary)):
        if not 3 <= bs.m_exp <= 12:
            v.append(f"{side} boundary: m_exp must be in [3, 12]")
        if bs.L is not None and not bs.L > 0:
            v.append(f"{side} boundary: L must be positive")
        if bs.La is not None and not bs.La > 0:
            v.append(f"{side} boundary: La must be positive")
        if bs.width is not None and not bs.width > 0:
            v.append(f"{side} boundary: width must be positive")
        if bs.absorber not in ("mask", "imaginary_potential"):
            v.append(f"{side} boundary: unknown absorber {bs.absorber!r}")
        if bs.L is None and bs.absorb and bs.k_local is None and p.kx == 0:
            v.append(f"{side} boundary: L cannot be derived from kx = 0")

    pot = config.potential
    if pot.kind == "rectangular_barrier":
        lo = pot.barrier_center - 0.5 * pot.barrier_width
        hi = pot.barrier_center + 0.5 * pot.barrier_width
        if lo < config.a - _GRID_TOL or hi > config.b + _GRID_TOL or pot.barrier_width < 0:
            v.append("barrier must lie inside [a, b]")
    elif pot.kind in ("tabulated", "time_dependent_tabulated"):
        if pot.table is None:
            v.append("tabulated potential needs a table")
        elif pot.kind == "time_dependent_tabulated" and pot.table_times is None:
            v.append("time-dependent potential needs table_times")
    elif pot.kind != "flat":
        v.append(f"unknown potential kind {pot.kind!r}")

    if config.outputs.cadence < 1:
        v.append("output cadence must be >= 1")
    if config.stop_rule not in ("norm", "tail", "steps"):
        v.append(f"unknown stop rule {config.stop_rule!r}")
    if config.stop_rule == "steps" and not config.n_steps:
        v.append("stop rule 'steps' needs n_steps")
    return v


def check_finite(field: np.ndarray, what: str = "field", step: int | None = None) -> None:
    from .exceptions import NonFiniteField

    if not np.all(np.isfinite(field)):
        where = "" if step is None else f" at step {step}"
        raise NonFiniteField(f"non-finite values in {what}{where}")


def node_count(width: float, dx: float) -> int:
    """Number of layer nodes (excluding the shared edge node) for a layer ``width``."""
    return max(1, int(math.floor(width / dx + 0.5)))
