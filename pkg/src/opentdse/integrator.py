"""
Leapfrog time stepping on layered domains.

A domain is the active region [a, b] with one layer attached on each side.
A layer is either a plain extension of the physical grid or an absorbing
layer (mask, arctan remap, or both).  The same machinery runs the combined
reduced-domain algorithm, where psi = psi0 + phi with psi0 injected
analytically, and the single-field brute-force references.

Run modes
---------
combined   split state on the reduced domain described by the boundary specs
injection  split state with analytic injection on the full domain, no absorption
full       single field on the full domain
cut        single field, hard wall at b + La on the far side
remap      single field, remapped (unmasked) far layer of width La
absorb     single field, masked far layer of width L
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .boundaries import Layer, build_layer
from .core import (
    HBAR,
    BoundarySpec,
    Grid,
    SimulationConfig,
    build_grid,
    sample_potential,
    validate_config,
)
from .exceptions import (
    BoundaryContamination,
    ConfigError,
    NumericalBlowup,
    StopRuleNeverMet,
)
from .hamiltonians import TridiagonalOperator
from .packets import analytic_free_evolution, packet_center, probability_left_of, time_correction_factor
from .results import RunReport, Trajectory

MODES = ("combined", "injection", "full", "cut", "remap", "absorb")
SPLIT_MODES = ("combined", "injection")

BLOWUP_FACTOR = 1e6
# Width of the band next to each wall that is watched for contamination.
EDGE_BAND = 10.0  # nm
DEFAULT_STOP = {"norm": 1e-3, "tail": 1e-10}


@dataclass(frozen=True)
class RegionPartition:
    """Slices of the nodes left of a, inside [a, b] and right of b."""

    il: slice
    ib: slice
    ir: slice


@dataclass
class WaveState:
    phi_prev: np.ndarray
    phi_curr: np.ndarray
    psi0_prev: np.ndarray
    psi0_curr: np.ndarray
    step_index: int = 0
    t: float = 0.0

    @property
    def total(self) -> np.ndarray:
        return reconstruct_total(self)


def reconstruct_total(state: WaveState) -> np.ndarray:
    """Total wave function psi0 + phi at the current level."""
    return state.psi0_curr + state.phi_curr


@dataclass
class Domain:
    grid: Grid  # node coordinates; remapped coordinate inside remapped layers
    x: np.ndarray  # physical positions, +-inf at remapped outer ends
    op: TridiagonalOperator
    weights: np.ndarray  # probability weight per node (dx times Jacobian)
    regions: RegionPartition
    left: Layer
    right: Layer
    left_mask: Optional[np.ndarray]
    right_mask: Optional[np.ndarray]
    config: SimulationConfig
    U_interior: np.ndarray  # static potential on [a, b]

    @property
    def n(self) -> int:
        return self.grid.n_points

    @property
    def width(self) -> float:
        return self.grid.x_max - self.grid.x_min

    def potential_interior(self, t: float) -> np.ndarray:
        if self.config.potential.is_static:
            return self.U_interior
        sl = self.regions.ib
        return sample_potential(self.config.potential, self.x[sl], self.grid, t)

    def potential(self, t: float = 0.0) -> np.ndarray:
        U = np.zeros(self.n)
        U[self.regions.ib] = self.potential_interior(t)
        return U


def plain_layer(width: float, dx: float) -> Layer:
    """Layer that simply extends the physical grid by ``width``."""
    return build_layer(BoundarySpec(absorb=False, La=None), dx, 1.0, width=width)


def make_domain(config: SimulationConfig, left: Layer, right: Layer) -> Domain:
    dx, a, b = config.dx, config.a, config.b
    n_int = int(round((b - a) / dx)) + 1
    n_l, n_r = left.n, right.n
    n = n_l + n_int + n_r
    grid = Grid(a - n_l * dx, b + n_r * dx, dx, n, a, b)
    x = np.concatenate([a - left.distance[::-1], a + dx * np.arange(n_int), b + right.distance])
    c1 = np.concatenate([left.c1[::-1], np.ones(n_int), right.c1])
    # first derivative flips sign on the left, where s grows towards -x
    c2 = np.concatenate([-left.c2[::-1], np.zeros(n_int), right.c2])
    weights = dx * np.concatenate([left.jacobian[::-1], np.ones(n_int), right.jacobian])
    regions = RegionPartition(slice(0, n_l), slice(n_l, n_l + n_int), slice(n_l + n_int, n))
    op = TridiagonalOperator(config.tb_params, n, c1, c2)
    U_int = sample_potential(config.potential, x[regions.ib], grid, 0.0)
    return Domain(
        grid=grid,
        x=x,
        op=op,
        weights=weights,
        regions=regions,
        left=left,
        right=right,
        left_mask=None if left.mask is None else left.mask[::-1].copy(),
        right_mask=right.mask,
        config=config,
        U_interior=U_int,
    )


def _far_side(config) -> str:
    return "right" if config.packet.injection_side == "left" else "left"


def domain_for_mode(config: SimulationConfig, mode: str) -> Domain:
    """Build the layered domain used by run ``mode``."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    dx, dt, kx = config.dx, config.dt, config.packet.kx
    full_left = plain_layer(config.a - config.x_min, dx)
    full_right = plain_layer(config.x_max - config.b, dx)
    if mode == "combined":
        left = build_layer(config.left_boundary, dx, kx, dt=dt)
        right = build_layer(config.right_boundary, dx, kx, dt=dt)
        return make_domain(config, left, right)
    if mode in ("full", "injection"):
        return make_domain(config, full_left, full_right)

    far = _far_side(config)
    spec = config.right_boundary if far == "right" else config.left_boundary
    if mode == "cut":
        layer = plain_layer(_require_La(spec), dx)
    elif mode == "remap":
        layer = build_layer(replace(spec, absorb=False, width=None), dx, kx, dt=dt)
    else:  # absorb
        layer = build_layer(replace(spec, absorb=True, La=None, width=None), dx, kx, dt=dt)
    if far == "right":
        return make_domain(config, full_left, layer)
    return make_domain(config, layer, full_right)


def _require_La(spec):
    if spec.La is None:
        raise ValueError("mode needs La on the far-side boundary")
    return spec.La


def leapfrog_step(prev, curr, H_apply: Callable, dt: float, blowup_limit: Optional[float] = None):
    """Central-difference step: next = prev + (2 dt / (i hbar)) H(curr)."""
    nxt = prev + (2.0 * dt / (1j * HBAR)) * H_apply(curr)
    if blowup_limit is not None:
        peak = np.max(np.abs(nxt)) if nxt.size else 0.0
        if not np.isfinite(peak) or peak > blowup_limit:
            raise NumericalBlowup(f"max |psi| = {peak:.3g} exceeds {blowup_limit:.3g}")
    return nxt


class _Kernel:
    """Preallocated free leapfrog update prev + c H0 curr, c = 2 dt / (i hbar)."""

    def __init__(self, op: TridiagonalOperator, dt: float):
        self.c = 2.0 * dt / (1j * HBAR)
        self.diag = self.c * op.diag
        self.lo = self.c * op.lo[1:]
        self.up = self.c * op.up[:-1]
        self.tmp = np.empty(op.n - 1, dtype=complex)

    def __call__(self, prev, curr):
        out = self.diag * curr
        np.multiply(self.lo, curr[:-1], out=self.tmp)
        out[1:] += self.tmp
        np.multiply(self.up, curr[1:], out=self.tmp)
        out[:-1] += self.tmp
        out += prev
        return out


class Propagator:
    """Advances a WaveState on a Domain.

    ``split`` selects the psi0/phi split; otherwise a single field is stored
    in ``psi0_*`` and ``phi_*`` stays zero.  ``injection`` is ``analytic``
    (psi0 on the injection layer is the closed-form free packet) or
    ``numeric`` (psi0 is stepped everywhere).
    """

    def __init__(self, domain: Domain, split: bool = True, injection: str = "analytic"):
        cfg = domain.config
        self.domain = domain
        self.config = cfg
        self.split = split
        self.injection = injection if split else "numeric"
        self.dt = cfg.dt
        self.kernel = _Kernel(domain.op, cfg.dt)
        self.c = self.kernel.c
        self.packet = cfg.packet
        self.tb = cfg.tb_params
        self.tc = time_correction_factor(self.packet.kx, cfg.dx, self.tb.u, self.packet.m_star)
        r = domain.regions
        left_inj = self.packet.injection_side == "left"
        self.inj = r.il if left_inj else r.ir
        self.far = r.ir if left_inj else r.il
        self.inj_mask = domain.left_mask if left_inj else domain.right_mask
        self.far_mask = domain.right_mask if left_inj else domain.left_mask
        self.inj_weights = domain.weights[self.inj]
        self.far_weights = domain.weights[self.far]
        finite = np.isfinite(domain.x)
        self.finite = finite
        self.x_inj = domain.x[self.inj]
        self.finite_inj = finite[self.inj]
        self.scale = 1.0 / _grid_norm(cfg)
        self.absorbed_inj = 0.0
        self.absorbed_far = 0.0
        self.inj_mask_active = cfg.left_mask_during_injection or not left_inj
        # seam between the injection layer (node s) and the interior (node i)
        n_l = r.il.stop
        self.seam = (n_l - 1, n_l) if left_inj else (r.ir.start, r.ir.start - 1)
        self.seam_x = cfg.a - 0.5 * cfg.dx if left_inj else cfg.b + 0.5 * cfg.dx
        # the outermost node has zero weight, so the last counted cell ends half a step inside it
        layer = domain.left if left_inj else domain.right
        s_edge = layer.s[-1] - 0.5 * cfg.dx
        depth = layer.K * math.tan(s_edge / layer.K) if layer.K else s_edge
        self.outer_edge = cfg.a - depth if left_inj else cfg.b + depth
        self.inflow = 0.0

    # analytic free packet ------------------------------------------------
    def analytic(self, x, t):
        out = np.zeros(np.shape(x), dtype=complex)
        ok = np.isfinite(x)
        out[ok] = analytic_free_evolution(x[ok], t, self.packet, "tight_binding", self.tb)
        return out * self.scale

    def pending(self, t: float) -> float:
        """Probability of the analytic packet beyond the last weighted layer cell."""
        if not (self.split and self.injection == "analytic"):
            return 0.0
        amp2 = abs(self.packet.amplitude) ** 2
        if self.packet.injection_side == "left":
            return amp2 * probability_left_of(self.outer_edge, self.tc * t, self.packet)
        return amp2 * (1.0 - probability_left_of(self.outer_edge, self.tc * t, self.packet))

    # initial levels --------------------------------------------------------
    def initial_state(self) -> WaveState:
        d = self.domain
        psi0 = self.analytic(d.x, 0.0)
        self._mask_initial(psi0)
        zero = np.zeros(d.n, dtype=complex)
        return WaveState(zero.copy(), zero.copy(), psi0.copy(), psi0, 0, 0.0)

    def _mask_initial(self, f):
        if self.far_mask is not None:
            f[self.far] *= self.far_mask
        if self.inj_mask is not None and self.injection == "numeric":
            f[self.inj] *= self.inj_mask
        left_inj = self.packet.injection_side == "left"
        f[-1 if left_inj else 0] = 0.0
        if self.injection == "numeric":
            f[0 if left_inj else -1] = 0.0

    def bootstrap_first_step(self, state: WaveState) -> WaveState:
        """Level 1 from level 0: analytic psi0 at dt, forward-Euler phi."""
        if state.step_index != 0:
            raise ValueError("bootstrap needs the step-0 state")
        d = self.domain
        ib = d.regions.ib
        U0 = d.potential_interior(0.0)
        psi0_1 = self.analytic(d.x, self.dt)
        self._mask_initial(psi0_1)
        half = self.c / 2.0
        if self.split:
            # phi(0) = 0, so only the source term contributes
            phi_1 = np.zeros(d.n, dtype=complex)
            phi_1[ib] = half * U0 * state.psi0_curr[ib]
            return WaveState(state.phi_curr, phi_1, state.psi0_curr, psi0_1, 1, self.dt)
        psi_1 = psi0_1
        psi_1[ib] += half * U0 * state.psi0_curr[ib]
        return WaveState(state.phi_curr, state.phi_curr.copy(), state.psi0_curr, psi_1, 1, self.dt)

    # one step ---------------------------------------------------------------
    def step_phi(self, state: WaveState, U_n=None) -> np.ndarray:
        """Scattered part at level n + 1, before masking."""
        ib = self.domain.regions.ib
        if U_n is None:
            U_n = self.domain.potential_interior(state.t)
        nxt = self.kernel(state.phi_prev, state.phi_curr)
        nxt[ib] += (self.c * U_n) * (state.phi_curr[ib] + state.psi0_curr[ib])
        return nxt

    def step_psi0(self, state: WaveState, U_n=None) -> np.ndarray:
        """Free part (split) or the whole field (single) at level n + 1, before masking."""
        nxt = self.kernel(state.psi0_prev, state.psi0_curr)
        if not self.split:
            ib = self.domain.regions.ib
            if U_n is None:
                U_n = self.domain.potential_interior(state.t)
            nxt[ib] += (self.c * U_n) * state.psi0_curr[ib]
        elif self.injection == "analytic":
            nxt[self.inj] = self.analytic(self.x_inj, state.t + self.dt)
        return nxt

    def injection_deficit(self, t: float) -> float:
        """Analytic probability that crossed the seam minus what the lattice took in.

        The time-corrected packet drifts with the phase-matched speed while the
        lattice carries probability at its group velocity, so a small part of
        the analytic packet is never delivered.
        """
        if not (self.split and self.injection == "analytic"):
            return 0.0
        amp2 = abs(self.packet.amplitude) ** 2
        p0 = probability_left_of(self.seam_x, 0.0, self.packet)
        pt = probability_left_of(self.seam_x, self.tc * t, self.packet)
        crossed = amp2 * (p0 - pt if self.packet.injection_side == "left" else pt - p0)
        return crossed - self.inflow

    def advance(self, state: WaveState) -> WaveState:
        if self.split and self.injection == "analytic":
            s_, i_ = self.seam
            z = np.conj(state.psi0_curr[s_]) * state.psi0_curr[i_]
            self.inflow += -2.0 * self.dt * self.tb.u * self.config.dx / HBAR * z.imag
        U_n = self.domain.potential_interior(state.t)
        psi0 = self.step_psi0(state, U_n)
        phi = self.step_phi(state, U_n) if self.split else state.phi_curr
        self._apply_masks(phi, psi0, state.t + self.dt, state)
        return WaveState(state.phi_curr, phi, state.psi0_curr, psi0, state.step_index + 1, state.t + self.dt)

    @staticmethod
    def _loss(g, pre, curr, w):
        # Leapfrog conserves Re<psi^{n+1}, psi^n>, so masking psi^{n+1} removes
        # exactly Re sum (1 - g) conj(pre) psi^n from that quantity.
        if curr is None:
            return 0.0
        return float(np.sum((1.0 - g) * w * (pre.conj() * curr).real))

    def _apply_masks(self, phi, psi0, t_next, state=None):
        far, inj = self.far, self.inj
        if state is not None:
            cur_tot = state.psi0_curr + state.phi_curr
        if self.far_mask is not None:
            g = self.far_mask
            pre = psi0[far] + phi[far] if self.split else psi0[far]
            self.absorbed_far += self._loss(g, pre, None if state is None else cur_tot[far], self.far_weights)
            psi0[far] *= g
            if self.split:
                phi[far] *= g
        if self.inj_mask is not None:
            if not self.inj_mask_active and packet_center(self.tc * t_next, self.packet) > self.config.a:
                self.inj_mask_active = True
            if self.inj_mask_active or self.injection == "numeric":
                g = self.inj_mask
                if self.injection == "numeric":
                    pre = psi0[inj] + phi[inj] if self.split else psi0[inj]
                    curr = None if state is None else cur_tot[inj]
                    psi0[inj] *= g
                else:
                    pre = phi[inj]
                    curr = None if state is None else state.phi_curr[inj]
                self.absorbed_inj += self._loss(g, pre, curr, self.inj_weights)
                if self.split:
                    phi[inj] *= g
        phi[0] = 0.0
        phi[-1] = 0.0
        if self.injection == "numeric":
            psi0[0] = 0.0
            psi0[-1] = 0.0
        elif self.packet.injection_side == "left":
            psi0[-1] = 0.0
        else:
            psi0[0] = 0.0


def _grid_norm(config: SimulationConfig) -> float:
    """Discrete norm of psi_G(x, 0) on the full grid (the tight-binding N)."""
    from .packets import tb_initial_state, gaussian_value

    grid = build_grid(config)
    tb_initial_state(grid, config.packet)  # raises TruncatedSupport
    psi = gaussian_value(grid.x, 0.0, config.packet)
    return math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx) / abs(config.packet.amplitude)


def bootstrap_first_step(state: WaveState, config: SimulationConfig, domain: Optional[Domain] = None) -> WaveState:
    domain = domain or domain_for_mode(config, "combined")
    return Propagator(domain, split=True, injection=config.injection).bootstrap_first_step(state)


def step_phi(state: WaveState, domain: Domain, U_n=None) -> np.ndarray:
    """Scattered part at the next level with layer masks applied."""
    prop = Propagator(domain, split=True, injection=domain.config.injection)
    phi = prop.step_phi(state, U_n)
    psi0 = state.psi0_curr.copy()
    prop._apply_masks(phi, psi0, state.t + prop.dt)
    return phi


def step_psi0(state: WaveState, domain: Domain) -> np.ndarray:
    """Free part at the next level with the far-layer mask applied."""
    prop = Propagator(domain, split=True, injection=domain.config.injection)
    psi0 = prop.step_psi0(state)
    phi = state.phi_curr.copy()
    prop._apply_masks(phi, psi0, state.t + prop.dt)
    return psi0


def run(
    config: SimulationConfig,
    mode: str = "combined",
    n_steps: Optional[int] = None,
    record_full: bool = False,
    record_psi0: bool = False,
    validate: bool = True,
) -> RunReport:
    """Run ``config`` in ``mode`` and collect a RunReport.

    ``n_steps`` overrides the configured stop rule.  Records are taken at
    level 0 and every ``config.outputs.cadence`` steps.
    """
    if validate:
        problems = validate_config(config, mode=mode)
        if problems:
            raise ConfigError(problems)
    start = time.perf_counter()
    domain = domain_for_mode(config, mode)
    split = mode in SPLIT_MODES
    injection = config.injection if mode == "combined" else "analytic"
    prop = Propagator(domain, split=split, injection=injection)
    cadence = config.outputs.cadence
    if n_steps is None and config.stop_rule == "steps":
        n_steps = config.n_steps
    if n_steps is None and config.n_steps is not None:
        n_steps = config.n_steps
    threshold = config.stop_threshold if config.stop_threshold is not None else DEFAULT_STOP.get(config.stop_rule)
    if n_steps is None and mode != "combined" and config.stop_rule == "norm":
        raise ValueError(f"mode {mode!r} never loses probability; give n_steps or use the tail rule")

    r = domain.regions
    w = domain.weights
    peak0 = abs(config.packet.amplitude) * (2.0 * math.pi * config.packet.sigma0**2) ** -0.25
    limit = BLOWUP_FACTOR * peak0
    edge = max(1, int(round(EDGE_BAND / config.dx)))
    check_edges = mode == "full" and config.contamination_tol is not None
    left_inj = config.packet.injection_side == "left"

    rec_steps, rec_t, snaps, psi0_snaps, full_snaps = [], [], [], [], []
    norms = {
        k: []
        for k in ("interior", "left_layer", "right_layer", "pending", "absorbed_left", "absorbed_right", "injection_deficit")
    }

    def record(state):
        tot = state.psi0_curr + state.phi_curr
        p2 = np.abs(tot) ** 2 * w
        rec_steps.append(state.step_index)
        rec_t.append(state.t)
        snaps.append(tot[r.ib].copy())
        if record_psi0:
            psi0_snaps.append(state.psi0_curr[r.ib].copy())
        if record_full:
            full_snaps.append(tot.copy())
        norms["interior"].append(float(p2[r.ib].sum()))
        norms["left_layer"].append(float(p2[r.il].sum()))
        norms["right_layer"].append(float(p2[r.ir].sum()))
        norms["pending"].append(prop.pending(state.t))
        ab_l, ab_r = (prop.absorbed_inj, prop.absorbed_far) if left_inj else (prop.absorbed_far, prop.absorbed_inj)
        norms["absorbed_left"].append(ab_l)
        norms["absorbed_right"].append(ab_r)
        norms["injection_deficit"].append(prop.injection_deficit(state.t))
        peak = float(np.max(np.abs(tot)))
        if not np.isfinite(peak) or peak > limit:
            raise NumericalBlowup(f"{mode} run: max |psi| = {peak:.3g} at step {state.step_index} (limit {limit:.3g})")
        if check_edges:
            edge_p = float(p2[:edge].sum() + p2[-edge:].sum())
            if edge_p > config.contamination_tol:
                raise BoundaryContamination(
                    f"probability {edge_p:.3g} within {EDGE_BAND} nm of the walls at t = {state.t:.4g} fs"
                )
        return p2

    def stop_now(state, p2):
        if n_steps is not None:
            return state.step_index >= n_steps
        pend = norms["pending"][-1]
        if config.stop_rule == "norm":
            return float(p2.sum()) + pend < threshold
        if config.stop_rule == "tail":
            # probability still on the injection side of the far edge
            side = p2[: r.ib.stop] if left_inj else p2[r.ib.start :]
            return state.step_index > 0 and float(side.sum()) + pend < threshold
        return False

    state = prop.initial_state()
    if not split:
        state.psi0_curr = state.psi0_curr.copy()
    p2 = record(state)
    state = prop.bootstrap_first_step(state)
    limit_steps = n_steps if n_steps is not None else config.max_steps
    while True:
        if state.step_index % cadence == 0:
            p2 = record(state)
            if stop_now(state, p2):
                break
        if state.step_index >= limit_steps:
            if n_steps is None:
                raise StopRuleNeverMet(f"stop rule not met within {limit_steps} steps")
            break
        state = prop.advance(state)

    x_region = domain.x[r.ib]
    traj = Trajectory(np.array(rec_t), np.array(rec_steps), np.array(snaps), x_region, config.dx)
    psi0_traj = (
        Trajectory(np.array(rec_t), np.array(rec_steps), np.array(psi0_snaps), x_region, config.dx) if record_psi0 else None
    )
    norms = {k: np.array(v) for k, v in norms.items()}
    inj_layer = "left_layer" if left_inj else "right_layer"
    far_layer = "right_layer" if left_inj else "left_layer"
    ab_inj = "absorbed_left" if left_inj else "absorbed_right"
    ab_far = "absorbed_right" if left_inj else "absorbed_left"
    report = RunReport(
        mode=mode,
        config=config,
        steps=np.array(rec_steps),
        times=np.array(rec_t),
        norms=norms,
        trajectory=traj,
        transmission=float(norms[ab_far][-1] + norms[far_layer][-1]),
        reflection=float(norms[ab_inj][-1] + norms[inj_layer][-1]),
        residual=float(norms["interior"][-1]),
        pending=float(norms["pending"][-1]),
        injection_deficit=float(norms["injection_deficit"][-1]),
        n_steps=int(state.step_index),
        wall_clock=time.perf_counter() - start,
        domain_width=domain.width,
        psi0_trajectory=psi0_traj,
        full_snapshots=np.array(full_snaps) if record_full else None,
        x_full=domain.x.copy() if record_full else None,
    )
    return report


def run_combined(config: SimulationConfig, **kwargs) -> RunReport:
    """Reduced-domain run: analytic injection, remapped absorbing layers."""
    return run(config, "combined", **kwargs)


def reduced_domain_width(config: SimulationConfig) -> float:
    """Width (nm, in the simulated coordinate) of the combined-run domain."""
    return domain_for_mode(config, "combined").width
