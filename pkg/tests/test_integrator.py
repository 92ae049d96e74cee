import numpy as np
import pytest

from opentdse.core import HBAR, BoundarySpec, OutputSpec, PotentialSpec
from opentdse.exceptions import ConfigError, NumericalBlowup, StopRuleNeverMet
from opentdse.integrator import (
    Propagator,
    domain_for_mode,
    leapfrog_step,
    reconstruct_total,
    run,
    run_combined,
    step_phi,
)
from opentdse.packets import analytic_free_evolution


def plain(cfg):
    """Boundary specs that turn the combined domain into the full plain grid."""
    return cfg.replace(
        left_boundary=BoundarySpec(absorb=False, La=None, width=cfg.a - cfg.x_min),
        right_boundary=BoundarySpec(absorb=False, La=None, width=cfg.x_max - cfg.b),
    )


def test_regions_partition_the_grid(small_config):
    d = domain_for_mode(small_config, "combined")
    r = d.regions
    assert r.il.start == 0 and r.il.stop == r.ib.start and r.ib.stop == r.ir.start and r.ir.stop == d.n
    assert np.all(d.x[r.il] < small_config.a)
    assert np.all(d.x[r.ir] > small_config.b)
    assert d.x[r.ib][0] == small_config.a and d.x[r.ib][-1] == pytest.approx(small_config.b)


def test_leapfrog_zero_hamiltonian():
    prev = np.arange(5, dtype=complex)
    assert np.array_equal(leapfrog_step(prev, prev * 3, lambda f: 0 * f, 0.01), prev)


def test_leapfrog_blowup_guard():
    with pytest.raises(NumericalBlowup):
        leapfrog_step(np.ones(3, complex), np.ones(3, complex), lambda f: 1e9 * f, 0.01, blowup_limit=10.0)


def test_bootstrap_levels(small_config):
    d = domain_for_mode(small_config, "combined")
    prop = Propagator(d)
    s0 = prop.initial_state()
    s1 = prop.bootstrap_first_step(s0)
    ib = d.regions.ib
    expected = analytic_free_evolution(d.x[ib], small_config.dt, small_config.packet, "tight_binding", small_config.tb_params)
    assert np.allclose(s1.psi0_curr[ib], expected * prop.scale, rtol=0, atol=1e-15)
    U = d.potential_interior(0.0)
    assert np.allclose(s1.phi_curr[ib], small_config.dt / (1j * HBAR) * U * s0.psi0_curr[ib], rtol=0, atol=1e-30)
    assert s1.step_index == 1


def test_phi_stays_zero_without_potential(small_config):
    cfg = small_config.replace(potential=PotentialSpec())
    prop = Propagator(domain_for_mode(cfg, "combined"))
    s = prop.bootstrap_first_step(prop.initial_state())
    for _ in range(3000):
        s = prop.advance(s)
    assert not np.any(s.phi_curr)
    assert np.array_equal(reconstruct_total(s), s.psi0_curr)


def test_step_phi_masks_only_layers(small_config):
    d = domain_for_mode(small_config, "combined")
    prop = Propagator(d)
    s = prop.bootstrap_first_step(prop.initial_state())
    for _ in range(200):
        s = prop.advance(s)
    raw = prop.step_phi(s)
    masked = step_phi(s, d)
    ib = d.regions.ib
    assert np.array_equal(raw[ib], masked[ib])


def test_split_equals_single_field(small_config):
    cfg = plain(small_config).replace(injection="numeric")
    split = run(cfg, "combined", n_steps=4000, record_full=True)
    single = run(cfg, "full", n_steps=4000, record_full=True)
    assert np.max(np.abs(split.full_snapshots - single.full_snapshots)) < 1e-12


def test_linearity(small_config):
    from dataclasses import replace

    alpha = 0.7 - 1.3j
    base = run_combined(small_config, n_steps=3000, record_psi0=True)
    scaled = run_combined(small_config.replace(packet=replace(small_config.packet, amplitude=alpha)), n_steps=3000, record_psi0=True)
    ref = alpha * base.trajectory.snapshots
    assert np.max(np.abs(scaled.trajectory.snapshots - ref)) <= 1e-12 * np.max(np.abs(ref))
    ref0 = alpha * base.psi0_trajectory.snapshots
    assert np.max(np.abs(scaled.psi0_trajectory.snapshots - ref0)) <= 1e-12 * np.max(np.abs(ref0))


def test_combined_run_empties_and_balances(small_config):
    rep = run_combined(small_config)
    n = rep.norms
    total = n["interior"] + n["left_layer"] + n["right_layer"] + n["pending"]
    assert total[-1] < 1e-3
    assert rep.bookkeeping_total == pytest.approx(1.0, abs=1e-3)
    # once the packet is inside, probability only leaves
    start = np.argmax(n["pending"] < 1e-12)
    assert np.all(np.diff(total[start:]) <= 1e-12)


def test_left_mask_switch(small_config):
    on = run_combined(small_config)
    off = run_combined(small_config.replace(left_mask_during_injection=False))
    assert off.bookkeeping_total == pytest.approx(1.0, abs=1e-3)
    assert off.transmission == pytest.approx(on.transmission, abs=1e-3)
    assert off.reflection == pytest.approx(on.reflection, abs=1e-3)


def test_stop_rule_never_met(small_config):
    with pytest.raises(StopRuleNeverMet):
        run_combined(small_config.replace(max_steps=500))


def test_invalid_config_rejected(small_config):
    with pytest.raises(ConfigError):
        run_combined(small_config.replace(dt=-1.0))


def test_imaginary_potential_matches_mask(small_config):
    imag = small_config.replace(
        left_boundary=BoundarySpec(absorber="imaginary_potential"),
        right_boundary=BoundarySpec(absorber="imaginary_potential"),
    )
    a = run_combined(small_config, n_steps=3000).trajectory.snapshots
    b = run_combined(imag, n_steps=3000).trajectory.snapshots
    assert np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(a))


def test_right_injection_mirrors_left(small_config):
    from dataclasses import replace

    p = small_config.packet
    mirrored = small_config.replace(
        packet=replace(p, x0=small_config.a + small_config.b - p.x0, kx=-p.kx, injection_side="right"),
        potential=PotentialSpec("rectangular_barrier", 50.0 - 27.5, 5.0, 0.0825),
    )
    left = run_combined(small_config)
    right = run_combined(mirrored)
    assert right.transmission == pytest.approx(left.transmission, abs=1e-6)
    assert right.reflection == pytest.approx(left.reflection, abs=1e-6)


def test_time_dependent_potential_runs(small_config):
    n_int = 251
    table = np.zeros((2, n_int))
    table[1, 120:140] = 0.05
    cfg = small_config.replace(potential=PotentialSpec("time_dependent_tabulated", table=table, table_times=np.array([0.0, 100.0])))
    rep = run_combined(cfg)
    assert rep.bookkeeping_total == pytest.approx(1.0, abs=1e-3)
