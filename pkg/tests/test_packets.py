import math

import numpy as np
import pytest

from opentdse.core import HBAR, GaussianParams, TightBindingParams, effective_mass_tb, make_grid, mass
from opentdse.exceptions import DomainError, TruncatedSupport
from opentdse.packets import (
    analytic_free_evolution,
    gaussian_theta,
    gaussian_value,
    packet_center,
    packet_width,
    probability_left_of,
    tb_initial_state,
    time_correction_factor,
)

from conftest import SIGMA0, packet


def test_theta_example():
    assert gaussian_theta(100.0, packet()) == pytest.approx(0.04617, abs=1e-5)
    with pytest.raises(DomainError):
        gaussian_theta(-1.0, packet())


def test_peak_value_at_start():
    p = packet()
    v = gaussian_value(p.x0, 0.0, p)
    assert abs(v) == pytest.approx((1 / (2 * math.pi * SIGMA0**2)) ** 0.25)
    assert abs(np.angle(v)) < 1e-15


def test_norm_and_moments_follow_closed_forms():
    p = packet(0.1)
    x = np.linspace(-600, 900, 150001)
    dx = x[1] - x[0]
    for t in (0.0, 50.0, 400.0):
        rho = np.abs(gaussian_value(x, t, p)) ** 2
        assert rho.sum() * dx == pytest.approx(1.0, abs=1e-9)
        mean = (x * rho).sum() * dx
        assert mean == pytest.approx(packet_center(t, p), abs=1e-7)
        sd = math.sqrt(((x - mean) ** 2 * rho).sum() * dx)
        assert sd == pytest.approx(packet_width(t, p), rel=1e-8)


def test_gaussian_solves_free_equation():
    # i hbar d/dt psi = -hbar^2/(2m) psi'' checked by centred differences
    p = packet(0.1)
    x = np.linspace(-120, 0, 601)
    t, h, dx = 30.0, 1e-3, 1e-3
    dpsi_dt = (gaussian_value(x, t + h, p) - gaussian_value(x, t - h, p)) / (2 * h)
    d2 = (gaussian_value(x + dx, t, p) - 2 * gaussian_value(x, t, p) + gaussian_value(x - dx, t, p)) / dx**2
    lhs = 1j * HBAR * dpsi_dt
    rhs = -(HBAR**2) / (2 * mass(0.2)) * d2
    assert np.max(np.abs(lhs - rhs)) < 1e-5 * np.max(np.abs(rhs))


def test_discrete_normalisation_is_exact():
    g = make_grid(-800.0, 800.0, 0.2, 0.0, 50.0)
    psi = tb_initial_state(g, packet(0.1))
    assert np.sum(np.abs(psi) ** 2) * g.dx == pytest.approx(1.0, abs=1e-14)


def test_fine_grid_norm_close_to_one():
    g = make_grid(-300.0, 300.0, 0.01, 0.0, 50.0)
    psi = gaussian_value(g.x, 0.0, packet(0.1))
    assert np.sum(np.abs(psi) ** 2) * g.dx == pytest.approx(1.0, abs=1e-6)


def test_truncated_support():
    p = packet(0.1)
    g = make_grid(-88.0, -52.0, 0.2, -60.0, -55.0)  # about x0 +- sigma0
    with pytest.raises(TruncatedSupport):
        tb_initial_state(g, p)


def test_time_correction_factor():
    tb = effective_mass_tb(0.2, 0.2)
    k = 2.29115
    y = k * 0.2
    assert time_correction_factor(k, 0.2, tb.u, 0.2) == pytest.approx(2 * (1 - math.cos(y)) / y**2, rel=1e-12)
    assert time_correction_factor(0.0, 0.2, tb.u, 0.2) == pytest.approx(1.0, rel=1e-12)


def test_tight_binding_form_matches_lattice_evolution():
    # exact lattice propagation via eigen-decomposition against the corrected closed form
    tb = effective_mass_tb(0.2, 0.2)
    p = GaussianParams(SIGMA0, 0.0, 0.7)
    x = np.arange(-1500, 1501) * 0.2
    H = np.diag(np.full(x.size, tb.rho)) + np.diag(np.full(x.size - 1, tb.u), 1) + np.diag(np.full(x.size - 1, tb.u), -1)
    w, V = np.linalg.eigh(H)
    psi0 = gaussian_value(x, 0.0, p)
    t = 100.0
    exact = V @ (np.exp(-1j * w * t / HBAR) * (V.T @ psi0))
    an = analytic_free_evolution(x, t, p, "tight_binding", tb)
    g = gaussian_value(x, t, p)
    err_an = np.sum(np.abs(exact - an) ** 2) * 0.2
    err_g = np.sum(np.abs(exact - g) ** 2) * 0.2
    assert err_an < err_g
    assert err_an < 1e-4


def test_shift_phase_for_general_tight_binding():
    tb = TightBindingParams(0.5, -1.0, 0.2)
    p = GaussianParams(SIGMA0, 0.0, 0.5)
    a = analytic_free_evolution(0.0, 10.0, p, "tight_binding", tb)
    tc = time_correction_factor(0.5, 0.2, -1.0, p.m_star)
    assert a == pytest.approx(gaussian_value(0.0, tc * 10.0, p) * np.exp(-1j * 10.0 * (0.5 - 2.0) / HBAR))


def test_positive_hopping_rejected():
    with pytest.raises(DomainError):
        analytic_free_evolution(0.0, 1.0, packet(), "tight_binding", TightBindingParams(0.0, 1.0, 0.2))


def test_probability_left_of():
    p = packet()
    assert probability_left_of(p.x0, 0.0, p) == pytest.approx(0.5)
    assert probability_left_of(p.x0 - 5 * SIGMA0, 0.0, p) == pytest.approx(2.87e-7, rel=1e-2)
