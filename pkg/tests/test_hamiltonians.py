import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opentdse.core import HBAR, TightBindingParams, effective_mass_tb, mass
from opentdse.exceptions import DomainError, OutOfBand
from opentdse.hamiltonians import (
    RemapCoefficients,
    TridiagonalOperator,
    apply_effective_mass,
    apply_remapped,
    apply_tight_binding,
    dispersion,
    wavevector_from_energy,
)

rng = np.random.default_rng(7)


def _field(n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def test_effective_mass_equals_tight_binding_form():
    f = _field(50)
    U = rng.normal(size=50)
    tb = effective_mass_tb(0.2, 0.2)
    assert np.allclose(apply_effective_mass(f, 0.2, U), apply_tight_binding(f, tb, U), rtol=1e-13, atol=1e-12)


def test_constant_field_interior_energy():
    # second difference of a constant vanishes away from the ends
    out = apply_effective_mass(np.ones(10, complex), 0.2)
    assert np.allclose(out[1:-1], 0.0)


def test_plane_wave_is_eigenvector():
    tb = TightBindingParams(rho=0.3, u=-1.1, dx=0.25)
    k = 1.3
    j = np.arange(400)
    f = np.exp(1j * k * j * tb.dx)
    out = apply_tight_binding(f, tb)
    assert np.allclose(out[1:-1], dispersion("tight_binding", k, tb) * f[1:-1])


def test_tridiagonal_matches_apply_remapped():
    K = 2 * 20 / np.pi
    s = 0.2 * np.arange(1, 60)
    c = np.cos(s / K)
    coeffs = RemapCoefficients(c**4, -(2 / K) * np.sin(s / K) * c**3)
    tb = effective_mass_tb(0.2, 0.2)
    f = _field(s.size)
    op = TridiagonalOperator(tb, s.size, coeffs.c1, coeffs.c2)
    assert np.allclose(op.apply(f), apply_remapped(f, coeffs, 0.2), rtol=1e-12, atol=1e-10)


def test_tridiagonal_reduces_to_tight_binding():
    tb = TightBindingParams(0.1, -0.7, 0.2)
    f = _field(30)
    assert np.allclose(TridiagonalOperator(tb, 30).apply(f), apply_tight_binding(f, tb))
    # diag stays exactly rho where c1 == 1
    assert np.all(TridiagonalOperator(tb, 30).diag == 0.1)


def test_remapped_layer_spectrum_is_real():
    # real spectrum while c1 > |c2| dx / 2 (physical distance below K^2/dx)
    K = 2 * 20 / np.pi
    s = 0.2 * np.arange(1, 40)
    c = np.cos(s / K)
    op = TridiagonalOperator(effective_mass_tb(0.2, 0.2), s.size, c**4, -(2 / K) * np.sin(s / K) * c**3)
    ev = np.linalg.eigvals(op.to_dense())
    assert np.max(np.abs(ev.imag)) < 1e-9


def test_effective_mass_dispersion_value():
    k = wavevector_from_energy("effective_mass", 1.0, 0.2)
    assert k == pytest.approx(2.29115, rel=1e-5)
    assert dispersion("effective_mass", k, 0.2) == pytest.approx(1.0)
    assert HBAR**2 * k**2 / (2 * mass(0.2)) == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(-2.0, 2.0), st.floats(-3.0, -0.1), st.floats(0.05, 0.5))
def test_tight_binding_roundtrip(frac, rho, u, dx):
    tb = TightBindingParams(rho, u, dx)
    E = rho + 2 * u * np.cos(frac * np.pi)
    k = wavevector_from_energy("tight_binding", E, tb)
    assert dispersion("tight_binding", k, tb) == pytest.approx(E, abs=1e-9)


def test_out_of_band_and_zone():
    tb = TightBindingParams(0.0, -1.0, 0.2)
    with pytest.raises(OutOfBand):
        wavevector_from_energy("tight_binding", 2.5, tb)
    with pytest.raises(DomainError):
        dispersion("tight_binding", 1.1 * np.pi / 0.2, tb)
    with pytest.raises(DomainError):
        wavevector_from_energy("effective_mass", -0.1, 0.2)
