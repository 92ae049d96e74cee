"""
Gaussian wave packets and their analytic free evolution.

The free effective-mass Gaussian is known in closed form.  On a discrete
lattice (tight binding, or the finite-difference effective-mass stencil) the
same closed form evaluated at a rescaled time, times a global phase, is an
accurate approximation of the free evolution.
"""

from __future__ import annotations

import math

import numpy as np

from .core import HBAR, GaussianParams, Grid, TightBindingParams, mass
from .exceptions import DomainError, TruncatedSupport

__all__ = [
    "GaussianParams",
    "gaussian_theta",
    "gaussian_value",
    "tb_initial_state",
    "time_correction_factor",
    "analytic_free_evolution",
    "packet_center",
    "packet_width",
    "probability_left_of",
]


def _spread(t, params):
    """sigma_x^2(t) = hbar t / (2 m*), in nm^2."""
    return HBAR * t / (2.0 * mass(params.m_star))


def gaussian_theta(t, params: GaussianParams):
    """Phase theta(t) with sigma0^2 tan(2 theta) = hbar t / (2 m*), theta(0) = 0.

    Uses the principal branch, so theta increases from 0 to pi/4 as t grows.
    """
    if np.any(np.asarray(t) < 0):
        raise DomainError("negative times are not supported")
    return 0.5 * np.arctan(_spread(t, params) / params.sigma0**2)


def gaussian_value(x, t, params: GaussianParams):
    """Free effective-mass Gaussian packet psi_G(x, t).

    Parameters
    ----------
    x : float or ndarray
        Position(s) in nm.
    t : float
        Time in fs, t >= 0.
    params : GaussianParams
        Packet description; the result is scaled by ``params.amplitude``.

    Returns
    -------
    complex or ndarray of complex
        Normalised so that the integral of |psi_G|^2 over x is |amplitude|^2.
    """
    if t < 0:
        raise DomainError("negative times are not supported")
    s0 = params.sigma0**2
    sx = _spread(t, params)
    kx = params.kx
    x = np.asarray(x, dtype=float)
    theta = 0.5 * math.atan(sx / s0)
    varphi = -theta - kx**2 * sx
    pref = (s0 / (2.0 * math.pi * (s0**2 + sx**2))) ** 0.25
    shifted = x - params.x0 - 2.0 * kx * sx
    expo = 1j * (varphi + kx * (x - params.x0)) - shifted**2 / (4.0 * (s0 + 1j * sx))
    return params.amplitude * pref * np.exp(expo)


def packet_center(t, params: GaussianParams):
    """Centre of |psi_G|^2 at time t."""
    return params.x0 + HBAR * params.kx * t / mass(params.m_star)


def packet_width(t, params: GaussianParams):
    """Standard deviation of |psi_G|^2 at time t."""
    sx = _spread(t, params)
    return math.sqrt(params.sigma0**2 + sx**2 / params.sigma0**2)


def probability_left_of(x, t, params: GaussianParams):
    """Probability of psi_G(., t) to the left of ``x`` (unit amplitude)."""
    z = (x - packet_center(t, params)) / (math.sqrt(2.0) * packet_width(t, params))
    return 0.5 * math.erfc(-z)


def tb_initial_state(grid: Grid, params: GaussianParams, x=None):
    """Gaussian sampled on the grid and normalised to the discrete norm.

    The normalisation makes sum |psi_j|^2 dx equal |amplitude|^2 exactly.
    Raises TruncatedSupport if more than 1e-10 of the probability lies
    beyond the grid ends.
    """
    x = grid.x if x is None else np.asarray(x, dtype=float)
    tail = 0.5 * math.erfc((params.x0 - grid.x_min) / (math.sqrt(2.0) * params.sigma0))
    tail += 0.5 * math.erfc((grid.x_max - params.x0) / (math.sqrt(2.0) * params.sigma0))
    if tail > 1e-10:
        raise TruncatedSupport(f"packet tail beyond the grid is {tail:.3g}")
    psi = gaussian_value(x, 0.0, params)
    norm = math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx) / abs(params.amplitude)
    return psi / norm


def time_correction_factor(kx, dx, u, m_star):
    """Ratio t'/t that makes psi_G follow the lattice dispersion at kx.

    Returns -4 u m* (1 - cos(kx dx)) / (hbar^2 kx^2), which equals
    2 (1 - cos(kx dx)) / (kx dx)^2 for the effective-mass hopping.  Below
    |kx dx| = 1e-8 the kx -> 0 limit is returned.
    """
    m = mass(m_star)
    y = kx * dx
    if abs(y) < 1e-8:
        return -2.0 * u * m * dx**2 / HBAR**2
    return -4.0 * u * m * (1.0 - math.cos(y)) / (HBAR**2 * kx**2)


def analytic_free_evolution(x, t, params: GaussianParams, model="effective_mass", tb_params: TightBindingParams = None):
    """Analytic free evolution of the initial Gaussian.

    For ``effective_mass`` this is psi_G(x, t).  For ``tight_binding`` it is
    exp(-i t (rho + 2u)/hbar) psi_G(x, tc t), which also describes the
    finite-difference effective-mass stencil when rho = -2u.
    """
    if model == "effective_mass":
        return gaussian_value(x, t, params)
    if model != "tight_binding":
        raise ValueError(f"unknown model {model!r}")
    tc = time_correction_factor(params.kx, tb_params.dx, tb_params.u, params.m_star)
    if tc < 0:
        raise DomainError("time correction is negative (u > 0); packet is not at the band bottom")
    value = gaussian_value(x, tc * t, params)
    shift = tb_params.rho + 2.0 * tb_params.u
    if shift != 0.0:
        value = value * np.exp(-1j * t * shift / HBAR)
    return value
