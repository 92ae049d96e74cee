"""
Discrete Hamiltonians and dispersion relations.

All stencils are three-point and act on complex arrays sampled on a uniform
grid.  Nodes beyond either end of the array are treated as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HBAR, TightBindingParams, effective_mass_tb, mass
from .exceptions import DomainError, OutOfBand

__all__ = [
    "TightBindingParams",
    "RemapCoefficients",
    "TridiagonalOperator",
    "apply_effective_mass",
    "apply_tight_binding",
    "apply_remapped",
    "dispersion",
    "wavevector_from_energy",
]


@dataclass(frozen=True)
class RemapCoefficients:
    """Stencil weights of the remapped kinetic operator on one layer.

    c1 = cos^4(z/K) multiplies the second difference, c2 = -(2/K) sin cos^3
    (1/nm) the first difference.  Both are ordered from the active-region edge
    outwards.
    """

    c1: np.ndarray
    c2: np.ndarray


def _second_difference(f):
    d2 = -2.0 * f
    d2[1:] += f[:-1]
    d2[:-1] += f[1:]
    return d2


def _first_difference(f):
    d1 = np.zeros_like(f)
    d1[1:-1] = f[2:] - f[:-2]
    d1[0] = f[1] if f.size > 1 else 0.0
    d1[-1] = -f[-2] if f.size > 1 else 0.0
    return 0.5 * d1


def apply_effective_mass(field, grid, U=0.0, m_star=0.2):
    """Discrete effective-mass Hamiltonian applied to ``field``.

    H f_j = -hbar^2/(2 m* dx^2) (f_{j+1} - 2 f_j + f_{j-1}) + U_j f_j
    """
    f = np.asarray(field, dtype=complex)
    dx = grid if np.isscalar(grid) else grid.dx
    kin = -(HBAR**2) / (2.0 * mass(m_star) * dx**2)
    return kin * _second_difference(f) + np.asarray(U) * f


def apply_tight_binding(field, params: TightBindingParams, U=0.0):
    """Nearest-neighbour tight-binding Hamiltonian u(f_{j-1}+f_{j+1}) + (rho+U_j) f_j."""
    f = np.asarray(field, dtype=complex)
    out = (params.rho + np.asarray(U)) * f
    out[1:] += params.u * f[:-1]
    out[:-1] += params.u * f[1:]
    return out


def apply_remapped(field, coeffs: RemapCoefficients, dx, U=0.0, m_star=0.2, tb=None):
    """Kinetic operator in the remapped coordinate z plus the potential.

    Computes -hbar^2/(2 m*) [c1 D2 + c2 D1] f + U f with D2 the three-point
    second difference and D1 the central first difference, both with spacing
    ``dx``.  With ``tb`` given the prefactor is u dx^2 and the constant
    rho + 2u is added, which reduces to the line above for the
    effective-mass (rho, u).
    """
    f = np.asarray(field, dtype=complex)
    if tb is None:
        tb = effective_mass_tb(m_star, dx)
    c1 = np.asarray(coeffs.c1, dtype=float)
    c2 = np.asarray(coeffs.c2, dtype=float)
    out = tb.u * (c1 * _second_difference(f) + c2 * dx * _first_difference(f))
    return out + (tb.rho + 2.0 * tb.u + np.asarray(U)) * f


class TridiagonalOperator:
    """H f_j = lo_j f_{j-1} + diag_j f_j + up_j f_{j+1} on a layered grid.

    ``c1`` and ``c2`` are per-node remap weights in global (left-to-right)
    orientation; inside the active region c1 = 1 and c2 = 0, where the
    stencil is exactly the tight-binding one.
    """

    def __init__(self, tb: TightBindingParams, n: int, c1=None, c2=None):
        c1 = np.ones(n) if c1 is None else np.asarray(c1, dtype=float)
        c2 = np.zeros(n) if c2 is None else np.asarray(c2, dtype=float)
        half = 0.5 * tb.dx * c2
        self.tb = tb
        self.n = n
        self.lo = tb.u * (c1 - half)
        self.up = tb.u * (c1 + half)
        # 1 - c1 is exactly zero where c1 == 1, keeping diag == rho there
        self.diag = tb.rho + 2.0 * tb.u * (1.0 - c1)

    def apply(self, f, U=None):
        out = self.diag * f
        out[1:] += self.lo[1:] * f[:-1]
        out[:-1] += self.up[:-1] * f[1:]
        if U is not None:
            out += U * f
        return out

    def to_dense(self, U=None):
        m = np.diag(self.diag + (0.0 if U is None else U)).astype(complex)
        m[np.arange(1, self.n), np.arange(self.n - 1)] = self.lo[1:]
        m[np.arange(self.n - 1), np.arange(1, self.n)] = self.up[:-1]
        return m


def _m_star(params):
    return float(getattr(params, "m_star", params))


def dispersion(model: str, k, params):
    """Band energy (eV) at wavevector ``k`` (1/nm).

    ``params`` is the effective mass in units of m0 (or any object with an
    ``m_star`` attribute) for ``effective_mass`` and a TightBindingParams for
    ``tight_binding``.
    """
    k = np.asarray(k, dtype=float)
    if model == "effective_mass":
        E = HBAR**2 * k**2 / (2.0 * mass(_m_star(params)))
    elif model == "tight_binding":
        if np.any(np.abs(k) * params.dx > np.pi * (1 + 1e-12)):
            raise DomainError("k outside the first Brillouin zone")
        E = params.rho + 2.0 * params.u * np.cos(k * params.dx)
    else:
        raise ValueError(f"unknown model {model!r}")
    return E if E.ndim else float(E)


def wavevector_from_energy(model: str, E, params):
    """Non-negative wavevector with ``dispersion(model, k) == E``."""
    E = np.asarray(E, dtype=float)
    if model == "effective_mass":
        if np.any(E < 0):
            raise DomainError("energy must be non-negative")
        k = np.sqrt(2.0 * mass(_m_star(params)) * E) / HBAR
    elif model == "tight_binding":
        c = (E - params.rho) / (2.0 * params.u)
        if np.any(np.abs(c) > 1.0 + 1e-12):
            raise OutOfBand(f"energy outside band [{params.rho - 2 * abs(params.u)}, {params.rho + 2 * abs(params.u)}]")
        k = np.arccos(np.clip(c, -1.0, 1.0)) / params.dx
    else:
        raise ValueError(f"unknown model {model!r}")
    return k if k.ndim else float(k)
