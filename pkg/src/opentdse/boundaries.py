"""
Absorbing layers: masks, the arctan coordinate contraction and layer sizing.

A layer is described in its local coordinate s >= 0, measured outwards from
the edge of the active region.  With remapping, s is the contracted
coordinate z = K arctan(x/K) and the physical distance is x = K tan(s/K).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import HBAR, BoundarySpec, node_count
from .exceptions import DegenerateWavevector, DomainError, NonPositiveMask
from .hamiltonians import RemapCoefficients

__all__ = [
    "AbsorberSpec",
    "RemapSpec",
    "Layer",
    "coord_forward",
    "coord_inverse",
    "remap_coefficients",
    "choose_absorber_length",
    "effective_layer_width",
    "absorber_mask",
    "imaginary_potential",
    "build_layer",
]


@dataclass(frozen=True)
class AbsorberSpec:
    L: float
    m_exp: int = 5
    side: str = "right"

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("absorber length must be positive")
        if not 3 <= self.m_exp <= 12:
            raise ValueError("m_exp must be in [3, 12]")


@dataclass(frozen=True)
class RemapSpec:
    La: float
    edge: float = 0.0

    def __post_init__(self):
        if not self.La > 0:
            raise ValueError("La must be positive")

    @property
    def K(self) -> float:
        """Remap parameter chosen so that s = La corresponds to x = infinity."""
        return 2.0 * self.La / math.pi


def coord_forward(x, K):
    """z = K arctan(x/K) for a layer-local physical distance x >= 0."""
    z = K * np.arctan(np.asarray(x, dtype=float) / K)
    return z if z.ndim else float(z)


def coord_inverse(z, K):
    """x = K tan(z/K); defined for 0 <= z < K pi/2."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr >= K * math.pi / 2):
        raise DomainError("z must be below K pi / 2")
    x = K * np.tan(z_arr / K)
    return x if x.ndim else float(x)


def remap_coefficients(z, K) -> RemapCoefficients:
    """Weights c'(x)^2 = cos^4(z/K) and c''(x) = -(2/K) sin(z/K) cos^3(z/K)."""
    z = np.asarray(z, dtype=float)
    c = np.cos(z / K)
    s = np.sin(z / K)
    return RemapCoefficients(c1=c**4, c2=-(2.0 / K) * s * c**3)


def choose_absorber_length(kx) -> float:
    """L = 10 de Broglie lengths, 10 * 2 pi / |kx|."""
    if kx == 0:
        raise DegenerateWavevector("absorber length undefined for kx = 0")
    return 10.0 * 2.0 * math.pi / abs(kx)


def effective_layer_width(L, K) -> float:
    """Remapped width K arctan(L / (2K)) that holds the physical distance L/2."""
    return K * math.atan(L / (2.0 * K))


def absorber_mask(s, absorber: AbsorberSpec, remap: Optional[RemapSpec] = None):
    """Per-step damping factor g on layer-local coordinates ``s``.

    Without remap g = 1 - (s/L)^m; with remap the polynomial is evaluated at
    the physical distance K tan(s/K).  Values are clamped to [0, 1].
    """
    s = np.asarray(s, dtype=float)
    if remap is None:
        dist = s
    else:
        K = remap.K
        with np.errstate(over="ignore", invalid="ignore"):
            dist = np.where(s < K * math.pi / 2, K * np.tan(np.minimum(s, K * math.pi / 2) / K), np.inf)
    with np.errstate(over="ignore", invalid="ignore"):
        g = 1.0 - (dist / absorber.L) ** absorber.m_exp
    g = np.clip(np.nan_to_num(g, nan=0.0, neginf=0.0), 0.0, 1.0)
    return g if g.ndim else float(g)


def imaginary_potential(f_values, dt, clamp=False):
    """Negative imaginary potential J = -(hbar/dt) log f equivalent to a mask f.

    Raises NonPositiveMask if some f <= 0 unless ``clamp`` is set, in which
    case f is floored at 1e-300 and the offending nodes are reported with a
    warning.
    """
    f = np.asarray(f_values, dtype=float)
    bad = np.flatnonzero(f <= 0)
    if bad.size:
        if not clamp:
            raise NonPositiveMask(bad)
        warnings.warn(f"mask floored at 1e-300 on {bad.size} node(s)", RuntimeWarning, stacklevel=2)
        f = np.maximum(f, 1e-300)
    J = -(HBAR / dt) * np.log(f)
    J = np.where(f == 1.0, 0.0, J)
    return J if J.ndim else float(J)


@dataclass
class Layer:
    """Geometry and per-node data of one absorbing layer.

    Arrays have one entry per layer node, ordered outwards from the edge
    (the shared edge node itself is not part of the layer).
    """

    s: np.ndarray  # local coordinate of the nodes (remapped if K is set)
    distance: np.ndarray  # physical distance from the edge
    c1: np.ndarray
    c2: np.ndarray  # in outward orientation
    mask: Optional[np.ndarray]
    jacobian: np.ndarray  # dx_physical / ds, zero at the clamped outer node
    K: Optional[float]
    L: Optional[float]
    J: Optional[np.ndarray] = None  # imaginary potential (eV) when that absorber is used

    @property
    def n(self) -> int:
        return self.s.size


def build_layer(spec: BoundarySpec, dx: float, kx: float, width: Optional[float] = None, dt: float = 0.01) -> Layer:
    """Nodes, remap weights and mask of a layer described by ``spec``.

    ``kx`` is the packet wavevector used when neither ``spec.L`` nor
    ``spec.k_local`` is set.  ``width`` overrides the default layer width.
    With the imaginary-potential absorber the stored ``mask`` is the
    per-step factor exp(-J dt / hbar).
    """
    L = None
    if spec.absorb:
        L = spec.L if spec.L is not None else choose_absorber_length(spec.k_local or kx)
    remap = RemapSpec(spec.La) if spec.La is not None else None
    K = remap.K if remap else None
    if width is None:
        width = spec.width
    if width is None:
        if remap and L is not None:
            width = effective_layer_width(L, K)
        elif remap:
            width = spec.La
        elif L is not None:
            width = L
        else:
            raise ValueError("layer width is needed when neither absorption nor remapping is set")
    if remap is not None and width > spec.La + 1e-9:
        raise ValueError("remapped layer cannot be wider than La")
    n = node_count(width, dx)
    s = dx * np.arange(1, n + 1)
    if remap is not None:
        end = K * math.pi / 2
        inside = s < end - 1e-12
        distance = np.full(n, np.inf)
        distance[inside] = K * np.tan(s[inside] / K)
        coeffs = remap_coefficients(np.minimum(s, end), K)
        c1 = np.where(inside, coeffs.c1, 0.0)
        c2 = np.where(inside, coeffs.c2, 0.0)
        jac = np.where(inside, 1.0 / np.cos(np.minimum(s, end) / K) ** 2, 0.0)
    else:
        distance = s.copy()
        c1 = np.ones(n)
        c2 = np.zeros(n)
        jac = np.ones(n)
    jac[-1] = 0.0
    mask = absorber_mask(s, AbsorberSpec(L, spec.m_exp), remap) if L is not None else None
    J = None
    if mask is not None and spec.absorber == "imaginary_potential":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            J = imaginary_potential(mask, dt, clamp=True)
        mask = np.exp(-J * dt / HBAR)
    return Layer(s=s, distance=distance, c1=c1, c2=c2, mask=mask, jacobian=jac, K=K, L=L, J=J)
