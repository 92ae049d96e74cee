"""How wide do the absorbing layers need to be?

A polynomial mask 1 - (x/L)^m absorbs well once L spans about ten de Broglie
wavelengths.  On a plain grid half of that length has to be simulated, which
gets expensive at low energy.  Remapping the layer with z = K atan(x/K)
squeezes the same physical distance into at most K pi/2 nm of grid.

Run:  python3 demos/01_layer_sizing.py
"""

import math

import numpy as np

from opentdse.boundaries import AbsorberSpec, RemapSpec, absorber_mask, choose_absorber_length, effective_layer_width
from opentdse.hamiltonians import wavevector_from_energy

La = 20.0
K = 2.0 * La / math.pi

print(f"remap layer La = {La} nm, K = {K:.4f} nm\n")
print(f"{'E (eV)':>8} {'k (1/nm)':>10} {'L (nm)':>9} {'L/2 plain':>10} {'L_eff remapped':>15}")
for E in (0.01, 0.1, 1.0):
    k = wavevector_from_energy("effective_mass", E, 0.2)
    L = choose_absorber_length(k)
    print(f"{E:8.2f} {k:10.4f} {L:9.2f} {L / 2:10.2f} {effective_layer_width(L, K):15.2f}")

# the remapped mask reaches the same value at z = L_eff as the plain mask at L/2
L = choose_absorber_length(wavevector_from_energy("effective_mass", 0.01, 0.2))
spec = AbsorberSpec(L, 5)
z = np.array([effective_layer_width(L, K)])
print(f"\nmask at the layer end, 0.01 eV: plain {absorber_mask(np.array([L / 2]), spec)[0]:.5f}, "
      f"remapped {absorber_mask(z, spec, RemapSpec(La))[0]:.5f}")
