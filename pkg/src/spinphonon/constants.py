"""Physical constants and unit conversions.

Internal unit convention (hbar = 1): energies and angular frequencies are
both carried in cm^-1, magnetic fields in Tesla, temperatures in Kelvin and
time in ps.  The single conversion point between the energy and time axes is
``CM1_TO_RAD_PER_PS``.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    k_B: float = 0.6950348  # Boltzmann constant, cm^-1 / K
    mu_B: float = 0.46686447  # Bohr magneton, cm^-1 / T
    cm1_to_rad_per_ps: float = 0.18836516  # rad ps^-1 per cm^-1


CONST = PhysicalConstants()

K_B = CONST.k_B
MU_B = CONST.mu_B
CM1_TO_RAD_PER_PS = CONST.cm1_to_rad_per_ps
