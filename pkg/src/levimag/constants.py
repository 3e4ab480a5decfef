"""Physical constants (SI) shared across the toolkit.

All angular frequencies in this package are in rad/s; use ``to_hz`` /
``from_hz`` at the boundaries.
"""

from dataclasses import dataclass
import math

MU_0 = 1.25663706212e-6
"""Vacuum magnetic permeability, N/A^2."""

HBAR = 1.054571817e-34
"""Reduced Planck constant, J*s."""

K_B = 1.380649e-23
"""Boltzmann constant, J/K (exact)."""

R_GAS = 8.314462618
"""Molar gas constant, J/(mol*K)."""

GAMMA_NV = 1.76086e11
"""NV electron-spin gyromagnetic ratio, rad/(s*T) (28.025 GHz/T)."""

D_ZFS = 2.87e9
"""NV ground-state zero-field splitting, Hz."""

AIR_MOLAR_MASS = 0.02897
"""Mean molar mass of air, kg/mol."""

AIR_MOLECULE_DIAMETER = 3.7e-10
"""Effective hard-sphere diameter of an air molecule, m."""


@dataclass(frozen=True)
class PhysicalConstants:
    """Bundle of the constants above, for callers that prefer one object."""

    mu_0: float = MU_0
    hbar: float = HBAR
    k_b: float = K_B
    gamma_nv: float = GAMMA_NV
    d_zfs: float = D_ZFS


CONSTANTS = PhysicalConstants()


def to_hz(omega: float) -> float:
    """Convert an angular frequency (rad/s) to an ordinary frequency (Hz)."""
    return omega / (2.0 * math.pi)


def from_hz(frequency: float) -> float:
    """Convert an ordinary frequency (Hz) to an angular frequency (rad/s)."""
    return 2.0 * math.pi * frequency
