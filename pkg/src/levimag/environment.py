"""Gas-collision damping and thermal occupations.

The damping formula is the spinning-rotor drag in the Knudsen regime applied
to libration as a rough estimate; outputs should be read as estimates of
that kind.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .constants import AIR_MOLAR_MASS, AIR_MOLECULE_DIAMETER, HBAR, K_B, R_GAS


@dataclass(frozen=True)
class GasConditions:
    """Residual gas around the trap.

    Attributes:
        pressure: Pa.
        temperature: K.
        molar_mass: kg/mol.
        sigma_eff: accommodation coefficient (~1.1 for rough metal surfaces).
    """

    pressure: float
    temperature: float = 293.0
    molar_mass: float = AIR_MOLAR_MASS
    sigma_eff: float = 1.1

    def __post_init__(self):
        if self.pressure < 0:
            raise ValueError("pressure must be non-negative")
        if self.temperature <= 0 or self.molar_mass <= 0 or self.sigma_eff <= 0:
            raise ValueError("temperature, molar mass and sigma_eff must be positive")

    @classmethod
    def air(cls, pressure: float, temperature: float = 293.0) -> "GasConditions":
        return cls(pressure=pressure, temperature=temperature)


def mean_molecular_speed(temperature: float, molar_mass: float = AIR_MOLAR_MASS) -> float:
    """Mean thermal speed of gas molecules, sqrt(8 R T / (pi M)), m/s."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    return math.sqrt(8.0 * R_GAS * temperature / (math.pi * molar_mass))


class KnudsenCheck(NamedTuple):
    in_regime: bool
    mean_free_path: float


def knudsen_check(radius: float, gas: GasConditions) -> KnudsenCheck:
    """Whether the molecular mean free path exceeds the particle radius.

    Hard-sphere mean free path k_B T / (sqrt(2) pi d^2 P) with the air
    effective diameter d = 3.7e-10 m.
    """
    if gas.pressure == 0:
        return KnudsenCheck(True, math.inf)
    mfp = K_B * gas.temperature / (
        math.sqrt(2.0) * math.pi * AIR_MOLECULE_DIAMETER**2 * gas.pressure
    )
    return KnudsenCheck(mfp > radius, mfp)


def gas_damping(radius: float, density: float, gas: GasConditions) -> float:
    """Rotational damping rate from gas collisions in the Knudsen regime, 1/s.

    Gamma = sigma_eff * (10 pi / (R rho)) * (P / cbar). Outside the Knudsen
    regime the same value is returned with a warning (model out of validity).
    This translational-drag form is a rough estimate when applied to
    libration.
    """
    if radius <= 0 or density <= 0:
        raise ValueError("radius and density must be positive")
    if not knudsen_check(radius, gas).in_regime:
        warnings.warn(
            "mean free path below particle radius: damping estimate outside "
            "the Knudsen regime",
            UserWarning,
            stacklevel=2,
        )
    cbar = mean_molecular_speed(gas.temperature, gas.molar_mass)
    return gas.sigma_eff * 10.0 * math.pi / (radius * density) * (gas.pressure / cbar)


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein phonon occupation 1/(exp(hbar w / kT) - 1)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0.0:
        return 0.0
    x = HBAR * omega / (K_B * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)
