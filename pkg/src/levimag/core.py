"""Materials and body geometry for levitated ferromagnets.

Magnetization is stored as a polarization in tesla (mu_0 * M); torque laws
convert to A/m internally. For soft materials the polarization is the
saturation value, for hard materials the remanent value.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Union

import numpy as np

SOFT = "soft"
HARD = "hard"


@dataclass(frozen=True)
class Material:
    """Magnetic material parameters.

    Attributes:
        name: Label used in configs and reports.
        density: Mass density, kg/m^3.
        polarization: mu_0 * magnetization, tesla. Saturation value for a
            soft material, remanent value for a hard one.
        magnet_class: ``"soft"`` (magnetization follows the field) or
            ``"hard"`` (permanent moment).
    """

    name: str
    density: float
    polarization: float
    magnet_class: str

    def __post_init__(self):
        if self.density <= 0:
            raise ValueError(f"density must be positive, got {self.density}")
        if self.polarization <= 0:
            raise ValueError(
                f"polarization must be positive, got {self.polarization}"
            )
        if self.magnet_class not in (SOFT, HARD):
            raise ValueError(
                f"magnet_class must be 'soft' or 'hard', got {self.magnet_class!r}"
            )

    @property
    def magnetization(self) -> float:
        """Magnetization in A/m (polarization / mu_0)."""
        from .constants import MU_0

        return self.polarization / MU_0


IRON = Material("iron", density=7860.0, polarization=2.2, magnet_class=SOFT)
NEODYMIUM = Material("neodymium", density=7400.0, polarization=1.6, magnet_class=HARD)

PRESETS = {m.name: m for m in (IRON, NEODYMIUM)}


def load_materials(path) -> dict[str, Material]:
    """Load materials from an INI-style config file.

    One section per material::

        [permalloy]
        density = 8700
        polarization = 1.0
        class = soft

    Returns a dict keyed by material name. Raises ValueError on missing or
    invalid keys.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read material config {path!r}")
    out = {}
    for name in parser.sections():
        sec = parser[name]
        try:
            out[name] = Material(
                name=name,
                density=float(sec["density"]),
                polarization=float(sec["polarization"]),
                magnet_class=sec["class"].strip().lower(),
            )
        except KeyError as exc:
            raise ValueError(f"material {name!r}: missing key {exc}") from exc
    return out


def get_material(name_or_material) -> Material:
    """Resolve a material preset name or pass a Material through."""
    if isinstance(name_or_material, Material):
        return name_or_material
    try:
        return PRESETS[name_or_material]
    except KeyError:
        raise ValueError(
            f"unknown material {name_or_material!r}; presets: {sorted(PRESETS)}"
        ) from None


@dataclass(frozen=True)
class ProlateEllipsoid:
    """Prolate ellipsoid with semi-major axis a and semi-minor axis b (m).

    The body is strictly prolate: a > b > 0. The full axial and radial
    dimensions are 2a and 2b.
    """

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > self.b > 0):
            raise ValueError(
                f"prolate ellipsoid requires a > b > 0, got a={self.a}, b={self.b}"
            )

    @property
    def aspect_ratio(self) -> float:
        return self.a / self.b


@dataclass(frozen=True)
class Sphere:
    """Sphere of given radius (m)."""

    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


Shape = Union[ProlateEllipsoid, Sphere]


@dataclass(frozen=True)
class MagnetBody:
    """A shaped particle of a given material."""

    shape: Shape
    material: Material


def volume(shape: Shape) -> float:
    """Body volume in m^3: (4 pi / 3) a b^2 for an ellipsoid, (4 pi / 3) r^3
    for a sphere."""
    if isinstance(shape, Sphere):
        return 4.0 * np.pi / 3.0 * shape.radius**3
    return 4.0 * np.pi / 3.0 * shape.a * shape.b**2


def libration_inertia(shape: Shape, density: float) -> float:
    """Moment of inertia about a transverse axis through the center, kg*m^2.

    For the ellipsoid this is the component relevant to libration of the
    symmetry axis: rho V (a^2 + b^2) / 5; the sphere is the a = b limit,
    (2/5) m r^2.
    """
    if density <= 0:
        raise ValueError(f"density must be positive, got {density}")
    v = volume(shape)
    if isinstance(shape, Sphere):
        return 0.4 * density * v * shape.radius**2
    return density * v * (shape.a**2 + shape.b**2) / 5.0


def volume_inertia_ratio(shape: ProlateEllipsoid, density: float) -> float:
    """V / I for an ellipsoid, 1/(kg m^-1).

    Equals the closed scaling form
    (1/V^(2/3)) (5/rho) (4 pi/3)^(2/3) R^(2/3) / (R^2 + 1),
    which makes the inverse size scaling of the libration frequency explicit.
    """
    if not isinstance(shape, ProlateEllipsoid):
        raise ValueError("volume_inertia_ratio is defined for ellipsoids")
    return volume(shape) / libration_inertia(shape, density)


def volume_inertia_ratio_scaling(shape: ProlateEllipsoid, density: float) -> float:
    """The closed scaling form of V / I (same value as volume_inertia_ratio)."""
    r = shape.aspect_ratio
    v = volume(shape)
    return (
        v ** (-2.0 / 3.0)
        * (5.0 / density)
        * (4.0 * np.pi / 3.0) ** (2.0 / 3.0)
        * r ** (2.0 / 3.0)
        / (r**2 + 1.0)
    )
