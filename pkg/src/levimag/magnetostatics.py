"""Magnetostatic confinement of levitated ferromagnets.

Demagnetizing factors for prolate ellipsoids, the shape-anisotropy torque on
soft magnets, the permanent-moment torque on hard magnets, the resulting
libration frequencies, the field range over which the soft-magnet torque law
holds, and the aspect ratio that maximizes the libration frequency.

Sign convention: the torque functions return the magnitude of the aligning
torque at positive displacement, i.e. the restoring equation of motion is
I * phidd = -torque(phi).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import MU_0
from .core import (
    HARD,
    SOFT,
    MagnetBody,
    ProlateEllipsoid,
    Shape,
    Sphere,
    libration_inertia,
    volume,
)

# Below this distance from the sphere the closed form loses precision to
# cancellation (already ~1e-8 absolute at R - 1 = 1e-6); switch to the
# eccentricity series early enough that both branches agree to ~1e-12.
_SERIES_THRESHOLD = 1e-4


class FieldValidityWarning(UserWarning):
    """The applied field exceeds the range where the soft torque law holds."""


@dataclass(frozen=True)
class DemagFactors:
    """Axial and radial demagnetizing factors of a prolate ellipsoid.

    Purely geometric; they satisfy n_a + 2 n_r = 1, and for aspect ratio
    R > 1: 0 < n_a < 1/3 < n_r < 1/2.
    """

    n_a: float
    n_r: float


def demag_factors(aspect_ratio: float) -> DemagFactors:
    """Demagnetizing factors for a prolate ellipsoid of aspect ratio R = a/b.

    n_a = (1/(R^2-1)) ( R/(2 sqrt(R^2-1)) ln((R+sqrt(R^2-1))/(R-sqrt(R^2-1))) - 1 )
    n_r = (1 - n_a)/2

    Near the sphere the closed form is evaluated by its series in the
    squared eccentricity e^2 = 1 - 1/R^2:
    n_a = 1/3 - (2/15) e^2 - (2/35) e^4 - (2/63) e^6 + O(e^8).

    Raises ValueError for R <= 1 (prolate only).
    """
    r = float(aspect_ratio)
    if r <= 1.0:
        raise ValueError(f"prolate only: aspect ratio must exceed 1, got {r}")
    if r - 1.0 < _SERIES_THRESHOLD:
        e2 = 1.0 - 1.0 / (r * r)
        n_a = (
            1.0 / 3.0
            - (2.0 / 15.0) * e2
            - (2.0 / 35.0) * e2 * e2
            - (2.0 / 63.0) * e2 * e2 * e2
        )
    else:
        s = math.sqrt(r * r - 1.0)
        n_a = (r / (2.0 * s) * math.log((r + s) / (r - s)) - 1.0) / (r * r - 1.0)
    return DemagFactors(n_a=n_a, n_r=0.5 * (1.0 - n_a))


def _soft_torque_coefficient(shape: ProlateEllipsoid) -> float:
    """V (n_r - n_a) / (2 mu_0 n_a n_r), the sin(2 phi) torque amplitude per B^2."""
    d = demag_factors(shape.aspect_ratio)
    return volume(shape) * (d.n_r - d.n_a) / (2.0 * MU_0 * d.n_a * d.n_r)


def torque_soft(shape: ProlateEllipsoid, phi: float, field: float) -> float:
    """Shape-anisotropy torque on a soft ellipsoid, N*m.

    T = V (n_r - n_a) / (2 mu_0 n_a n_r) * B^2 sin(2 phi), where phi is the
    angle between the field and the body symmetry axis. Valid for chi >> 1
    and fields below max_field_soft; above that bound a FieldValidityWarning
    is issued and the formula is still evaluated.
    """
    return _soft_torque_coefficient(shape) * field**2 * math.sin(2.0 * phi)


def torque_soft_checked(
    shape: ProlateEllipsoid, material, phi: float, field: float
) -> float:
    """torque_soft with the validity bound of the given material checked."""
    bound = max_field_soft(shape, material)
    if field > bound:
        warnings.warn(
            f"field {field} T exceeds soft-torque validity bound {bound:.3g} T",
            FieldValidityWarning,
            stacklevel=2,
        )
    return torque_soft(shape, phi, field)


def torque_hard(vol: float, polarization: float, phi: float, field: float) -> float:
    """Torque on a permanently magnetized body, N*m.

    T = V m B sin(phi) with the magnetization m = polarization / mu_0 in A/m
    and phi the angle between the moment and the field. Holds for any shape
    as long as the external field does not remagnetize the body (caller's
    responsibility).
    """
    return vol * (polarization / MU_0) * field * math.sin(phi)


def stiffness(body: MagnetBody, field: float) -> float:
    """Angular stiffness dT/dphi at phi = 0, N*m/rad.

    Soft: V (n_r - n_a) B^2 / (mu_0 n_a n_r). Hard: V (P/mu_0) B.
    A soft sphere has no shape anisotropy and returns 0.
    """
    if body.material.magnet_class == SOFT:
        if isinstance(body.shape, Sphere):
            return 0.0
        return 2.0 * _soft_torque_coefficient(body.shape) * field**2
    return volume(body.shape) * (body.material.polarization / MU_0) * field


def libration_frequency_soft(
    shape: ProlateEllipsoid, material, field: float
) -> float:
    """Libration angular frequency of a soft ellipsoid, rad/s.

    omega = sqrt( V (n_r - n_a) / (I mu_0 n_a n_r) ) * B, linear in B. Warns
    (FieldValidityWarning) when B exceeds the torque-law validity bound.
    """
    if material.magnet_class != SOFT:
        raise ValueError("libration_frequency_soft requires a soft material")
    if field < 0:
        raise ValueError("field must be non-negative")
    if field > max_field_soft(shape, material):
        warnings.warn(
            f"field {field} T exceeds soft-torque validity bound; "
            "frequency returned outside model validity",
            FieldValidityWarning,
            stacklevel=2,
        )
    kappa = stiffness(MagnetBody(shape, material), field)
    inertia = libration_inertia(shape, material.density)
    return math.sqrt(kappa / inertia)


def libration_frequency_hard(shape: Shape, material, field: float) -> float:
    """Libration angular frequency of a hard magnet, rad/s.

    omega = sqrt( V (P/mu_0) B / I ), scaling as sqrt(B).
    """
    if material.magnet_class != HARD:
        raise ValueError("libration_frequency_hard requires a hard material")
    if field < 0:
        raise ValueError("field must be non-negative")
    kappa = stiffness(MagnetBody(shape, material), field)
    inertia = libration_inertia(shape, material.density)
    return math.sqrt(kappa / inertia)


def libration_frequency(body: MagnetBody, field: float) -> float:
    """Libration angular frequency for either magnet class, rad/s."""
    if body.material.magnet_class == SOFT:
        return libration_frequency_soft(body.shape, body.material, field)
    return libration_frequency_hard(body.shape, body.material, field)


def max_field_soft(shape: Shape, material) -> float:
    """Largest field for which the soft torque law is valid, tesla.

    B < mu_0 m_s n_a n_r sqrt(2) / sqrt(n_a^2 + n_r^2); with m_s stored as a
    polarization (tesla) this is P n_a n_r sqrt(2) / sqrt(n_a^2 + n_r^2).
    For a sphere n_a = n_r = 1/3 and the bound is P / sqrt(3).
    """
    if material.magnet_class != SOFT:
        raise ValueError("max_field_soft applies to soft materials")
    if isinstance(shape, Sphere):
        n_a = n_r = 1.0 / 3.0
    else:
        d = demag_factors(shape.aspect_ratio)
        n_a, n_r = d.n_a, d.n_r
    return (
        material.polarization
        * n_a
        * n_r
        * math.sqrt(2.0)
        / math.hypot(n_a, n_r)
    )


@dataclass(frozen=True)
class ConfinementReport:
    """Summary of the angular confinement of a body in a field.

    omega is sqrt(stiffness / inertia) by construction. ``max_valid_field``
    is None for hard magnets (the torque law there is bound-free) and
    ``field_within_validity`` records whether the applied field respects the
    soft-magnet bound.
    """

    omega: float
    stiffness: float
    max_valid_field: float | None
    regime: str
    field_within_validity: bool


def confinement_report(body: MagnetBody, field: float) -> ConfinementReport:
    """Compute stiffness, frequency and validity for a body in a field."""
    kappa = stiffness(body, field)
    inertia = libration_inertia(body.shape, body.material.density)
    omega = math.sqrt(kappa / inertia)
    if body.material.magnet_class == SOFT:
        bound = max_field_soft(body.shape, body.material)
        return ConfinementReport(
            omega=omega,
            stiffness=kappa,
            max_valid_field=bound,
            regime=SOFT,
            field_within_validity=field <= bound,
        )
    return ConfinementReport(
        omega=omega,
        stiffness=kappa,
        max_valid_field=None,
        regime=HARD,
        field_within_validity=True,
    )


def optimal_aspect_ratio(
    minor_axis: float,
    material,
    field: float,
    r_max: float = 20.0,
    tol: float = 1e-4,
) -> tuple[float, float]:
    """Aspect ratio maximizing the soft libration frequency at fixed semi-minor
    axis b, with the frequency at the optimum.

    The objective (n_r - n_a) / (n_a n_r (R^2 + 1)) is smooth and unimodal on
    (1, r_max]; it is maximized by golden-section search to ``tol`` in R. The
    optimum is independent of b and of B (both factor out of the objective).

    Returns (r_star, omega_star) with omega_star in rad/s.
    """
    if material.magnet_class != SOFT:
        raise ValueError("optimal_aspect_ratio applies to soft materials")
    if minor_axis <= 0 or field <= 0:
        raise ValueError("minor_axis and field must be positive")

    def objective(r: float) -> float:
        d = demag_factors(r)
        return (d.n_r - d.n_a) / (d.n_a * d.n_r * (r * r + 1.0))

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 1.0 + 1e-9, r_max
    c = hi - invphi * (hi - lo)
    d_ = lo + invphi * (hi - lo)
    fc, fd = objective(c), objective(d_)
    while hi - lo > tol:
        if fc > fd:
            hi, d_, fd = d_, c, fc
            c = hi - invphi * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d_, fd
            d_ = lo + invphi * (hi - lo)
            fd = objective(d_)
    r_star = 0.5 * (lo + hi)
    shape = ProlateEllipsoid(a=r_star * minor_axis, b=minor_axis)
    return r_star, libration_frequency_soft(shape, material, field)
