"""Spin-libration coupling between a levitated magnet and NV centers.

Scheme 1: a spherical hard magnet levitates at a gap d from a fixed NV
center sitting in a bias field B0. The magnet's dipole field at the NV
changes with the libration angle phi; the rate at which phonons exchange
with the spin is lambda = gamma_NV * D_phi * phi_zp, with D_phi the field
derivative scale M R^3/(d+R)^3 and phi_zp the zero-point angle.

Scheme 2: the diamond rides on the magnet and couples through the bias
field directly, lambda = gamma_NV * B * phi_zp, with the inertia of the
whole composite particle. The optimum NV-axis angle for this scheme is
55 degrees (taken as a fixed constant, not re-derived here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import GAMMA_NV, HBAR
from .core import HARD, Material, ProlateEllipsoid, Sphere, libration_inertia, volume

SCHEME2_OPTIMUM_ANGLE = math.radians(55.0)


@dataclass(frozen=True)
class CouplingGeometry:
    """Levitated sphere magnet plus an NV center at polar position (d, theta).

    Attributes:
        magnet: sphere geometry of the magnet.
        material: hard magnetic material of the magnet.
        gap: surface-to-NV distance d, m (the NV sits at d + R from the
            magnet center).
        theta: polar angle of the NV about the magnet, measured from the
            bias-field direction, rad.
        bias_field: magnitude of the bias field B0 confining the libration,
            tesla.
    """

    magnet: Sphere
    material: Material
    gap: float
    theta: float
    bias_field: float

    def __post_init__(self):
        if self.gap < 0:
            raise ValueError("gap must be non-negative")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError("theta must lie in [0, pi]")
        if self.bias_field <= 0:
            raise ValueError("bias field must be positive")
        if self.material.magnet_class != HARD:
            raise ValueError("coupling geometry expects a hard magnet")


@dataclass(frozen=True)
class CouplingReport:
    """Scheme-1 coupling figures. lambda_phi = gamma_NV * d_phi * phi_zp by
    construction."""

    d_phi: float
    theta_op: float
    phi_zp: float
    lambda_phi: float
    omega: float


def dipole_field(geometry: CouplingGeometry, phi: float) -> tuple[float, float]:
    """Magnet dipole field at the NV, (B_r, B_theta) in tesla.

    B = [M_T R^3 / (3 (d+R)^3)] (2 cos(theta - phi), sin(theta - phi)) in the
    local (e_r, e_theta) frame, with M_T the polarization in tesla and phi
    the libration angle of the moment away from the bias field.
    """
    r = geometry.magnet.radius
    pref = geometry.material.polarization * r**3 / (3.0 * (geometry.gap + r) ** 3)
    arg = geometry.theta - phi
    return 2.0 * pref * math.cos(arg), pref * math.sin(arg)


def dipole_field_derivative(geometry: CouplingGeometry) -> float:
    """Field-derivative scale D_phi = M_T R^3 / (d + R)^3, tesla/rad.

    This is three times the dipole-field prefactor; it sets the first-order
    change of the field at the NV per radian of libration.
    """
    r = geometry.magnet.radius
    return geometry.material.polarization * r**3 / (geometry.gap + r) ** 3


def optimal_nv_angle(d_phi: float, bias_field: float) -> float:
    """NV placement angle maximizing the field derivative along the NV axis.

    theta_op = (1/2) arccos(-3 D_phi / (6 B0 + D_phi)). The NV axis is taken
    along the total field at equilibrium; at theta_op the component of
    dB/dphi along that axis is maximal (close to pi/4 when D_phi << B0).

    Raises ValueError when D_phi > 3 B0 (arccos argument leaves [-1, 1]).
    """
    if d_phi > 3.0 * bias_field:
        raise ValueError(
            "bias field too weak for aligned-NV configuration "
            f"(requires D_phi <= 3 B0, got D_phi={d_phi}, B0={bias_field})"
        )
    return 0.5 * math.acos(-3.0 * d_phi / (6.0 * bias_field + d_phi))


def zero_point_angle(inertia: float, omega: float) -> float:
    """RMS angular spread of the librational ground state, sqrt(hbar/(2 I w))."""
    if inertia <= 0 or omega <= 0:
        raise ValueError("inertia and omega must be positive")
    return math.sqrt(HBAR / (2.0 * inertia * omega))


def scheme1_coupling(
    geometry: CouplingGeometry, omega: float, inertia: float | None = None
) -> CouplingReport:
    """Spin-phonon exchange rate for the distant-NV scheme, rad/s.

    lambda = gamma_NV * D_phi * phi_zp with phi_zp = sqrt(hbar / (2 I w)).
    The magnet inertia defaults to the solid-sphere value from the geometry.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if inertia is None:
        inertia = libration_inertia(geometry.magnet, geometry.material.density)
    d_phi = dipole_field_derivative(geometry)
    phi_zp = zero_point_angle(inertia, omega)
    return CouplingReport(
        d_phi=d_phi,
        theta_op=optimal_nv_angle(d_phi, geometry.bias_field),
        phi_zp=phi_zp,
        lambda_phi=GAMMA_NV * d_phi * phi_zp,
        omega=omega,
    )


def scheme2_coupling(field: float, inertia: float, omega: float) -> float:
    """Spin-phonon coupling rate for the attached-diamond scheme, rad/s.

    lambda = gamma_NV * B * sqrt(hbar / (2 I w)), with I the inertia of the
    whole composite particle.
    """
    if field < 0:
        raise ValueError("field must be non-negative")
    if field == 0.0:
        return 0.0
    return GAMMA_NV * field * zero_point_angle(inertia, omega)


def composite_inertia(
    shape_a: ProlateEllipsoid,
    density_a: float,
    shape_b: ProlateEllipsoid,
    density_b: float,
) -> float:
    """Transverse inertia of two ellipsoids joined coaxially tip to tip.

    The bodies touch at the tips of their long axes (centers a_1 + a_2
    apart); the inertia is taken about the transverse axis through the joint
    center of mass via the parallel-axis theorem. A zero density gives the
    massless-partner limit.
    """
    m_a = density_a * volume(shape_a)
    m_b = density_b * volume(shape_b)
    total = m_a + m_b
    if total <= 0:
        raise ValueError("at least one body must have mass")
    sep = shape_a.a + shape_b.a
    off_a = sep * m_b / total
    off_b = sep * m_a / total
    i_a = m_a * (shape_a.a**2 + shape_a.b**2) / 5.0
    i_b = m_b * (shape_b.a**2 + shape_b.b**2) / 5.0
    return i_a + m_a * off_a**2 + i_b + m_b * off_b**2


@dataclass(frozen=True)
class CouplingMap:
    """Coupling rate over a (radius, gap) grid at fixed libration frequency.

    ``rates_hz[i, j]`` is lambda/2pi at ``radii[i]``, ``gaps[j]``. ``contour``
    holds, per radius, the gap at which lambda/2pi crosses the strong-coupling
    threshold 1/T2* (NaN where even gap = 0 is below threshold).
    """

    radii: np.ndarray
    gaps: np.ndarray
    rates_hz: np.ndarray
    omega: float
    threshold_hz: float
    contour: np.ndarray


def coupling_map(
    radii,
    gaps,
    omega: float,
    material: Material,
    t2_star: float = 500e-6,
    bias_field: float | None = None,
) -> CouplingMap:
    """Scheme-1 coupling rate lambda/2pi on a rectangular (R, d) grid.

    The libration frequency is a fixed input (the resolved-sideband design
    point) unless ``bias_field`` is given, in which case omega is recomputed
    per radius from the hard-magnet law at that field. The grid is a pure
    fan-out of scheme1_coupling over the points. The returned contour marks
    lambda/2pi = 1/t2_star.

    Rates are monotone decreasing in d at fixed R, so the contour is found
    by bisection in d.
    """
    from .magnetostatics import libration_frequency_hard

    radii = np.asarray(radii, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if np.any(radii <= 0) or np.any(gaps < 0):
        raise ValueError("radii must be positive and gaps non-negative")
    threshold_hz = 1.0 / t2_star

    def rate_hz(r: float, d: float, w: float) -> float:
        inertia = libration_inertia(Sphere(r), material.density)
        d_phi = material.polarization * r**3 / (d + r) ** 3
        return GAMMA_NV * d_phi * zero_point_angle(inertia, w) / (2.0 * math.pi)

    rates = np.empty((radii.size, gaps.size))
    contour = np.full(radii.size, np.nan)
    for i, r in enumerate(radii):
        w = omega
        if bias_field is not None:
            w = libration_frequency_hard(Sphere(r), material, bias_field)
        for j, d in enumerate(gaps):
            rates[i, j] = rate_hz(r, d, w)
        if rate_hz(r, 0.0, w) >= threshold_hz:
            lo, hi = 0.0, gaps.max()
            if rate_hz(r, hi, w) >= threshold_hz:
                contour[i] = hi
            else:
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if rate_hz(r, mid, w) >= threshold_hz:
                        lo = mid
                    else:
                        hi = mid
                contour[i] = 0.5 * (lo + hi)
    return CouplingMap(
        radii=radii,
        gaps=gaps,
        rates_hz=rates,
        omega=omega,
        threshold_hz=threshold_hz,
        contour=contour,
    )
