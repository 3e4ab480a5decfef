"""Demagnetizing factors, torque laws, frequencies and validity bounds.

The demag closed form is checked against numerical quadrature of the
ellipsoid demagnetization integral; stiffness against a central-difference
derivative of the torque; frequency values against hand-evaluated oracles.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from levimag.constants import to_hz
from levimag.core import IRON, NEODYMIUM, MagnetBody, ProlateEllipsoid, Sphere, volume
from levimag.core import libration_inertia
from levimag.magnetostatics import (
    FieldValidityWarning,
    confinement_report,
    demag_factors,
    libration_frequency_hard,
    libration_frequency_soft,
    max_field_soft,
    optimal_aspect_ratio,
    stiffness,
    torque_hard,
    torque_soft,
    torque_soft_checked,
)

MICRON = ProlateEllipsoid(a=2.7e-6, b=1.25e-6)
NANO = ProlateEllipsoid(a=37.5e-9, b=12.5e-9)


def demag_quadrature(aspect_ratio: float) -> float:
    """Axial demag factor from the demagnetization integral
    n_a = (a b^2 / 2) * Int_0^inf ds / ((s+a^2)^{3/2} (s+b^2)), with b = 1."""
    r = aspect_ratio
    val, _ = integrate.quad(
        lambda s: 1.0 / ((s + r * r) ** 1.5 * (s + 1.0)), 0.0, np.inf
    )
    return r / 2.0 * val


class TestDemagFactors:
    def test_sphere_limit(self):
        d = demag_factors(1.0 + 1e-9)
        assert d.n_a == pytest.approx(1.0 / 3.0, abs=1e-8)
        assert d.n_r == pytest.approx(1.0 / 3.0, abs=1e-8)

    def test_r3_closed_form(self):
        d = demag_factors(3.0)
        assert d.n_a == pytest.approx(0.10870947, abs=1e-7)
        assert d.n_r == pytest.approx(0.44564527, abs=1e-7)

    def test_needle_asymptote(self):
        d = demag_factors(1e4)
        assert d.n_a < 1e-6
        assert d.n_r == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("r", [1.5, 2.0, 2.606, 5.0, 10.0])
    def test_quadrature_oracle(self, r):
        assert demag_factors(r).n_a == pytest.approx(
            demag_quadrature(r), abs=1e-6
        )

    def test_sum_rule(self):
        for r in np.geomspace(1.0 + 1e-8, 1e3, 60):
            d = demag_factors(float(r))
            assert d.n_a + 2.0 * d.n_r == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("r", [1.0 + 1e-5, 1.0 + 5e-5, 1.0 + 0.999e-4])
    def test_series_branch_matches_quadrature(self, r):
        # inside the series branch, agreement with the integral oracle
        assert demag_factors(r).n_a == pytest.approx(
            demag_quadrature(r), abs=1e-10
        )

    def test_ordering_for_prolate(self):
        for r in [1.01, 2.0, 20.0]:
            d = demag_factors(r)
            assert 0.0 < d.n_a < 1.0 / 3.0 < d.n_r < 0.5

    def test_prolate_only(self):
        with pytest.raises(ValueError, match="prolate"):
            demag_factors(1.0)
        with pytest.raises(ValueError, match="prolate"):
            demag_factors(0.5)


class TestTorqueSoft:
    def test_zero_angle(self):
        assert torque_soft(MICRON, 0.0, 0.1) == 0.0

    def test_maximum_at_pi_over_4(self):
        d = demag_factors(MICRON.aspect_ratio)
        expected = volume(MICRON) * (d.n_r - d.n_a) * 0.01 / (
            2.0 * 1.25663706212e-6 * d.n_a * d.n_r
        )
        assert torque_soft(MICRON, math.pi / 4.0, 0.1) == pytest.approx(
            expected, rel=1e-12
        )

    def test_small_angle_matches_stiffness(self):
        body = MagnetBody(MICRON, IRON)
        kappa = stiffness(body, 0.1)
        assert torque_soft(MICRON, 0.01, 0.1) == pytest.approx(
            kappa * 0.01, rel=1e-3
        )

    def test_period_pi_and_odd(self):
        rng = np.random.default_rng(5)
        for phi in rng.uniform(-3, 3, 20):
            t = torque_soft(MICRON, phi, 0.1)
            assert torque_soft(MICRON, phi + math.pi, 0.1) == pytest.approx(
                t, abs=1e-25 + abs(t) * 1e-9
            )
            assert torque_soft(MICRON, -phi, 0.1) == pytest.approx(
                -t, abs=1e-25 + abs(t) * 1e-9
            )

    def test_warns_above_validity(self):
        with pytest.warns(FieldValidityWarning):
            torque_soft_checked(MICRON, IRON, 0.1, 1.0)


class TestTorqueHard:
    def test_zeros(self):
        v = volume(MICRON)
        assert torque_hard(v, 1.6, 0.0, 0.1) == 0.0
        assert torque_hard(v, 1.6, math.pi, 0.1) == pytest.approx(0.0, abs=1e-27)

    def test_sign_change_across_pi(self):
        v = volume(MICRON)
        assert torque_hard(v, 1.6, math.pi - 0.1, 0.1) > 0.0
        assert torque_hard(v, 1.6, math.pi + 0.1, 0.1) < 0.0

    def test_hand_value(self):
        # V m B with m = 1.6 T / mu_0, at phi = pi/2
        assert torque_hard(1.767e-17, 1.6, math.pi / 2.0, 0.1) == pytest.approx(
            2.250e-12, rel=1e-3
        )

    def test_period_2pi_and_odd(self):
        v = volume(MICRON)
        rng = np.random.default_rng(6)
        for phi in rng.uniform(-3, 3, 20):
            t = torque_hard(v, 1.6, phi, 0.1)
            assert torque_hard(v, 1.6, phi + 2 * math.pi, 0.1) == pytest.approx(
                t, abs=1e-25 + abs(t) * 1e-9
            )
            assert torque_hard(v, 1.6, -phi, 0.1) == pytest.approx(
                -t, abs=1e-25 + abs(t) * 1e-9
            )


class TestStiffness:
    def test_zero_field(self):
        assert stiffness(MagnetBody(MICRON, IRON), 0.0) == 0.0
        assert stiffness(MagnetBody(MICRON, NEODYMIUM), 0.0) == 0.0

    @pytest.mark.parametrize(
        "body",
        [MagnetBody(MICRON, IRON), MagnetBody(MICRON, NEODYMIUM)],
        ids=["soft", "hard"],
    )
    def test_finite_difference_oracle(self, body):
        h = 1e-6
        field = 0.1
        if body.material.magnet_class == "soft":
            dT = (
                torque_soft(body.shape, h, field) - torque_soft(body.shape, -h, field)
            ) / (2 * h)
        else:
            v = volume(body.shape)
            dT = (
                torque_hard(v, body.material.polarization, h, field)
                - torque_hard(v, body.material.polarization, -h, field)
            ) / (2 * h)
        assert stiffness(body, field) == pytest.approx(dT, rel=1e-8)

    def test_soft_sphere_has_no_stiffness(self):
        assert stiffness(MagnetBody(Sphere(1e-6), IRON), 0.1) == 0.0

    @pytest.mark.parametrize(
        "body",
        [MagnetBody(MICRON, IRON), MagnetBody(MICRON, NEODYMIUM)],
        ids=["soft", "hard"],
    )
    def test_consistency_with_frequency(self, body):
        field = 0.1
        kappa = stiffness(body, field)
        inertia = libration_inertia(body.shape, body.material.density)
        if body.material.magnet_class == "soft":
            omega = libration_frequency_soft(body.shape, body.material, field)
        else:
            omega = libration_frequency_hard(body.shape, body.material, field)
        assert math.sqrt(kappa / inertia) == pytest.approx(omega, rel=1e-10)


class TestSoftFrequency:
    def test_micron_particle(self):
        f = to_hz(libration_frequency_soft(MICRON, IRON, 0.1))
        assert f == pytest.approx(240e3, rel=0.05)  # quoted design value
        assert f == pytest.approx(237312.66, rel=1e-6)  # frozen closed form

    def test_nano_particle(self):
        f = to_hz(libration_frequency_soft(NANO, IRON, 0.1))
        assert f == pytest.approx(24e6, rel=0.05)
        assert f == pytest.approx(23890441.0, rel=1e-6)

    def test_zero_field(self):
        assert libration_frequency_soft(MICRON, IRON, 0.0) == 0.0

    def test_linear_in_field(self):
        w1 = libration_frequency_soft(MICRON, IRON, 0.05)
        w2 = libration_frequency_soft(MICRON, IRON, 0.1)
        assert w2 == pytest.approx(2.0 * w1, rel=1e-12)

    def test_inverse_size_scaling(self):
        doubled = ProlateEllipsoid(a=2 * MICRON.a, b=2 * MICRON.b)
        w1 = libration_frequency_soft(MICRON, IRON, 0.1)
        w2 = libration_frequency_soft(doubled, IRON, 0.1)
        assert w2 == pytest.approx(0.5 * w1, rel=1e-10)

    def test_flagged_above_validity(self):
        with pytest.warns(FieldValidityWarning):
            libration_frequency_soft(MICRON, IRON, 0.5)

    def test_requires_soft_material(self):
        with pytest.raises(ValueError):
            libration_frequency_soft(MICRON, NEODYMIUM, 0.1)


class TestHardFrequency:
    def test_zero_field(self):
        assert libration_frequency_hard(MICRON, NEODYMIUM, 0.0) == 0.0

    def test_micron_neodymium(self):
        # direct evaluation under the tesla -> A/m convention
        f = to_hz(libration_frequency_hard(MICRON, NEODYMIUM, 0.1))
        assert f == pytest.approx(496148.1, rel=1e-6)

    def test_nano_neodymium(self):
        f = to_hz(libration_frequency_hard(NANO, NEODYMIUM, 0.1))
        assert f == pytest.approx(37.345e6, rel=1e-4)

    def test_sqrt_field_scaling(self):
        w1 = libration_frequency_hard(MICRON, NEODYMIUM, 0.05)
        w2 = libration_frequency_hard(MICRON, NEODYMIUM, 0.2)
        assert w2 == pytest.approx(2.0 * w1, rel=1e-12)


class TestMaxFieldSoft:
    def test_micron_iron(self):
        assert max_field_soft(MICRON, IRON) == pytest.approx(0.46, rel=0.02)

    def test_sphere_limit(self):
        # n_a = n_r = 1/3 gives P * (1/9) * sqrt(2) / (sqrt(2)/3) = P/3
        assert max_field_soft(Sphere(1e-6), IRON) == pytest.approx(
            2.2 / 3.0, rel=1e-12
        )

    def test_r3_iron(self):
        # frozen from the closed form with n_a, n_r at R = 3
        shape = ProlateEllipsoid(a=3e-6, b=1e-6)
        assert max_field_soft(shape, IRON) == pytest.approx(0.328589, rel=1e-5)

    def test_soft_only(self):
        with pytest.raises(ValueError):
            max_field_soft(MICRON, NEODYMIUM)


class TestConfinementReport:
    def test_omega_equals_sqrt_stiffness_over_inertia(self):
        for body in (MagnetBody(MICRON, IRON), MagnetBody(MICRON, NEODYMIUM)):
            rep = confinement_report(body, 0.08)
            inertia = libration_inertia(body.shape, body.material.density)
            assert rep.omega == pytest.approx(
                math.sqrt(rep.stiffness / inertia), rel=1e-10
            )

    def test_validity_flag(self):
        body = MagnetBody(MICRON, IRON)
        assert confinement_report(body, 0.1).field_within_validity
        assert not confinement_report(body, 0.5).field_within_validity
        hard = confinement_report(MagnetBody(MICRON, NEODYMIUM), 0.5)
        assert hard.max_valid_field is None
        assert hard.field_within_validity


class TestOptimalAspectRatio:
    @pytest.mark.parametrize(
        "minor_axis,field", [(12.5e-9, 0.1), (25e-9, 0.05), (1.25e-6, 0.02)]
    )
    def test_r_star_universal(self, minor_axis, field):
        r_star, _ = optimal_aspect_ratio(minor_axis, IRON, field)
        assert r_star == pytest.approx(2.606, abs=0.01)

    def test_peak_frequency_25nm_minor_axis(self):
        # 25 nm minor axis (semi-minor 12.5 nm) at 0.1 T peaks near 24 MHz
        _, omega_star = optimal_aspect_ratio(12.5e-9, IRON, 0.1)
        assert to_hz(omega_star) == pytest.approx(24.0e6, rel=0.05)

    def test_optimum_beats_neighbours(self):
        r_star, omega_star = optimal_aspect_ratio(12.5e-9, IRON, 0.1)
        for r in (r_star - 0.2, r_star + 0.2):
            shape = ProlateEllipsoid(a=r * 12.5e-9, b=12.5e-9)
            assert libration_frequency_soft(shape, IRON, 0.1) < omega_star

    def test_soft_only(self):
        with pytest.raises(ValueError):
            optimal_aspect_ratio(1e-8, NEODYMIUM, 0.1)
