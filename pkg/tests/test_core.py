"""Geometry, inertia and material tests.

Expected values are frozen from independent oracles: direct hand evaluation
of the closed forms and Monte-Carlo integration of the inertia integral.
"""

import math

import numpy as np
import pytest

from levimag.core import (
    IRON,
    NEODYMIUM,
    Material,
    ProlateEllipsoid,
    Sphere,
    get_material,
    libration_inertia,
    load_materials,
    volume,
    volume_inertia_ratio,
    volume_inertia_ratio_scaling,
)

MICRON = ProlateEllipsoid(a=2.7e-6, b=1.25e-6)


def mc_inertia(shape: ProlateEllipsoid, density: float, n: int, seed: int) -> float:
    """Monte-Carlo oracle: integrate r_perp^2 rho dV over the solid.

    Uniform samples in the ellipsoid by scaling uniform ball samples; the
    libration axis is transverse (x), so r_perp^2 = y^2 + z^2 with the long
    axis along z.
    """
    rng = np.random.default_rng(seed)
    pts = np.empty((0, 3))
    while len(pts) < n:
        cand = rng.uniform(-1.0, 1.0, size=(2 * n, 3))
        keep = (cand**2).sum(axis=1) <= 1.0
        pts = np.vstack([pts, cand[keep]])
    pts = pts[:n]
    y = pts[:, 1] * shape.b
    z = pts[:, 2] * shape.a
    mass = density * volume(shape)
    return mass * float(np.mean(y**2 + z**2))


class TestVolume:
    def test_sphere_micron(self):
        assert volume(Sphere(1e-6)) == pytest.approx(4.18879e-18, rel=1e-5)

    def test_ellipsoid_hand_value(self):
        # (4 pi / 3) * 2.7e-6 * (1.25e-6)^2
        assert volume(MICRON) == pytest.approx(1.7671458676e-17, rel=1e-9)

    def test_near_sphere_limit(self):
        b = 1e-6
        near = ProlateEllipsoid(a=b * (1 + 1e-9), b=b)
        assert volume(near) == pytest.approx(volume(Sphere(b)), rel=1e-8)


class TestInertia:
    def test_iron_micron_hand_value(self):
        # rho V (a^2+b^2)/5 evaluated by hand; cross-checked by the MC oracle
        assert libration_inertia(MICRON, 7860.0) == pytest.approx(
            2.4591831623e-25, rel=1e-9
        )

    def test_monte_carlo_cross_check(self):
        closed = libration_inertia(MICRON, 7860.0)
        assert mc_inertia(MICRON, 7860.0, 1_000_000, seed=42) == pytest.approx(
            closed, rel=0.01
        )

    def test_sphere_hand_value(self):
        # (2/5) m R^2 for a 100 nm neodymium sphere
        assert libration_inertia(Sphere(1e-7), 7400.0) == pytest.approx(
            1.2398819006e-31, rel=1e-9
        )

    def test_monte_carlo_random_shapes(self):
        rng = np.random.default_rng(7)
        for k in range(10):
            b = 10 ** rng.uniform(-7.5, -5.5)
            shape = ProlateEllipsoid(a=b * rng.uniform(1.2, 6.0), b=b)
            rho = rng.uniform(1000.0, 10000.0)
            closed = libration_inertia(shape, rho)
            assert mc_inertia(shape, rho, 1_000_000, seed=100 + k) == pytest.approx(
                closed, rel=0.01
            )

    def test_sphere_is_ellipsoid_limit(self):
        b = 1e-6
        near = ProlateEllipsoid(a=b * (1 + 1e-6), b=b)
        sphere = Sphere(b)
        assert libration_inertia(near, 7860.0) == pytest.approx(
            libration_inertia(sphere, 7860.0), rel=1e-5
        )

    def test_zero_density_rejected(self):
        with pytest.raises(ValueError):
            libration_inertia(MICRON, 0.0)


class TestVolumeInertiaRatio:
    def test_quotient_equals_scaling_form(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            b = 10 ** rng.uniform(-8, -5)
            shape = ProlateEllipsoid(a=b * rng.uniform(1.01, 10.0), b=b)
            rho = rng.uniform(500.0, 20000.0)
            direct = volume_inertia_ratio(shape, rho)
            scaling = volume_inertia_ratio_scaling(shape, rho)
            assert scaling == pytest.approx(direct, rel=1e-10)

    def test_hand_value(self):
        assert volume_inertia_ratio(MICRON, 7860.0) == pytest.approx(
            7.1859059e7, rel=1e-6
        )

    def test_doubling_size_quarters_ratio(self):
        doubled = ProlateEllipsoid(a=2 * MICRON.a, b=2 * MICRON.b)
        ratio = volume_inertia_ratio(MICRON, 7860.0)
        assert volume_inertia_ratio(doubled, 7860.0) == pytest.approx(
            ratio / 4.0, rel=1e-12
        )


class TestShapes:
    def test_oblate_rejected(self):
        with pytest.raises(ValueError):
            ProlateEllipsoid(a=1e-6, b=2e-6)

    def test_sphere_positive_radius(self):
        with pytest.raises(ValueError):
            Sphere(0.0)

    def test_aspect_ratio(self):
        assert MICRON.aspect_ratio == pytest.approx(2.16)


class TestMaterials:
    def test_presets(self):
        assert IRON.density == 7860.0
        assert IRON.polarization == 2.2
        assert IRON.magnet_class == "soft"
        assert NEODYMIUM.density == 7400.0
        assert NEODYMIUM.polarization == 1.6
        assert NEODYMIUM.magnet_class == "hard"

    def test_get_material(self):
        assert get_material("iron") is IRON
        assert get_material(NEODYMIUM) is NEODYMIUM
        with pytest.raises(ValueError):
            get_material("unobtainium")

    def test_invariants(self):
        with pytest.raises(ValueError):
            Material("bad", density=-1.0, polarization=1.0, magnet_class="soft")
        with pytest.raises(ValueError):
            Material("bad", density=1.0, polarization=0.0, magnet_class="soft")
        with pytest.raises(ValueError):
            Material("bad", density=1.0, polarization=1.0, magnet_class="weird")

    def test_magnetization_conversion(self):
        # polarization (tesla) over mu_0
        assert NEODYMIUM.magnetization == pytest.approx(1.2732395e6, rel=1e-6)

    def test_config_loading(self, tmp_path):
        cfg = tmp_path / "materials.ini"
        cfg.write_text(
            "[permalloy]\ndensity = 8700\npolarization = 1.0\nclass = soft\n"
            "[smco]\ndensity = 8300\npolarization = 1.1\nclass = hard\n"
        )
        mats = load_materials(cfg)
        assert mats["permalloy"].magnet_class == "soft"
        assert mats["smco"].polarization == 1.1

    def test_config_missing_key(self, tmp_path):
        cfg = tmp_path / "materials.ini"
        cfg.write_text("[bad]\ndensity = 1000\n")
        with pytest.raises(ValueError):
            load_materials(cfg)
