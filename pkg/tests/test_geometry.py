"""Geometry conversions: exact values, round trips, rotation properties."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from panotour.geometry import (
    Dimensions,
    GeometryError,
    PixelCoord,
    SphericalDirection,
    UnitVector,
    pixel_to_sphere,
    rotate_view,
    sphere_to_pixel,
    sphere_to_vec,
    vec_to_sphere,
    wrap_angle,
)

D4K = Dimensions(4096, 2048)


class TestPixelToSphere:
    def test_center_is_forward_horizon(self):
        s = pixel_to_sphere(PixelCoord(2048, 1024), D4K)
        assert s.yaw == 0.0
        assert s.pitch == 0.0

    def test_top_left_is_north_pole_at_seam(self):
        s = pixel_to_sphere(PixelCoord(0, 0), D4K)
        assert s.yaw == -math.pi
        assert s.pitch == math.pi / 2

    def test_three_quarter_point(self):
        # u=3072 is 3/4 across: yaw = 0.75*2pi - pi = pi/2
        # v=512 is 1/4 down: pitch = pi/2 - pi/4 = pi/4
        s = pixel_to_sphere(PixelCoord(3072, 512), D4K)
        assert s.yaw == pytest.approx(math.pi / 2, abs=1e-12)
        assert s.pitch == pytest.approx(math.pi / 4, abs=1e-12)

    def test_against_lattice_table(self):
        # independent 8x4 lattice: yaw = 2pi*i/8 - pi, pitch = pi/2 - pi*j/4,
        # evaluated from the grid fractions rather than from u/W
        for i in range(9):
            for j in range(5):
                p = PixelCoord(D4K.width * i / 8, D4K.height * j / 4)
                s = pixel_to_sphere(p, D4K)
                want_yaw = wrap_angle(2 * math.pi * i / 8 - math.pi)
                want_pitch = math.pi / 2 - math.pi * j / 4
                assert s.yaw == pytest.approx(want_yaw, abs=1e-12)
                assert s.pitch == pytest.approx(want_pitch, abs=1e-12)

    def test_seam_wraps_to_negative_pi(self):
        assert pixel_to_sphere(PixelCoord(4096, 1024), D4K).yaw == -math.pi

    def test_out_of_range_rejected(self):
        with pytest.raises(GeometryError):
            pixel_to_sphere(PixelCoord(-1.0, 0.0), D4K)
        with pytest.raises(GeometryError):
            pixel_to_sphere(PixelCoord(0.0, 2049.0), D4K)

    def test_non_finite_rejected(self):
        with pytest.raises(GeometryError):
            PixelCoord(float("nan"), 0.0)

    def test_horizontal_periodicity(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            u = float(rng.uniform(0, D4K.width))
            v = float(rng.uniform(0, D4K.height))
            a = pixel_to_sphere(PixelCoord(u, v), D4K)
            b = pixel_to_sphere(PixelCoord((u + D4K.width) % D4K.width, v), D4K)
            assert a.yaw == pytest.approx(b.yaw, abs=1e-9)
            assert a.pitch == pytest.approx(b.pitch, abs=1e-9)


class TestSphereToPixel:
    def test_forward_center(self):
        p = sphere_to_pixel(SphericalDirection(0, 0), D4K)
        assert (p.u, p.v) == (2048, 1024)

    def test_south_pole_at_seam(self):
        p = sphere_to_pixel(SphericalDirection(-math.pi, -math.pi / 2), D4K)
        assert (p.u, p.v) == (0, 2048)

    def test_round_trip_random(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            u = float(rng.uniform(0, D4K.width))
            v = float(rng.uniform(0, D4K.height))
            s = pixel_to_sphere(PixelCoord(u, v), D4K)
            p = sphere_to_pixel(s, D4K)
            assert p.u == pytest.approx(u, abs=1e-9)
            assert p.v == pytest.approx(v, abs=1e-9)

    @given(st.floats(-math.pi, math.pi - 1e-9), st.floats(-math.pi / 2, math.pi / 2))
    def test_round_trip_from_angles(self, yaw, pitch):
        s = SphericalDirection(yaw, pitch)
        back = pixel_to_sphere(sphere_to_pixel(s, D4K), D4K)
        assert back.yaw == pytest.approx(s.yaw, abs=1e-9)
        assert back.pitch == pytest.approx(s.pitch, abs=1e-9)


class TestVectorConversions:
    def test_forward_axis(self):
        v = sphere_to_vec(SphericalDirection(0, 0))
        assert (v.x, v.y, v.z) == (1, 0, 0)

    def test_zenith(self):
        v = sphere_to_vec(SphericalDirection(0, math.pi / 2))
        assert v.z == 1
        assert abs(v.x) < 1e-15 and v.y == pytest.approx(0, abs=1e-16)

    def test_quarter_yaw(self):
        v = sphere_to_vec(SphericalDirection(math.pi / 2, 0))
        assert v.y == 1
        assert abs(v.x) < 1e-15 and abs(v.z) < 1e-15

    def test_nadir_yaw_convention(self):
        s = vec_to_sphere(UnitVector(0, 0, -1))
        assert s.yaw == 0.0
        assert s.pitch == -math.pi / 2

    def test_backward_at_seam(self):
        s = vec_to_sphere(UnitVector(-1, 0, 0))
        assert s.yaw == -math.pi
        assert s.pitch == 0.0

    def test_round_trip_random(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            raw = rng.normal(size=3)
            v = UnitVector(*raw)
            s = vec_to_sphere(v)
            if abs(s.pitch) >= math.pi / 2 - 1e-6:
                continue  # longitude degenerates at the poles
            w = sphere_to_vec(s)
            assert w.x == pytest.approx(v.x, abs=1e-9)
            assert w.y == pytest.approx(v.y, abs=1e-9)
            assert w.z == pytest.approx(v.z, abs=1e-9)

    def test_zero_vector_rejected(self):
        with pytest.raises(GeometryError):
            UnitVector(0.0, 0.0, 0.0)

    def test_unnormalized_input_normalized(self):
        v = UnitVector(0.0, 0.0, -3.0)
        assert (v.x, v.y, v.z) == (0, 0, -1)


class TestRotateView:
    def test_identity(self):
        v = UnitVector(0.2, -0.5, 0.6)
        r = rotate_view(v, 0.0, 0.0)
        assert (r.x, r.y, r.z) == (v.x, v.y, v.z)

    def test_pure_yaw_of_forward(self):
        r = rotate_view(UnitVector(1, 0, 0), math.pi / 2, 0.0)
        assert r.y == pytest.approx(1, abs=1e-15)
        assert abs(r.x) < 1e-15 and r.z == 0

    def test_pure_pitch_of_forward(self):
        r = rotate_view(UnitVector(1, 0, 0), 0.0, math.pi / 2)
        assert r.z == pytest.approx(1, abs=1e-15)

    def test_yaw_composition(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            v = UnitVector(*rng.normal(size=3))
            a, b = rng.uniform(-3, 3, 2)
            one = rotate_view(rotate_view(v, a, 0.0), b, 0.0)
            two = rotate_view(v, a + b, 0.0)
            assert one.x == pytest.approx(two.x, abs=1e-9)
            assert one.y == pytest.approx(two.y, abs=1e-9)
            assert one.z == pytest.approx(two.z, abs=1e-9)

    def test_output_unit_length(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            v = UnitVector(*rng.normal(size=3))
            r = rotate_view(v, float(rng.uniform(-7, 7)), float(rng.uniform(-7, 7)))
            n = math.sqrt(r.x ** 2 + r.y ** 2 + r.z ** 2)
            assert abs(n - 1) <= 1e-12

    def test_rotation_preserves_angles(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            a = UnitVector(*rng.normal(size=3))
            b = UnitVector(*rng.normal(size=3))
            yaw, pitch = rng.uniform(-3, 3, 2)
            ra = rotate_view(a, yaw, pitch)
            rb = rotate_view(b, yaw, pitch)
            dot_before = a.x * b.x + a.y * b.y + a.z * b.z
            dot_after = ra.x * rb.x + ra.y * rb.y + ra.z * rb.z
            assert dot_after == pytest.approx(dot_before, abs=1e-9)


class TestTypes:
    def test_yaw_normalization(self):
        assert SphericalDirection(math.pi, 0).yaw == -math.pi
        assert SphericalDirection(3 * math.pi, 0).yaw == pytest.approx(-math.pi)
        assert SphericalDirection(-math.pi, 0).yaw == -math.pi

    def test_pitch_clamped(self):
        assert SphericalDirection(0, 2.0).pitch == math.pi / 2
        assert SphericalDirection(0, -2.0).pitch == -math.pi / 2

    def test_non_finite_rejected(self):
        with pytest.raises(GeometryError):
            SphericalDirection(float("inf"), 0)

    def test_dimensions_positive(self):
        with pytest.raises(GeometryError):
            Dimensions(0, 5)
        with pytest.raises(GeometryError):
            Dimensions(5, -1)

    @given(st.floats(allow_nan=False, allow_infinity=False, width=64))
    def test_wrap_angle_range(self, x):
        w = wrap_angle(x)
        assert -math.pi <= w < math.pi
