"""Tests for dynamical and matter symmetries and field classification."""

import numpy as np
import pytest

from tangent_lifts.bundle import PhasePoint, SprayField, bracket_at
from tangent_lifts.catalog import catalog_names, example_field, get_entry, get_manifold
from tangent_lifts.errors import ConfigError, DegenerateSprayError
from tangent_lifts.fields import ScalarFieldSpec, SkewCovariantDerivativeField, VectorFieldSpec
from tangent_lifts.geometry import geometry_at
from tangent_lifts.lifts import (
    AtlSpec,
    complete_lift,
    dynamical_atl,
    euler_lift,
    horizontal_lift,
    matter_lift,
)
from tangent_lifts.sampling import (
    random_skew_field,
    random_vector_field,
    sample_base_points,
    sample_phase_points,
)
from tangent_lifts.symmetry import (
    FLAG_NAMES,
    atl_dynamical_conditions,
    classify_vector_field,
    coincidence_check,
    dynamical_residual,
    matter_spray_bracket,
)


class TestDynamicalResidual:
    def test_euler_field(self, sphere):
        sigma = euler_lift(2).field(sphere)
        for pt in sample_phase_points(sphere, 10):
            r = dynamical_residual(sphere, sigma, pt)
            assert r.psi_hat == pytest.approx(-1.0)
            assert r.residual < 1e-12

    def test_horizontal_lift_of_dilation(self, flat2, field_of):
        sigma = horizontal_lift(field_of(flat2, "dilation")).field(flat2)
        for pt in sample_phase_points(flat2, 10):
            r = dynamical_residual(flat2, sigma, pt)
            assert r.psi_hat == pytest.approx(1.0)
            assert r.residual < 1e-12

    def test_projective_field_with_its_weight(self, flat2, field_of):
        psi = ScalarFieldSpec.from_text("2*x0", 2)
        sigma = dynamical_atl(flat2, field_of(flat2, "projective"), psi).field(flat2)
        for pt in sample_phase_points(flat2, 10):
            r = dynamical_residual(flat2, sigma, pt)
            assert r.psi_hat == pytest.approx(2.0 * pt.x[0])
            assert r.residual < 1e-12

    @pytest.mark.parametrize("field_name", ["rotation_x", "rotation_y", "rotation_z"])
    def test_complete_lifts_of_killing_fields_are_lie_symmetries(
        self, schwarzschild, field_of, field_name
    ):
        sigma = complete_lift(schwarzschild, field_of(schwarzschild, field_name)).field(schwarzschild)
        for pt in sample_phase_points(schwarzschild, 10):
            r = dynamical_residual(schwarzschild, sigma, pt)
            assert abs(r.psi_hat) < 1e-10
            assert r.residual < 1e-10

    @pytest.mark.parametrize(
        "name, field_name",
        [
            ("schwarzschild", "time_translation"),
            ("sphere2", "rotation_x"),
            ("sphere2", "rotation_y"),
            ("sphere2", "rotation_z"),
        ],
    )
    def test_complete_lifts_are_lie_symmetries_at_a_hundred_points(self, name, field_name, field_of):
        m = get_manifold(name)
        sigma = complete_lift(m, field_of(m, field_name)).field(m)
        for pt in sample_phase_points(m, 100):
            r = dynamical_residual(m, sigma, pt)
            assert abs(r.psi_hat) < 1e-9
            assert r.residual < 1e-9

    def test_psi_hat_is_constant_along_a_fibre(self, flat2, sphere, field_of, rng):
        psi = ScalarFieldSpec.from_text("2*x0", 2)
        cases = [
            (flat2, horizontal_lift(field_of(flat2, "dilation"))),
            (flat2, dynamical_atl(flat2, field_of(flat2, "projective"), psi)),
            (sphere, complete_lift(sphere, field_of(sphere, "rotation_y"))),
            (sphere, euler_lift(2)),
        ]
        for m, L in cases:
            sigma = L.field(m)
            for x in sample_base_points(m, 5):
                values = [
                    dynamical_residual(m, sigma, PhasePoint.of(x, p)).psi_hat
                    for p in rng.uniform(-2.0, 2.0, size=(6, 2))
                ]
                assert max(values) - min(values) < 1e-9, L.label

    def test_vanishing_conditions_give_a_dynamical_symmetry(self, flat2, sphere, field_of, rng):
        cases = [
            (flat2, field_of(flat2, "projective"), ScalarFieldSpec.from_text("2*x0", 2)),
            (sphere, field_of(sphere, "rotation_x"), ScalarFieldSpec.constant(0.0, 2)),
        ]
        for m, Y, psi in cases:
            L = dynamical_atl(m, Y, psi)
            sigma = L.field(m)
            for x in sample_base_points(m, 10):
                assert max(atl_dynamical_conditions(m, L, x, psi).values()) < 1e-10
                for p in rng.uniform(-2.0, 2.0, size=(5, 2)):
                    assert dynamical_residual(m, sigma, PhasePoint.of(x, p)).residual < 1e-9

    def test_non_symmetry_leaves_a_residual(self, sphere, field_of):
        sigma = complete_lift(sphere, field_of(sphere, "theta_scaling")).field(sphere)
        residuals = [dynamical_residual(sphere, sigma, pt).residual for pt in sample_phase_points(sphere, 10)]
        assert max(residuals) > 1e-3

    def test_zero_momentum(self, sphere):
        with pytest.raises(DegenerateSprayError):
            dynamical_residual(sphere, euler_lift(2).field(sphere), PhasePoint.of([1.0, 0.0], [0.0, 0.0]))

    def test_dynamical_conditions(self, flat2, field_of):
        psi = ScalarFieldSpec.from_text("2*x0", 2)
        L = dynamical_atl(flat2, field_of(flat2, "projective"), psi)
        for x in sample_base_points(flat2, 10):
            conditions = atl_dynamical_conditions(flat2, L, x, psi)
            assert set(conditions) == {"k_norm", "generator", "projective"}
            assert max(conditions.values()) < 1e-12

    def test_dynamical_conditions_catch_the_wrong_weight(self, flat2, field_of):
        psi = ScalarFieldSpec.from_text("x0", 2)
        L = dynamical_atl(flat2, field_of(flat2, "projective"), psi)
        conditions = atl_dynamical_conditions(flat2, L, [1.0, 0.5], psi)
        assert conditions["generator"] < 1e-12
        assert conditions["projective"] > 0.1


class TestMatterSprayBracket:
    def test_random_skew_generators(self, sphere, rng):
        spray = SprayField(sphere)
        points = sample_phase_points(sphere, 100)
        for pt in points:
            L = matter_lift(sphere, random_vector_field(sphere, rng), random_skew_field(sphere, rng))
            geo = geometry_at(sphere, pt.x)
            numeric = bracket_at(geo, pt.p, L.field(sphere), spray)
            closed = matter_spray_bracket(sphere, L, pt)
            scale = max(1.0, float(np.max(np.abs(numeric))))
            assert np.max(np.abs(closed - numeric)) / scale < 1e-10

    def test_homothetic_field_brackets_to_minus_psi_spray(self, flat3, field_of):
        Y = field_of(flat3, "dilation")
        L = matter_lift(flat3, Y, SkewCovariantDerivativeField(Y))
        for pt in sample_phase_points(flat3, 10):
            assert np.allclose(matter_spray_bracket(flat3, L, pt), -SprayField(flat3).at(pt))

    def test_nonzero_shift_rejected(self, flat2, field_of):
        L = complete_lift(flat2, field_of(flat2, "rotation"))
        shifted = AtlSpec(L.Y, L.A, field_of(flat2, "translation"))
        with pytest.raises(ConfigError, match="k = 0"):
            matter_spray_bracket(flat2, shifted, PhasePoint.of([0.0, 0.0], [1.0, 0.0]))


class TestClassify:
    def flags(self, m, Y, count=16):
        return classify_vector_field(m, Y, sample_base_points(m, count)).flags

    def test_flat_rotation(self, flat2, field_of):
        flags = self.flags(flat2, field_of(flat2, "rotation"))
        assert flags["killing"] and flags["conformal_killing"] and flags["homothetic"]
        assert flags["affine_collineation"] and flags["projective_collineation"]
        assert flags["matter_symmetry"] is None and flags["dynamical_symmetry"] is None

    def test_flat_dilation(self, flat2, field_of):
        flags = self.flags(flat2, field_of(flat2, "dilation"))
        assert not flags["killing"]
        assert flags["conformal_killing"] and flags["homothetic"]
        assert flags["affine_collineation"] and flags["projective_collineation"]

    def test_projective_field(self, flat3, field_of):
        report = classify_vector_field(flat3, field_of(flat3, "projective"), sample_base_points(flat3, 16))
        flags = report.flags
        assert flags["projective_collineation"]
        assert not flags["affine_collineation"]
        assert not flags["conformal_killing"] and not flags["homothetic"]
        for gradient in report.projective_gradient:
            assert np.allclose(gradient, [2.0, 0.0, 0.0])

    def test_curved_killing_fields(self, sphere, schwarzschild, minkowski4, field_of):
        for m, name in (
            (sphere, "rotation_x"),
            (schwarzschild, "rotation_y"),
            (schwarzschild, "time_translation"),
            (minkowski4, "boost"),
        ):
            assert self.flags(m, field_of(m, name))["killing"], name

    def test_theta_scaling_is_nothing(self, sphere, field_of):
        flags = self.flags(sphere, field_of(sphere, "theta_scaling"))
        assert not flags["killing"] and not flags["conformal_killing"]
        assert not flags["affine_collineation"]

    def test_conformal_but_not_homothetic(self, polar):
        """z -> z^2 on the plane is conformal with a non-constant factor."""
        # special conformal field of the plane, written in polar coordinates
        Y = VectorFieldSpec.from_strings(["x0^2*cos(x1)", "x0*sin(x1)"], 2)
        report = classify_vector_field(polar, Y, sample_base_points(polar, 16))
        assert report.flags["conformal_killing"]
        assert not report.flags["homothetic"]
        assert max(report.psi) - min(report.psi) > 0.1

    def test_report_shape(self, sphere, field_of):
        report = classify_vector_field(sphere, field_of(sphere, "rotation_z"), sample_base_points(sphere, 4))
        d = report.to_dict()
        assert set(d["flags"]) == set(FLAG_NAMES)
        assert set(d["residuals"]) == {"killing", "conformal", "affine", "projective"}
        assert len(d["psi"]) == 4
        assert d["max_residuals"]["killing"] < 1e-12

    @pytest.mark.parametrize("name", catalog_names())
    def test_flags_are_nested(self, name):
        m = get_manifold(name)
        for field_name in get_entry(name).fields:
            flags = self.flags(m, example_field(m, field_name))
            if flags["killing"]:
                assert flags["homothetic"], field_name
            if flags["homothetic"]:
                assert flags["conformal_killing"], field_name
            if flags["affine_collineation"]:
                assert flags["projective_collineation"], field_name

    def test_needs_two_points(self, sphere, field_of):
        with pytest.raises(ConfigError, match="at least 2"):
            classify_vector_field(sphere, field_of(sphere, "rotation_z"), [[1.0, 0.0]])


class TestCoincidence:
    def test_killing_field(self, sphere, field_of):
        report = coincidence_check(sphere, field_of(sphere, "rotation_x"), sample_phase_points(sphere, 20))
        assert report.homothetic and report.dynamical_symmetry and report.coincide
        assert report.psi == pytest.approx(0.0, abs=1e-12)
        assert all(abs(v) < 1e-10 for v in report.psi_hat)

    def test_flat_rotation(self, flat2, field_of):
        report = coincidence_check(flat2, field_of(flat2, "rotation"), sample_phase_points(flat2, 20))
        assert report.homothetic and report.dynamical_symmetry
        assert report.psi == pytest.approx(0.0, abs=1e-12)

    def test_dilation(self, flat2, field_of):
        report = coincidence_check(flat2, field_of(flat2, "dilation"), sample_phase_points(flat2, 20))
        assert report.homothetic and report.dynamical_symmetry
        assert report.psi == pytest.approx(1.0)
        assert all(v == pytest.approx(1.0) for v in report.psi_hat)

    def test_non_homothetic_control(self, flat2, field_of):
        report = coincidence_check(flat2, field_of(flat2, "projective"), sample_phase_points(flat2, 20))
        assert not report.homothetic
        assert not report.dynamical_symmetry
        assert report.max_residual > 1e-3
        assert report.coincide
        assert report.to_dict()["worst_point"] is not None
