"""Tests for the lift constructors and the closed-form ATL bracket."""

import numpy as np
import pytest

from tangent_lifts.bundle import PhasePoint, bracket_at
from tangent_lifts.catalog import get_manifold
from tangent_lifts.errors import ConfigError, SkewnessError
from tangent_lifts.fields import (
    CovariantDerivativeField,
    ScalarFieldSpec,
    SkewCovariantDerivativeField,
    Tensor2FieldSpec,
    VectorFieldSpec,
    zero_vector,
)
from tangent_lifts.geometry import geometry_at
from tangent_lifts.lifts import (
    AtlSpec,
    atl_bracket,
    atl_bracket_residual,
    atl_combine,
    classical_bracket_table,
    complete_lift,
    describe_lift,
    dynamical_atl,
    euler_lift,
    horizontal_lift,
    iwai_bracket_residual,
    iwai_lift,
    lift_from_kind,
    matter_lift,
    skew_closure_residual,
    vertical_lift_tensor,
    vertical_lift_vector,
)
from tangent_lifts.sampling import (
    random_scalar_field,
    random_skew_field,
    random_tensor_field,
    random_vector_field,
    sample_base_points,
    sample_phase_points,
)


def random_lift(m, rng):
    return AtlSpec(
        random_vector_field(m, rng), random_tensor_field(m, rng), random_vector_field(m, rng)
    )


class TestConstructors:
    def test_components_in_the_connection_basis(self, flat2, field_of):
        Y = field_of(flat2, "rotation")
        geo = geometry_at(flat2, [1.0, 2.0])
        p = np.array([0.5, -1.0])

        h, v = horizontal_lift(Y).connection_components(geo, p)
        assert np.allclose(h, [-2.0, 1.0]) and not np.any(v)

        h, v = vertical_lift_vector(Y).connection_components(geo, p)
        assert not np.any(h) and np.allclose(v, [-2.0, 1.0])

        h, v = complete_lift(flat2, Y).connection_components(geo, p)
        assert np.allclose(h, [-2.0, 1.0])
        assert np.allclose(v, [1.0, 0.5])

        h, v = euler_lift(2).connection_components(geo, p)
        assert not np.any(h) and np.allclose(v, p)

    def test_iwai_and_dynamical_differ_by_the_factor(self, flat2, field_of):
        Y = field_of(flat2, "dilation")
        psi = ScalarFieldSpec.constant(1.0, 2)
        geo = geometry_at(flat2, [0.3, 0.4])
        assert np.allclose(iwai_lift(flat2, Y, psi).A.value(geo), -np.eye(2))
        assert np.allclose(dynamical_atl(flat2, Y, psi).A.value(geo), np.zeros((2, 2)))

    def test_kind_tags(self, sphere, field_of):
        Y = field_of(sphere, "rotation_z")
        assert horizontal_lift(Y).kind == "horizontal"
        assert complete_lift(sphere, Y).kind == "complete"
        assert vertical_lift_tensor(CovariantDerivativeField(Y)).kind == "vertical_tensor"
        assert describe_lift(complete_lift(sphere, Y))["kind"] == "complete"

    def test_labels_name_the_construction(self, sphere, field_of):
        Y = field_of(sphere, "rotation_z")
        psi = ScalarFieldSpec.constant(1.0, 2)
        assert horizontal_lift(Y).label == "Y^(0,0)"
        assert complete_lift(sphere, Y).label == "Y^(nabla Y,0)"
        assert iwai_lift(sphere, Y, psi).label == "Y^(nabla Y - 2 psi delta,0)"
        assert dynamical_atl(sphere, Y, psi).label == "Y^(nabla Y - psi delta,0)"
        assert matter_lift(sphere, Y, SkewCovariantDerivativeField(Y)).label == "Y^(A,0)"
        assert vertical_lift_vector(Y).label == "0^(0,Z)"
        assert euler_lift(2).label == "0^(delta,0)"
        combined = atl_combine(2.0, horizontal_lift(Y), -1.0, euler_lift(2))
        assert combined.label == "2*[Y^(0,0)] + -1*[0^(delta,0)]"
        assert describe_lift(iwai_lift(sphere, Y, psi))["label"] == "Y^(nabla Y - 2 psi delta,0)"

    def test_matter_kind_needs_a_zero_shift(self, flat2, field_of):
        Y = field_of(flat2, "rotation")
        A = SkewCovariantDerivativeField(Y)
        with pytest.raises(ConfigError, match="k = 0"):
            AtlSpec(Y, A, field_of(flat2, "translation"), kind="matter")
        assert AtlSpec(Y, A, VectorFieldSpec.constant([0.0, 0.0]), kind="matter").kind == "matter"
        assert AtlSpec(Y, A, field_of(flat2, "translation")).kind == "general"

    def test_unknown_kind(self, flat2):
        Y = VectorFieldSpec.constant([1.0, 0.0])
        with pytest.raises(ConfigError, match="Unknown lift kind"):
            AtlSpec(Y, Tensor2FieldSpec.constant(np.eye(2)), Y, kind="diagonal")

    def test_dimension_mismatch(self, flat2, flat3):
        Y3 = VectorFieldSpec.constant([1.0, 0.0, 0.0])
        with pytest.raises(ConfigError, match="disagree"):
            AtlSpec(Y3, Tensor2FieldSpec.constant(np.eye(2)), Y3)
        with pytest.raises(ConfigError):
            complete_lift(flat2, Y3)
        with pytest.raises(ConfigError):
            horizontal_lift(Y3).field(flat2)

    def test_lift_from_kind(self, sphere, field_of):
        Y = field_of(sphere, "rotation_x")
        assert lift_from_kind(sphere, "complete", Y=Y).kind == "complete"
        assert lift_from_kind(sphere, "euler").kind == "euler"
        general = lift_from_kind(sphere, "general", Y=Y)
        assert not np.any(general.k.value(geometry_at(sphere, [1.0, 0.0])))
        with pytest.raises(ConfigError, match="needs field 'psi'"):
            lift_from_kind(sphere, "iwai", Y=Y)
        with pytest.raises(ConfigError, match="needs field 'Y'"):
            lift_from_kind(sphere, "horizontal")


class TestMatterLift:
    def test_skew_generator_is_accepted(self, schwarzschild, field_of, rng):
        Y = field_of(schwarzschild, "rotation_x")
        assert matter_lift(schwarzschild, Y, SkewCovariantDerivativeField(Y)).kind == "matter"
        assert matter_lift(schwarzschild, Y, random_skew_field(schwarzschild, rng)).kind == "matter"

    def test_symmetric_generator_is_rejected(self, sphere, field_of):
        Y = field_of(sphere, "rotation_z")
        with pytest.raises(SkewnessError) as info:
            matter_lift(sphere, Y, Tensor2FieldSpec.constant(np.eye(2)))
        assert info.value.exit_code == 1
        assert info.value.max_violation == pytest.approx(1.0)

    def test_explicit_points(self, sphere, field_of):
        Y = field_of(sphere, "theta_scaling")
        A = Tensor2FieldSpec.from_strings([["0", "-sin(x0)^2"], ["1", "0"]], 2)
        assert matter_lift(sphere, Y, A, points=[[1.0, 0.0], [2.0, 1.0]]).kind == "matter"


class TestAtlBracket:
    @pytest.mark.parametrize("name", ["euclidean2", "sphere2", "minkowski2", "schwarzschild"])
    def test_closed_form_matches_numeric_bracket(self, name, rng):
        m = get_manifold(name)
        for pt in sample_phase_points(m, 20):
            L1, L2 = random_lift(m, rng), random_lift(m, rng)
            assert atl_bracket_residual(m, L1, L2, pt, relative=True) < 1e-10

    def test_sphere_rotations(self, sphere, field_of):
        """Complete lifts of Killing fields close on the complete lift of their bracket."""
        Lx = complete_lift(sphere, field_of(sphere, "rotation_x"))
        Ly = complete_lift(sphere, field_of(sphere, "rotation_y"))
        x = [1.1, 0.4]
        got = atl_bracket(sphere, Lx, Ly, x)
        geo = geometry_at(sphere, x)
        Lz = complete_lift(sphere, field_of(sphere, "rotation_z"))
        # [R_x, R_y] = -R_z in these coordinates
        assert np.allclose(got.YZ, -Lz.Y.value(geo))
        assert np.allclose(got.C, -Lz.A.value(geo))
        assert not np.any(got.m)

    def test_bilinearity(self, sphere, rng):
        L1, L2, L3 = (random_lift(sphere, rng) for _ in range(3))
        combined = atl_combine(2.0, L2, -3.0, L3)
        for x in sample_base_points(sphere, 10):
            whole = atl_bracket(sphere, L1, combined, x)
            a = atl_bracket(sphere, L1, L2, x)
            b = atl_bracket(sphere, L1, L3, x)
            assert np.allclose(whole.YZ, 2 * a.YZ - 3 * b.YZ)
            assert np.allclose(whole.C, 2 * a.C - 3 * b.C)
            assert np.allclose(whole.m, 2 * a.m - 3 * b.m)

    def test_antisymmetry(self, schwarzschild, rng):
        L1, L2 = random_lift(schwarzschild, rng), random_lift(schwarzschild, rng)
        x = sample_base_points(schwarzschild, 1)[0]
        a, b = atl_bracket(schwarzschild, L1, L2, x), atl_bracket(schwarzschild, L2, L1, x)
        assert np.allclose(a.C, -b.C) and np.allclose(a.m, -b.m) and np.allclose(a.YZ, -b.YZ)

    def test_coordinate_components_agree_with_numeric(self, sphere, sphere_point, field_of):
        L1 = complete_lift(sphere, field_of(sphere, "rotation_x"))
        L2 = euler_lift(2)
        geo = geometry_at(sphere, sphere_point.x)
        closed = atl_bracket(sphere, L1, L2, sphere_point.x)
        numeric = bracket_at(geo, sphere_point.p, L1.field(sphere), L2.field(sphere))
        assert np.allclose(closed.coordinate_components(geo, sphere_point.p), numeric)

    @pytest.mark.parametrize("name", ["euclidean2", "sphere2", "schwarzschild"])
    def test_vertical_lifts_form_an_ideal(self, name, rng):
        """[L, vertical] has no horizontal part and is again vertical."""
        m = get_manifold(name)
        for pt in sample_phase_points(m, 10):
            L = random_lift(m, rng)
            V = AtlSpec(zero_vector(m.dimension), random_tensor_field(m, rng), random_vector_field(m, rng))
            got = atl_bracket(m, L, V, pt.x)
            assert not np.any(got.YZ)
            assert atl_bracket_residual(m, L, V, pt, relative=True) < 1e-10
            geo = geometry_at(m, pt.x)
            numeric = bracket_at(geo, pt.p, L.field(m), V.field(m))
            assert np.max(np.abs(numeric[: m.dimension])) < 1e-10 * max(1.0, float(np.max(np.abs(numeric))))


class TestClassicalTable:
    def test_sphere(self, sphere, field_of):
        Y, Z = field_of(sphere, "rotation_x"), field_of(sphere, "theta_scaling")
        for pt in sample_phase_points(sphere, 20):
            table = classical_bracket_table(sphere, Y, Z, pt)
            assert set(table) == {
                "bar_bar",
                "bar_hat",
                "bar_tilde",
                "hat_hat",
                "hat_tilde",
                "tilde_tilde",
            }
            assert max(table.values()) < 1e-10, table

    def test_schwarzschild(self, schwarzschild, field_of, rng):
        Y = field_of(schwarzschild, "time_translation")
        for pt in sample_phase_points(schwarzschild, 10):
            Z = random_vector_field(schwarzschild, rng)
            table = classical_bracket_table(schwarzschild, Y, Z, pt)
            assert max(table.values()) < 1e-9, table


class TestIwai:
    def test_bracket_rule(self, sphere, rng):
        for x in sample_base_points(sphere, 20):
            Y, Z = random_vector_field(sphere, rng), random_vector_field(sphere, rng)
            psi_Y, psi_Z = random_scalar_field(sphere, rng), random_scalar_field(sphere, rng)
            assert iwai_bracket_residual(sphere, Y, psi_Y, Z, psi_Z, x) < 1e-10

    def test_constant_weights_reduce_to_complete_lifts(self, flat2, field_of):
        Y = field_of(flat2, "dilation")
        Z = field_of(flat2, "rotation")
        one = ScalarFieldSpec.constant(1.0, 2)
        assert iwai_bracket_residual(flat2, Y, one, Z, one, [0.5, 0.5]) < 1e-14


class TestSkewClosure:
    def test_skew_generators_bracket_to_skew(self, schwarzschild, rng):
        for x in sample_base_points(schwarzschild, 10):
            L1 = AtlSpec(
                random_vector_field(schwarzschild, rng),
                random_skew_field(schwarzschild, rng),
                random_vector_field(schwarzschild, rng),
            )
            L2 = AtlSpec(
                random_vector_field(schwarzschild, rng),
                random_skew_field(schwarzschild, rng),
                random_vector_field(schwarzschild, rng),
            )
            assert skew_closure_residual(schwarzschild, L1, L2, x, relative=True) < 1e-10

    def test_non_skew_generators_need_not_close(self, sphere, rng):
        L1, L2 = random_lift(sphere, rng), random_lift(sphere, rng)
        assert skew_closure_residual(sphere, L1, L2, [1.0, 0.5]) > 1e-6


def test_vertical_lift_of_tensor_acts_linearly(flat2):
    A = Tensor2FieldSpec.constant([[0.0, 1.0], [-1.0, 0.0]])
    geo = geometry_at(flat2, [0.0, 0.0])
    _, v = vertical_lift_tensor(A).connection_components(geo, np.array([2.0, 3.0]))
    assert np.allclose(v, [3.0, -2.0])
    assert PhasePoint.of([0.0, 0.0], [2.0, 3.0]).dimension == 2
