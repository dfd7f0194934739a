"""Tests for the built-in manifold catalog."""

import math

import numpy as np
import pytest

from tangent_lifts.catalog import (
    catalog_names,
    describe_catalog,
    example_field,
    get_entry,
    get_manifold,
)
from tangent_lifts.errors import ConfigError
from tangent_lifts.geometry import geometry_at
from tangent_lifts.sampling import sample_base_points


class TestCatalog:
    def test_names(self):
        names = catalog_names()
        for name in (
            "euclidean2",
            "euclidean3",
            "euclidean4",
            "euclidean-polar",
            "sphere2",
            "minkowski2",
            "minkowski4",
            "schwarzschild",
        ):
            assert name in names

    def test_unknown_manifold(self):
        with pytest.raises(ConfigError, match="Known manifolds"):
            get_manifold("torus")

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError, match="no parameter 'Q'"):
            get_manifold("schwarzschild", {"Q": 1.0})

    def test_parameter_override_moves_the_horizon(self):
        m = get_manifold("schwarzschild", {"M": 2.0})
        assert m.parameters == {"M": 2.0}
        assert not m.admitted([0.0, 3.0, 1.0, 0.0])
        assert m.admitted([0.0, 5.0, 1.0, 0.0])
        assert m.box[1] == (6.0, 20.0)

    def test_unknown_example_field(self, sphere):
        with pytest.raises(ConfigError, match="no example field"):
            example_field(sphere, "boost")

    def test_minkowski_rotation_only_from_three_dimensions(self):
        assert "rotation" not in get_entry("minkowski2").fields
        assert "rotation" in get_entry("minkowski4").fields

    def test_every_example_field_evaluates_inside_its_box(self):
        for name in catalog_names():
            m = get_manifold(name)
            x = sample_base_points(m, 3)[0]
            geo = geometry_at(m, x)
            for field_name in get_entry(name).fields:
                value = example_field(m, field_name).value(geo)
                assert value.shape == (m.dimension,)
                assert np.all(np.isfinite(value))

    def test_signatures(self):
        for name, negative in (("sphere2", 0), ("minkowski4", 1), ("schwarzschild", 1)):
            m = get_manifold(name)
            x = sample_base_points(m, 1)[0]
            eigenvalues = np.linalg.eigvalsh(m.metric_at(x))
            assert int(np.sum(eigenvalues < 0)) == negative

    def test_polar_translation_is_cartesian_translation(self, polar):
        """d/dx written in (r, theta) at theta = pi/2 points along -d/dtheta / r."""
        Y = example_field(polar, "translation_x")
        geo = geometry_at(polar, [2.0, math.pi / 2])
        assert np.allclose(Y.value(geo), [0.0, -0.5])

    def test_describe(self):
        entries = {e["name"]: e for e in describe_catalog()}
        sphere = entries["sphere2"]
        assert sphere["coordinates"] == ["theta", "phi"]
        assert sphere["metric"] == [["1", "0"], ["0", "sin(x0)^2"]]
        assert "rotation_z" in sphere["fields"]
        assert entries["schwarzschild"]["parameters"] == {"M": 1.0}
        assert entries["euclidean3"]["fields"]["projective"] == ["x0^2", "x0*x1", "x0*x2"]
