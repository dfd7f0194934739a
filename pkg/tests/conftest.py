"""Pytest configuration and fixtures for tangent_lifts tests."""

import json

import numpy as np
import pytest

from tangent_lifts.bundle import PhasePoint
from tangent_lifts.catalog import example_field, get_manifold
from tangent_lifts.storage import MemoryStorage

SEED = 42


@pytest.fixture
def rng():
    """A fresh seeded generator per test, so tests do not depend on order."""
    return np.random.default_rng(SEED)


@pytest.fixture
def flat2():
    return get_manifold("euclidean2")


@pytest.fixture
def flat3():
    return get_manifold("euclidean3")


@pytest.fixture
def polar():
    return get_manifold("euclidean-polar")


@pytest.fixture
def sphere():
    return get_manifold("sphere2")


@pytest.fixture
def minkowski2():
    return get_manifold("minkowski2")


@pytest.fixture
def minkowski4():
    return get_manifold("minkowski4")


@pytest.fixture
def schwarzschild():
    return get_manifold("schwarzschild")


@pytest.fixture
def field_of():
    """example_field(m, name) as a fixture, for catalog example fields."""
    return example_field


@pytest.fixture
def storage():
    return MemoryStorage()


@pytest.fixture
def sphere_point():
    """(theta, phi) = (pi/4, 0), p = (1, 2)."""
    return PhasePoint.of([np.pi / 4, 0.0], [1.0, 2.0])


@pytest.fixture
def write_config(tmp_path):
    """Write a config document to a JSON file under tmp_path and return its path."""

    def write(doc, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return str(path)

    return write
