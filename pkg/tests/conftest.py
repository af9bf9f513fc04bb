import numpy as np
import pytest

from usets import geometry as geo
from usets.core import ConditionalMap, JointVariable, VariableSignature


@pytest.fixture
def tetrahedron() -> geo.HPolytope:
    """The pairwise-but-not-totally-independent joint set on three variables."""
    return geo.polytope(
        [[1, 1, 1], [-1, -1, 1], [-1, 1, -1], [1, -1, -1]], [2, 0, 0, 0])


@pytest.fixture
def tetra_joint(tetrahedron) -> JointVariable:
    sigs = tuple(VariableSignature(f"x{i}", 1) for i in (1, 2, 3))
    return JointVariable(sigs, tetrahedron)


@pytest.fixture
def diamond_relation() -> geo.HPolytope:
    """The hourglass-diamond conditional relation over (x, y):
    y >= 2.5 - x, y <= 2.5 + x, y >= x - 2.5, y <= 7.5 - x."""
    return geo.polytope(
        [[-1, -1], [-1, 1], [1, -1], [1, 1]], [-2.5, 2.5, 2.5, 7.5])


@pytest.fixture
def diamond_map(diamond_relation) -> ConditionalMap:
    return ConditionalMap(
        VariableSignature("x", 1), VariableSignature("y", 1), diamond_relation)


@pytest.fixture
def diamond_joint(diamond_relation) -> JointVariable:
    sigs = (VariableSignature("x", 1), VariableSignature("y", 1))
    return JointVariable(sigs, diamond_relation)


@pytest.fixture
def unit_square() -> geo.Box:
    return geo.box([0, 0], [1, 1])


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: full acceptance-criteria checks")
