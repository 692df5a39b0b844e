import numpy as np
import pytest

from epeckit import (
    Game,
    LeaderProblem,
    ParametricLcp,
    Polyhedron,
    Polynomial,
    VariableLayout,
)
from epeckit.generators import cournot, pang_fukushima

COURNOT_TRIPLES = [(10, 1, 1, 3, 2), (1, 1, 1, 2, 1), (5, 0.5, 2, 4, 3)]


@pytest.fixture
def pf_original():
    return pang_fukushima("original")


@pytest.fixture
def pf_shared():
    return pang_fukushima("shared")


@pytest.fixture
def pf_quasi_minus():
    return pang_fukushima("quasi-minus")


@pytest.fixture
def pf_quasi_plus():
    return pang_fukushima("quasi-plus")


@pytest.fixture
def cournot_game():
    return cournot(10, 1, 1, 3, 2)


def make_ind_game():
    """Two leaders with y-free objectives whose x-parts admit a potential."""
    layout = VariableLayout(m=(1, 1), p=1)
    phi1 = Polynomial(4, {(2, 0, 0, 0): 0.5, (1, 1, 0, 0): 1.0, (1, 0, 0, 0): -1.0})
    phi2 = Polynomial(4, {(0, 2, 0, 0): 1.0, (1, 1, 0, 0): 1.0})
    unit = Polyhedron([[1.0], [-1.0]], [0.0, -1.0])
    free = Polyhedron(np.zeros((0, 1)), [])
    follower = ParametricLcp([[1.0]], [[1.0, 1.0]], [-1.0])
    return Game(
        leaders=(LeaderProblem(phi1, unit, free), LeaderProblem(phi2, unit, free)),
        follower=follower,
        formulation="ind",
        layout=layout,
    )


def pf_point(x1, x2, y1, y2):
    return ([np.array([x1]), np.array([x2])], [np.array([y1]), np.array([y2])])
