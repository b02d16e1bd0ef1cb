import numpy as np
import pytest
from hypothesis import given, strategies as st

from kvn import graph as gm
from kvn import quantum_graph as qg
from kvn.errors import NegativeTime
from kvn.semigroup import (SemigroupSample, check_linf_contractivity, check_markov,
                           check_positivity, evolve)

EDGE = np.array([[1.0, -1.0], [-1.0, 1.0]])


def test_discrete_laplacian_semigroup_is_markov():
    for t in (0.1, 1.0, 5.0):
        s = evolve(EDGE, t)
        assert s.basis == "matrix-direct"
        assert check_markov(s)
        np.testing.assert_allclose(s.matrix.sum(axis=1), 1.0, atol=1e-12)


def test_negative_generator_violates():
    s = evolve(-EDGE, 1.0)
    pos = check_positivity(s)
    assert not pos and pos.location is not None
    con = check_linf_contractivity(s)
    assert not con
    assert abs(con.value - np.exp(2.0)) <= 1e-10
    assert not check_markov(s)


def test_time_zero_and_negative():
    assert np.array_equal(evolve(EDGE, 0.0).matrix, np.eye(2))
    assert np.array_equal(evolve(EDGE, 0.0, mass=np.eye(2)).matrix, np.eye(2))
    with pytest.raises(NegativeTime):
        evolve(EDGE, -0.1)


def test_pencil_requires_lumped_mass():
    with pytest.raises(ValueError):
        evolve(EDGE, 1.0, mass=np.array([[2.0, 1.0], [1.0, 2.0]]))


def test_check_tolerance():
    s = SemigroupSample(1.0, np.array([[1.0, -1e-9], [0.0, 1.0]]), "matrix-direct")
    assert check_positivity(s, tol=1e-8)
    assert not check_positivity(s, tol=1e-10)


@pytest.mark.parametrize("graph", [gm.single_edge(), gm.star_graph(3)])
def test_kirchhoff_markov_krein_not(graph):
    mg = qg.MetricGraph(graph, 32)
    kirch = qg.assemble(mg, qg.VertexCondition.kirchhoff(graph), lumped=True)
    krein = qg.assemble(mg, qg.VertexCondition.krein(graph), lumped=True)
    fails = []
    for t in (0.1, 0.5, 1.0):
        assert check_markov(evolve(kirch.stiffness, t, mass=kirch.mass))
        fails.append(not check_positivity(evolve(krein.stiffness, t, mass=krein.mass)))
    assert any(fails)


@given(st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_pencil_semigroup_law(s, t):
    graph = gm.single_edge()
    f = qg.assemble(qg.MetricGraph(graph, 8), qg.VertexCondition.kirchhoff(graph), lumped=True)
    a = evolve(f.stiffness, s, mass=f.mass).matrix
    b = evolve(f.stiffness, t, mass=f.mass).matrix
    c = evolve(f.stiffness, s + t, mass=f.mass).matrix
    np.testing.assert_allclose(a @ b, c, atol=1e-10)
