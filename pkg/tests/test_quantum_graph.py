import numpy as np
import pytest
from hypothesis import given, strategies as st

from kvn import graph as gm
from kvn import quantum_graph as qg
from kvn.errors import DegenerateDifference, ValidationError
from kvn.linalg import gen_sym_eig

GRAPHS = {
    "edge": gm.single_edge(1.0),
    "p3": gm.path_graph(3, [1.0, 0.7]),
    "star3": gm.star_graph(3, [1.0, 0.8, 1.3]),
    "c4": gm.cycle_graph(4, [1.0, 0.5, 2.0, 1.5]),
}


@pytest.mark.parametrize("name", GRAPHS)
def test_kernel_dimensions(name):
    g = GRAPHS[name]
    mg = qg.MetricGraph(g, 32)
    assert qg.kernel_dimension(mg, qg.VertexCondition.krein(g)) == g.n_vertices
    assert qg.kernel_dimension(mg, qg.VertexCondition.kirchhoff(g)) == 1


def test_single_edge_neumann_spectrum():
    g = gm.single_edge()
    sp = qg.spectrum(qg.MetricGraph(g, 64), qg.VertexCondition.kirchhoff(g), k=3,
                     vectors=False)
    np.testing.assert_allclose(sp.values[1:], [np.pi**2, 4 * np.pi**2], rtol=2e-3)
    assert abs(sp.values[0]) < 1e-8


def test_affine_functions_span_krein_kernel():
    g = GRAPHS["star3"]
    mg = qg.MetricGraph(g, 16)
    form = qg.assemble(mg, qg.VertexCondition.krein(g))
    B = qg.affine_kernel_basis(mg)
    np.testing.assert_allclose(form.stiffness @ B, 0, atol=1e-10)
    # discrete flux of an affine function equals the conductance Laplacian of its vertex values
    vals = np.arange(1.0, 5.0)
    u = B @ vals
    lam = gm.discrete_laplacian(g, "conductance")
    np.testing.assert_allclose(qg.vertex_flux(mg, u), lam @ vals, atol=1e-10)


def test_lumped_and_consistent_close():
    g = GRAPHS["p3"]
    mg = qg.MetricGraph(g, 64)
    vc = qg.VertexCondition.kirchhoff(g)
    a = qg.spectrum(mg, vc, k=4, vectors=False).values
    b = qg.spectrum(mg, vc, k=4, lumped=True, vectors=False).values
    np.testing.assert_allclose(a[1:], b[1:], rtol=5e-3)


def test_refinement_order():
    g = GRAPHS["star3"]
    orders = qg.refine_and_estimate_order(qg.MetricGraph(g, 16), qg.VertexCondition.krein(g), 7)
    assert set(orders) == {4, 5, 6}
    assert all(1.7 <= p <= 2.3 for p in orders.values())


def test_degenerate_difference():
    # a two-cell edge already reproduces the zero mode exactly at every mesh
    g = gm.single_edge()
    with pytest.raises(DegenerateDifference):
        qg.refine_and_estimate_order(qg.MetricGraph(g, 2), qg.VertexCondition.kirchhoff(g), 2,
                                     rel_tol=1e-20)


@pytest.mark.parametrize("eps", [1e-3, 1e-2])
def test_probe_negative(eps):
    g = GRAPHS["p3"]
    mg = qg.MetricGraph(g, 32)
    assert qg.positivity_threshold_probe(mg, np.eye(3), eps) < 0


def test_custom_validation():
    g = GRAPHS["edge"]
    with pytest.raises(ValidationError):
        qg.VertexCondition.custom(g, np.eye(3))
    with pytest.raises(ValidationError):
        qg.VertexCondition.custom(g, [[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValidationError):
        qg.MetricGraph(g, 1)


@given(st.lists(st.floats(0.3, 3.0), min_size=4, max_size=4))
def test_cycle_krein_kernel_any_lengths(lengths):
    g = gm.cycle_graph(4, lengths)
    assert qg.kernel_dimension(qg.MetricGraph(g, 12), qg.VertexCondition.krein(g)) == 4


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_ordering_in_lambda_scale(s1, s2):
    lo, hi = sorted((s1, s2))
    g = GRAPHS["p3"]
    mg = qg.MetricGraph(g, 8)
    lam = gm.discrete_laplacian(g, "conductance")
    a = gen_sym_eig(*qg.assemble(mg, qg.VertexCondition.custom(g, hi * lam)).restricted(),
                    vectors=False).values
    b = gen_sym_eig(*qg.assemble(mg, qg.VertexCondition.custom(g, lo * lam)).restricted(),
                    vectors=False).values
    assert np.all(b - a >= -1e-9 * max(1.0, np.abs(b).max()))
