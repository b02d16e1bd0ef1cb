"""Metric-graph Laplacians with vertex conditions ``d_nu u = Lambda u``.

Every edge ``e = (tail, head)`` is the interval ``(0, rho(e))`` meshed with
``m`` uniform P1 cells; the tail sits at 0, the head at ``rho(e)``. Continuity
at the vertices is built in by sharing one DOF per vertex.

DOF order: the ``|V|`` vertex values first (graph order), then the ``m - 1``
interior nodes of each edge in edge order.
"""
import os
from dataclasses import dataclass

import numpy as np

from . import fem1d
from .errors import ValidationError
from .graph import WeightedOrientedGraph, discrete_laplacian
from .krein import DiscretizedForm, form_spectrum, smallest_eigenvalue
from .linalg import as_sym

DEFAULT_MESH = 64
DEFAULT_KERNEL_TOL = 1e-6


def qg_kernel_tol(rel_tol=None):
    if rel_tol is not None:
        return float(rel_tol)
    env = os.environ.get("KVN_KERNEL_TOL")
    return float(env) if env else DEFAULT_KERNEL_TOL


@dataclass(frozen=True)
class MetricGraph:
    graph: WeightedOrientedGraph
    mesh_per_edge: int = DEFAULT_MESH

    def __post_init__(self):
        if int(self.mesh_per_edge) != self.mesh_per_edge or self.mesh_per_edge < 2:
            raise ValidationError(f"mesh_per_edge must be an integer >= 2, got {self.mesh_per_edge}")

    @property
    def n_dofs(self):
        g = self.graph
        return g.n_vertices + g.n_edges * (self.mesh_per_edge - 1)

    def steps(self):
        return np.asarray(self.graph.weights) / self.mesh_per_edge

    def edge_dofs(self, e):
        """Global DOF of every node ``x_0 .. x_m`` on edge ``e``."""
        g, m = self.graph, self.mesh_per_edge
        tails, heads = g.endpoints()
        start = g.n_vertices + e * (m - 1)
        return np.concatenate([[tails[e]], np.arange(start, start + m - 1), [heads[e]]])

    def trace_map(self):
        nv = self.graph.n_vertices
        T = np.zeros((nv, self.n_dofs))
        T[np.arange(nv), np.arange(nv)] = 1.0
        return T

    def dof_labels(self):
        labels = [f"v:{v}" for v in self.graph.vertices]
        for e, (t, h) in enumerate(self.graph.edges):
            labels += [f"e{e}:{j}" for j in range(1, self.mesh_per_edge)]
        return tuple(labels)

    def refined(self, factor=2):
        return MetricGraph(self.graph, self.mesh_per_edge * factor)


@dataclass(frozen=True)
class VertexCondition:
    kind: str
    lam: np.ndarray

    @classmethod
    def kirchhoff(cls, graph):
        return cls("kirchhoff", np.zeros((graph.n_vertices,) * 2))

    @classmethod
    def krein(cls, graph):
        return cls("krein", discrete_laplacian(graph, "conductance"))

    @classmethod
    def custom(cls, graph, lam):
        lam = np.asarray(lam, dtype=float)
        n = graph.n_vertices
        if lam.shape != (n, n):
            raise ValidationError(f"Lambda must be {n}x{n}, got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValidationError("Lambda has non-finite entries")
        if not np.allclose(lam, lam.T, rtol=0, atol=1e-12 * max(1.0, np.abs(lam).max())):
            raise ValidationError("Lambda must be symmetric")
        return cls("custom", as_sym(lam))


def assemble(mg, vc, lumped=False):
    """Discretized form of ``sum_e int |u'|^2 - sum Lambda_vw u(v) u(w)``."""
    g, m = mg.graph, mg.mesh_per_edge
    cells = []
    widths = []
    for e in range(g.n_edges):
        dofs = mg.edge_dofs(e)
        cells.append(np.column_stack([dofs[:-1], dofs[1:]]))
        widths.append(np.full(m, g.weights[e] / m))
    K, M, ML = fem1d.assemble_segments(mg.n_dofs, np.vstack(cells), np.concatenate(widths))
    T = mg.trace_map()
    if vc.kind != "kirchhoff":
        K = K - T.T @ vc.lam @ T
    return DiscretizedForm(as_sym(K), ML if lumped else M, T, mg.dof_labels(),
                           tuple(g.vertices))


def spectrum(mg, vc, k=None, lumped=False, rel_tol=None, vectors=True, backend=None):
    form = assemble(mg, vc, lumped=lumped)
    return form_spectrum(form, k=k, rel_tol=qg_kernel_tol(rel_tol), vectors=vectors,
                         backend=backend)


def kernel_dimension(mg, vc, rel_tol=None, backend=None):
    return spectrum(mg, vc, rel_tol=rel_tol, vectors=False, backend=backend).kernel_dim


def positivity_threshold_probe(mg, direction, eps, backend=None):
    """Smallest pencil eigenvalue for ``Lambda = Lambda_krein + eps * direction``.

    Negative for every SPD direction and ``eps > 0``: no admissible vertex
    matrix lies beyond the Krein one.
    """
    g = mg.graph
    lam = discrete_laplacian(g, "conductance") + eps * np.asarray(direction, dtype=float)
    return smallest_eigenvalue(assemble(mg, VertexCondition.custom(g, lam)), backend=backend)


def refine_and_estimate_order(mg, vc, k, rel_tol=None, lumped=False, backend=None):
    """Richardson order estimates from meshes ``m, 2m, 4m``.

    Returns ``{index: order}`` for the nonzero eigenvalues among the first ``k``
    (0-based indices; the kernel is detected on the finest mesh).
    """
    sps = [spectrum(mg.refined(f), vc, k=k, lumped=lumped, rel_tol=rel_tol,
                    vectors=False, backend=backend) for f in (1, 2, 4)]
    kd = sps[-1].kernel_dim
    lam = [s.values[kd:k] for s in sps]
    orders = fem1d.richardson_orders(*lam)
    return {kd + j: float(p) for j, p in enumerate(orders)}


def vertex_flux(mg, u):
    """Discrete ``d_nu u(v)``: one-sided derivatives, ``+`` at heads, ``-`` at tails."""
    g = mg.graph
    u = np.asarray(u, dtype=float)
    h = mg.steps()
    tails, heads = g.endpoints()
    flux = np.zeros(g.n_vertices)
    for e in range(g.n_edges):
        d = mg.edge_dofs(e)
        np.add.at(flux, heads[e], (u[d[-1]] - u[d[-2]]) / h[e])
        np.add.at(flux, tails[e], -(u[d[1]] - u[d[0]]) / h[e])
    return flux


def affine_kernel_basis(mg):
    """Edgewise-affine continuous functions, one per vertex (nodal hat of the graph)."""
    g, m = mg.graph, mg.mesh_per_edge
    B = np.zeros((mg.n_dofs, g.n_vertices))
    B[np.arange(g.n_vertices), np.arange(g.n_vertices)] = 1.0
    tails, heads = g.endpoints()
    s = np.arange(1, m) / m
    for e in range(g.n_edges):
        interior = mg.edge_dofs(e)[1:-1]
        B[interior, tails[e]] += 1.0 - s
        B[interior, heads[e]] += s
    return B
