"""Finite weighted oriented graphs and their discrete Laplacians."""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ParseError, ValidationError

_GRAPH_KEYS = {"vertices", "edges"}
_EDGE_KEYS = {"tail", "head", "weight"}


@dataclass(frozen=True)
class WeightedOrientedGraph:
    """Simple oriented graph with strictly positive edge weights.

    Edges are ``(tail, head)`` pairs of vertex names; ``weights[i]`` belongs to
    ``edges[i]``. Vertex and edge order is the construction order and fixes
    every matrix index downstream.
    """
    vertices: tuple
    edges: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        _validate(self)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def index(self):
        return {v: i for i, v in enumerate(self.vertices)}

    def endpoints(self):
        """Integer ``(tail, head)`` index arrays."""
        idx = self.index
        tails = np.array([idx[t] for t, _ in self.edges], dtype=np.int64)
        heads = np.array([idx[h] for _, h in self.edges], dtype=np.int64)
        return tails, heads

    def with_weights(self, weights):
        return WeightedOrientedGraph(self.vertices, self.edges, weights)

    def to_dict(self):
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"tail": t, "head": h, "weight": w}
                for (t, h), w in zip(self.edges, self.weights)
            ],
        }


def _validate(g):
    if not g.vertices:
        raise ValidationError("graph has no vertices")
    if len(set(g.vertices)) != len(g.vertices):
        raise ValidationError("duplicate vertex identifiers")
    if len(g.weights) != len(g.edges):
        raise ValidationError("one weight per edge required")
    known = set(g.vertices)
    seen = set()
    for (tail, head), w in zip(g.edges, g.weights):
        for end in (tail, head):
            if end not in known:
                raise ValidationError(f"edge endpoint {end!r} is not a declared vertex")
        if tail == head:
            raise ValidationError(f"self-loop at vertex {tail!r}")
        if (head, tail) in seen:
            raise ValidationError(f"anti-parallel pair ({tail!r}, {head!r}) and ({head!r}, {tail!r})")
        if (tail, head) in seen:
            raise ValidationError(f"duplicate edge ({tail!r}, {head!r})")
        seen.add((tail, head))
        if not (np.isfinite(w) and w > 0):
            raise ValidationError(f"nonpositive or non-finite weight {w!r} on edge ({tail!r}, {head!r})")
    touched = {v for e in g.edges for v in e}
    isolated = [v for v in g.vertices if v not in touched]
    if isolated:
        raise ValidationError(f"isolated vertex {isolated[0]!r}")


def graph_from_dict(data):
    if not isinstance(data, dict):
        raise ParseError("graph document must be a JSON object")
    unknown = set(data) - _GRAPH_KEYS
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)}")
    if "vertices" not in data or "edges" not in data:
        raise ParseError("graph document needs 'vertices' and 'edges'")
    vertices, raw_edges = data["vertices"], data["edges"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise ParseError("'vertices' must be a list of strings")
    if not isinstance(raw_edges, list):
        raise ParseError("'edges' must be a list")
    edges, weights = [], []
    for i, e in enumerate(raw_edges):
        if not isinstance(e, dict):
            raise ParseError(f"edge {i} is not an object")
        unknown = set(e) - _EDGE_KEYS
        if unknown:
            raise ParseError(f"edge {i}: unknown keys {sorted(unknown)}")
        if "tail" not in e or "head" not in e:
            raise ParseError(f"edge {i}: 'tail' and 'head' are required")
        w = e.get("weight", 1.0)
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise ParseError(f"edge {i}: weight must be a number")
        edges.append((e["tail"], e["head"]))
        weights.append(float(w))
    return WeightedOrientedGraph(tuple(vertices), tuple(edges), tuple(weights))


def load_graph(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read graph file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return graph_from_dict(data)


@dataclass(frozen=True)
class IncidenceMatrices:
    full: np.ndarray
    positive_part: np.ndarray
    negative_part: np.ndarray


def incidence(g):
    """Oriented incidence matrix: +1 at the head (terminal), -1 at the tail."""
    tails, heads = g.endpoints()
    cols = np.arange(g.n_edges)
    plus = np.zeros((g.n_vertices, g.n_edges))
    minus = np.zeros((g.n_vertices, g.n_edges))
    plus[heads, cols] = 1.0
    minus[tails, cols] = 1.0
    return IncidenceMatrices(plus - minus, plus, minus)


def discrete_laplacian(g, mode="resistance"):
    """``I diag(rho) I^T`` (resistance) or ``I diag(1/rho) I^T`` (conductance)."""
    rho = np.asarray(g.weights)
    if mode == "resistance":
        w = rho
    elif mode == "conductance":
        w = 1.0 / rho
    else:
        raise ValueError(f"mode must be 'resistance' or 'conductance', got {mode!r}")
    inc = incidence(g).full
    return (inc * w) @ inc.T


def degree(g):
    inc = incidence(g).full
    deg = np.abs(inc) @ np.asarray(g.weights)
    return dict(zip(g.vertices, deg.tolist()))


def n_components(g):
    tails, heads = g.endpoints()
    adj = csr_matrix((np.ones(g.n_edges), (tails, heads)), shape=(g.n_vertices,) * 2)
    count, _ = connected_components(adj, directed=False)
    return int(count)


def is_connected(g):
    return n_components(g) == 1


# Small named graphs used by tests, the CLI defaults and the benchmark.

def single_edge(length=1.0):
    return WeightedOrientedGraph(("v0", "v1"), (("v0", "v1"),), (length,))


def path_graph(n=3, lengths=None):
    vs = tuple(f"v{i}" for i in range(n))
    es = tuple((vs[i], vs[i + 1]) for i in range(n - 1))
    return WeightedOrientedGraph(vs, es, lengths or (1.0,) * (n - 1))


def star_graph(leaves=3, lengths=None):
    vs = ("c",) + tuple(f"x{i}" for i in range(leaves))
    es = tuple(("c", v) for v in vs[1:])
    return WeightedOrientedGraph(vs, es, lengths or (1.0,) * leaves)


def cycle_graph(n=4, lengths=None):
    vs = tuple(f"v{i}" for i in range(n))
    es = tuple((vs[i], vs[(i + 1) % n]) for i in range(n))
    return WeightedOrientedGraph(vs, es, lengths or (1.0,) * n)


def complete_graph(n=4, lengths=None):
    vs = tuple(f"v{i}" for i in range(n))
    es = tuple((vs[i], vs[j]) for i in range(n) for j in range(i + 1, n))
    return WeightedOrientedGraph(vs, es, lengths or (1.0,) * len(es))
