"""Piecewise-linear (P1) finite elements on uniform 1D meshes."""
import numpy as np

from .errors import DegenerateDifference


def element_matrices(h):
    """Local stiffness, consistent mass and lumped mass of one cell of width h."""
    k = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
    m = np.array([[2.0, 1.0], [1.0, 2.0]]) * (h / 6.0)
    ml = np.eye(2) * (h / 2.0)
    return k, m, ml


def assemble_segments(n_dofs, cells, h):
    """Scatter-add P1 cells into global matrices.

    ``cells`` is an ``(n_cells, 2)`` integer array of global DOF indices and
    ``h`` the per-cell width (scalar or array). Returns ``(K, M, M_lumped)``.
    """
    cells = np.asarray(cells, dtype=np.int64)
    h = np.broadcast_to(np.asarray(h, dtype=np.float64), (cells.shape[0],))
    K = np.zeros((n_dofs, n_dofs))
    M = np.zeros((n_dofs, n_dofs))
    ML = np.zeros((n_dofs, n_dofs))
    ones = np.array([[1.0, -1.0], [-1.0, 1.0]])
    cons = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    rows = np.repeat(cells, 2, axis=1)
    cols = np.tile(cells, (1, 2))
    np.add.at(K, (rows, cols), (ones.ravel()[None, :] / h[:, None]))
    np.add.at(M, (rows, cols), (cons.ravel()[None, :] * h[:, None]))
    diag = np.concatenate([cells[:, 0], cells[:, 1]])
    np.add.at(ML, (diag, diag), np.concatenate([h, h]) / 2.0)
    return K, M, ML


def interval_matrices(m, length=1.0):
    """Global P1 matrices on ``[0, length]`` with ``m`` cells, nodes in order."""
    if m < 1:
        raise ValueError("need at least one cell")
    cells = np.column_stack([np.arange(m), np.arange(1, m + 1)])
    return assemble_segments(m + 1, cells, length / m)


def nodes(m, length=1.0):
    return np.linspace(0.0, length, m + 1)


def richardson_orders(coarse, mid, fine):
    """Observed orders ``log2(|l_h - l_h/2| / |l_h/2 - l_h/4|)`` per index.

    Raises :class:`DegenerateDifference` when a difference is already at
    round-off, since the ratio is then meaningless.
    """
    coarse, mid, fine = (np.asarray(v, dtype=float) for v in (coarse, mid, fine))
    d1 = np.abs(coarse - mid)
    d2 = np.abs(mid - fine)
    floor = 1e-13 * np.maximum(1.0, np.abs(fine))
    bad = np.nonzero(np.minimum(d1, d2) < floor)[0]
    if bad.size:
        j = int(bad[0])
        raise DegenerateDifference(
            f"eigenvalue {j}: successive differences {d1[j]:.2e}, {d2[j]:.2e} already at round-off"
        )
    return np.log2(d1 / d2)
