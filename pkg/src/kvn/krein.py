"""Form-level construction of Friedrichs and Krein-von Neumann extensions.

A :class:`DiscretizedForm` holds a stiffness and a mass matrix written in an
*ambient* coefficient space. ``domain`` (columns in ambient coordinates)
restricts the form to a subspace; ``None`` means the whole ambient space.

Given a strictly positive Friedrichs form on ``V_F`` and a basis of a
complement ``N`` (a discrete adjoint kernel), the Krein form on
``V_K = V_F + N`` is ``a_K(u, v) = a_F(Pu, Pv)`` where ``P`` is the component
projector onto ``V_F`` along ``N``.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import fem1d
from .errors import (KernelMismatch, NotStrictlyPositive, RankDeficient,
                     TolTooCoarse)
from .linalg import Spectrum, as_sym, gen_sym_eig, kernel_tol, null_space, pencil_spectrum


@dataclass(frozen=True)
class KreinDecomposition:
    vf_basis: np.ndarray
    n_basis: np.ndarray
    projector: np.ndarray


@dataclass(frozen=True)
class DiscretizedForm:
    stiffness: np.ndarray
    mass: np.ndarray
    trace_map: np.ndarray
    dof_labels: tuple = ()
    trace_labels: tuple = ()
    domain: np.ndarray | None = None
    decomposition: KreinDecomposition | None = None

    @property
    def n_ambient(self):
        return self.stiffness.shape[0]

    def domain_basis(self):
        return np.eye(self.n_ambient) if self.domain is None else self.domain

    def restricted(self):
        """Stiffness and mass restricted to ``domain`` (the solvable pencil)."""
        if self.domain is None:
            return self.stiffness, self.mass
        D = self.domain
        return as_sym(D.T @ self.stiffness @ D), as_sym(D.T @ self.mass @ D)

    def energy(self, u, v=None):
        u = np.asarray(u, dtype=float)
        v = u if v is None else np.asarray(v, dtype=float)
        return float(u @ self.stiffness @ v)


def form_spectrum(form, k=None, rel_tol=None, vectors=True, backend=None):
    """Spectrum of the form's pencil; eigenvectors returned in ambient coordinates."""
    K, M = form.restricted()
    sp = pencil_spectrum(K, M, k=k, rel_tol=rel_tol, vectors=vectors, backend=backend)
    if vectors and form.domain is not None:
        sp = replace(sp, vectors=form.domain @ sp.vectors)
    return sp


def _columns(n_basis, n):
    if n_basis is None:
        return np.zeros((n, 0))
    N = np.asarray(n_basis, dtype=float)
    if N.ndim == 1:
        N = N[:, None]
    if N.shape[0] != n:
        raise ValueError(f"n_basis has {N.shape[0]} rows, ambient space has {n}")
    return N


def krein_decomposition(form, n_basis, rel_tol=None):
    E = form.domain_basis()
    N = _columns(n_basis, form.n_ambient)
    B = np.hstack([E, N])
    if B.shape[1] > form.n_ambient:
        raise RankDeficient("V_F + N has more generators than the ambient dimension")
    gram = as_sym(B.T @ form.mass @ B)
    try:
        dim, _ = null_space(gram, rel_tol=rel_tol)
    except TolTooCoarse as exc:
        raise RankDeficient(f"sum V_F + N is numerically ambiguous: {exc}") from exc
    if dim:
        raise RankDeficient(f"sum V_F + N is not direct ({dim} dependent directions)")
    # M-weighted left inverse: exact coefficients for every vector in span(B)
    coeffs = np.linalg.solve(gram, B.T @ form.mass)
    P = E @ coeffs[: E.shape[1]]
    return KreinDecomposition(E, N, P)


def smallest_eigenvalue(form, backend=None):
    """Lowest pencil eigenvalue, without kernel detection."""
    K, M = form.restricted()
    return float(gen_sym_eig(K, M, vectors=False, backend=backend).values[0])


def krein_form(friedrichs, n_basis, rel_tol=None, backend=None):
    """Krein-von Neumann form ``a_F(P., P.)`` on ``V_F + span(n_basis)``.

    The Friedrichs pencil must be strictly positive; otherwise
    :class:`NotStrictlyPositive` is raised and a structure-specific
    construction has to be used instead.
    """
    values = form_spectrum(friedrichs, vectors=False, backend=backend).values
    thresh = kernel_tol(rel_tol) * max(1.0, abs(values[-1]))
    if values[0] <= thresh:
        raise NotStrictlyPositive(
            f"smallest Friedrichs eigenvalue {values[0]:.3e} <= {thresh:.3e}"
        )
    dec = krein_decomposition(friedrichs, n_basis, rel_tol=rel_tol)
    P = dec.projector
    KK = as_sym(P.T @ friedrichs.stiffness @ P)
    B = np.hstack([dec.vf_basis, dec.n_basis])
    domain = None if B.shape[1] == friedrichs.n_ambient else B
    return replace(friedrichs, stiffness=KK, domain=domain, decomposition=dec)


def reduced_spectrum(krein, kernel_dim, k=None, rel_tol=None, backend=None):
    """Nonzero part of the Krein spectrum (the reduced extension)."""
    sp = form_spectrum(krein, rel_tol=rel_tol, backend=backend)
    if sp.kernel_dim != kernel_dim:
        raise KernelMismatch(f"detected kernel dimension {sp.kernel_dim}, expected {kernel_dim}")
    values = sp.values[kernel_dim:]
    vecs = sp.vectors[:, kernel_dim:]
    if k is not None:
        values, vecs = values[:k], vecs[:, :k]
    return Spectrum(values, vecs, 0)


def royden_decompose(form, u, variant="harmonic", rel_tol=None):
    """Split ``u = u0 + h`` with zero-trace ``u0``.

    ``harmonic``: ``a(w, h) = 0`` for every zero-trace ``w``.
    ``one_harmonic``: the same with the form ``a + (.|.)``.
    """
    u = np.asarray(u, dtype=float)
    if variant == "harmonic":
        A = form.stiffness
    elif variant == "one_harmonic":
        A = form.stiffness + form.mass
    else:
        raise ValueError(f"unknown variant {variant!r}")
    T = np.asarray(form.trace_map, dtype=float)
    _, Z = null_space(T.T @ T, rel_tol=rel_tol)
    c = np.linalg.solve(as_sym(Z.T @ A @ Z), Z.T @ (A @ u))
    u0 = Z @ c
    return u0, u - u0


def minimality_probe(form, Q, eps, backend=None):
    """Smallest eigenvalue after lowering the form by ``eps * T^T Q T``."""
    T = np.asarray(form.trace_map, dtype=float)
    lowered = as_sym(form.stiffness - eps * (T.T @ np.asarray(Q, dtype=float) @ T))
    return smallest_eigenvalue(replace(form, stiffness=lowered), backend=backend)


def ordering_margins(lower, upper):
    """``upper_j - lower_j`` over the common index range (index-aligned from the bottom)."""
    n = min(len(lower), len(upper))
    return np.asarray(upper[:n], dtype=float) - np.asarray(lower[:n], dtype=float)


def interval_friedrichs_form(m, length=1.0):
    """Dirichlet Laplacian on (0, length): P1 on all nodes, domain = interior nodes."""
    K, M, _ = fem1d.interval_matrices(m, length)
    T = np.zeros((2, m + 1))
    T[0, 0] = T[1, m] = 1.0
    labels = tuple(f"x{j}" for j in range(m + 1))
    return DiscretizedForm(K, M, T, labels, ("x=0", f"x={length:g}"),
                           domain=np.eye(m + 1)[:, 1:m])


def harmonic_basis(m, length=1.0):
    """Nodal interpolants of ``1`` and ``x``: the discrete harmonic functions."""
    x = fem1d.nodes(m, length)
    return np.column_stack([np.ones_like(x), x])


def interval_krein_form(m, length=1.0, backend=None):
    return krein_form(interval_friedrichs_form(m, length), harmonic_basis(m, length),
                      backend=backend)
