"""Bulk-boundary operators on L2(0,1) x C^2 with a damped dynamic boundary.

Ambient coordinates are ``(u_0, ..., u_m, f_0, f_1)``: the P1 nodal values of
the bulk function followed by the two boundary values. The Friedrichs form
couples ``f = (u_0, u_m)``; the Krein form is built on the full ambient space
as ``V_F + N`` with ``N`` spanned by the pairs ``(h, -d_nu h / eta2)`` for
``h`` in {1, x}.

In one dimension the boundary Laplace-Beltrami operator vanishes, so
``eta1`` never enters the matrices.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from . import fem1d
from .errors import InvalidParams, NotStrictlyPositive
from .krein import (DiscretizedForm, form_spectrum, harmonic_basis, krein_form,
                    minimality_probe, ordering_margins, smallest_eigenvalue)
from .linalg import gen_sym_eig

MIN_MESH = 8
KERNEL_DIM = 2


@dataclass(frozen=True)
class WentzellParams:
    eta2: float = 1.0
    eta1: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.eta2) or self.eta2 <= 0:
            raise InvalidParams(
                f"eta2 must be strictly positive (got {self.eta2}); the boundary damping "
                "is what makes the Friedrichs pencil strictly positive"
            )
        if not math.isfinite(self.eta1) or self.eta1 < 0:
            raise InvalidParams(f"eta1 must be >= 0, got {self.eta1}")


def _check_mesh(m):
    if int(m) != m or m < MIN_MESH:
        raise InvalidParams(f"mesh must be an integer >= {MIN_MESH}, got {m}")
    return int(m)


def _ambient(params, m):
    K, M, _ = fem1d.interval_matrices(m)
    n = m + 3
    Ka = np.zeros((n, n))
    Ma = np.zeros((n, n))
    Ka[: m + 1, : m + 1] = K
    Ma[: m + 1, : m + 1] = M
    Ka[m + 1, m + 1] = Ka[m + 2, m + 2] = params.eta2
    Ma[m + 1, m + 1] = Ma[m + 2, m + 2] = 1.0
    T = np.zeros((2, n))
    T[0, m + 1] = T[1, m + 2] = 1.0
    labels = tuple(f"x{j}" for j in range(m + 1)) + ("f0", "f1")
    return Ka, Ma, T, labels, K


def coupling_map(m):
    """Columns of the Friedrichs domain: ``u -> (u, u_0, u_m)``."""
    E = np.zeros((m + 3, m + 1))
    E[: m + 1] = np.eye(m + 1)
    E[m + 1, 0] = E[m + 2, m] = 1.0
    return E


def assemble_wentzell_friedrichs(params, m):
    m = _check_mesh(m)
    Ka, Ma, T, labels, _ = _ambient(params, m)
    return DiscretizedForm(Ka, Ma, T, labels, ("f0", "f1"), domain=coupling_map(m))


def conormal_derivative(m, h):
    """Discrete ``d_nu h`` at (0, 1): the boundary rows of the stiffness residual."""
    K, _, _ = fem1d.interval_matrices(m)
    r = K @ np.asarray(h, dtype=float)
    return np.array([r[0], r[-1]])


def adjoint_kernel_basis(params, m):
    """``N`` as ambient columns ``(h, -d_nu h / eta2)`` for ``h`` in {1, x}."""
    m = _check_mesh(m)
    H = harmonic_basis(m)
    N = np.zeros((m + 3, H.shape[1]))
    for j in range(H.shape[1]):
        N[: m + 1, j] = H[:, j]
        N[m + 1:, j] = -conormal_derivative(m, H[:, j]) / params.eta2
    return N


def assemble_wentzell_krein(params, m, backend=None):
    friedrichs = assemble_wentzell_friedrichs(params, m)
    try:
        return krein_form(friedrichs, adjoint_kernel_basis(params, m), backend=backend)
    except NotStrictlyPositive as exc:  # pragma: no cover - excluded by eta2 > 0
        raise AssertionError(f"Friedrichs pencil not strictly positive for eta2 > 0: {exc}") from exc


def wentzell_minimality_probe(params, m, eps, backend=None):
    """Smallest eigenvalue of the Krein form lowered by ``eps`` times the boundary mass."""
    return minimality_probe(assemble_wentzell_krein(params, m, backend=backend),
                            np.eye(2), eps, backend=backend)


def boundary_identity_residual(params, m, k=5, backend=None):
    """``|d_nu u + eta2 u - lam u|`` at both ends for the first ``k`` Friedrichs eigenpairs.

    Eigenvectors are scaled to unit sup norm of the bulk part. Returns an array
    of shape ``(k, 2)``; it vanishes like O(h).
    """
    form = assemble_wentzell_friedrichs(params, m)
    K, M = form.restricted()
    eig = gen_sym_eig(K, M, backend=backend)
    out = np.zeros((k, 2))
    for j in range(k):
        u = eig.vectors[:, j]
        u = u / np.abs(u).max()
        dn = conormal_derivative(m, u)
        ends = np.array([u[0], u[-1]])
        out[j] = np.abs(dn + params.eta2 * ends - eig.values[j] * ends)
    return out


@dataclass(frozen=True)
class Verdict:
    name: str
    ok: bool
    margins: np.ndarray

    @property
    def min_margin(self):
        return float(self.margins.min()) if self.margins.size else math.inf


@dataclass(frozen=True)
class WentzellReport:
    params: WentzellParams
    mesh: int
    friedrichs: np.ndarray
    krein: np.ndarray
    reduced: np.ndarray
    kernel_dim: int
    checks: tuple

    @property
    def ok(self):
        return all(c.ok for c in self.checks)


def wentzell_compare(params, m, k, rel_tol=None, backend=None, slack=1e-9):
    """Index-aligned ordering ``lam_j(K) <= lam_j(F)`` and dominance ``lam_j(red K) >= lam_j(F)``.

    ``slack`` is a relative allowance on each margin for round-off.
    """
    m = _check_mesh(m)
    if k < 1 or k + KERNEL_DIM > m - 1:
        raise ValueError(f"k must lie in [1, {m - 1 - KERNEL_DIM}] for mesh {m}")
    fr = form_spectrum(assemble_wentzell_friedrichs(params, m), vectors=False,
                       rel_tol=rel_tol, backend=backend).values
    kr_sp = form_spectrum(assemble_wentzell_krein(params, m, backend=backend), vectors=False,
                          rel_tol=rel_tol, backend=backend)
    kr = kr_sp.values
    red = kr[kr_sp.kernel_dim:]
    order = ordering_margins(kr[:k], fr[:k])
    dom = ordering_margins(fr[:k], red[:k])
    tol = slack * max(1.0, float(np.abs(fr[:k]).max()))
    checks = (
        Verdict("friedrichs_positive", bool(fr[0] > 0), np.array([fr[0]])),
        Verdict("krein_kernel_dim", kr_sp.kernel_dim == KERNEL_DIM,
                np.array([float(kr_sp.kernel_dim)])),
        Verdict("krein_below_friedrichs", bool(np.all(order >= -tol)), order),
        Verdict("reduced_krein_dominates", bool(np.all(dom >= -tol)), dom),
    )
    return WentzellReport(params, m, fr[:k], kr[:k], red[:k], kr_sp.kernel_dim, checks)


def friedrichs_smallest(params, m, backend=None):
    return smallest_eigenvalue(assemble_wentzell_friedrichs(params, m), backend=backend)


def zero_boundary_restriction(form, m):
    """Krein form restricted to bulk vectors with zero boundary values (for checks)."""
    E = coupling_map(m)[:, 1:m]
    return replace(form, domain=E)
