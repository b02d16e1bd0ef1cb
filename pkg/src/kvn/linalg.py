"""Dense symmetric linear algebra: eigenproblems, exponentials, kernels.

All matrices are dense ``float64`` numpy arrays. Standard eigenproblems go
through the cyclic Jacobi kernel in :mod:`kvn._jacobi`; generalized pencils
``K v = lam M v`` are reduced to standard form with a Cholesky factor of M.
"""
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _jacobi
from ._accel import resolve_backend
from .errors import ConvergenceError, NotPositiveDefinite, TolTooCoarse

DEFAULT_KERNEL_TOL = 1e-8


@dataclass(frozen=True)
class EigDecomposition:
    values: np.ndarray
    vectors: np.ndarray | None


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with mass-orthonormal eigenvectors."""
    values: np.ndarray
    vectors: np.ndarray | None
    kernel_dim: int
    meta: dict = field(default_factory=dict, compare=False)

    def nonzero(self):
        return self.values[self.kernel_dim:]


def as_sym(A):
    """Square float copy of ``A`` symmetrized by averaging with its transpose."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    return 0.5 * (A + A.T)


def sym_eig(A, vectors=True, backend=None):
    A = as_sym(A)
    backend = resolve_backend(backend)
    values, vecs, sweeps = _jacobi.jacobi_eigh(A, backend=backend, want_vectors=vectors)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi did not converge in {_jacobi.MAX_SWEEPS} sweeps")
    order = np.argsort(values, kind="stable")
    return EigDecomposition(values[order], vecs[:, order] if vectors else None)


def cholesky(M):
    """Lower Cholesky factor, raising :class:`NotPositiveDefinite` on failure."""
    M = as_sym(M)
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("mass matrix is not positive definite") from exc


def gen_sym_eig(K, M, vectors=True, backend=None):
    """Solve ``K v = lam M v`` with M-orthonormal eigenvectors."""
    K = as_sym(K)
    M = as_sym(M)
    if K.shape != M.shape:
        raise ValueError(f"pencil shapes differ: {K.shape} vs {M.shape}")
    if np.count_nonzero(M - np.diag(np.diag(M))) == 0:
        d = np.diag(M)
        if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
            raise NotPositiveDefinite("diagonal mass matrix has a nonpositive entry")
        r = 1.0 / np.sqrt(d)
        C = K * r[:, None] * r[None, :]
        eig = sym_eig(C, vectors=vectors, backend=backend)
        vecs = eig.vectors * r[:, None] if vectors else None
        return EigDecomposition(eig.values, vecs)
    L = cholesky(M)
    X = scipy.linalg.solve_triangular(L, K, lower=True)
    C = scipy.linalg.solve_triangular(L, X.T, lower=True)
    eig = sym_eig(C, vectors=vectors, backend=backend)
    vecs = None
    if vectors:
        vecs = scipy.linalg.solve_triangular(L.T, eig.vectors, lower=False)
    return EigDecomposition(eig.values, vecs)


def sym_exp(A, t=1.0, backend=None):
    """``exp(t A)`` by spectral calculus; exactly the identity at ``t == 0``."""
    A = as_sym(A)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if t == 0:
        return np.eye(A.shape[0])
    eig = sym_eig(A, backend=backend)
    E = eig.vectors
    out = (E * np.exp(t * eig.values)) @ E.T
    return 0.5 * (out + out.T)


def kernel_tol(rel_tol=None):
    """Relative kernel threshold; ``KVN_KERNEL_TOL`` overrides the default."""
    if rel_tol is not None:
        return float(rel_tol)
    env = os.environ.get("KVN_KERNEL_TOL")
    return float(env) if env else DEFAULT_KERNEL_TOL


def kernel_count(values, rel_tol=None):
    """Number of eigenvalues counted as zero, with an ambiguity check.

    An eigenvalue is zero when ``|lam| <= rel_tol * max(1, |lam_max|)``. The
    decision is ambiguous, and :class:`TolTooCoarse` is raised, when some
    ``|lam|`` falls in the one-decade band ``(thresh / sqrt(10), thresh * sqrt(10))``
    around that threshold.
    """
    rel_tol = kernel_tol(rel_tol)
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    mags = np.abs(np.asarray(values, dtype=np.float64))
    top = float(mags.max()) if mags.size else 0.0
    thresh = rel_tol * max(1.0, top)
    band = np.sqrt(10.0)
    near = mags[(mags > thresh / band) & (mags < thresh * band)]
    if near.size:
        raise TolTooCoarse(
            f"eigenvalue {near[0]:.3e} lies within half a decade of the kernel "
            f"threshold {thresh:.3e}; pass a different rel_tol"
        )
    return int(np.count_nonzero(mags <= thresh))


def null_space(A, rel_tol=None, backend=None):
    """Dimension and orthonormal basis of the numerical kernel of ``A``."""
    eig = sym_eig(A, backend=backend)
    dim = kernel_count(eig.values, rel_tol)
    idx = np.argsort(np.abs(eig.values), kind="stable")[:dim]
    return dim, eig.vectors[:, np.sort(idx)]


def pencil_spectrum(K, M, k=None, rel_tol=None, vectors=True, backend=None):
    """Ascending spectrum of the pencil ``(K, M)`` with its kernel dimension."""
    eig = gen_sym_eig(K, M, vectors=vectors, backend=backend)
    dim = kernel_count(eig.values, rel_tol)
    values, vecs = eig.values, eig.vectors
    if k is not None:
        if k > values.size:
            raise ValueError(f"requested {k} eigenvalues of a pencil of order {values.size}")
        values = values[:k]
        vecs = vecs[:, :k] if vecs is not None else None
    return Spectrum(values, vecs, dim)
