"""Heat semigroups and the positivity / sup-norm / Markov diagnostics."""
from dataclasses import dataclass

import numpy as np

from .errors import NegativeTime
from .linalg import as_sym, gen_sym_eig, sym_exp

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class SemigroupSample:
    t: float
    matrix: np.ndarray
    basis: str  # "matrix-direct" or "fem-lumped"


@dataclass(frozen=True)
class Check:
    """Outcome of one diagnostic.

    ``value`` is the measured quantity (most negative entry, largest absolute
    row sum); ``location`` the offending index, if any.
    """
    ok: bool
    value: float
    location: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def evolve(generator, t, mass=None, backend=None):
    """Sample ``exp(-t G)`` (matrix) or ``exp(-t M^{-1} K)`` (pencil, lumped M).

    For the pencil the nodal-basis matrix is assembled from the M-orthonormal
    eigenbasis ``V`` as ``V exp(-t lam) V^T M``.
    """
    if t < 0:
        raise NegativeTime(f"semigroup evaluated at negative time {t}")
    if mass is None:
        return SemigroupSample(float(t), sym_exp(-as_sym(generator), t, backend=backend),
                               "matrix-direct")
    M = as_sym(mass)
    if np.count_nonzero(M - np.diag(np.diag(M))):
        raise ValueError("pencil semigroups need a lumped (diagonal) mass matrix")
    if t == 0:
        return SemigroupSample(0.0, np.eye(M.shape[0]), "fem-lumped")
    eig = gen_sym_eig(generator, M, backend=backend)
    V = eig.vectors
    S = (V * np.exp(-t * eig.values)) @ (V.T * np.diag(M)[None, :])
    return SemigroupSample(float(t), S, "fem-lumped")


def check_positivity(sample, tol=DEFAULT_TOL):
    S = sample.matrix
    loc = np.unravel_index(np.argmin(S), S.shape)
    low = float(S[loc])
    if low >= -tol:
        return Check(True, low)
    return Check(False, low, tuple(int(i) for i in loc), f"entry {low:.6g} < -{tol:g}")


def check_linf_contractivity(sample, tol=DEFAULT_TOL):
    rows = np.abs(sample.matrix).sum(axis=1)
    i = int(np.argmax(rows))
    worst = float(rows[i])
    if worst <= 1.0 + tol:
        return Check(True, worst)
    return Check(False, worst, (i,), f"row {i} has absolute sum {worst:.6g} > 1")


def check_markov(sample, tol=DEFAULT_TOL):
    pos = check_positivity(sample, tol)
    con = check_linf_contractivity(sample, tol)
    if pos.ok and con.ok:
        return Check(True, pos.value)
    reasons = [c.reason for c in (pos, con) if not c.ok]
    return Check(False, pos.value, pos.location or con.location, "; ".join(reasons))
