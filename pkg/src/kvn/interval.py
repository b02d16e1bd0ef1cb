"""Exact spectra of -d^2/dx^2 on (0, 1) under classical boundary conditions.

Eigenvalues come from secular equations. Problems that are symmetric about
x = 1/2 (Robin on both ends, the Krein interval operator) are split into
even modes ``cos(mu (x - 1/2))`` and odd modes ``sin(mu (x - 1/2))``, so every
secular factor has simple, well separated roots. Negative eigenvalues
``-kappa^2`` use the hyperbolic counterparts. Zero eigenvalues are never
root-found; they are emitted from the known kernels.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import fem1d
from .errors import RootBracketFailure, ValidationError
from .krein import (DiscretizedForm, form_spectrum, interval_friedrichs_form,
                    interval_krein_form)

KINDS = ("dirichlet", "neumann", "robin", "mixed", "krein")
SCAN_STEP = math.pi / 16
MAX_WINDOW = 1e6


@dataclass(frozen=True)
class IntervalOperatorSpec:
    kind: str
    q: float = 0.0
    dirichlet_end: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "dirichlet_end", frozenset(self.dirichlet_end))
        if self.kind == "robin" and not math.isfinite(self.q):
            raise ValidationError("robin needs a finite q")
        if self.kind == "mixed" and self.dirichlet_end not in (frozenset({0}), frozenset({1})):
            raise ValidationError("mixed needs dirichlet_end equal to {0} or {1}")


@dataclass(frozen=True)
class SecularRoot:
    mu_or_kappa: float
    lam: float
    multiplicity: int = 1
    branch: str = "oscillatory"  # or "hyperbolic", "zero"
    mode: str = ""
    residual: float = 0.0


# Secular factors: name -> (f, df). Oscillatory ones take mu, hyperbolic kappa.

def _sin(mu):
    return math.sin(mu), math.cos(mu)


def _cos(mu):
    return math.cos(mu), -math.sin(mu)


def _krein_even(mu):
    return math.sin(mu / 2), 0.5 * math.cos(mu / 2)


def _krein_odd(mu):
    # 2 sin(mu/2) - mu cos(mu/2); series below 1e-2 avoids cancellation
    if mu < 1e-2:
        return mu**3 / 12 - mu**5 / 480, mu**2 / 4 - mu**4 / 96
    s, c = math.sin(mu / 2), math.cos(mu / 2)
    return 2 * s - mu * c, 0.5 * mu * s


def _robin_factors(q):
    def even(mu):
        s, c = math.sin(mu / 2), math.cos(mu / 2)
        return q * c - mu * s, -0.5 * q * s - s - 0.5 * mu * c

    # odd factors: series below 1e-2, the two terms cancel near q = -2
    c0, c2, c4 = 1 + q / 2, 1 / 8 + q / 48, 1 / 384 + q / 3840

    def odd(mu):
        if mu < 1e-2:
            return c0 - c2 * mu**2 + c4 * mu**4, -2 * c2 * mu + 4 * c4 * mu**3
        s, c = math.sin(mu / 2), math.cos(mu / 2)
        return c + q * s / mu, -0.5 * s + q * (0.5 * mu * c - s) / mu**2

    def even_h(k):
        sh, ch = math.sinh(k / 2), math.cosh(k / 2)
        return k * sh + q * ch, sh + 0.5 * k * ch + 0.5 * q * sh

    def odd_h(k):
        if k < 1e-2:
            return c0 + c2 * k**2 + c4 * k**4, 2 * c2 * k + 4 * c4 * k**3
        sh, ch = math.sinh(k / 2), math.cosh(k / 2)
        return ch + q * sh / k, 0.5 * sh + q * (0.5 * k * ch - sh) / k**2

    osc = {"even": even, "odd": odd}
    hyp = {"even": even_h, "odd": odd_h} if q < 0 else {}
    return osc, hyp


def secular_factors(spec):
    """``(oscillatory, hyperbolic, zero_modes)`` for the operator."""
    kind = spec.kind
    if kind == "dirichlet":
        return {"sin": _sin}, {}, ()
    if kind == "neumann":
        return {"sin": _sin}, {}, ("const",)
    if kind == "mixed":
        return {"cos": _cos}, {}, ()
    if kind == "krein":
        return {"even": _krein_even, "odd": _krein_odd}, {}, ("const", "odd")
    q = float(spec.q)
    osc, hyp = _robin_factors(q)
    zeros = ()
    if q == 0.0:
        zeros = ("const",)
    elif q == -2.0:
        zeros = ("odd",)
    return osc, hyp, zeros


def secular_function(spec, mu):
    """Unfactored secular function (zero at every positive ``sqrt(lam)``)."""
    if spec.kind in ("dirichlet", "neumann"):
        return math.sin(mu)
    if spec.kind == "mixed":
        return math.cos(mu)
    if spec.kind == "krein":
        return 2 - 2 * math.cos(mu) - mu * math.sin(mu)
    q = spec.q
    return (q * q - mu * mu) * math.sin(mu) + 2 * q * mu * math.cos(mu)


def _bisect_newton(f, a, b, fa):
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        fm = f(mid)[0]
        if fm == 0.0:
            a = b = mid
            break
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    x = 0.5 * (a + b)
    fx, dfx = f(x)
    for _ in range(3):
        if dfx == 0.0 or fx == 0.0:
            break
        step = x - fx / dfx
        if not (a - 1e-300 <= step <= b + 1e-300) and abs(step - x) > 4e-16 * abs(x):
            break
        fs, dfs = f(step)
        if abs(fs) >= abs(fx):
            break
        x, fx, dfx = step, fs, dfs
    return x, abs(fx)


def _scan(f, window):
    fine = np.geomspace(1e-8, SCAN_STEP, 24)[:-1]
    grid = np.concatenate([fine, np.arange(SCAN_STEP, window + SCAN_STEP / 2, SCAN_STEP)])
    vals = np.array([f(x)[0] for x in grid])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(_bisect_newton(f, grid[i], grid[i + 1], vals[i]))
    for i in np.nonzero(vals[1:] == 0.0)[0]:
        roots.append((grid[i + 1], 0.0))
    return roots


def exact_spectrum(spec, k):
    """Distinct eigenvalues covering the first ``k`` (counted with multiplicity)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    osc, hyp, zeros = secular_factors(spec)
    found = []
    if zeros:
        found.append(SecularRoot(0.0, 0.0, len(zeros), "zero", "+".join(zeros), 0.0))
    if hyp:
        h_window = 4.0 + 2.0 * abs(spec.q)
        for mode, f in hyp.items():
            for kappa, res in _scan(f, h_window):
                found.append(SecularRoot(kappa, -kappa * kappa, 1, "hyperbolic", mode, res))
    window = (k + 3) * math.pi
    while True:
        roots = list(found)
        for mode, f in osc.items():
            for mu, res in _scan(f, window):
                roots.append(SecularRoot(mu, mu * mu, 1, "oscillatory", mode, res))
        roots.sort(key=lambda r: r.lam)
        if sum(r.multiplicity for r in roots) >= k:
            break
        window *= 2
        if window > MAX_WINDOW:
            raise RootBracketFailure(f"fewer than {k} roots bracketed below mu = {MAX_WINDOW:g}")
    out, count = [], 0
    for r in roots:
        if count >= k:
            break
        out.append(r)
        count += r.multiplicity
    return out


def exact_eigenvalues(spec, k):
    """First ``k`` eigenvalues as a flat ascending array."""
    vals = [r.lam for r in exact_spectrum(spec, k) for _ in range(r.multiplicity)]
    return np.array(vals[:k])


def eigenfunctions(spec, root):
    """``(u, du)`` callables spanning the eigenspace of ``root``."""
    w = root.mu_or_kappa
    c = lambda x: x - 0.5  # noqa: E731
    if root.branch == "zero":
        funcs = []
        for mode in root.mode.split("+"):
            if mode == "const":
                funcs.append((lambda x: np.ones_like(np.asarray(x, float)),
                              lambda x: np.zeros_like(np.asarray(x, float))))
            else:
                funcs.append((lambda x: c(np.asarray(x, float)),
                              lambda x: np.ones_like(np.asarray(x, float))))
        return funcs
    if root.branch == "hyperbolic":
        if root.mode == "even":
            return [(lambda x: np.cosh(w * c(x)), lambda x: w * np.sinh(w * c(x)))]
        return [(lambda x: np.sinh(w * c(x)), lambda x: w * np.cosh(w * c(x)))]
    if root.mode == "even":
        return [(lambda x: np.cos(w * c(x)), lambda x: -w * np.sin(w * c(x)))]
    if root.mode == "odd":
        return [(lambda x: np.sin(w * c(x)), lambda x: w * np.cos(w * c(x)))]
    if spec.kind == "dirichlet" or (spec.kind == "mixed" and 0 in spec.dirichlet_end):
        return [(lambda x: np.sin(w * np.asarray(x)), lambda x: w * np.cos(w * np.asarray(x)))]
    return [(lambda x: np.cos(w * np.asarray(x)), lambda x: -w * np.sin(w * np.asarray(x)))]


def boundary_residual(spec, u, du):
    """Residuals of the two boundary conditions for a candidate eigenfunction."""
    u0, u1, d0, d1 = float(u(0.0)), float(u(1.0)), float(du(0.0)), float(du(1.0))
    if spec.kind == "dirichlet":
        return np.array([u0, u1])
    if spec.kind == "neumann":
        return np.array([d0, d1])
    if spec.kind == "robin":
        return np.array([-d0 + spec.q * u0, d1 + spec.q * u1])
    if spec.kind == "mixed":
        return np.array([u0, d1]) if 0 in spec.dirichlet_end else np.array([d0, u1])
    jump = u1 - u0
    return np.array([d0 - jump, d1 - jump])


def robin_chain(q, k):
    """Eigenvalue table ``[-q, neumann, q, dirichlet]`` of shape ``(4, k)``."""
    specs = [IntervalOperatorSpec("robin", q=-q), IntervalOperatorSpec("neumann"),
             IntervalOperatorSpec("robin", q=q), IntervalOperatorSpec("dirichlet")]
    return np.array([exact_eigenvalues(s, k) for s in specs])


def robin_ordering_check(q, k):
    if q < 0:
        raise ValueError("q must be nonnegative")
    table = robin_chain(q, k)
    return bool(np.all(np.diff(table, axis=0) >= 0.0))


def dtn_interval(length=1.0):
    """Dirichlet-to-Neumann matrix on the boundary ``(0, length)``.

    Maps ``(f(0), f(L))`` to the outward conormal derivative of the harmonic
    (affine) extension; positive semidefinite, ``(DtN f | f) = int |u'|^2``.
    """
    out = np.zeros((2, 2))
    for j, f in enumerate(np.eye(2)):
        slope = (f[1] - f[0]) / length
        out[:, j] = (-slope, slope)
    return out


def fem_form(spec, m):
    """P1 discretization of the operator on a uniform ``m``-cell mesh."""
    if spec.kind == "dirichlet":
        return interval_friedrichs_form(m)
    if spec.kind == "krein":
        return interval_krein_form(m)
    K, M, _ = fem1d.interval_matrices(m)
    T = np.zeros((2, m + 1))
    T[0, 0] = T[1, m] = 1.0
    labels = tuple(f"x{j}" for j in range(m + 1))
    domain = None
    if spec.kind == "robin":
        K = K + spec.q * (T.T @ T)
    elif spec.kind == "mixed":
        drop = 0 if 0 in spec.dirichlet_end else m
        domain = np.delete(np.eye(m + 1), drop, axis=1)
    return DiscretizedForm(K, M, T, labels, ("x=0", "x=1"), domain=domain)


def fem_orders(spec, m, k, rel_tol=1e-6):
    """Richardson orders of the P1 eigenvalues on meshes ``m, 2m, 4m``.

    Returns ``{index: order}`` for the nonzero eigenvalues among the first ``k``.
    """
    sps = [form_spectrum(fem_form(spec, m * f), vectors=False, rel_tol=rel_tol) for f in (1, 2, 4)]
    kd = sps[-1].kernel_dim
    orders = fem1d.richardson_orders(*(s.values[kd:k] for s in sps))
    return {kd + j: float(p) for j, p in enumerate(orders)}
