import math

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, strategies as st

from kvn import wentzell as wz
from kvn.errors import InvalidParams
from kvn.krein import form_spectrum

PI2 = math.pi**2


def secular_oracle(eta2, k):
    """Eigenvalues of -u'' = lam u, d_nu u + eta2 u = lam u at 0 and 1 (brentq)."""
    even = lambda m: -m * math.sin(m / 2) + (eta2 - m * m) * math.cos(m / 2)  # noqa: E731
    odd = lambda m: m * math.cos(m / 2) + (eta2 - m * m) * math.sin(m / 2)  # noqa: E731
    roots = []
    x = np.arange(1e-6, 40, 1e-3)
    for f in (even, odd):
        v = np.array([f(t) for t in x])
        for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
            roots.append(scipy.optimize.brentq(f, x[i], x[i + 1], xtol=1e-15))
    return np.sort(np.array(roots) ** 2)[:k]


@pytest.mark.parametrize("eta2", [0.5, 1.0, 4.0])
def test_friedrichs_against_secular_oracle(eta2):
    p = wz.WentzellParams(eta2)
    fem = form_spectrum(wz.assemble_wentzell_friedrichs(p, 64), vectors=False).values[:4]
    np.testing.assert_allclose(fem, secular_oracle(eta2, 4), rtol=5e-3)


def test_friedrichs_examples():
    assert wz.friedrichs_smallest(wz.WentzellParams(1.0), 64) > 0.1
    big = form_spectrum(wz.assemble_wentzell_friedrichs(wz.WentzellParams(1e6), 64),
                        vectors=False).values[:3]
    np.testing.assert_allclose(big, PI2 * np.array([1, 4, 9]), rtol=1e-2)
    form = wz.assemble_wentzell_friedrichs(wz.WentzellParams(2.5), 16)
    const = np.r_[np.ones(17), 1.0, 1.0]
    assert abs(form.energy(const) - 5.0) < 1e-12


def test_adjoint_kernel_basis():
    N = wz.adjoint_kernel_basis(wz.WentzellParams(1.0), 32)
    np.testing.assert_allclose(N[-2:, 0], [0, 0], atol=1e-12)
    np.testing.assert_allclose(N[-2:, 1], [1, -1], atol=1e-10)
    np.testing.assert_allclose(wz.conormal_derivative(32, np.linspace(0, 1, 33)), [-1, 1])
    N4 = wz.adjoint_kernel_basis(wz.WentzellParams(4.0), 32)
    np.testing.assert_allclose(N4[-2:, 1], [0.25, -0.25], atol=1e-10)


@pytest.mark.parametrize("eta2", [0.5, 1.0, 4.0])
def test_krein_kernel_is_the_adjoint_kernel(eta2):
    p = wz.WentzellParams(eta2)
    kf = wz.assemble_wentzell_krein(p, 64)
    sp = form_spectrum(kf, vectors=False)
    assert sp.kernel_dim == 2
    N = wz.adjoint_kernel_basis(p, 64)
    scale = np.abs(kf.stiffness).max()
    assert np.abs(kf.stiffness @ N).max() <= 1e-8 * scale


def test_restriction_consistency():
    p = wz.WentzellParams(1.0)
    kf = wz.assemble_wentzell_krein(p, 32)
    fr = wz.assemble_wentzell_friedrichs(p, 32)
    rng = np.random.default_rng(4)
    for _ in range(5):
        v = wz.coupling_map(32) @ np.r_[0.0, rng.standard_normal(31), 0.0]
        assert abs(kf.energy(v) - fr.energy(v)) <= 1e-9 * max(1.0, fr.energy(v))


@pytest.mark.parametrize("eps", [1e-3, 1e-2])
def test_minimality_probe(eps):
    assert wz.wentzell_minimality_probe(wz.WentzellParams(1.0), 64, eps) < 0


def test_boundary_identity_is_first_order():
    p = wz.WentzellParams(1.0)
    r1 = wz.boundary_identity_residual(p, 64, k=3).max()
    r2 = wz.boundary_identity_residual(p, 128, k=3).max()
    assert r2 < 0.6 * r1
    assert r1 < 0.1


@pytest.mark.parametrize("eta2", [0.5, 1.0, 4.0])
def test_compare_stable_under_refinement(eta2):
    for m in (32, 64):
        rep = wz.wentzell_compare(wz.WentzellParams(eta2), m, 5)
        assert rep.ok, [c for c in rep.checks if not c.ok]
        assert rep.kernel_dim == 2


def test_invalid_params():
    with pytest.raises(InvalidParams):
        wz.WentzellParams(0.0)
    with pytest.raises(InvalidParams):
        wz.WentzellParams(1.0, eta1=-1.0)
    with pytest.raises(InvalidParams):
        wz.assemble_wentzell_friedrichs(wz.WentzellParams(1.0), 4)
    with pytest.raises(ValueError):
        wz.wentzell_compare(wz.WentzellParams(1.0), 8, 10)


def test_eta1_is_inert():
    a = wz.assemble_wentzell_krein(wz.WentzellParams(1.0, eta1=0.0), 16)
    b = wz.assemble_wentzell_krein(wz.WentzellParams(1.0, eta1=3.0), 16)
    np.testing.assert_array_equal(a.stiffness, b.stiffness)


@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0))
def test_smallest_eigenvalue_monotone_in_eta2(a, b):
    lo, hi = sorted((a, b))
    assert wz.friedrichs_smallest(wz.WentzellParams(lo), 16) <= \
        wz.friedrichs_smallest(wz.WentzellParams(hi), 16) + 1e-12
