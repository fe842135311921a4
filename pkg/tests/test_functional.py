import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from conftest import random_function, smooth_random
from nehari_nodal import (DiscreteFunction, EnergyFunctional, Nonlinearity, build_interval_mesh,
                          build_rect_mesh, diffusion_flux, diffusion_jacobian,
                          diffusion_jacobian_eigs, ellipticity_bounds_check, lambda_1p)
from nehari_nodal.errors import ConvergenceError, IncompatibleFunctionError
from nehari_nodal.functional import (c_beta, laplace_stiffness, read_coordinate_text,
                                     write_coordinate_text)

NL = Nonlinearity(3.0, 4.0, 0.0, 1.0)


def test_hat_energy_parts():
    mesh = build_interval_mesh(2)
    fn = EnergyFunctional(mesh, NL)
    parts = fn.energy(0.0, [0.0, 1.0, 0.0])
    assert parts.dirichlet2 == pytest.approx(4.0, rel=1e-14)
    assert parts.dirichletp == pytest.approx(8.0, rel=1e-14)
    # int of hat^4 over (0,1) is 1/5, divided by q
    assert parts.potential == pytest.approx(0.2 / 4, rel=1e-14)
    assert parts.J == pytest.approx(8.0 / 3 - 0.05, rel=1e-14)


def test_energy_against_dense_quadrature(rng):
    mesh = build_interval_mesh(64)
    nl = Nonlinearity(3.0, 4.0, 0.0, 2.0)
    fn = EnergyFunctional(mesh, nl)
    x, w = np.polynomial.legendre.leggauss(32)
    s, w = 0.5 * (x + 1), 0.5 * w
    for _ in range(10):
        c = random_function(fn, rng)
        h = np.diff(mesh.vertices[:, 0])
        slopes = np.diff(c) / h
        a, b = c[:-1], c[1:]
        vq = a[:, None] * (1 - s) + b[:, None] * s
        pot = float(np.sum(h[:, None] * w * nl.F(vq)))
        parts = fn.energy(0.7, c)
        assert parts.potential == pytest.approx(pot, rel=1e-6)
        assert parts.dirichletp == pytest.approx(float(h @ np.abs(slopes) ** 3), rel=1e-12)
        assert parts.dirichlet2 == pytest.approx(float(h @ slopes ** 2), rel=1e-12)


def test_gamma_is_gradient_dot_v(fn64, rng):
    for eps in (0.0, 0.4):
        c = random_function(fn64, rng)
        assert fn64.gamma(eps, c) == pytest.approx(fn64.gradient(eps, c) @ c[fn64.mesh.interior], rel=1e-10)


def test_p_homogeneity_of_dirichlet_term(fn2d, rng):
    c = random_function(fn2d, rng)
    for t in (0.5, 2.0, 7.0):
        d2, dp = fn2d.gradient_integrals(t * c)
        d2_1, dp_1 = fn2d.gradient_integrals(c)
        assert d2 == pytest.approx(t ** 2 * d2_1, rel=1e-12)
        assert dp == pytest.approx(t ** 3 * dp_1, rel=1e-12)


@pytest.mark.parametrize("which", ["1d", "2d"])
def test_gradient_finite_difference(which, fn64, fn2d, rng):
    fn = fn64 if which == "1d" else fn2d
    c = fn.full(smooth_random(fn.mesh, rng)[fn.mesh.interior])
    g = fn.gradient(0.2, c)
    e = np.zeros_like(c)
    for k, i in enumerate(fn.mesh.interior[::7]):
        e[:] = 0
        e[i] = 1e-6
        fd = (fn.J(0.2, c + e) - fn.J(0.2, c - e)) / 2e-6
        assert abs(fd - g[np.searchsorted(fn.mesh.interior, i)]) <= 1e-6 * np.max(np.abs(g))


def test_hessian_symmetric_and_matches_second_variation(fn2d, rng):
    c = random_function(fn2d, rng)
    H = fn2d.hessian(0.3, c)
    assert abs(H - H.T).max() <= 1e-14 * abs(H).max()
    phi = random_function(fn2d, rng)
    psi = random_function(fn2d, rng)
    inner = fn2d.mesh.interior
    assert fn2d.second_variation(0.3, c, phi, psi) == pytest.approx(phi[inner] @ H @ psi[inner], rel=1e-10)


def test_hessian_on_flat_patch_is_finite():
    mesh = build_interval_mesh(8)
    fn = EnergyFunctional(mesh, NL)
    c = np.zeros(9)
    c[3:6] = 1.0                        # zero gradient on elements 3 and 4
    H = fn.hessian(0.0, c).toarray()
    assert np.all(np.isfinite(H))


def test_stiffness_is_laplacian():
    mesh = build_interval_mesh(4)
    G = laplace_stiffness(mesh).toarray()
    np.testing.assert_allclose(G, 4 * np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]]), rtol=1e-14)


def test_dual_norm_of_stiffness_image(fn2d, rng):
    x = rng.standard_normal(len(fn2d.mesh.interior))
    r = fn2d.stiffness @ x
    assert fn2d.dual_norm(r) == pytest.approx(np.sqrt(x @ r), rel=1e-10)


def test_discrete_function_validation():
    mesh = build_interval_mesh(4)
    with pytest.raises(IncompatibleFunctionError):
        DiscreteFunction(mesh, np.ones(3))
    with pytest.raises(IncompatibleFunctionError):
        DiscreteFunction(mesh, np.ones(5))
    fn = EnergyFunctional(mesh, NL)
    with pytest.raises(IncompatibleFunctionError):
        fn.J(0.0, DiscreteFunction(build_interval_mesh(4), np.zeros(5)))
    v = DiscreteFunction.interpolate(mesh, lambda x: np.sin(np.pi * x[:, 0]))
    np.testing.assert_allclose((2 * v - v).coeffs, v.coeffs)


def test_coordinate_text_roundtrip(fn64, rng):
    H = fn64.hessian(0.1, random_function(fn64, rng))
    text = write_coordinate_text(H)
    assert text.count("\n") == H.nnz
    H2 = read_coordinate_text(text, H.shape)
    assert abs(H2 - H).max() == 0.0


# -- diffusion operator ----------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.floats(-2, 2), st.lists(st.floats(-50, 50), min_size=1, max_size=3),
       st.sampled_from([2.5, 3.0, 4.0]))
def test_jacobian_spectrum_closed_form(eps, z, p):
    ev = np.linalg.eigvalsh(diffusion_jacobian(eps, z, p))
    ref = diffusion_jacobian_eigs(eps, z, p)
    assert np.max(np.abs(ev - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_jacobian_is_derivative_of_flux(rng):
    for p in (2.5, 3.0, 4.0):
        z = rng.standard_normal(3)
        D = diffusion_jacobian(0.3, z, p)
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1e-6
            fd = (diffusion_flux(0.3, z + e, p) - diffusion_flux(0.3, z - e, p)) / 2e-6
            np.testing.assert_allclose(fd, D[:, k], rtol=1e-7, atol=1e-9)


def test_jacobian_at_zero():
    np.testing.assert_array_equal(diffusion_jacobian_eigs(0.5, [0.0, 0.0], 3), [0.25, 0.25])


def test_c_beta():
    assert c_beta(0.5) == 1.0
    assert c_beta(2.0) == 0.5


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0, 6.0])
def test_ellipticity_sandwich_with_p_dependent_upper_constant(p, rng):
    for _ in range(500):
        z = rng.standard_normal(2) * 10 ** rng.uniform(-2, 2)
        zeta = rng.standard_normal(2)
        eps = rng.uniform(-1, 1)
        assert ellipticity_bounds_check(eps, z, zeta, p, Gamma=2 * (p - 1))


def test_ellipticity_upper_constant_two_fails_for_p4():
    z = np.array([1.0, 0.0])
    assert not ellipticity_bounds_check(0.0, z, z, 4.0, Gamma=2.0)


# -- first eigenvalue ------------------------------------------------------------

def _p1_generalized_oracle(n):
    h = 1.0 / n
    m = n - 1
    K = (np.diag(np.full(m, 2.0)) - np.diag(np.ones(m - 1), 1) - np.diag(np.ones(m - 1), -1)) / h
    M = (np.diag(np.full(m, 4.0)) + np.diag(np.ones(m - 1), 1) + np.diag(np.ones(m - 1), -1)) * h / 6
    return sla.eigh(K, M, eigvals_only=True, subset_by_index=(0, 0))[0]


def test_lambda_p2_matches_generalized_eigenproblem():
    est = lambda_1p(build_interval_mesh(128), 2.0)
    assert est.lam == pytest.approx(_p1_generalized_oracle(128), rel=1e-8)


def test_lambda_p2_square():
    est = lambda_1p(build_rect_mesh(32, 32), 2.0)
    assert est.lam == pytest.approx(2 * np.pi ** 2, rel=1e-2)
    assert est.lam > 2 * np.pi ** 2


def test_lambda_p3_closed_form():
    p = 3.0
    exact = (p - 1) * (2 * np.pi / (p * np.sin(np.pi / p))) ** p
    assert lambda_1p(build_interval_mesh(256), p).lam == pytest.approx(exact, rel=1e-3)


@pytest.mark.parametrize("p", [3.0, 4.0])
def test_lambda_domain_scaling(p):
    a = lambda_1p(build_interval_mesh(128), p).lam
    b = lambda_1p(build_interval_mesh(128, 0.0, 2.0), p).lam
    assert b / a == pytest.approx(2.0 ** -p, rel=1e-8)


def test_lambda_minimizer_is_one_signed():
    est = lambda_1p(build_interval_mesh(64), 3.0)
    inner = est.minimizer.interior_values
    assert np.all(inner > 0) or np.all(inner < 0)


def test_lambda_budget_exhausted():
    with pytest.raises(ConvergenceError) as info:
        lambda_1p(build_rect_mesh(16, 16), 3.0, max_iter=2)
    assert info.value.best is not None


def test_lambda_rejects_p_below_two():
    with pytest.raises(ValueError):
        lambda_1p(build_interval_mesh(8), 1.5)
