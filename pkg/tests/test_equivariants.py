"""Invariant/equivariant calculus: gradients, spectra, phase field."""

import math

import numpy as np
import pytest

from symbif import equivariants as eqv
from symbif import rep_core as rc


def fd_gradient(f, x, h=1e-6):
    """Central-difference gradient in an orthonormal hyperplane basis."""
    basis = rc.hyperplane_basis(x.size)
    g = np.zeros_like(x)
    for j in range(basis.shape[1]):
        b = basis[:, j]
        g += (f(x + h * b) - f(x - h * b)) / (2 * h) * b
    return g


def test_cubic_invariant_values():
    assert eqv.cubic_invariant(np.zeros(4)) == 0.0
    val = eqv.cubic_invariant(rc.axis_unit(3, 1))
    assert abs(val - (8 - 1 - 1) / 3.0 / 6**1.5) < 1e-15
    rng = np.random.default_rng(0)
    x = rc.sumzero(rng.normal(size=6))
    for _ in range(5):
        sigma = rng.permutation(6)
        assert abs(eqv.cubic_invariant(rc.permute(sigma, x)) - eqv.cubic_invariant(x)) < 1e-13


def test_quad_is_gradient_of_cubic():
    rng = np.random.default_rng(1)
    for _ in range(20):
        k = int(rng.integers(3, 9))
        x = rc.sumzero(rng.normal(size=k))
        q = eqv.quad_equivariant(x)
        g = fd_gradient(eqv.cubic_invariant, x)
        assert np.linalg.norm(q - g) < 1e-6 * max(1.0, np.linalg.norm(q))


def test_quad_axis_values():
    q = eqv.quad_equivariant(rc.axis_unit(5, 1))
    assert np.allclose(q, (3 / math.sqrt(20)) * rc.axis_unit(5, 1), atol=1e-14)
    assert np.allclose(eqv.quad_equivariant(rc.axis_unit(4, 2)), 0.0, atol=1e-15)
    # general axis eigenvalue (q - p)/sqrt(pqk)
    for k in range(3, 9):
        for p in range(1, k):
            e = rc.axis_unit(k, p)
            expect = (k - 2 * p) / math.sqrt(p * (k - p) * k)
            assert np.allclose(eqv.quad_equivariant(e), expect * e, atol=1e-14)


def test_bilinear_polarisation_and_symmetry():
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = rc.sumzero(rng.normal(size=5))
        y = rc.sumzero(rng.normal(size=5))
        b = eqv.bilinear_form(x, y)
        pol = 0.5 * (
            eqv.quad_equivariant(x + y)
            - eqv.quad_equivariant(x)
            - eqv.quad_equivariant(y)
        )
        assert np.allclose(b, pol, atol=1e-13)
        assert np.allclose(b, eqv.bilinear_form(y, x), atol=1e-15)
        assert np.allclose(eqv.bilinear_form(x, x), eqv.quad_equivariant(x), atol=1e-14)


def test_bilinear_transverse_scalar():
    # on the orthogonal complement of the distinguished axis the paired form
    # acts as a scalar of magnitude 1/sqrt(k(k-1)); the sign reflects the
    # chosen axis orientation
    for k in (5, 8):
        e1 = rc.axis_unit(k, 1)
        basis = eqv.tangent_basis(e1)
        coef = 1.0 / math.sqrt(k * (k - 1))
        for i in range(basis.shape[1]):
            w = basis[:, i]
            assert np.allclose(eqv.bilinear_form(e1, w), -coef * w, atol=1e-13)


def test_equivariance_of_all_maps():
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = int(rng.integers(3, 8))
        x = rc.sumzero(rng.normal(size=k))
        sigma = rng.permutation(k)
        for f in (eqv.quad_equivariant, eqv.cubic_t1, eqv.cubic_t2):
            assert np.allclose(
                rc.permute(sigma, f(x)), f(rc.permute(sigma, x)), atol=1e-12
            )
        u = x / np.linalg.norm(x)
        assert np.allclose(
            rc.permute(sigma, eqv.phase_field(u)),
            eqv.phase_field(rc.permute(sigma, u)),
            atol=1e-12,
        )


def test_euler_identity():
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = rc.sumzero(rng.normal(size=7))
        dq = eqv.quad_jacobian(x)
        assert np.linalg.norm(dq @ x - 2 * eqv.quad_equivariant(x)) < 1e-12


def test_cubic_equivariants_gradients():
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rc.sumzero(rng.normal(size=6))
        g1 = fd_gradient(lambda y: 0.25 * float(np.dot(y, y)) ** 2, x)
        assert np.linalg.norm(eqv.cubic_t1(x) - g1) < 1e-5 * max(1, np.linalg.norm(g1))
        g2 = fd_gradient(lambda y: 0.25 * float(np.sum(np.asarray(y) ** 4)), x)
        assert np.linalg.norm(eqv.cubic_t2(x) - g2) < 1e-5 * max(1, np.linalg.norm(g2))
    # analytic Jacobians against finite differences of the fields
    x = rc.sumzero(np.array([0.3, -0.7, 0.1, 0.9, -0.6]))
    h = 1e-7
    for f, jac in ((eqv.cubic_t1, eqv.cubic_t1_jacobian),
                   (eqv.cubic_t2, eqv.cubic_t2_jacobian),
                   (eqv.quad_equivariant, eqv.quad_jacobian)):
        j = jac(x)
        for i in range(5):
            e = np.zeros(5)
            e[i] = 1.0
            col = (f(x + h * e) - f(x - h * e)) / (2 * h)
            assert np.linalg.norm(j @ e - col) < 1e-6


def test_t2_axis_eigenvalues():
    assert abs(eqv.t2_axis_eigenvalue(6, 3) - 1 / 6) < 1e-15
    assert abs(eqv.t2_axis_eigenvalue(6, 1) - 0.7) < 1e-15
    e = rc.axis_unit(6, 2)
    assert np.allclose(eqv.cubic_t2(e), 0.25 * e, atol=1e-15)
    assert np.allclose(eqv.cubic_t1(e), e, atol=1e-15)
    for k in range(4, 21, 2):
        vals = [eqv.t2_axis_eigenvalue(k, p) for p in range(1, k // 2 + 1)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert abs(vals[-1] - 1.0 / k) < 1e-15


def test_cubic_params():
    par = eqv.CubicParams(a1=-1.0, a2=0.0)
    assert par.beta(6, 3) == -1.0
    assert par.generic_for(6)
    degenerate = eqv.CubicParams(a1=-1.0 / 6.0, a2=1.0)
    assert abs(degenerate.beta(6, 3)) < 1e-15
    assert not degenerate.generic_for(6)


def test_phase_field_zeros_and_tangency():
    for k in (3, 5, 6):
        for p in range(1, k):
            e = rc.axis_unit(k, p)
            assert np.linalg.norm(eqv.phase_field(e)) < 1e-14
            assert np.linalg.norm(eqv.phase_field(-e)) < 1e-14
    rng = np.random.default_rng(6)
    for _ in range(20):
        u = rc.sumzero(rng.normal(size=6))
        u /= np.linalg.norm(u)
        assert abs(np.dot(eqv.phase_field(u), u)) < 1e-13
    u = np.array([1.0, 0.0, -1.0]) / math.sqrt(2)
    assert np.linalg.norm(eqv.phase_field(u)) > 0.1
    with pytest.raises(ValueError):
        eqv.phase_field(np.array([1.0, 0.0, -1.0]))


@pytest.mark.parametrize("k", range(3, 13))
def test_phase_indices(k):
    for p in range(1, k):
        plus = eqv.phase_index(k, p)
        minus = eqv.phase_index(k, p, at_minus=True)
        assert plus == k - p - 1
        assert minus == p - 1
        assert plus + minus == k - 2


def test_phase_jacobian_matches_finite_difference():
    u = rc.axis_unit(6, 2)
    basis = eqv.tangent_basis(u)
    jac = basis.T @ eqv.phase_jacobian(u) @ basis
    h = 1e-6
    for i in range(basis.shape[1]):
        w = basis[:, i]
        up = (u + h * w) / np.linalg.norm(u + h * w)
        dn = (u - h * w) / np.linalg.norm(u - h * w)
        col = basis.T @ (eqv.phase_field(up) - eqv.phase_field(dn)) / (2 * h)
        assert np.linalg.norm(jac[:, i] - col) < 1e-5


def test_sphere_gradient_converges_to_axes():
    rng = np.random.default_rng(7)
    for k in (4, 5, 6):
        for _ in range(60):
            u0 = rng.normal(size=k)
            u = eqv.sphere_gradient_steps(k, u0, steps=600)
            assert len(rc.isotropy_blocks(u, tol=1e-5).blocks) == 2
