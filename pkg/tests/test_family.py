"""Families, branches, cutoffs, catalogs."""

import math

import numpy as np
import pytest

from symbif import equivariants as eqv
from symbif import family as fam
from symbif import rep_core as rc
from symbif.family import FamilySpec


def test_eval_trivial_and_perturbed():
    spec = FamilySpec(5, "odd")
    assert np.allclose(spec.eval(np.zeros(5), 0.7), 0.0)
    pert = FamilySpec(5, "perturbed-odd", eta=0.01)
    assert np.allclose(pert.eval(np.zeros(5), 0.0), -0.01 * rc.axis_unit(5, 1))


@pytest.mark.parametrize("k", range(3, 10))
def test_branch_residuals(k):
    spec = FamilySpec(k, "odd")
    for p in range(1, (k + 1) // 2):
        for sign in (+1, -1):
            for s in (1e-3, 0.05, 0.2):
                x, lam = fam.branch_point(k, p, sign, s)
                assert np.linalg.norm(spec.eval(x, lam)) < 1e-12


def test_branch_point_guards():
    with pytest.raises(ValueError):
        fam.branch_point(6, 3, +1, 0.1)  # half-block axis: pitchfork instead
    with pytest.raises(ValueError):
        fam.branch_point(5, 1, +1, -0.1)


def test_branch_scaling_example():
    x, lam = fam.branch_point(5, 1, +1, 0.1)
    assert abs(lam - 0.1) < 1e-15
    assert abs(np.linalg.norm(x) - 0.1 * math.sqrt(20) / 3.0) < 1e-15


@pytest.mark.parametrize("k", range(3, 10))
def test_branch_indices_and_radial_eigenvalue(k):
    spec = FamilySpec(k, "odd")
    for p in range(1, (k + 1) // 2):
        idx_f, rad_f = fam.branch_index(spec, p, +1, 0.1)
        idx_b, rad_b = fam.branch_index(spec, p, -1, 0.1)
        assert idx_f == p
        assert idx_b == k - p - 1
        assert idx_f + idx_b == k - 1
        assert abs(rad_f + 0.1) < 1e-12  # radial eigenvalue is exactly -lam
        assert abs(rad_b - 0.1) < 1e-12
        assert 1 <= idx_f <= k - 2 and 1 <= idx_b <= k - 2  # saddles throughout


def test_jacobian_symmetry_and_trace():
    rng = np.random.default_rng(0)
    spec = FamilySpec(5, "odd")
    for _ in range(50):
        x = rc.sumzero(rng.normal(size=5))
        lam = float(rng.normal())
        j = spec.jac(x, lam)
        assert np.abs(j - j.T).max() < 1e-10 * max(1.0, np.abs(j).max())
        assert abs(fam.jacobian_trace(spec, x, lam) - 4 * lam) < 1e-10
    x = rc.sumzero(rng.normal(size=5))
    assert abs(fam.jacobian_trace(spec, x, 0.0)) < 1e-12
    sigma = rng.permutation(5)
    assert abs(
        fam.jacobian_trace(spec, rc.permute(sigma, x), 0.3)
        - fam.jacobian_trace(spec, x, 0.3)
    ) < 1e-12
    # trace identity holds with the constant forcing too
    pert = FamilySpec(5, "perturbed-odd", eta=0.01)
    assert abs(fam.jacobian_trace(pert, x, 0.3) - 1.2) < 1e-10


def test_trace_eigenvalue_oracle():
    # independent oracle: the trace equals the sum of hyperplane eigenvalues
    spec = FamilySpec(7, "odd")
    rng = np.random.default_rng(1)
    x = rc.sumzero(rng.normal(size=7))
    b = rc.hyperplane_basis(7)
    eigs = np.linalg.eigvalsh(b.T @ spec.jac(x, 0.3) @ b)
    assert abs(eigs.sum() - 6 * 0.3) < 1e-10


def test_smooth_plateau():
    assert fam.smooth_plateau(0.5) == 1.0
    assert fam.smooth_plateau(2.5) == 0.0
    assert 0.0 < fam.smooth_plateau(1.5) < 1.0
    ts = np.linspace(-1, 3, 400)
    vals = [fam.smooth_plateau(t) for t in ts]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    # derivative consistency
    for t in (1.2, 1.5, 1.9, 0.3, 2.4):
        h = 1e-6
        fd = (fam.smooth_plateau(t + h) - fam.smooth_plateau(t - h)) / (2 * h)
        assert abs(fd - fam.smooth_plateau_deriv(t)) < 1e-7


def test_model_scales():
    lam0, r0 = fam.model_scales(6)
    assert abs(lam0 - 1.0 / 48.0) < 1e-15
    assert abs(fam.model_scales(4)[0] - 1.0 / 12.0) < 1e-15
    assert abs(r0 * r0 - lam0) < 1e-16
    with pytest.raises(ValueError):
        fam.model_scales(5)


def test_kappa_and_psi():
    # kappa is the smallest angle between two-block directions; brute force
    for k in (4, 6):
        dirs = fam._phase_zero_directions(k)
        best = math.pi
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                c = float(np.clip(dirs[i] @ dirs[j], -1, 1))
                best = min(best, math.acos(c))
        assert abs(best - fam.kappa(k)) < 1e-12
    k = 6
    tau = fam.kappa(k) / 100.0
    e = rc.axis_unit(k, 3)
    assert fam.bump_psi(k, e, tau) == 1.0
    basis = eqv.tangent_basis(e)
    w = basis[:, 0]
    near = math.cos(tau / 4) * e + math.sin(tau / 4) * w
    assert fam.bump_psi(k, near, tau) == 1.0
    mid = math.cos(5 * tau / 8) * e + math.sin(5 * tau / 8) * w
    assert 0.0 < fam.bump_psi(k, mid, tau) < 1.0
    far = math.cos(2 * tau) * e + math.sin(2 * tau) * w
    assert fam.bump_psi(k, far, tau) == 0.0
    with pytest.raises(ValueError):
        fam.bump_psi(k, e, fam.kappa(k))


def test_radial_cutoff_plateau_and_support():
    k = 6
    lam0, r0 = fam.model_scales(k)
    rng = np.random.default_rng(2)
    # inside the plateau the cutoff is the plain radial cubic
    for _ in range(20):
        x = rc.sumzero(rng.normal(size=k))
        x *= (0.4 * r0) / np.linalg.norm(x)
        lam = float(rng.uniform(-0.4 * lam0, 0.4 * lam0))
        assert np.allclose(fam.radial_cutoff_field(k, x, lam), eqv.cubic_t1(x), atol=1e-15)
    # outside the radius and parameter support, away from the axis cones
    count = 0
    for _ in range(200):
        x = rc.sumzero(rng.normal(size=k))
        x *= (1.5 * r0) / np.linalg.norm(x)
        lam = 1.5 * lam0 * (1 if rng.uniform() > 0.5 else -1)
        tau = fam.kappa(k) / 100.0
        if fam.bump_psi(k, x / np.linalg.norm(x), tau) == 0.0:
            count += 1
            assert np.allclose(fam.radial_cutoff_field(k, x, lam), 0.0, atol=1e-15)
    assert count >= 100


def test_even_model_matches_quadratic_outside_support():
    k = 6
    spec = FamilySpec(k, "even-minus")
    base = FamilySpec(k, "odd")
    lam0, r0 = fam.model_scales(k)
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 100:
        x = rc.sumzero(rng.normal(size=k))
        x *= rng.uniform(1.05, 3.0) * r0 / np.linalg.norm(x)
        lam = float(rng.choice([-1, 1]) * rng.uniform(1.05, 3.0) * lam0)
        if fam.bump_psi(k, x / np.linalg.norm(x), spec.tau) != 0.0:
            continue
        assert np.allclose(spec.eval(x, lam), base.eval(x, lam), atol=1e-14)
        checked += 1


def test_even_model_jacobian_fd():
    # chain-rule Jacobian of the cutoff model against finite differences,
    # sampled across plateau, shell and cone regions
    k = 4
    spec = FamilySpec(k, "even-minus", tau=fam.kappa(4) / 20.0)
    rng = np.random.default_rng(4)
    h = 1e-7
    basis = rc.hyperplane_basis(k)
    for r_scale in (0.3, 0.8, 1.3):
        for _ in range(6):
            x = rc.sumzero(rng.normal(size=k))
            x *= r_scale * spec.r0 / np.linalg.norm(x)
            lam = float(rng.uniform(-0.8, 0.8)) * spec.lam0
            j = spec.jac(x, lam)
            for i in range(k - 1):
                b = basis[:, i]
                col = (spec.eval(x + h * b, lam) - spec.eval(x - h * b, lam)) / (2 * h)
                assert np.linalg.norm(j @ b - col) < 2e-6, (r_scale, i)
            dl = (spec.eval(x, lam + h) - spec.eval(x, lam - h)) / (2 * h)
            assert np.linalg.norm(spec.dlam(x, lam) - dl) < 2e-6


def test_localized_forcing_jacobian_fd():
    spec = FamilySpec(5, "perturbed-odd", eta=0.005, eta0=0.01)
    rng = np.random.default_rng(5)
    h = 1e-7
    basis = rc.hyperplane_basis(5)
    for _ in range(12):
        x = rc.sumzero(rng.normal(size=5)) * spec.rho
        lam = float(rng.uniform(-1.2, 1.2)) * spec.rho
        j = spec.jac(x, lam)
        for i in range(4):
            b = basis[:, i]
            col = (spec.eval(x + h * b, lam) - spec.eval(x - h * b, lam)) / (2 * h)
            assert np.linalg.norm(j @ b - col) < 2e-6
        dl = (spec.eval(x, lam + h) - spec.eval(x, lam - h)) / (2 * h)
        assert np.linalg.norm(spec.dlam(x, lam) - dl) < 2e-6


@pytest.mark.parametrize("k", (4, 6))
def test_pitchfork_branch(k):
    spec = FamilySpec(k, "even-minus")
    _, r0 = fam.model_scales(k)
    for t in (0.0, 0.01, r0 / 2):
        for leg in (+1, -1):
            x, lam = fam.pitchfork_branch(k, -1, t, leg)
            assert abs(lam - t * t) < 1e-16
            assert np.linalg.norm(spec.eval(x, lam)) < 1e-12
    # index ell along the branch
    x, lam = fam.pitchfork_branch(k, -1, 0.01 if k == 6 else 0.05, +1)
    assert fam.hyperplane_index(spec, x, lam) == rc.ell(k)
    # subcritical twin
    plus = FamilySpec(k, "even-plus")
    x, lam = fam.pitchfork_branch(k, +1, 0.05, -1)
    assert lam == -0.05**2
    assert np.linalg.norm(plus.eval(x, lam)) < 1e-12


def test_cubic_backward_fold():
    assert abs(fam.cubic_backward_fold(6, 1, -1.0) - 16.0 / 120.0) < 1e-15
    assert abs(fam.cubic_backward_fold(6, 2, -1.0) - 4.0 / 192.0) < 1e-15
    # oracle: max of lam(u) = c_p u - beta u^2 over the backward side
    for k, p in ((6, 1), (6, 2), (8, 2)):
        q = k - p
        cp = (q - p) / math.sqrt(p * q * k)
        us = np.linspace(0, 5 * cp, 200001)
        lam_max = np.max(cp * us - us * us)  # beta = -1
        assert abs(lam_max - fam.cubic_backward_fold(k, p, -1.0)) < 1e-7
    with pytest.raises(ValueError):
        fam.cubic_backward_fold(6, 1, 0.5)
    # limit: strong cubic pulls the fold to zero
    assert fam.cubic_backward_fold(6, 1, -1e6) < 1e-6


def test_branches_in_box():
    assert fam.branches_in_box(5, 0.1)
    assert fam.branches_in_box(3, 1.0)
    assert fam.branches_in_box(6, 0.5)
    assert not fam.branches_in_box(6, 0.5, include_half_axis=True)
    assert fam.branches_in_box(6, 1.2, include_half_axis=True)
    with pytest.raises(ValueError):
        fam.branches_in_box(5, 0.5, include_half_axis=True)


def test_branching_pattern_odd():
    pat = fam.branching_pattern(FamilySpec(5, "odd"))
    assert pat.total_nontrivial == 30
    totals = pat.totals_by_sign_index()
    assert totals[(+1, 1)] == 5 and totals[(+1, 2)] == 10
    assert totals[(-1, 3)] == 5 and totals[(-1, 2)] == 10
    for k in range(3, 10, 2):
        pat = fam.branching_pattern(FamilySpec(k, "odd"))
        assert pat.total_nontrivial == 2**k - 2
        ellk = rc.ell(k)
        for r in pat.records:
            if r.sign > 0:
                assert r.index <= ellk
            else:
                assert r.index >= k - 1 - ellk


def test_branching_pattern_even_model():
    pat = fam.branching_pattern(FamilySpec(6, "even-minus"))
    assert pat.total_nontrivial == 2**6 - 2
    totals = pat.totals_by_sign_index()
    assert totals[(+1, 3)] == 20  # pitchfork legs, forward for the minus model
    sub = fam.branching_pattern(FamilySpec(6, "even-plus"))
    assert sub.totals_by_sign_index()[(-1, 3)] == 20
    with pytest.raises(ValueError):
        fam.branching_pattern(FamilySpec(6, "perturbed-even", eta=0.01))


def test_poincare_hopf_values():
    # oracle-decided values: each equilibrium contributes (-1)^index, and
    # the crossing count fixes the total at (-1)^ell * C(2 ell, ell)
    assert fam.poincare_hopf_sum(3, 0.01, -1.0) == -2
    assert fam.poincare_hopf_sum(5, 0.01, -1.0) == 6
    assert fam.poincare_hopf_sum(5, 0.01, 1.0) == 6


def test_spec_validation():
    with pytest.raises(ValueError):
        FamilySpec(5, "even-minus")
    with pytest.raises(ValueError):
        FamilySpec(5, "perturbed-odd", eta=0.0)
    with pytest.raises(ValueError):
        FamilySpec(5, "perturbed-odd", eta=0.02, eta0=0.01)
    with pytest.raises(ValueError):
        FamilySpec(5, "nonsense")


def test_potential_gradient_consistency():
    # the flow decreases the potential: grad(potential) = -field
    spec = FamilySpec(5, "perturbed-odd", eta=0.01)
    rng = np.random.default_rng(6)
    basis = rc.hyperplane_basis(5)
    x = rc.sumzero(rng.normal(size=5))
    lam = 0.3
    h = 1e-6
    g = np.zeros(5)
    for j in range(4):
        b = basis[:, j]
        g += (spec.potential(x + h * b, lam) - spec.potential(x - h * b, lam)) / (2 * h) * b
    assert np.linalg.norm(g + spec.eval(x, lam)) < 1e-6
