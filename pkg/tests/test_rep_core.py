"""Geometry of axes, planes and charts."""

import math
from itertools import combinations

import numpy as np
import pytest

from symbif import rep_core as rc


def test_axis_unit_small_cases_exact():
    assert np.allclose(rc.axis_unit(3, 1) * math.sqrt(6), [2, -1, -1])
    assert np.allclose(rc.axis_unit(4, 2), [0.5, 0.5, -0.5, -0.5])


@pytest.mark.parametrize("k", range(3, 11))
def test_axis_unit_norm_and_sum(k):
    for p in range(1, k):
        e = rc.axis_unit(k, p)
        assert abs(e.sum()) < 1e-12
        assert abs(np.linalg.norm(e) - 1.0) < 1e-12


def test_axis_unit_rejects_bad_p():
    with pytest.raises(ValueError):
        rc.axis_unit(5, 0)
    with pytest.raises(ValueError):
        rc.axis_unit(5, 5)


def test_permute_identity_and_swap():
    x = rc.axis_unit(3, 1)
    assert np.allclose(rc.permute(np.arange(3), x), x)
    swapped = rc.permute(np.array([1, 0, 2]), x)
    assert np.allclose(swapped * math.sqrt(6), [-1, 2, -1])


def test_permute_preserves_norm_and_blocks():
    rng = np.random.default_rng(0)
    for _ in range(20):
        k = int(rng.integers(3, 9))
        x = rc.sumzero(rng.normal(size=k))
        sigma = rng.permutation(k)
        y = rc.permute(sigma, x)
        assert abs(np.linalg.norm(y) - np.linalg.norm(x)) < 1e-12
        assert abs(y.sum()) < 1e-12
    # same isotropy signature along the orbit of a two-block point
    e = rc.axis_unit(6, 2)
    for _ in range(10):
        sigma = rng.permutation(6)
        assert rc.isotropy_blocks(rc.permute(sigma, e)).blocks == (2, 4)


def test_enumerate_axes_counts():
    assert len(rc.enumerate_axes(3)) == 3
    assert len(rc.enumerate_axes(5)) == 15
    counts = rc.axis_class_counts(6)
    assert counts[3] == 10  # equal-block axes identified with their negatives
    for k in range(3, 13):
        total = sum(rc.axis_class_counts(k).values())
        assert total == 2 ** (k - 1) - 1
        if k <= 10:
            axes = rc.enumerate_axes(k)
            assert len(axes) == total
            assert len(set(axes)) == total


def test_enumerate_axes_guard():
    with pytest.raises(ValueError):
        rc.enumerate_axes(25)
    assert sum(rc.axis_class_counts(40).values()) == 2**39 - 1


def test_axis_canonical_orientation():
    axis, sign = rc.Axis.canonical(5, (3, 4))
    assert axis.members == (3, 4) and sign == +1
    # a block larger than half flips to its complement
    axis, sign = rc.Axis.canonical(5, (0, 1, 2))
    assert axis.members == (3, 4) and sign == -1
    # equal blocks: lexicographically smaller one wins
    axis, sign = rc.Axis.canonical(4, (2, 3))
    assert axis.members == (0, 1) and sign == -1


def test_axis_from_point_round_trip():
    for k, members in ((5, (1, 3)), (6, (0, 2, 4)), (7, (2,))):
        e = rc.block_unit(k, members)
        axis, sign = rc.Axis.from_point(e)
        assert sign * axis.direction() @ e > 0.999999
        axis2, sign2 = rc.Axis.from_point(-e)
        assert axis2 == axis and sign2 == -sign


def test_isotropy_blocks():
    assert rc.isotropy_blocks(rc.axis_unit(5, 2)).blocks == (2, 3)
    rng = np.random.default_rng(3)
    x = rc.sumzero(rng.normal(size=6))
    assert rc.isotropy_blocks(x).blocks == (1,) * 6
    # off the main axis inside a plane: blocks (1, 1, q)
    ch = rc.plane_chart(5, 2)
    x = ch.to_ambient(0.4, 0.9)
    assert sorted(rc.isotropy_blocks(x).blocks) == [1, 1, 3]
    sig = rc.isotropy_blocks(np.array([1.0, 1.0 + 5e-10, -2.0 - 5e-10]))
    assert sig.blocks == (2, 1)
    assert 0 < sig.merge_spread <= 1e-9


@pytest.mark.parametrize("k,p", [(4, 2), (5, 2), (5, 3), (7, 3), (7, 4), (9, 4)])
def test_plane_chart_isometry(k, p):
    ch = rc.plane_chart(k, p)
    assert abs(np.dot(ch.basis_u, ch.basis_v)) < 1e-14
    assert abs(np.linalg.norm(ch.basis_u) - 1) < 1e-14
    assert abs(np.linalg.norm(ch.basis_v) - 1) < 1e-14
    assert np.allclose(ch.basis_u, rc.axis_unit(k, 1))
    rng = np.random.default_rng(k * 10 + p)
    for _ in range(100):
        u, v = rng.normal(size=2)
        x = ch.to_ambient(u, v)
        assert abs(np.dot(x, x) - (u * u + v * v)) < 1e-12


def test_chart_slopes_identify_axes():
    # the main in-plane axis: chart preimage of its direction has slope m_p
    for k, p in ((5, 2), (6, 3), (7, 3), (5, 3)):
        ch = rc.plane_chart(k, p)
        u, v = ch.from_ambient(rc.axis_unit(k, p))
        assert abs(v / u - ch.slope_main) < 1e-12
        assert v > 0  # orientation: positive second chart coordinate
        assert abs(ch.slope_main - math.sqrt(k * (p - 1) / (k - p))) < 1e-14
    ch = rc.plane_chart(5, 2)
    assert abs(ch.slope_main - math.sqrt(5.0 / 3.0)) < 1e-12
    # swapped axis: swap the free coordinate with one from the middle block
    sigma = np.array([1, 0, 2, 3, 4])
    star = rc.permute(sigma, rc.axis_unit(5, 1))
    u, v = ch.from_ambient(star)
    assert abs(v / u - ch.slope_star) < 1e-12 and v > 0


def test_k3_chart_spans_everything():
    ch = rc.plane_chart(3, 2)
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rc.sumzero(rng.normal(size=3))
        assert ch.contains(x)


def test_plane_intersections_are_the_axis_line():
    # two planes of the same orbit share exactly the distinguished axis line
    k, p = 5, 2
    a = rc.plane_chart(k, p, y_block=(1,))
    b = rc.plane_chart(k, p, y_block=(2,))
    basis_a = np.column_stack([a.basis_u, a.basis_v])
    basis_b = np.column_stack([b.basis_u, b.basis_v])
    joint = np.column_stack([basis_a, -basis_b])
    _, s, vt = np.linalg.svd(joint)
    null = vt[s.size - np.sum(s < 1e-12):] if np.sum(s < 1e-12) else vt[3:]
    assert np.sum(s < 1e-12) == 1
    coef = vt[-1][:2]
    common = basis_a @ coef
    common /= np.linalg.norm(common)
    assert abs(abs(np.dot(common, rc.axis_unit(k, 1))) - 1) < 1e-10


def test_axis_angle_closed_forms():
    # direct dot products against the closed-form cosines
    assert abs(np.dot(rc.axis_unit(4, 1), rc.axis_unit(4, 2)) - 2 / math.sqrt(12)) < 1e-15
    a, _ = rc.Axis.canonical(5, (0,))
    b, _ = rc.Axis.canonical(5, (0, 1))
    assert abs(math.cos(rc.axis_angle(5, a, b)) - math.sqrt(3.0 / 8.0)) < 1e-14
    assert rc.axis_angle(5, a, a) == 0.0
    for k in range(4, 11):
        for p in range(2, rc.plane_limit(k) + 1):
            cos = rc.axis_pair_cosines(k, p)
            e1 = rc.axis_unit(k, 1)
            ep = rc.axis_unit(k, p)
            star = rc.permute(np.array([1, 0] + list(range(2, k))),
                              rc.axis_unit(k, p - 1)) if p > 1 else None
            assert abs(np.dot(e1, ep) - cos["l1_lp"]) < 1e-12
            if p >= 2:
                sigma = np.arange(k)
                sigma[0], sigma[p - 1] = p - 1, 0
                star = rc.permute(sigma, rc.axis_unit(k, p - 1))
                assert abs(np.dot(star, ep) - cos["star_lp"]) < 1e-12
                assert abs(np.dot(star, e1) - cos["star_l1"]) < 1e-12


def test_angle_interval_violation_recorded():
    # the angle between the distinguished axis and the 2-block axis at k=4
    # falls below pi/3: the interval often quoted for it does not hold there,
    # while the closed-form cosine itself is exact.
    theta = math.acos(math.sqrt(2.0 / 6.0))
    a, _ = rc.Axis.canonical(4, (0,))
    b, _ = rc.Axis.canonical(4, (0, 1))
    assert abs(rc.axis_angle(4, a, b) - theta) < 1e-14
    assert theta < math.pi / 3


def test_orbit_plane_count():
    assert rc.orbit_plane_count(5, 2) == 4
    assert rc.orbit_plane_count(6, 3) == 10
    for k in range(4, 10):
        assert rc.orbit_plane_count(k, 2) == k - 1


def test_orbit_plane_count_balanced_halving():
    # brute force: distinct planes as row spaces, for the balanced case the
    # middle/last block swap preserves the plane and the count halves
    for k in (5, 7):
        p = rc.ell(k) + 1
        seen = []
        for y in combinations(range(1, k), p - 1):
            ch = rc.plane_chart(k, p, y_block=y)
            basis = np.column_stack([ch.basis_u, ch.basis_v])
            proj = basis @ basis.T
            if not any(np.allclose(proj, q, atol=1e-12) for q in seen):
                seen.append(proj)
        assert len(seen) == rc.orbit_plane_count(k, p)
        assert len(seen) == math.comb(k - 1, p - 1) // 2


def test_hyperplane_basis():
    for k in (3, 5, 8):
        b = rc.hyperplane_basis(k)
        assert np.allclose(b.T @ b, np.eye(k - 1), atol=1e-14)
        assert np.allclose(b.sum(axis=0), 0.0, atol=1e-14)
