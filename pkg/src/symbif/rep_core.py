"""Geometry of the permutation action on the sum-zero hyperplane.

S_k acts on R^k by permuting coordinates; the sum-zero hyperplane H
(dimension k-1) is the nontrivial irreducible piece.  This module builds
the distinguished unit vectors with two-block coordinate patterns, the
axes of symmetry they span, the flow-invariant 2-planes spanned by pairs
of axes, and isometric charts onto those planes.

Points of H are plain numpy arrays of length k whose entries sum to zero.
Permutations are integer arrays ``sigma`` with ``sigma[j]`` the image of
index ``j`` (0-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

SUM_TOL = 1e-12
BLOCK_TOL = 1e-9

# Explicit axis enumeration is exponential in k; past this we only count.
MAX_ENUM_K = 24


def ell(k: int) -> int:
    """Half-dimension parameter: k = 2*ell+1 (odd) or k = 2*ell (even)."""
    return k // 2


def plane_limit(k: int) -> int:
    """Largest p with an invariant 2-plane E_p: ell+1 for odd k, ell for even."""
    return ell(k) + 1 if k % 2 else ell(k)


@dataclass(frozen=True)
class Dims:
    """Bundle of the integers that recur in every formula."""

    k: int

    def __post_init__(self):
        if self.k < 3:
            raise ValueError(f"need k >= 3, got {self.k}")

    @property
    def ell(self) -> int:
        return ell(self.k)

    @property
    def even(self) -> bool:
        return self.k % 2 == 0

    @property
    def plane_limit(self) -> int:
        return plane_limit(self.k)

    def q(self, p: int) -> int:
        return self.k - p


def sumzero(x) -> np.ndarray:
    """Project onto the sum-zero hyperplane (subtract the coordinate mean).

    Preserves complex dtype so analytic kinds support complex-step
    differentiation.
    """
    x = np.asarray(x)
    if not np.iscomplexobj(x):
        x = x.astype(float, copy=False)
    return x - x.mean()


def check_hpoint(x: np.ndarray, tol: float = SUM_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if abs(x.sum()) > tol * max(1.0, np.abs(x).max()):
        raise ValueError(f"coordinates sum to {x.sum():.3e}, not zero")
    return x


def axis_unit(k: int, p: int) -> np.ndarray:
    """Unit vector with value q on the first p coordinates and -p after.

    Normalised by 1/sqrt(p*q*k) so the result is a unit vector in H.
    """
    if not 1 <= p <= k - 1:
        raise ValueError(f"need 1 <= p <= k-1, got p={p}, k={k}")
    q = k - p
    out = np.empty(k)
    out[:p] = q
    out[p:] = -p
    return out / math.sqrt(p * q * k)


def block_unit(k: int, members) -> np.ndarray:
    """Axis unit vector whose positive block is an arbitrary index set."""
    members = tuple(sorted(members))
    p = len(members)
    if not 1 <= p <= k - 1:
        raise ValueError("positive block must be a nonempty proper subset")
    q = k - p
    out = np.full(k, -p, dtype=float)
    out[list(members)] = q
    return out / math.sqrt(p * q * k)


def permute(sigma, x: np.ndarray) -> np.ndarray:
    """Apply a coordinate permutation: (sigma.x)_i = x_{sigma^{-1}(i)}."""
    sigma = np.asarray(sigma, dtype=int)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[sigma] = x
    return out


def random_permutation(k: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(k)


def stabilizer_permutations(k: int, fixed: int = 0, rng=None, n: int = 8):
    """Sample permutations fixing one coordinate (the S_{k-1} subgroup)."""
    rng = rng or np.random.default_rng(0)
    rest = [i for i in range(k) if i != fixed]
    out = []
    for _ in range(n):
        sigma = np.arange(k)
        sigma[rest] = rng.permutation(rest)
        out.append(sigma)
    return out


@dataclass(frozen=True)
class Axis:
    """An unoriented axis of symmetry, canonicalised.

    ``members`` is the positive block of the stored orientation: the block
    of size min(p, k-p); when the two blocks have equal size the
    lexicographically smaller one is kept.  The line is R*direction().
    """

    k: int
    members: tuple

    @property
    def p(self) -> int:
        return len(self.members)

    @property
    def q(self) -> int:
        return self.k - self.p

    def direction(self) -> np.ndarray:
        return block_unit(self.k, self.members)

    @staticmethod
    def canonical(k: int, members) -> tuple["Axis", int]:
        """Canonicalise a positive block; returns (axis, orientation sign).

        sign = +1 if the stored block is the given one, -1 if the stored
        block is its complement (the direction flips in that case).
        """
        members = tuple(sorted(members))
        comp = tuple(i for i in range(k) if i not in members)
        if len(members) < len(comp):
            return Axis(k, members), +1
        if len(members) > len(comp):
            return Axis(k, comp), -1
        if members <= comp:
            return Axis(k, members), +1
        return Axis(k, comp), -1

    @staticmethod
    def from_point(x: np.ndarray, tol: float = BLOCK_TOL) -> tuple["Axis", int]:
        """Recognise the axis through a two-block point; sign tracks orientation."""
        x = np.asarray(x, dtype=float)
        k = x.size
        pos = tuple(i for i in range(k) if x[i] > 0)
        sig = isotropy_blocks(x, tol)
        if len(sig.blocks) != 2 or not pos:
            raise ValueError("point does not lie on an axis of symmetry")
        axis, _ = Axis.canonical(k, pos)
        sign = +1 if np.dot(x, axis.direction()) > 0 else -1
        return axis, sign


def axis_class_counts(k: int) -> dict:
    """Number of unoriented axes per isotropy class p (valid for any k)."""
    counts = {}
    for p in range(1, ell(k) + 1):
        n = math.comb(k, p)
        if k % 2 == 0 and p == ell(k):
            n //= 2
        counts[p] = n
    return counts


def enumerate_axes(k: int):
    """All 2^{k-1} - 1 unoriented axes of symmetry, canonicalised.

    Raises for k > MAX_ENUM_K; use axis_class_counts there instead.
    """
    if k > MAX_ENUM_K:
        raise ValueError(
            f"explicit enumeration is limited to k <= {MAX_ENUM_K}; "
            "use axis_class_counts for counts"
        )
    axes = []
    half = ell(k)
    for p in range(1, half + 1):
        if k % 2 == 0 and p == half:
            # block and complement have equal size; keep the one holding 0
            for rest in combinations(range(1, k), p - 1):
                axes.append(Axis(k, (0,) + rest))
        else:
            for members in combinations(range(k), p):
                axes.append(Axis(k, members))
    return axes


class IsotropySignature(tuple):
    """Block sizes of equal coordinates, ordered by decreasing value."""

    __slots__ = ()

    def __new__(cls, blocks, merge_spread):
        obj = super().__new__(cls, (tuple(blocks), float(merge_spread)))
        return obj

    @property
    def blocks(self):
        return self[0]

    @property
    def merge_spread(self) -> float:
        return self[1]


def isotropy_blocks(x: np.ndarray, tol: float = BLOCK_TOL) -> IsotropySignature:
    """Group coordinates equal to within ``tol`` into blocks.

    Blocks are reported in decreasing coordinate-value order; the signature
    also carries the largest gap that was merged inside a block, so callers
    can see how close the call was.
    """
    x = np.asarray(x, dtype=float)
    if np.allclose(x, 0.0):
        raise ValueError("isotropy blocks undefined at the origin")
    vals = np.sort(x)[::-1]
    blocks = []
    spread = 0.0
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i - 1] - vals[i] > tol:
            blocks.append(i - start)
            if i - start > 1:
                spread = max(spread, vals[start] - vals[i - 1])
            start = i
    return IsotropySignature(blocks, spread)


@dataclass(frozen=True, eq=False)
class PlaneChart:
    """Isometric chart R^2 -> E_p for the invariant plane with blocks (1, p-1, q).

    basis_u is always the unit axis vector through the free coordinate;
    basis_v completes an orthonormal pair.  The chart image contains the
    three axes L_1 (the u-axis), L_p (slope ``slope_main``) and the swapped
    copy of L_{p-1} (slope ``slope_star``).
    """

    k: int
    p: int
    free: int
    y_block: tuple
    z_block: tuple
    basis_u: np.ndarray
    basis_v: np.ndarray

    @property
    def q(self) -> int:
        return self.k - self.p

    @property
    def slope_main(self) -> float:
        return math.sqrt(self.k * (self.p - 1) / self.q)

    @property
    def slope_star(self) -> float:
        return -math.sqrt(self.q * self.k / (self.p - 1))

    def to_ambient(self, u: float, v: float) -> np.ndarray:
        return u * self.basis_u + v * self.basis_v

    def from_ambient(self, x: np.ndarray) -> tuple:
        return float(np.dot(x, self.basis_u)), float(np.dot(x, self.basis_v))

    def contains(self, x: np.ndarray, tol: float = 1e-10) -> bool:
        u, v = self.from_ambient(x)
        return bool(np.linalg.norm(x - self.to_ambient(u, v)) <= tol)


def plane_chart(k: int, p: int, y_block=None, free: int = 0) -> PlaneChart:
    """Chart for the plane with free coordinate ``free`` and middle block ``y_block``.

    Defaults pick the representative plane: free coordinate 0 and middle
    block {1, .., p-1}.
    """
    if not 2 <= p <= plane_limit(k):
        raise ValueError(f"need 2 <= p <= {plane_limit(k)} for k={k}, got {p}")
    q = k - p
    if y_block is None:
        y_block = tuple(range(1, p))
    y_block = tuple(sorted(y_block))
    if free in y_block or len(y_block) != p - 1:
        raise ValueError("middle block must have p-1 indices and omit the free one")
    z_block = tuple(i for i in range(k) if i != free and i not in y_block)

    basis_u = block_unit(k, (free,))
    basis_v = np.zeros(k)
    c = 1.0 / math.sqrt((k - 1) * (p - 1) * q)
    basis_v[list(y_block)] = q * c
    basis_v[list(z_block)] = -(p - 1) * c
    return PlaneChart(k, p, free, y_block, z_block, basis_u, basis_v)


def axis_angle(k: int, a: Axis, b: Axis) -> float:
    """Angle between stored orientations, arccos of the direction dot product."""
    c = float(np.dot(a.direction(), b.direction()))
    return math.acos(min(1.0, max(-1.0, c)))


def axis_pair_cosines(k: int, p: int) -> dict:
    """Closed-form cosines between the three axes sharing a plane E_p."""
    if not 2 <= p <= plane_limit(k):
        raise ValueError(f"need 2 <= p <= {plane_limit(k)}")
    q = k - p
    return {
        "l1_lp": math.sqrt(q / ((k - 1) * p)),
        "star_lp": math.sqrt(q * (p - 1) / ((q + 1) * p)),
        "star_l1": -math.sqrt((p - 1) / ((k - 1) * (q + 1))),
    }


def orbit_plane_count(k: int, p: int) -> int:
    """Distinct planes in the coordinate-1-fixing group orbit of E_p.

    C(k-1, p-1) in general.  For odd k and p = ell+1 the middle and last
    blocks have equal size, the block swap preserves the plane as a set,
    and the count halves.
    """
    if not 2 <= p <= plane_limit(k):
        raise ValueError(f"need 2 <= p <= {plane_limit(k)}")
    n = math.comb(k - 1, p - 1)
    if k % 2 == 1 and p == ell(k) + 1:
        n //= 2
    return n


def orbit_plane_blocks(k: int, p: int):
    """Middle blocks indexing the distinct planes in the orbit of E_p."""
    blocks = []
    symmetric = k % 2 == 1 and p == ell(k) + 1
    for y in combinations(range(1, k), p - 1):
        if symmetric:
            z = tuple(i for i in range(1, k) if i not in y)
            if y > z:
                continue  # swapped copy of a plane already listed
        blocks.append(y)
    return blocks


@lru_cache(maxsize=None)
def hyperplane_basis(k: int) -> np.ndarray:
    """Deterministic orthonormal basis of H as columns of a (k, k-1) matrix."""
    cols = []
    for j in range(1, k):
        v = np.zeros(k)
        v[:j] = 1.0
        v[j] = -j
        cols.append(v / math.sqrt(j * (j + 1)))
    return np.column_stack(cols)
