"""Invariant and equivariant calculus on the sum-zero hyperplane.

The cubic invariant C, its gradient Q (the unique quadratic equivariant up
to scale), the polarised bilinear form B, the two cubic equivariants and
their axis eigenvalues, and the phase vector field of Q on the unit sphere
together with the Morse indices of its zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rep_core import axis_unit, hyperplane_basis, sumzero

HYPERBOLIC_TOL = 1e-9


class NonHyperbolicError(RuntimeError):
    """An eigenvalue sat inside the zero threshold where theory forbids it."""


def _arr(x) -> np.ndarray:
    x = np.asarray(x)
    if not np.iscomplexobj(x):
        x = x.astype(float, copy=False)
    return x


def cubic_invariant(x: np.ndarray) -> float:
    """C(x) = (1/3) sum x_i^3."""
    x = _arr(x)
    return np.sum(x**3) / 3.0 if np.iscomplexobj(x) else float(np.sum(x**3) / 3.0)


def quad_equivariant(x: np.ndarray) -> np.ndarray:
    """Q(x)_i = x_i^2 - mean(x^2); the gradient of C restricted to H."""
    return sumzero(_arr(x) ** 2)


def quad_jacobian(x: np.ndarray) -> np.ndarray:
    """DQ_x as a k-by-k matrix: (DQ_x h)_i = 2 x_i h_i - (2/k) <x, h>."""
    x = _arr(x)
    k = x.size
    return 2.0 * np.diag(x) - (2.0 / k) * np.outer(np.ones(k), x)


def bilinear_form(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Symmetric bilinear B with B(x, x) = Q(x): B(x,y)_i = x_i y_i - mean."""
    return sumzero(_arr(x) * _arr(y))


def cubic_t1(x: np.ndarray) -> np.ndarray:
    """Radial cubic equivariant |x|^2 x."""
    x = _arr(x)
    return np.dot(x, x) * x


def cubic_t1_jacobian(x: np.ndarray) -> np.ndarray:
    x = _arr(x)
    k = x.size
    return np.dot(x, x) * np.eye(k) + 2.0 * np.outer(x, x)


def cubic_t2(x: np.ndarray) -> np.ndarray:
    """Componentwise cubic equivariant: x_i^3 - mean(x^3)."""
    return sumzero(_arr(x) ** 3)


def cubic_t2_jacobian(x: np.ndarray) -> np.ndarray:
    x = _arr(x)
    k = x.size
    return 3.0 * np.diag(x**2) - (3.0 / k) * np.outer(np.ones(k), x**2)


def t2_axis_eigenvalue(k: int, p: int) -> float:
    """Eigenvalue alpha_p of the componentwise cubic on the p-axis direction.

    alpha_p = (1/k)(p/q + q/p - 1); strictly decreasing in p on [1, ell]
    with minimum 1/k at p = ell (k even).
    """
    if not 1 <= p <= k // 2:
        raise ValueError(f"need 1 <= p <= {k // 2}")
    q = k - p
    return (p / q + q / p - 1.0) / k


@dataclass(frozen=True)
class CubicParams:
    """Coefficients of a cubic equivariant a1*T1 + a2*T2."""

    a1: float
    a2: float

    def beta(self, k: int, p: int) -> float:
        """Eigenvalue on the p-axis direction."""
        return self.a1 + self.a2 * t2_axis_eigenvalue(k, p)

    def generic_for(self, k: int) -> bool:
        """Whether the half-block axis eigenvalue is nonzero (k even)."""
        return self.beta(k, k // 2) != 0.0


def field(params: CubicParams, x: np.ndarray) -> np.ndarray:
    return params.a1 * cubic_t1(x) + params.a2 * cubic_t2(x)


def phase_field(u: np.ndarray) -> np.ndarray:
    """Tangential part of Q on the unit sphere: Q(u) - <Q(u), u> u."""
    u = np.asarray(u, dtype=float)
    n = np.linalg.norm(u)
    if abs(n - 1.0) > 1e-10:
        raise ValueError(f"phase field needs a unit vector, |u| = {n:.12f}")
    qu = quad_equivariant(u)
    return qu - np.dot(qu, u) * u


def phase_jacobian(u: np.ndarray) -> np.ndarray:
    """Ambient derivative of the phase field at a unit vector.

    D h = DQ_u h - <DQ_u h, u> u - <Q(u), h> u - <Q(u), u> h.
    """
    u = np.asarray(u, dtype=float)
    k = u.size
    dq = quad_jacobian(u)
    qu = quad_equivariant(u)
    return (
        dq
        - np.outer(u, u @ dq)
        - np.outer(u, qu)
        - float(np.dot(qu, u)) * np.eye(k)
    )


@lru_cache(maxsize=None)
def _tangent_basis_cached(k: int, p: int, negate: bool) -> np.ndarray:
    u = axis_unit(k, p)
    if negate:
        u = -u
    return tangent_basis(u)


def tangent_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the sphere tangent space inside H at u."""
    u = np.asarray(u, dtype=float)
    k = u.size
    ones = np.ones(k) / math.sqrt(k)
    proj = np.eye(k) - np.outer(ones, ones) - np.outer(u, u)
    w, vecs = np.linalg.eigh(proj)
    cols = vecs[:, w > 0.5]
    if cols.shape[1] != k - 2:
        raise RuntimeError("tangent space has unexpected dimension")
    return cols


def _negative_count(mat: np.ndarray, asym_tol: float = 1e-10) -> int:
    asym = np.abs(mat - mat.T).max()
    if asym > asym_tol * max(1.0, np.abs(mat).max()):
        raise RuntimeError(f"matrix asymmetry {asym:.2e} above tolerance")
    eigs = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    if np.any(np.abs(eigs) < HYPERBOLIC_TOL):
        raise NonHyperbolicError(f"eigenvalue inside +-{HYPERBOLIC_TOL:g} band: {eigs}")
    return int(np.sum(eigs < 0.0))


def phase_index(k: int, p: int, at_minus: bool = False) -> int:
    """Morse index of the phase field zero at the p-axis direction.

    Counts negative eigenvalues of the phase Jacobian restricted to the
    sphere tangent space at +axis (or -axis when ``at_minus``).  The values
    are k-p-1 at the positive point and p-1 at the negative one; the two
    always sum to k-2.
    """
    if not 1 <= p <= k - 1:
        raise ValueError(f"need 1 <= p <= k-1, got {p}")
    u = axis_unit(k, p)
    if at_minus:
        u = -u
    basis = _tangent_basis_cached(k, p, at_minus)
    mat = basis.T @ phase_jacobian(u) @ basis
    return _negative_count(mat)


def sphere_gradient_steps(k, x0, steps=400, lr=0.25, descend=False):
    """Projected-gradient ascent (or descent) of C on the unit sphere."""
    u = np.asarray(x0, dtype=float)
    u = sumzero(u)
    u /= np.linalg.norm(u)
    sign = -1.0 if descend else 1.0
    for _ in range(steps):
        u = u + sign * lr * phase_field(u)
        u = sumzero(u)
        u /= np.linalg.norm(u)
    return u
