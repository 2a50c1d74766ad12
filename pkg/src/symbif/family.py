"""One-parameter bifurcation families on the sum-zero hyperplane.

Five kinds are supported, named as on the command line:

* ``odd``            x' = lam*x - Q(x), the quadratic normal form (any k >= 3)
* ``perturbed-odd``  the quadratic family minus a constant (optionally
                     localised) forcing term along the distinguished axis
* ``even-minus`` /   x' = lam*x - Q(x) -/+ S(x, lam) for even k, where S is
  ``even-plus``      the radially cut off cubic keeping only pitchfork
                     branches on the half-block axes
* ``perturbed-even`` the even model minus the forcing term

Branch parametrisations, Morse indices, the trace identity, the branching
pattern catalog and the smooth cutoff machinery all live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import equivariants as eqv
from . import rep_core as rc
from .equivariants import NonHyperbolicError
from .rep_core import axis_unit, block_unit, ell, hyperplane_basis, sumzero

KINDS = ("odd", "perturbed-odd", "even-minus", "even-plus", "perturbed-even")


# ---------------------------------------------------------------------------
# smooth cutoffs


def smooth_plateau(t: float) -> float:
    """C-infinity step: 1 for t <= 1, 0 for t >= 2, strictly between inside."""
    if t <= 1.0:
        return 1.0
    if t >= 2.0:
        return 0.0
    a = math.exp(-1.0 / (2.0 - t))
    b = math.exp(-1.0 / (t - 1.0))
    return a / (a + b)


def smooth_plateau_deriv(t: float) -> float:
    if t <= 1.0 or t >= 2.0:
        return 0.0
    a = math.exp(-1.0 / (2.0 - t))
    b = math.exp(-1.0 / (t - 1.0))
    da = -a / (2.0 - t) ** 2
    db = b / (t - 1.0) ** 2
    return (da * b - a * db) / (a + b) ** 2


def model_scales(k: int) -> tuple:
    """(lam0, R0) for the even-k cutoff: lam0 = 4/(k(k^2-4)), R0 = sqrt(lam0).

    lam0 is the largest parameter half-width for which the plateau region
    excludes the spurious branches the global cubic would otherwise carry.
    """
    if k % 2 or k < 4:
        raise ValueError("model scales are defined for even k >= 4")
    lam0 = 4.0 / (k * (k * k - 4))
    return lam0, math.sqrt(lam0)


@lru_cache(maxsize=None)
def _phase_zero_directions(k: int) -> np.ndarray:
    """Unit directions of every phase-field zero (all two-block vectors)."""
    dirs = []
    for p in range(1, k):
        for members in combinations(range(k), p):
            dirs.append(block_unit(k, members))
    return np.array(dirs)


@lru_cache(maxsize=None)
def kappa(k: int) -> float:
    """Minimal spherical gap between distinct phase-field zeros."""
    dirs = _phase_zero_directions(k)
    g = dirs @ dirs.T
    np.fill_diagonal(g, -1.0)
    return float(np.arccos(np.clip(g.max(), -1.0, 1.0)))


@lru_cache(maxsize=None)
def _half_block_directions(k: int) -> np.ndarray:
    """Unit vectors of the half-block axis orbit (k even), both signs."""
    dirs = []
    for members in combinations(range(k), k // 2):
        dirs.append(block_unit(k, members))
    return np.array(dirs)


def bump_psi(k: int, u: np.ndarray, tau: float) -> float:
    """Invariant plateau bump around the half-block axis directions.

    Equals 1 within spherical distance tau/2 of the orbit, 0 beyond 3*tau/4.
    """
    _check_tau(k, tau)
    u = np.asarray(u, dtype=float)
    rho = _orbit_distance(k, u)[0]
    return smooth_plateau(4.0 * rho / tau - 1.0)


def _check_tau(k: int, tau: float):
    if not 0.0 < tau < kappa(k) / 2.0:
        raise ValueError(f"need 0 < tau < kappa/2 = {kappa(k) / 2.0:.6f}, got {tau}")


def _orbit_distance(k: int, u: np.ndarray) -> tuple:
    dirs = _half_block_directions(k)
    dots = dirs @ u
    i = int(np.argmax(dots))
    rho = math.acos(min(1.0, max(-1.0, dots[i])))
    return rho, dirs[i]


def radial_cutoff_field(k, x, lam, tau=None, scales=None):
    """The cutoff cubic S(x, lam) = w(x, lam) * |x|^2 x.

    The weight w is 1 on the plateau {|x| <= R0/2, |lam| <= lam0/2}, 1 on the
    cones within tau/2 of the half-block axis directions at any radius, and
    0 outside both regions (smoothly interpolated in between).
    """
    x = np.asarray(x, dtype=float)
    tau = kappa(k) / 100.0 if tau is None else tau
    lam0, r0 = scales if scales is not None else model_scales(k)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return np.zeros_like(x)
    a = smooth_plateau(2.0 * r / r0) * smooth_plateau(2.0 * abs(lam) / lam0)
    psi = bump_psi(k, x / r, tau)
    w = a + (1.0 - a) * psi
    return w * eqv.cubic_t1(x)


# ---------------------------------------------------------------------------
# family specification


@dataclass(eq=False)
class FamilySpec:
    """Immutable-by-convention description of one family.

    eta   forcing amplitude for the perturbed kinds (> 0)
    eta0  localisation budget; when set the forcing term is multiplied by
          plateau bumps so it is constant on the inner window W_{rho/2} and
          vanishes outside W_rho, rho = 4*sqrt(eta0)
    tau   cone half-width of the even-model cutoff (default kappa/100)
    """

    k: int
    kind: str
    eta: float = 0.0
    eta0: float | None = None
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.k < 3:
            raise ValueError("need k >= 3")
        if self.kind in ("even-minus", "even-plus", "perturbed-even"):
            if self.k % 2:
                raise ValueError(f"{self.kind} needs even k")
            if self.tau is None:
                self.tau = kappa(self.k) / 100.0
            _check_tau(self.k, self.tau)
            self.lam0, self.r0 = model_scales(self.k)
        if self.kind.startswith("perturbed"):
            if self.eta <= 0.0:
                raise ValueError("perturbed kinds need eta > 0")
            if self.eta0 is not None and self.eta > self.eta0:
                raise ValueError("localisation needs eta <= eta0")
        self.e1 = axis_unit(self.k, 1)
        if self.eta0 is not None:
            self.rho = 4.0 * math.sqrt(self.eta0)
            self.delta1 = self.rho / 2.0
            self.delta2 = math.sqrt(self.k / 3.0) * self.rho

    # -- forcing term -------------------------------------------------------

    @property
    def perturbed(self) -> bool:
        return self.kind.startswith("perturbed")

    @property
    def localized(self) -> bool:
        return self.perturbed and self.eta0 is not None

    def forcing(self, x: np.ndarray, lam: float) -> np.ndarray:
        """The symmetry-breaking term (zero vector for unperturbed kinds)."""
        if not self.perturbed:
            return np.zeros(self.k)
        if not self.localized:
            return self.eta * self.e1
        a = float(np.dot(x, self.e1))
        y = x - a * self.e1
        w = (
            smooth_plateau(2.0 * abs(lam) / self.rho)
            * smooth_plateau(2.0 * abs(a) / self.delta1)
            * smooth_plateau(2.0 * np.linalg.norm(y) / self.delta2)
        )
        return w * self.eta * self.e1

    def _forcing_jacobian(self, x: np.ndarray, lam: float) -> np.ndarray:
        k = self.k
        if not self.localized:
            return np.zeros((k, k))
        a = float(np.dot(x, self.e1))
        y = x - a * self.e1
        ny = float(np.linalg.norm(y))
        fl = smooth_plateau(2.0 * abs(lam) / self.rho)
        fa = smooth_plateau(2.0 * abs(a) / self.delta1)
        fy = smooth_plateau(2.0 * ny / self.delta2)
        grad = np.zeros(k)
        if abs(a) > 0.0:
            da = smooth_plateau_deriv(2.0 * abs(a) / self.delta1)
            grad += fl * fy * da * (2.0 / self.delta1) * math.copysign(1.0, a) * self.e1
        if ny > 0.0:
            dy = smooth_plateau_deriv(2.0 * ny / self.delta2)
            grad += fl * fa * dy * (2.0 / self.delta2) * (y / ny)
        return self.eta * np.outer(self.e1, grad)

    # -- cutoff cubic -------------------------------------------------------

    def _cubic_sign(self) -> float:
        return -1.0 if self.kind in ("even-minus", "perturbed-even") else +1.0

    def cutoff_weight(self, x: np.ndarray, lam: float) -> float:
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return 1.0
        a = smooth_plateau(2.0 * r / self.r0) * smooth_plateau(2.0 * abs(lam) / self.lam0)
        psi = bump_psi(self.k, x / r, self.tau)
        return a + (1.0 - a) * psi

    def _cutoff_weight_gradient(self, x: np.ndarray, lam: float) -> np.ndarray:
        """Spatial gradient of the cutoff weight (zero on its plateaus)."""
        k = self.k
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros(k)
        u = x / r
        ta = 2.0 * r / self.r0
        tl = 2.0 * abs(lam) / self.lam0
        fa, fl = smooth_plateau(ta), smooth_plateau(tl)
        a = fa * fl
        grad_a = smooth_plateau_deriv(ta) * (2.0 / self.r0) * fl * u

        rho, zdir = _orbit_distance(k, u)
        t_psi = 4.0 * rho / self.tau - 1.0
        psi = smooth_plateau(t_psi)
        grad_psi = np.zeros(k)
        dpsi = smooth_plateau_deriv(t_psi)
        if dpsi != 0.0:
            c = float(np.dot(u, zdir))
            s = math.sqrt(max(1e-30, 1.0 - c * c))
            grad_rho = -(zdir - c * u) / (r * s)
            grad_psi = dpsi * (4.0 / self.tau) * grad_rho
        return grad_a * (1.0 - psi) + (1.0 - a) * grad_psi

    # -- field, Jacobian, parameter derivative ------------------------------

    @property
    def analytic(self) -> bool:
        """Polynomial in (x, lam): complex-step differentiation is valid."""
        return self.kind in ("odd", "perturbed-odd") and not self.localized

    def eval(self, x: np.ndarray, lam: float) -> np.ndarray:
        x = eqv._arr(x)
        f = lam * x - eqv.quad_equivariant(x)
        if self.kind in ("even-minus", "even-plus", "perturbed-even"):
            f = f + self._cubic_sign() * self.cutoff_weight(x, lam) * eqv.cubic_t1(x)
        if self.perturbed:
            f = f - self.forcing(x, lam)
        return sumzero(f)

    def jac(self, x: np.ndarray, lam: float) -> np.ndarray:
        x = eqv._arr(x)
        k = self.k
        j = lam * np.eye(k, dtype=x.dtype) - eqv.quad_jacobian(x)
        if self.kind in ("even-minus", "even-plus", "perturbed-even"):
            w = self.cutoff_weight(x, lam)
            gw = self._cutoff_weight_gradient(x, lam)
            j = j + self._cubic_sign() * (
                w * eqv.cubic_t1_jacobian(x) + np.outer(eqv.cubic_t1(x), gw)
            )
        if self.perturbed:
            j = j - self._forcing_jacobian(x, lam)
        return j

    def dlam(self, x: np.ndarray, lam: float) -> np.ndarray:
        """Derivative of the field in the parameter (cutoffs included)."""
        x = np.asarray(x, dtype=float)
        out = x.copy()
        if self.kind in ("even-minus", "even-plus", "perturbed-even"):
            r = float(np.linalg.norm(x))
            if r > 0.0:
                tl = 2.0 * abs(lam) / self.lam0
                dfl = smooth_plateau_deriv(tl)
                if dfl != 0.0:
                    fa = smooth_plateau(2.0 * r / self.r0)
                    psi = bump_psi(self.k, x / r, self.tau)
                    dw = fa * dfl * (2.0 / self.lam0) * math.copysign(1.0, lam)
                    out = out + self._cubic_sign() * dw * (1.0 - psi) * eqv.cubic_t1(x)
        if self.localized:
            a = float(np.dot(x, self.e1))
            y = x - a * self.e1
            dfl = smooth_plateau_deriv(2.0 * abs(lam) / self.rho)
            if dfl != 0.0:
                w = (
                    dfl
                    * (2.0 / self.rho)
                    * math.copysign(1.0, lam)
                    * smooth_plateau(2.0 * abs(a) / self.delta1)
                    * smooth_plateau(2.0 * np.linalg.norm(y) / self.delta2)
                )
                out = out - w * self.eta * self.e1
        return sumzero(out)

    def potential(self, x: np.ndarray, lam: float) -> float:
        """Energy decreasing along trajectories (gradient kinds only)."""
        x = np.asarray(x, dtype=float)
        e = eqv.cubic_invariant(x) - 0.5 * lam * float(np.dot(x, x))
        if self.kind in ("even-minus", "even-plus", "perturbed-even"):
            w = self.cutoff_weight(x, lam)
            gw = self._cutoff_weight_gradient(x, lam)
            if np.linalg.norm(gw) > 1e-14:
                raise ValueError("potential is only defined where the cutoff is flat")
            e = e - self._cubic_sign() * 0.25 * w * float(np.dot(x, x)) ** 2
        if self.perturbed:
            e = e + self.eta * float(np.dot(self.e1, x))
            if self.localized:
                raise ValueError("potential not available for the localised forcing")
        return e


def hyperplane_index(spec: FamilySpec, x: np.ndarray, lam: float) -> int:
    """Morse index: negative eigenvalues of the Jacobian restricted to H."""
    b = hyperplane_basis(spec.k)
    mat = b.T @ spec.jac(x, lam) @ b
    return eqv._negative_count(mat)


def jacobian_trace(spec: FamilySpec, x: np.ndarray, lam: float) -> float:
    """Trace of the Jacobian over H; equals (k-1)*lam for quadratic kinds."""
    j = spec.jac(x, lam)
    k = spec.k
    ones = np.ones(k)
    return float(np.trace(j) - ones @ j @ ones / k)


# ---------------------------------------------------------------------------
# closed-form branches


def branch_point(k: int, p: int, sign: int, s: float) -> tuple:
    """Point and parameter on the quadratic family's p-axis branch.

    Forward (sign=+1): x = s*sqrt(pqk)/(q-p) * eps_p, lam = s; backward
    negates both.  Undefined at p = k/2 (even k), where the quadratic
    vanishes on the axis and the branch is a pitchfork instead.
    """
    q = k - p
    if not 1 <= p < k / 2:
        raise ValueError(
            f"quadratic branches need 1 <= p < k/2; p={p}, k={k}"
            + (" (half-block axis: use pitchfork_branch)" if 2 * p == k else "")
        )
    if s < 0:
        raise ValueError("branch parameter must be >= 0")
    coef = math.sqrt(p * q * k) / (q - p)
    x = sign * s * coef * axis_unit(k, p)
    return x, sign * s


def branch_index(spec: FamilySpec, p: int, sign: int, s: float) -> tuple:
    """(Morse index, radial eigenvalue) on the quadratic-family branch.

    The radial eigenvalue is exactly -lam; forward branches have index p,
    backward ones k-p-1.
    """
    if spec.kind != "odd":
        raise ValueError("branch_index applies to the quadratic family")
    if s <= 0:
        raise ValueError("need s > 0 for a hyperbolic branch point")
    x, lam = branch_point(spec.k, p, sign, s)
    j = spec.jac(x, lam)
    e = axis_unit(spec.k, p)
    radial = float(e @ j @ e)
    resid = np.linalg.norm(j @ e - radial * e)
    if resid > 1e-10 * max(1.0, abs(radial)):
        raise RuntimeError(f"axis direction is not an eigenvector, residual {resid:.2e}")
    return hyperplane_index(spec, x, lam), radial


def pitchfork_branch(k: int, model_sign: int, t: float, leg: int) -> tuple:
    """Half-block axis branch of the even model: (leg * t * eps_ell, sign * t^2).

    model_sign=-1 is the supercritical model (branches at lam = t^2 > 0);
    +1 the subcritical one (lam = -t^2).  The cutoff equals 1 along the
    axis cone, so the residual is exactly zero for every t >= 0.
    """
    if k % 2 or k < 4:
        raise ValueError("pitchfork branches need even k >= 4")
    if t < 0:
        raise ValueError("need t >= 0")
    x = leg * t * axis_unit(k, ell(k))
    lam = t * t if model_sign < 0 else -t * t
    return x, lam


def cubic_backward_fold(k: int, p: int, beta_p: float) -> float:
    """Parameter where the global cubic kills the backward p-axis branch.

    t* = -(q-p)^2 / (4 p q k beta_p) for beta_p < 0: the backward branch
    collides there with the extra axis branch the cubic term creates.
    """
    if beta_p >= 0.0:
        raise ValueError("fold formula applies to beta_p < 0")
    if not 1 <= p <= ell(k) - (0 if k % 2 else 1):
        raise ValueError(f"need 1 <= p <= {ell(k) - (0 if k % 2 else 1)}")
    q = k - p
    return -((q - p) ** 2) / (4.0 * p * q * k * beta_p)


def branches_in_box(k: int, rho: float, include_half_axis: bool = False) -> bool:
    """Check the slope bound |x(s)| <= (k/2) sqrt(k+1) |s| on all branches.

    Quadratic branches obey it for every p < k/2.  The even-k pitchfork
    branches (included on request, with unit cubic coefficient) violate it
    for any rho < 1 since |x| ~ sqrt(lam) near the origin.
    """
    if rho <= 0:
        raise ValueError("need rho > 0")
    bound = 0.5 * k * math.sqrt(k + 1)
    s = np.linspace(1e-6, rho, 64)
    for p in range(1, (k + 1) // 2):
        q = k - p
        slope = math.sqrt(p * q * k) / (q - p)
        if np.any(slope * s > bound * s + 1e-15):
            return False
    if include_half_axis:
        if k % 2:
            raise ValueError("half-block branches only exist for even k")
        lam = np.minimum(s, rho)
        if np.any(np.sqrt(lam) > bound * lam):
            return False
    return True


# ---------------------------------------------------------------------------
# branching pattern catalog


@dataclass(frozen=True)
class BranchRecord:
    axis_class: int  # p of the axis isotropy class
    sign: int  # +1 forward, -1 backward
    index: int
    multiplicity: int  # number of branches in the group orbit
    speed: float  # |x|/s along the branch
    lam_exponent: int  # lam ~ s (1) or lam ~ s^2 (pitchfork, 2)


@dataclass(frozen=True)
class BranchingPattern:
    k: int
    kind: str
    records: tuple

    @property
    def total_nontrivial(self) -> int:
        return sum(r.multiplicity for r in self.records)

    def totals_by_sign_index(self) -> dict:
        out: dict = {}
        for r in self.records:
            key = (r.sign, r.index)
            out[key] = out.get(key, 0) + r.multiplicity
        return out


def branching_pattern(spec: FamilySpec) -> BranchingPattern:
    """Signed indexed catalog of all nontrivial branches with multiplicities."""
    k = spec.k
    if spec.kind not in ("odd", "even-minus", "even-plus"):
        raise ValueError(f"no catalog for kind {spec.kind!r}")
    records = []
    top = (k - 1) // 2 if k % 2 else k // 2 - 1
    for p in range(1, top + 1):
        q = k - p
        mult = math.comb(k, p)
        speed = math.sqrt(p * q * k) / (q - p)
        records.append(BranchRecord(p, +1, p, mult, speed, 1))
        records.append(BranchRecord(p, -1, k - p - 1, mult, speed, 1))
    if spec.kind in ("even-minus", "even-plus"):
        half = ell(k)
        mult = math.comb(k, half)  # two legs on each of C(k, half)/2 axes
        sign = +1 if spec.kind == "even-minus" else -1
        records.append(BranchRecord(half, sign, half, mult, 1.0, 2))
    return BranchingPattern(k, spec.kind, tuple(records))


def poincare_hopf_sum(k: int, eta: float, lam: float) -> int:
    """Signed count sum((-1)^index) over all equilibria of the forced family.

    Constant in lam away from folds; each crossing equilibrium has index
    ell, so the value is (-1)^ell * C(2*ell, ell) for odd k.
    """
    from .symbreak import enumerate_equilibria

    eqs = enumerate_equilibria(k, eta, lam)
    return int(sum((-1) ** e.index * e.multiplicity for e in eqs))
