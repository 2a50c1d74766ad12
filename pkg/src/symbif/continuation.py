"""Predictor-corrector continuation of equilibria with fold detection.

Works on any "system" exposing ``rhs(z, lam)`` and ``jac(z, lam)`` with a
flat state vector z (a 2-vector for plane reductions, hyperplane
coordinates for ambient families).  Curves are polygonal records of
(lam, z, index, det sign) with fold events refined by a bordered Newton
solve on (rhs = 0, det J = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import equivariants as eqv
from .rep_core import hyperplane_basis


class NewtonError(RuntimeError):
    pass


class SingularJacobianError(NewtonError):
    pass


@dataclass(frozen=True)
class ContinuationSettings:
    initial_step: float = 1e-3
    min_step: float = 1e-6
    max_step: float = 1e-2
    newton_tol: float = 1e-12
    max_newton_iter: int = 50
    fold_tol: float = 1e-10
    grow_after: int = 3
    grow_factor: float = 1.3

    def __post_init__(self):
        if not 0 < self.min_step <= self.initial_step <= self.max_step:
            raise ValueError("need 0 < min_step <= initial_step <= max_step")


@dataclass(frozen=True)
class FoldEvent:
    lam: float
    point: np.ndarray
    plane: object = None  # descriptor supplied by the caller (p, blocks, "L1", ...)
    method: str = "numeric"
    singular_eig: float = 0.0
    index_jump: int = 0


@dataclass
class CurvePoint:
    lam: float
    z: np.ndarray
    index: int
    det_sign: int


@dataclass
class Curve:
    points: list = field(default_factory=list)
    folds: list = field(default_factory=list)
    exits: list = field(default_factory=list)  # window boundaries reached

    @property
    def lams(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def states(self) -> np.ndarray:
        return np.array([p.z for p in self.points])

    def indices(self) -> np.ndarray:
        return np.array([p.index for p in self.points])


class HyperplaneSystem:
    """Adapter putting an ambient family into hyperplane coordinates."""

    def __init__(self, spec):
        self.spec = spec
        self.basis = hyperplane_basis(spec.k)
        self.complex_ok = getattr(spec, "analytic", False)

    def rhs(self, z, lam):
        return self.basis.T @ self.spec.eval(self.basis @ z, lam)

    def jac(self, z, lam):
        return self.basis.T @ self.spec.jac(self.basis @ z, lam) @ self.basis

    def dlam(self, z, lam):
        return self.basis.T @ self.spec.dlam(self.basis @ z, lam)

    def to_ambient(self, z):
        return self.basis @ z

    def from_ambient(self, x):
        return self.basis.T @ x


def _dlam(system, z, lam):
    if hasattr(system, "dlam"):
        return system.dlam(z, lam)
    h = 1e-7 * max(1.0, abs(lam))
    return (system.rhs(z, lam + h) - system.rhs(z, lam - h)) / (2.0 * h)


def newton_solve(system, z0, lam, settings=None):
    """Newton iteration at fixed parameter; returns (z, spectrum).

    Raises SingularJacobianError when the Jacobian loses rank within 1e-12
    (relative) and NewtonError when the iteration budget runs out.
    """
    settings = settings or ContinuationSettings()
    z = np.asarray(z0, dtype=float).copy()
    scale = max(1.0, float(np.linalg.norm(z)))
    for _ in range(settings.max_newton_iter):
        r = system.rhs(z, lam)
        if np.linalg.norm(r) < settings.newton_tol * scale:
            j = system.jac(z, lam)
            return z, np.linalg.eigvalsh(0.5 * (j + j.T))
        j = system.jac(z, lam)
        sv = np.linalg.svd(j, compute_uv=False)
        if sv[-1] < 1e-12 * max(1.0, sv[0]):
            raise SingularJacobianError(
                f"Jacobian singular (smallest singular value {sv[-1]:.2e})"
            )
        z = z - np.linalg.solve(j, r)
    raise NewtonError(f"no convergence in {settings.max_newton_iter} iterations")


def _corrector(system, z_pred, lam_pred, tangent, settings):
    """Bordered Newton step solving rhs = 0 with an arclength constraint."""
    n = z_pred.size
    z, lam = z_pred.copy(), lam_pred
    anchor = np.concatenate([z_pred, [lam_pred]])
    for _ in range(settings.max_newton_iter):
        r = system.rhs(z, lam)
        c = float(tangent @ (np.concatenate([z, [lam]]) - anchor))
        if np.linalg.norm(r) < settings.newton_tol and abs(c) < settings.newton_tol:
            return z, lam
        big = np.zeros((n + 1, n + 1))
        big[:n, :n] = system.jac(z, lam)
        big[:n, n] = _dlam(system, z, lam)
        big[n, :] = tangent
        try:
            step = np.linalg.solve(big, np.concatenate([r, [c]]))
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"bordered system singular: {exc}") from exc
        z = z - step[:n]
        lam = lam - step[n]
    raise NewtonError("corrector did not converge")


def _point_data(system, z, lam):
    j = system.jac(z, lam)
    sym = 0.5 * (j + j.T)
    eigs = np.linalg.eigvalsh(sym)
    index = int(np.sum(eigs < 0.0))
    det = np.linalg.det(j)
    return index, (1 if det >= 0 else -1)


def refine_fold(system, z, lam, plane=None):
    """Polish a fold: Newton on (rhs, det J) = 0 in (z, lam).

    The gradient of the extended system is taken by complex-step
    differentiation where the system supports complex state (polynomial
    reductions) and by central differences otherwise (cutoff models).
    """
    n = z.size
    w = np.concatenate([z, [lam]])
    complex_ok = getattr(system, "complex_ok", True)

    def fold_fun(wv):
        zz, ll = wv[:n], wv[n]
        r = system.rhs(zz, ll)
        return np.concatenate([np.asarray(r), [np.linalg.det(system.jac(zz, ll))]])

    def fold_jac(wv):
        out = np.zeros((n + 1, n + 1))
        if complex_ok:
            h = 1e-120
            for i in range(n + 1):
                wc = wv.astype(complex)
                wc[i] += 1j * h
                zz, ll = wc[:n], wc[n]
                rr = np.asarray(system.rhs(zz, ll))
                dd = np.linalg.det(system.jac(zz, ll))
                out[:, i] = np.concatenate([rr, [dd]]).imag / h
        else:
            h = 1e-7
            for i in range(n + 1):
                wp, wm = wv.copy(), wv.copy()
                wp[i] += h
                wm[i] -= h
                out[:, i] = (fold_fun(wp) - fold_fun(wm)) / (2.0 * h)
        return out

    scale = max(1.0, float(np.linalg.norm(z)))
    for _ in range(60):
        f = fold_fun(w)
        if np.linalg.norm(f[:n]) < 1e-13 * scale and abs(f[n]) < 1e-13:
            break
        try:
            w = w - np.linalg.solve(fold_jac(w), f)
        except np.linalg.LinAlgError:
            break
    z_f, lam_f = w[:n], float(w[n])
    j = system.jac(z_f, lam_f)
    eigs = np.linalg.eigvalsh(0.5 * (j + j.T))
    mu = float(eigs[np.argmin(np.abs(eigs))])
    return FoldEvent(lam_f, z_f, plane=plane, method="numeric", singular_eig=mu)


def trace_branch(system, start, direction, settings=None, window=(-1.0, 1.0)):
    """Pseudo-arclength continuation from an equilibrium.

    ``start`` is (z0, lam0); ``direction`` (+1/-1) picks the initial sweep
    in lam.  Tracing stops at the window boundary or once a fold turn has
    carried the curve back to the boundary it started from.  Fold events
    are recorded with refined locations.
    """
    settings = settings or ContinuationSettings()
    z0, lam0 = np.asarray(start[0], dtype=float), float(start[1])
    z0, _ = newton_solve(system, z0, lam0, settings)
    curve = Curve()
    idx, ds = _point_data(system, z0, lam0)
    curve.points.append(CurvePoint(lam0, z0.copy(), idx, ds))

    n = z0.size
    # initial tangent: solve J t_z = -f_lam, normalise (t_z, 1)
    j = system.jac(z0, lam0)
    try:
        tz = np.linalg.solve(j, -_dlam(system, z0, lam0))
        tangent = np.concatenate([tz, [1.0]])
    except np.linalg.LinAlgError:
        tangent = np.concatenate([np.zeros(n), [1.0]])
    tangent = tangent / np.linalg.norm(tangent)
    if direction < 0:
        tangent = -tangent

    h = settings.initial_step
    clean = 0
    z, lam = z0, lam0
    prev_dlam_sign = math.copysign(1.0, tangent[-1]) if tangent[-1] else 1.0
    folds_pending = []
    for _ in range(200000):
        z_pred = z + h * tangent[:n]
        lam_pred = lam + h * tangent[n]
        try:
            z_new, lam_new = _corrector(system, z_pred, lam_pred, tangent, settings)
        except NewtonError:
            h *= 0.5
            if h < settings.min_step:
                raise
            clean = 0
            continue
        new_tan = np.concatenate([z_new - z, [lam_new - lam]])
        norm = np.linalg.norm(new_tan)
        if norm > 0:
            tangent = new_tan / norm
        idx, dsgn = _point_data(system, z_new, lam_new)
        step_dlam = lam_new - lam
        if step_dlam * prev_dlam_sign < 0.0 and abs(step_dlam) > 0.0:
            # lam reversed direction: a fold sits between the last two points
            ev = refine_fold(system, 0.5 * (z + z_new), 0.5 * (lam + lam_new))
            folds_pending.append((len(curve.points), ev))
            prev_dlam_sign = math.copysign(1.0, step_dlam)
        z_prev, lam_prev = z, lam
        z, lam = z_new, lam_new
        curve.points.append(CurvePoint(lam, z.copy(), idx, dsgn))
        clean += 1
        if clean >= settings.grow_after:
            h = min(settings.max_step, h * settings.grow_factor)
            clean = 0
        if lam <= window[0] or lam >= window[1]:
            bnd = window[0] if lam <= window[0] else window[1]
            curve.exits.append(bnd)
            if abs(lam - lam_prev) > 0.0:
                # put the final point exactly on the boundary
                t = (bnd - lam_prev) / (lam - lam_prev)
                z_b = z_prev + t * (z - z_prev)
                try:
                    z_b, _ = newton_solve(system, z_b, bnd, settings)
                    idx_b, ds_b = _point_data(system, z_b, bnd)
                    curve.points[-1] = CurvePoint(bnd, z_b, idx_b, ds_b)
                except NewtonError:
                    pass
            break
    pts = curve.points
    final = []
    for i, ev in folds_pending:
        before = pts[max(i - 3, 0)].index
        after = pts[min(i + 2, len(pts) - 1)].index
        final.append(FoldEvent(ev.lam, ev.point, ev.plane, ev.method,
                               ev.singular_eig, after - before))
    curve.folds = final
    return curve


def locate_fold(curve: Curve, system) -> FoldEvent:
    """Refine the fold of a curve that reverses its parameter direction."""
    lams = curve.lams
    dl = np.diff(lams)
    rev = np.where(dl[:-1] * dl[1:] < 0.0)[0]
    if curve.folds:
        return curve.folds[0]
    if rev.size == 0:
        raise ValueError("curve has no parameter reversal")
    i = int(rev[0]) + 1
    ev = refine_fold(system, curve.points[i].z, curve.points[i].lam)
    jump = curve.points[i + 1].index - curve.points[i - 1].index
    return FoldEvent(ev.lam, ev.point, ev.plane, ev.method, ev.singular_eig, jump)


def classify_curve(curve: Curve, window) -> str:
    """'crossing' when both window ends are reached with no fold in between."""
    lams = curve.lams
    hit_lo = lams.min() <= window[0] + 1e-9
    hit_hi = lams.max() >= window[1] - 1e-9
    if hit_lo and hit_hi and not curve.folds:
        return "crossing"
    return "fold-terminated"
