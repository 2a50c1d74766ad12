"""Gradient-flow integration and connection checks.

Trajectories of x' = f_lam(x) on the hyperplane or inside a chart plane,
classified against the known equilibrium set; the heteroclinic structure
inside the generic planes (two connections leaving the p-axis zero) and
the index-1 facts on the balanced plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import family as fam
from . import symbreak as sb
from .family import FamilySpec
from .rep_core import ell, plane_chart, plane_limit, sumzero


@dataclass(frozen=True)
class FlowSettings:
    horizon: float = 60.0
    rtol: float = 1e-8
    atol: float = 1e-10
    settle_radius: float = 1e-6
    max_step: float = np.inf


@dataclass
class FlowResult:
    endpoint: np.ndarray
    classification: str
    target: object
    times: np.ndarray
    states: np.ndarray
    lam: float = 0.0


def flow(spec: FamilySpec, x0, lam: float, settings: FlowSettings | None = None,
         equilibria=None):
    """Integrate the family's flow and classify the endpoint.

    classification is 'equilibrium' (within settle_radius of a known zero,
    named in ``target``), 'escaped' (left a large ball), or 'timeout'.
    """
    settings = settings or FlowSettings()
    x0 = sumzero(np.asarray(x0, dtype=float))

    def rhs(t, x):
        return spec.eval(x, lam)

    escape = 10.0 * max(1.0, np.linalg.norm(x0))

    def too_far(t, x):
        return np.linalg.norm(x) - escape

    too_far.terminal = True

    def settled(t, x):
        return np.linalg.norm(spec.eval(x, lam)) - 1e-12

    settled.terminal = True

    sol = solve_ivp(
        rhs, (0.0, settings.horizon), x0, method="RK45",
        rtol=settings.rtol, atol=settings.atol, events=[too_far, settled],
        dense_output=False, max_step=settings.max_step,
    )
    end = sumzero(sol.y[:, -1])
    if equilibria is None:
        try:
            equilibria = sb.enumerate_equilibria(spec.k, spec.eta, lam, expand=True) \
                if spec.perturbed else None
        except Exception:
            equilibria = None
    label, target = "timeout", None
    if sol.t_events[0].size:
        label = "escaped"
    elif equilibria is not None:
        dists = [np.linalg.norm(end - e.x) for e in equilibria]
        i = int(np.argmin(dists)) if dists else -1
        if i >= 0 and dists[i] < settings.settle_radius:
            label, target = "equilibrium", equilibria[i]
    elif np.linalg.norm(spec.eval(end, lam)) < 1e-9:
        label = "equilibrium"
    return FlowResult(end, label, target, sol.t, sol.y.T, lam)


def planar_flow(sysm, uv0, lam, horizon=80.0, rtol=1e-9, atol=1e-12, reverse=False):
    """Integrate the 2-D plane reduction (trajectories stay in the plane)."""
    sign = -1.0 if reverse else 1.0

    def rhs(t, z):
        return sign * sysm.rhs(z[0], z[1], lam)

    big = 50.0 * max(1.0, np.linalg.norm(uv0))

    def too_far(t, z):
        return np.linalg.norm(z) - big

    too_far.terminal = True

    sol = solve_ivp(rhs, (0.0, horizon), np.asarray(uv0, float), method="RK45",
                    rtol=rtol, atol=atol, events=[too_far])
    return sol.y[:, -1], sol


@dataclass
class ConnectionReport:
    k: int
    p: int
    lam: float
    reached: dict  # label -> True/False
    ok: bool


def _plane_zero_positions(k, p, lam):
    """Unforced in-plane zeros (c1 on the axis line, cp, c_star off it)."""
    q = k - p
    skk = math.sqrt(k * (k - 1))
    c1 = np.array([lam * skk / (k - 2), 0.0])
    mp = math.sqrt(k * (p - 1) / q)
    cp = lam * math.sqrt(k / (k - 1)) * q / (q - p) * np.array([1.0, mp])
    ms = math.sqrt(k * q / (p - 1))
    cstar = lam * math.sqrt(k / (k - 1)) * (p - 1) / (q - p + 2) * np.array([-1.0, ms])
    return {"c1": c1, "cp": cp, "cstar": cstar}


def connection_check(k: int, p: int, lam: float, delta: float = 1e-4) -> ConnectionReport:
    """Verify the in-plane connections between the p-axis zero and c1, cstar.

    The connecting orbits coincide with the one-dimensional invariant
    manifolds of the saddles c1 and cstar.  For lam < 0 the orbits run from
    cp into the saddles, so they are found by integrating backward from the
    saddles' stable eigendirections; for lam > 0 the arrows reverse and the
    saddles' unstable directions are integrated forward into cp.
    """
    if not 2 <= p <= ell(k):
        raise ValueError(f"need 2 <= p <= {ell(k)} (use the balanced-plane check otherwise)")
    if lam == 0.0:
        raise ValueError("need lam != 0")
    sysm = sb.planar_system(k, p, eta=0.0)
    pos = _plane_zero_positions(k, p, lam)
    reached = {}
    tol = 1e-4 * max(1.0, abs(lam))
    toward_cp = lam < 0  # connections cp -> saddles; trace them in reverse

    for name in ("c1", "cstar"):
        j = sysm.jac(*pos[name], lam)
        w, vecs = np.linalg.eigh(0.5 * (j + j.T))
        picks = [vecs[:, i] for i in range(2) if (w[i] < 0 if toward_cp else w[i] > 0)]
        hit = False
        for vec in picks:
            for s in (+1, -1):
                end, _ = planar_flow(
                    sysm, pos[name] + s * delta * vec, lam, reverse=toward_cp
                )
                if np.linalg.norm(end - pos["cp"]) < tol:
                    hit = True
        reached[name] = hit
    return ConnectionReport(k, p, lam, reached, all(reached.values()))


@dataclass
class BalancedPlaneReport:
    k: int
    lam: float
    indices: tuple
    locations_ok: bool
    no_trio_connections: bool
    ok: bool


def balanced_plane_check(k: int, lam: float) -> BalancedPlaneReport:
    """In-plane index-1 property of the three zeros on the balanced plane.

    Odd k only.  Also checks numerically that no unstable trajectory of any
    of the three zeros converges to another of the three (trajectories may
    fall into the trivial zero or escape; connections inside the trio are
    what the structure forbids).
    """
    if k % 2 == 0:
        raise ValueError("the balanced plane exists for odd k")
    if lam == 0.0:
        raise ValueError("need lam != 0")
    p = ell(k) + 1
    sysm = sb.planar_system(k, p, eta=0.0)
    skk = math.sqrt(k * (k - 1))
    zeros = {
        "c1": np.array([lam * skk / (k - 2), 0.0]),
        "cstar": np.array([-lam * skk / 2.0, lam * k * math.sqrt(k - 1) / 2.0]),
        "cmain": np.array([-lam * skk / 2.0, -lam * k * math.sqrt(k - 1) / 2.0]),
    }
    locations_ok = True
    indices = []
    for z in zeros.values():
        zz, ok = sb._polish(sysm, z[0], z[1], lam)
        locations_ok &= ok and np.linalg.norm(zz - z) < 1e-8 * max(1.0, np.linalg.norm(z))
        indices.append(sb._planar_index(sysm, z[0], z[1], lam))
    tol = 1e-4 * max(1.0, abs(lam))
    trio_clear = True
    for name, z in zeros.items():
        j = sysm.jac(z[0], z[1], lam)
        w, vecs = np.linalg.eigh(0.5 * (j + j.T))
        for i in range(2):
            if w[i] <= 0:
                continue
            for s in (+1, -1):
                end, _ = planar_flow(sysm, z + s * 1e-4 * vecs[:, i], lam, horizon=400.0)
                for other, zo in zeros.items():
                    if other != name and np.linalg.norm(end - zo) < tol:
                        trio_clear = False
    indices = tuple(indices)
    ok = locations_ok and indices == (1, 1, 1) and trio_clear
    return BalancedPlaneReport(k, lam, indices, locations_ok, trio_clear, ok)


def potential_monotone(spec: FamilySpec, result: FlowResult, slack: float = 1e-9) -> bool:
    """Check the energy is non-increasing along a recorded trajectory."""
    vals = np.array([spec.potential(x, result.lam) for x in result.states])
    scale = max(1.0, np.abs(vals).max())
    return bool(np.all(np.diff(vals) <= slack * scale))
