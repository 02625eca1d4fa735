"""Geodesics of the equilibrium manifold.

Integrates  d^2 E^a/dtau^2 + Gamma^a_{bc} dE^b/dtau dE^c/dtau = 0  with an
adaptive Dormand-Prince 5(4) pair. The reaction coordinate ``xi`` is the
second coordinate. The metric degenerates where ``xi dPhi/dxi`` vanishes,
which is the chemical equilibrium; integration stops there.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .diffgeo import CHRISTOFFEL_STEP, _christoffel_batch, default_steps
from .errors import DomainError, GTDError, NumericError, SingularityError
from .potentials import ReducedPotential

logger = logging.getLogger(__name__)

SINGULARITY_REACHED = "singularity_reached"
STEP_COLLAPSE = "step_collapse"
DOMAIN_BOUNDARY = "domain_boundary"
MAX_STEPS = "max_steps"
TERMINATIONS = (SINGULARITY_REACHED, STEP_COLLAPSE, DOMAIN_BOUNDARY, MAX_STEPS)

EPS = np.finfo(float).eps
MAX_WIDE_STEP = 1e-2  # cap on the relative E1 step used near the singular locus

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class StepperConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    h0: float = 1e-3
    max_steps: int = 10**6
    min_step: float = 1e-13
    max_step: float = math.inf
    singular_rtol: float = 1e-6
    safety: float = 0.9
    fd_step: float = CHRISTOFFEL_STEP


@dataclass(frozen=True)
class GeodesicState:
    tau: float
    E: tuple[float, float]
    V: tuple[float, float]


@dataclass
class Trajectory:
    samples: list[GeodesicState]
    termination: str
    xi_terminal: float
    norm_drift: float
    norms: np.ndarray = field(repr=False)
    steps: int = 0
    rejected: int = 0
    reasons: dict = field(default_factory=dict, repr=False)

    @property
    def tau(self) -> np.ndarray:
        return np.array([s.tau for s in self.samples])

    @property
    def E(self) -> np.ndarray:
        return np.array([s.E for s in self.samples])

    @property
    def V(self) -> np.ndarray:
        return np.array([s.V for s in self.samples])

    @property
    def xi(self) -> np.ndarray:
        return self.E[:, 1]


def singular_factor(phi: ReducedPotential, e1: float, e2: float) -> float:
    """xi dPhi/dxi, the factor whose zero makes g_xixi blow up."""
    return float(e2 * phi.grad(e1, e2)[1])


class _Rejected(Exception):
    def __init__(self, reason):
        self.reason = reason


def _rhs(phi, y, fd_step):
    """Return (dy/dtau, g(V, V), xi dPhi/dxi) at state y."""
    x, v = y[:2], y[2:]
    h = default_steps(x, fd_step)
    try:
        val, grad, hess = phi.derivatives(x[0], x[1])
        # keep the xi stencil on this side of the singular locus
        dist = abs(grad[1] / hess[1, 1]) if hess[1, 1] != 0 else math.inf
        h[1] = min(h[1], 0.01 * dist)
        # Near the locus g_xixi inherits the rounding of dPhi/dxi magnified by
        # 1/|xi dPhi/dxi|; widen the E1 step to the Richardson optimum
        # (noise ** 1/5) so that this noise is not differentiated.
        D = abs(x[1] * grad[1])
        noise = EPS * max(abs(val), 1.0) / D if D > 0 else 1.0
        if x[0]:
            h[0] = abs(x[0]) * min(max(fd_step, noise**0.2), MAX_WIDE_STEP)
        # ... but never reach across a locus tilted in the (E1, xi) plane
        if hess[0, 1] != 0:
            h[0] = min(h[0], 0.01 * abs(grad[1] / hess[0, 1]))
        gamma, g, grad = _christoffel_batch(phi, x, h, with_center=True)
    except SingularityError:
        raise _Rejected("singular")
    except DomainError:
        raise _Rejected("domain")
    acc = -np.einsum("abc,b,c->a", gamma[0], v, v)
    out = np.concatenate([v, acc])
    if not np.all(np.isfinite(out)):
        raise _Rejected("nonfinite")
    return out, float(v @ g[0] @ v), float(x[1] * grad[0, 1])


def _velocity_floor(y):
    """Error scale for near-zero velocity components.

    A velocity component is measured against the fastest relative coordinate
    speed, so a component that should stay at zero (e.g. dU/dtau for the
    ideal gas) does not force steps down to the finite-difference noise.
    """
    E, V = np.abs(y[:2]), np.abs(y[2:])
    Es = np.where(E > 0, E, 1.0)
    rate = float(np.max(V / Es))
    return np.concatenate([np.zeros(2), Es * rate])


def _drift(norms: np.ndarray, xi: np.ndarray, xi_terminal: float, zone: float) -> float:
    keep = np.abs(xi - xi_terminal) > zone
    keep[0] = True
    ref = norms[0]
    if ref == 0:
        return float(np.max(np.abs(norms[keep] - ref)))
    return float(np.max(np.abs(norms[keep] - ref) / abs(ref)))


def integrate_geodesic(
    phi: ReducedPotential,
    init: GeodesicState,
    cfg: StepperConfig = StepperConfig(),
    drift_zone: float = 1e-2,
) -> Trajectory:
    """Integrate one geodesic from ``init`` until the singular locus or a limit.

    Termination reasons: ``singularity_reached`` when |xi dPhi/dxi| has fallen
    below ``singular_rtol`` times its initial value; ``step_collapse`` when the
    step shrinks below ``min_step``, which happens when every trial step would
    cross the singular locus or reverse the reaction direction;
    ``domain_boundary`` when the step collapses against the domain edge;
    ``max_steps`` when the step budget runs out. ``norm_drift`` is the maximum
    relative change of g(V, V) over samples farther than ``drift_zone`` in xi
    from the terminal point.
    """
    y = np.array([*init.E, *init.V], dtype=float)
    if not phi.in_domain(y[0], y[1]):
        raise DomainError(f"initial point {init.E} outside domain {phi.domain}")
    try:
        f, N0, D0 = _rhs(phi, y, cfg.fd_step)
    except _Rejected as exc:
        raise SingularityError(f"initial point {init.E} is singular ({exc.reason})") from None
    tau = float(init.tau)
    samples = [GeodesicState(tau, (y[0], y[1]), (y[2], y[3]))]
    norms = [N0]

    if not np.any(y[2:]):
        # Zero velocity: the exact solution is the constant point, so stepping
        # only advances tau. Emit the endpoint of the step budget in one go.
        h = min(cfg.h0, cfg.max_step)
        growth = 5.0
        tau_end = tau
        for _ in range(min(cfg.max_steps, 10**4)):
            tau_end += h
            h = min(h * growth, cfg.max_step)
        if cfg.max_steps > 10**4:
            tau_end += h * (cfg.max_steps - 10**4)
        samples.append(GeodesicState(tau_end, (y[0], y[1]), (0.0, 0.0)))
        norms.append(N0)
        return Trajectory(samples, MAX_STEPS, float(y[1]), 0.0, np.array(norms), cfg.max_steps, 0)

    h = min(cfg.h0, cfg.max_step)
    sign_D = math.copysign(1.0, D0)
    sign_v = math.copysign(1.0, y[3]) if y[3] != 0 else 0.0
    steps = rejected = 0
    reasons: dict[str, int] = {}
    last_reason = None
    termination = MAX_STEPS

    h_cap = math.inf
    while steps < cfg.max_steps:
        if h < cfg.min_step * max(1.0, abs(tau)):
            termination = DOMAIN_BOUNDARY if last_reason == "domain" else STEP_COLLAPSE
            break
        try:
            k = [f]
            for s in range(1, 7):
                ys = y + h * sum(a * kk for a, kk in zip(_A[s], k))
                ks, N_new, D_new = _rhs(phi, ys, cfg.fd_step)
                k.append(ks)
        except _Rejected as exc:
            rejected += 1
            last_reason = exc.reason
            reasons[last_reason] = reasons.get(last_reason, 0) + 1
            h_cap = 0.5 * h
            h *= 0.25
            continue
        # the last stage sits at the 5th-order solution (FSAL)
        y_new = ys
        err_vec = h * sum(e * kk for e, kk in zip(_E, k) if e)
        scale = cfg.atol + cfg.rtol * np.maximum(np.maximum(np.abs(y), np.abs(y_new)), _velocity_floor(y))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if not np.isfinite(err):
            rejected += 1
            last_reason = "nonfinite"
            reasons[last_reason] = reasons.get(last_reason, 0) + 1
            h_cap = 0.5 * h
            h *= 0.25
            continue
        if err > 1.0:
            rejected += 1
            last_reason = "error"
            reasons[last_reason] = reasons.get(last_reason, 0) + 1
            h *= max(0.2, cfg.safety * err ** -0.2)
            continue
        reason = None
        if math.copysign(1.0, D_new) != sign_D or D_new == 0.0:
            reason = "crossing"
        elif sign_v and math.copysign(1.0, y_new[3]) != sign_v:
            reason = "turning"
        if reason is not None:
            rejected += 1
            last_reason = reason
            reasons[last_reason] = reasons.get(last_reason, 0) + 1
            h_cap = 0.5 * h
            h *= 0.25
            continue
        tau += h
        y = y_new
        f = k[6]
        steps += 1
        samples.append(GeodesicState(tau, (y[0], y[1]), (y[2], y[3])))
        norms.append(N_new)
        if abs(D_new) < cfg.singular_rtol * abs(D0):
            termination = SINGULARITY_REACHED
            break
        factor = 5.0 if err == 0 else min(5.0, cfg.safety * err ** -0.2)
        # after an event-type rejection steps only shrink, so the event is
        # bracketed and the loop ends by step collapse
        h = min(h * factor, h_cap, cfg.max_step)
        last_reason = None

    norms_arr = np.array(norms)
    xi_arr = np.array([s.E[1] for s in samples])
    drift = _drift(norms_arr, xi_arr, y[1], drift_zone)
    logger.debug("geodesic %s after %d steps (%d rejected), xi*=%.6f", termination, steps, rejected, y[1])
    return Trajectory(samples, termination, float(y[1]), drift, norms_arr, steps, rejected, reasons)


def batch_geodesics(
    phi: ReducedPotential,
    inits: Sequence[GeodesicState],
    cfg: StepperConfig = StepperConfig(),
    workers: int | None = None,
) -> list:
    """Integrate several geodesics; results keep the order of ``inits``.

    A failing run yields its exception in place of a Trajectory.
    """

    def run(init):
        try:
            return integrate_geodesic(phi, init, cfg)
        except GTDError as exc:
            return exc

    if workers is None:
        workers = int(os.environ.get("GTDCHEM_THREADS", "1"))
    if workers <= 1 or len(inits) <= 1:
        return [run(i) for i in inits]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, inits))


def arclength_locus(phi: ReducedPotential, traj: Trajectory, n: int = 201) -> tuple[np.ndarray, np.ndarray]:
    """xi as a function of normalised metric arclength s in [0, 1].

    The metric arclength is the integral of sqrt|g(V, V)| dtau (trapezoid).
    """
    speed = np.sqrt(np.abs(traj.norms))
    tau = traj.tau
    s = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(tau))])
    if s[-1] <= 0:
        raise NumericError("trajectory has zero arclength")
    s = s / s[-1]
    grid = np.linspace(0.0, 1.0, n)
    return grid, np.interp(grid, s, traj.xi)
