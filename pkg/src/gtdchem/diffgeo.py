"""Metric, connection and curvature of the two-dimensional equilibrium manifold.

The metric comes from the potential through

    g_11 = -Phi_11 / (E1 Phi_1)
    g_22 = -Phi_22 / (E2 Phi_2)
    g_12 = g_21 = -1/2 [1/(E1 Phi_1) + 1/(E2 Phi_2)] Phi_12

(gauge k = -1, Lambda = -1). The single mixed ``dE1 dE2`` term of the line
element is split evenly between g_12 and g_21 so that the tensor is
symmetric.

Metric components use the potential's analytic second derivatives. Their
first derivatives (Christoffel symbols) and second derivatives (curvature)
are centred finite differences with one Richardson level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .potentials import ReducedPotential

EPS = np.finfo(float).eps
SINGULAR_RTOL = 1e-12

# Relative finite-difference steps. Christoffels alone use CHRISTOFFEL_STEP;
# curvature differentiates Christoffels (taken with CURVATURE_INNER_STEP) with
# CURVATURE_STEP.
CHRISTOFFEL_STEP = EPS ** (1 / 4)
CURVATURE_STEP = 1e-2
CURVATURE_INNER_STEP = 1e-3


@dataclass(frozen=True)
class MetricPoint:
    coords: tuple[float, float]
    g: np.ndarray
    g_inv: np.ndarray
    det_g: float


@dataclass(frozen=True)
class ConnectionPoint:
    coords: tuple[float, float]
    gamma: np.ndarray  # gamma[a, b, c] = Gamma^a_{bc}


@dataclass(frozen=True)
class CurvaturePoint:
    coords: tuple[float, float]
    riemann: np.ndarray  # riemann[a, b, c, d] = R^a_{bcd}
    ricci: np.ndarray
    scalar: float
    g: np.ndarray


def default_steps(point, factor: float = CHRISTOFFEL_STEP) -> np.ndarray:
    """Per-coordinate step h_a = |E^a| * factor (``factor`` itself at E^a = 0).

    Relative rather than unit-floored steps: coordinates such as beta ~ 1/300
    would otherwise be stepped across zero.
    """
    p = np.abs(np.asarray(point, dtype=float))
    return np.where(p > 0, p, 1.0) * factor


def _metric_arrays(phi: ReducedPotential, e1, e2):
    """Metric components at arrays of points, shape (2, 2, ...)."""
    return _metric_and_grad(phi, e1, e2)[0]


def _metric_and_grad(phi: ReducedPotential, e1, e2):
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    if not phi.in_domain(e1, e2):
        raise DomainError(f"point(s) outside the potential's domain {phi.domain}")
    val, grad, hess = phi.derivatives(e1, e2)
    f1 = e1 * grad[0]
    f2 = e2 * grad[1]
    scale = np.maximum(np.abs(val), 1.0)
    for k, f in enumerate((f1, f2)):
        bad = ~(np.abs(f) > SINGULAR_RTOL * scale)
        if np.any(bad):
            value = float(np.asarray(f)[bad].flat[0]) if np.ndim(f) else float(f)
            raise SingularityError(
                f"E^{k + 1} dPhi/dE^{k + 1} vanishes (={value:.3e}); metric undefined",
                factor=k,
                value=value,
            )
    g11 = -hess[0, 0] / f1
    g22 = -hess[1, 1] / f2
    g12 = -0.5 * (1.0 / f1 + 1.0 / f2) * hess[0, 1]
    return np.array([[g11, g12], [g12, g22]]), grad


def metric_grid(phi: ReducedPotential, e1, e2) -> np.ndarray:
    """Metric components (2, 2, ...) on arrays of points, NaN where singular.

    Unlike ``metric_at`` this never raises on singular points; callers flag
    the NaN entries themselves.
    """
    e1, e2 = np.broadcast_arrays(np.asarray(e1, dtype=float), np.asarray(e2, dtype=float))
    val, grad, hess = phi.derivatives(e1, e2)
    f1 = e1 * grad[0]
    f2 = e2 * grad[1]
    scale = np.maximum(np.abs(val), 1.0)
    bad = ~((np.abs(f1) > SINGULAR_RTOL * scale) & (np.abs(f2) > SINGULAR_RTOL * scale))
    with np.errstate(divide="ignore", invalid="ignore"):
        g11 = -hess[0, 0] / f1
        g22 = -hess[1, 1] / f2
        g12 = -0.5 * (1.0 / f1 + 1.0 / f2) * hess[0, 1]
    g = np.array([[g11, g12], [g12, g22]])
    g[:, :, bad] = np.nan
    return g


def _inverse2(g):
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    inv = np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]]) / det
    return inv, det


def metric_at(phi: ReducedPotential, point) -> MetricPoint:
    e1, e2 = (float(x) for x in point)
    g = _metric_arrays(phi, e1, e2)
    g_inv, det = _inverse2(g)
    if det == 0 or not np.isfinite(det):
        raise SingularityError(f"degenerate metric at {point} (det={det})")
    return MetricPoint((e1, e2), g, g_inv, float(det))


def _offsets(h):
    """Stencil offsets: +-h and +-h/2 along each coordinate, shape (8, 2)."""
    offs = []
    for c in range(2):
        for s in (h[c], -h[c], h[c] / 2, -h[c] / 2):
            d = np.zeros(2)
            d[c] = s
            offs.append(d)
    return np.array(offs)


def _fd_derivative(values, h, richardson: bool):
    """Derivatives along both coordinates from values on the ``_offsets`` stencil.

    ``values`` has the stencil index first (8, ...). Returns (2, ...).
    """
    out = []
    for c in range(2):
        vp, vm, vph, vmh = values[4 * c : 4 * c + 4]
        d_full = (vp - vm) / (2 * h[c])
        if not richardson:
            out.append(d_full)
            continue
        d_half = (vph - vmh) / h[c]
        out.append((4 * d_half - d_full) / 3)
    return np.array(out)


def _christoffel_batch(phi, points, h, richardson=True, with_center=False):
    """Christoffel symbols at an array of points (m, 2), returned as (m, 2, 2, 2).

    With ``with_center`` also returns the metric (m, 2, 2) and potential
    gradient (m, 2) at the points themselves.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    offs = _offsets(h)
    # centre first, then the 8 stencil points, for every base point
    stencil = np.concatenate([points[:, None, :], points[:, None, :] + offs[None]], axis=1)
    g, grad = _metric_and_grad(phi, stencil[..., 0], stencil[..., 1])  # (2, 2, m, 9)
    g = np.moveaxis(g, (2, 3), (0, 1))  # (m, 9, 2, 2)
    g0 = g[:, 0]
    g_inv, _ = _inverse2(np.moveaxis(g0, 0, -1))
    g_inv = np.moveaxis(g_inv, -1, 0)  # (m, 2, 2)
    dg = _fd_derivative(np.moveaxis(g[:, 1:], 1, 0), h, richardson)  # (2, m, 2, 2): dg[c, m, a, b]
    dg = np.moveaxis(dg, 0, 1)  # (m, c, a, b)
    # Gamma^a_{bc} = 1/2 g^{ad} (d_c g_db + d_b g_dc - d_d g_bc)
    bracket = (
        np.einsum("mcdb->mdbc", dg)
        + np.einsum("mbdc->mdbc", dg)
        - np.einsum("mdbc->mdbc", dg)
    )
    gamma = 0.5 * np.einsum("mad,mdbc->mabc", g_inv, bracket)
    if with_center:
        return gamma, g0, np.moveaxis(grad[:, :, 0], 0, -1)
    return gamma


def christoffel_at(phi: ReducedPotential, point, step=None, richardson: bool = True) -> ConnectionPoint:
    """Christoffel symbols Gamma^a_{bc} at a point.

    ``step`` overrides the per-coordinate finite-difference step.
    """
    point = np.asarray(point, dtype=float)
    h = default_steps(point) if step is None else np.broadcast_to(np.asarray(step, float), (2,))
    gamma = _christoffel_batch(phi, point, h, richardson)[0]
    return ConnectionPoint((float(point[0]), float(point[1])), gamma)


def curvature_at(phi: ReducedPotential, point, step=None, inner_step=None) -> CurvaturePoint:
    """Riemann tensor, Ricci tensor and curvature scalar at a point.

    R^a_{bcd} = d_c Gamma^a_{bd} - d_d Gamma^a_{bc}
                + Gamma^a_{ec} Gamma^e_{bd} - Gamma^a_{ed} Gamma^e_{bc}
    R_{ab} = R^c_{acb},  R = g^{ab} R_{ab}
    """
    point = np.asarray(point, dtype=float)
    h_out = (
        default_steps(point, CURVATURE_STEP) if step is None
        else np.broadcast_to(np.asarray(step, float), (2,))
    )
    h_in = (
        default_steps(point, CURVATURE_INNER_STEP) if inner_step is None
        else np.broadcast_to(np.asarray(inner_step, float), (2,))
    )
    stencil = np.concatenate([point[None], point[None] + _offsets(h_out)])
    gam = _christoffel_batch(phi, stencil, h_in)
    G = gam[0]
    dG = _fd_derivative(gam[1:], h_out, True)  # dG[c, a, b, d] = d_c Gamma^a_{bd}
    riemann = (
        np.einsum("cabd->abcd", dG)
        - np.einsum("dabc->abcd", dG)
        + np.einsum("aec,ebd->abcd", G, G)
        - np.einsum("aed,ebc->abcd", G, G)
    )
    m = metric_at(phi, point)
    ricci = np.einsum("cacb->ab", riemann)
    scalar = float(np.einsum("ab,ab->", m.g_inv, ricci))
    return CurvaturePoint((float(point[0]), float(point[1])), riemann, ricci, scalar, m.g)


def lower_first(curv: CurvaturePoint) -> np.ndarray:
    """Fully covariant R_{abcd} = g_{ae} R^e_{bcd}."""
    return np.einsum("ae,ebcd->abcd", curv.g, curv.riemann)


def geodesic_acceleration(phi: ReducedPotential, point, velocity, step=None) -> np.ndarray:
    """-Gamma^a_{bc} V^b V^c."""
    velocity = np.asarray(velocity, dtype=float)
    gamma = christoffel_at(phi, point, step).gamma
    return -np.einsum("abc,b,c->a", gamma, velocity, velocity)


def norm(phi: ReducedPotential, point, velocity) -> float:
    """g_ab V^a V^b at a point."""
    v = np.asarray(velocity, dtype=float)
    return float(v @ metric_at(phi, point).g @ v)


def curvature_scalar_with_floor(phi: ReducedPotential, point) -> tuple[float, float]:
    """Curvature scalar and its finite-difference noise floor.

    The floor is |R(h) - R(h/2)| with both the outer and inner steps halved,
    a step-halving estimate of the discretisation and rounding error.
    """
    point = np.asarray(point, dtype=float)
    full = curvature_at(phi, point).scalar
    half = curvature_at(
        phi, point,
        step=default_steps(point, CURVATURE_STEP / 2),
        inner_step=default_steps(point, CURVATURE_INNER_STEP / 2),
    ).scalar
    return full, abs(full - half)
