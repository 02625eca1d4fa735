"""Equilibrium extent of reaction by three independent routes.

* ``xi_root``: zero of the affinity sum nu_i mu_i, evaluated from the
  per-species chemical potentials.
* ``xi_scan``: maximum of the potential along xi (grid argmax refined by a
  bounded golden-section/parabolic search).
* ``xi_singular``: zero of ``xi dPhi/dxi``, the denominator of g_xixi.

The first route goes through the species states, the other two only through
the reduced potential, so agreement between them is a genuine check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .diffgeo import metric_grid
from .errors import NumericError
from .potentials import ReducedPotential, chemical_potential
from .reaction import ReactionSpec

logger = logging.getLogger(__name__)

BRACKET_POINTS = 256
SCAN_POINTS = 10_000
ROOT_RTOL = 1e-10

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass
class EquilibriumReport:
    """Result of ``find_equilibrium``.

    ``status`` is ``"interior"`` or ``"boundary"``; in the latter case the affinity
    keeps one sign, so the reaction runs to the end of the extent interval
    given by ``boundary`` and the three values all sit at that end.
    """

    xi_root: float
    xi_scan: float
    xi_singular: float
    spread: float
    method_details: dict = field(default_factory=dict)
    status: str = INTERIOR
    boundary: str | None = None
    warnings: list[str] = field(default_factory=list)


def _second(phi: ReducedPotential, e1: float | None) -> float:
    return phi.anchor if e1 is None else float(e1)


def affinity(spec: ReactionSpec, phi: ReducedPotential, xi: float, e1: float | None = None) -> float:
    """sum_i nu_i mu_i / T at extent ``xi`` (first coordinate at ``e1``, default anchor)."""
    if phi.states is None:
        raise ValueError("potential carries no species states")
    states, T = phi.states(_second(phi, e1), float(xi))
    total = 0.0
    for st, p, nu in zip(states, spec.species, spec.nu):
        if nu:
            total += nu * chemical_potential(st, p, T, spec.R)
    return total / T


def singularity_function(spec: ReactionSpec, phi: ReducedPotential, xi: float, e1: float | None = None) -> float:
    """D(xi) = xi sum_i nu_i mu_i / T.

    Equal to ``-xi dPhi/dxi``, so its zero is where g_xixi blows up.
    Forward-running reactions (affinity < 0) give D < 0.
    """
    return float(xi) * affinity(spec, phi, xi, e1)


def ideal_closed_form_xi(R: float) -> float:
    """Equilibrium extent 1 / (1 + 2 sqrt(2) exp(-1/R)).

    Specific to the two-species reference configuration (A -> B, one mole
    of A initially, B with twice the reference energy of A); it does not
    generalise to other parameter sets.
    """
    if not R > 0:
        raise ValueError("R must be > 0")
    return 1.0 / (1.0 + 2.0 * math.sqrt(2.0) * math.exp(-1.0 / R))


@dataclass
class PotentialScan:
    """Columns of a potential scan along xi at fixed first coordinate.

    ``g_xixi`` is NaN where the metric is singular.
    """

    xi: np.ndarray
    potential: np.ndarray
    D: np.ndarray
    g_xixi: np.ndarray
    e1: float


def _grid(phi: ReducedPotential, n: int) -> np.ndarray:
    lo, hi = phi.xi_domain
    return np.linspace(lo, hi, n)


def scan_potential(spec: ReactionSpec, phi: ReducedPotential, grid_size: int, e1: float | None = None) -> PotentialScan:
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    x1 = _second(phi, e1)
    xi = _grid(phi, grid_size)
    pot = np.asarray(phi.eval(np.full_like(xi, x1), xi), dtype=float)
    D = np.array([singularity_function(spec, phi, x, x1) for x in xi])
    g = metric_grid(phi, np.full_like(xi, x1), xi)[1, 1]
    return PotentialScan(xi, pot, D, g, x1)


def _sign_changes(values: np.ndarray) -> np.ndarray:
    s = np.sign(values)
    return np.nonzero(s[:-1] * s[1:] < 0)[0]


def _bracket(f, grid: np.ndarray, what: str):
    vals = np.array([f(x) for x in grid])
    exact = np.nonzero(vals == 0)[0]
    if exact.size:
        return None, float(grid[exact[0]]), vals
    idx = _sign_changes(vals)
    if idx.size > 1:
        raise NumericError(
            f"{what} changes sign {idx.size} times on the bracketing grid "
            f"(near xi = {', '.join(f'{grid[i]:.4g}' for i in idx)}); equilibrium is not unique"
        )
    if idx.size == 0:
        return None, None, vals
    i = int(idx[0])
    return (float(grid[i]), float(grid[i + 1])), None, vals


def _root(f, bracket, scale: float):
    x, r = optimize.brentq(f, *bracket, xtol=1e-15, rtol=4 * np.finfo(float).eps, full_output=True)
    residual = abs(f(x))
    if residual > ROOT_RTOL * max(scale, 1e-300):
        logger.warning("root residual %.3e exceeds %.1e x scale %.3e", residual, ROOT_RTOL, scale)
    return float(x), {"iterations": r.iterations, "evaluations": r.function_calls, "residual": residual}


def _affinity_scale(spec: ReactionSpec, phi: ReducedPotential, xi: float, e1: float) -> float:
    states, T = phi.states(e1, xi)
    return sum(abs(nu * chemical_potential(st, p, T, spec.R)) for st, p, nu in zip(states, spec.species, spec.nu)) / T


def _xi_scan(phi: ReducedPotential, e1: float):
    xi = _grid(phi, SCAN_POINTS)
    pot = np.asarray(phi.eval(np.full_like(xi, e1), xi), dtype=float)
    i = int(np.argmax(pot))
    interior = (pot[1:-1] > pot[:-2]) & (pot[1:-1] >= pot[2:])
    n_max = int(np.count_nonzero(interior))
    warnings = []
    if n_max > 1:
        warnings.append(f"potential has {n_max} local maxima along xi; returning the global one")
    if i in (0, len(xi) - 1):
        return float(xi[i]), {"grid_index": i, "refined": False}, warnings

    def neg(x):
        return -float(phi.eval(e1, x))

    # golden-section search with parabolic steps, confined to the two bins
    # around the grid maximum (ties between neighbours are allowed)
    res = optimize.minimize_scalar(
        neg, bounds=(xi[i - 1], xi[i + 1]), method="bounded", options={"xatol": 1e-12}
    )
    x = float(res.x) if -res.fun >= pot[i] else float(xi[i])
    return x, {"grid_index": i, "refined": True, "evaluations": int(res.nfev)}, warnings


def find_equilibrium(spec: ReactionSpec, phi: ReducedPotential, e1: float | None = None) -> EquilibriumReport:
    """Locate the equilibrium extent at first coordinate ``e1`` (default anchor).

    Raises NumericError when the affinity changes sign more than once.
    """
    x1 = _second(phi, e1)
    grid = _grid(phi, BRACKET_POINTS)

    def A(x):
        return affinity(spec, phi, x, x1)

    def D_metric(x):
        return float(x * phi.grad(x1, x)[1])

    bracket, exact, vals = _bracket(A, grid, "affinity")
    xi_scan, scan_details, warnings = _xi_scan(phi, x1)
    if bracket is None and exact is None:
        # one sign throughout: negative affinity drives the reaction forward
        end = "xi_max" if vals[0] < 0 else "xi_min"
        x_end = float(grid[-1] if end == "xi_max" else grid[0])
        return EquilibriumReport(
            x_end, xi_scan, x_end, abs(xi_scan - x_end),
            {"scan": scan_details, "affinity_sign": float(np.sign(vals[0]))},
            BOUNDARY, end, warnings + ["reaction proceeds to the boundary; no interior equilibrium"],
        )
    if exact is not None:
        xi_root, root_details = exact, {"iterations": 0, "evaluations": 0, "residual": 0.0}
    else:
        xi_root, root_details = _root(A, bracket, _affinity_scale(spec, phi, bracket[0], x1))

    sbracket, sexact, _ = _bracket(D_metric, grid, "xi dPhi/dxi")
    if sexact is not None:
        xi_sing, sing_details = sexact, {"iterations": 0, "evaluations": 0, "residual": 0.0}
    elif sbracket is None:
        raise NumericError("xi dPhi/dxi has no sign change although the affinity does")
    else:
        scale = max(abs(float(phi.eval(x1, sbracket[0]))), 1.0)
        xi_sing, sing_details = _root(D_metric, sbracket, scale)

    values = (xi_root, xi_scan, xi_sing)
    spread = max(abs(a - b) for a in values for b in values)
    details = {"root": root_details, "scan": scan_details, "singular": sing_details}
    return EquilibriumReport(xi_root, xi_scan, xi_sing, spread, details, INTERIOR, None, warnings)
