"""Legendre transformations between representations.

A phase-space point carries the potential value ``Phi``, the extensive
coordinates ``E`` and their conjugates ``I`` (``I_a = dPhi/dE^a`` on the
equilibrium manifold).  The transform over an index ``k`` maps

    Phi~ = Phi - E^k I^k,   E~^k = I^k,   I~^k = -E^k

so entropy with ``I_U = 1/T`` goes to the Massieu potential ``S - U/T`` with
coordinate ``beta`` and conjugate ``dphi/dbeta = -U``.  Points remember which
indices are currently transformed; transforming such an index again applies
the inverse map ``E = -I~, I = E~, Phi = Phi~ - E~ I~``.  Applying the
operation twice over the same index set therefore restores the original
point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, DomainError
from .potentials import ReducedPotential

REACTION_LABEL = "xi"


@dataclass(frozen=True)
class PhasePoint:
    """Point ``(Phi, E^a, I^a)`` of the thermodynamic phase space.

    ``labels`` names the extensive coordinates (``"xi"`` marks the reaction
    coordinate, which may not be transformed). ``transformed`` holds the
    1-based indices currently in their Legendre-dual role.
    """

    Phi: float
    E: tuple[float, ...]
    I: tuple[float, ...]
    labels: tuple[str, ...] | None = None
    transformed: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "E", tuple(float(x) for x in self.E))
        object.__setattr__(self, "I", tuple(float(x) for x in self.I))
        if len(self.E) != len(self.I):
            raise ValueError(f"E and I lengths differ ({len(self.E)} vs {len(self.I)})")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != len(self.E):
                raise ValueError("labels must name every extensive coordinate")
        object.__setattr__(self, "transformed", frozenset(self.transformed))

    @property
    def n(self) -> int:
        return len(self.E)


def phase_point(phi: ReducedPotential, e1: float, e2: float) -> PhasePoint:
    """Lift a point of the equilibrium manifold to phase space."""
    val, grad, _ = phi.derivatives(float(e1), float(e2))
    return PhasePoint(float(val), (e1, e2), (float(grad[0]), float(grad[1])), tuple(phi.coords))


def legendre_transform(point: PhasePoint, index_set: Iterable[int]) -> PhasePoint:
    """Legendre transform over the 1-based ``index_set``.

    An empty set returns the point unchanged. Indices outside ``1..n`` raise
    ValueError; transforming the reaction coordinate raises
    ConfigurationError because the metric's reaction component is only valid
    for transforms that leave it alone.
    """
    idx = sorted(set(int(k) for k in index_set))
    for k in idx:
        if not 1 <= k <= point.n:
            raise ValueError(f"index {k} out of range 1..{point.n}")
        if point.labels is not None and point.labels[k - 1] == REACTION_LABEL:
            raise ConfigurationError("Legendre transforms that change the role of xi are not supported")
    if not idx:
        return point
    Phi = point.Phi
    E, I = list(point.E), list(point.I)
    transformed = set(point.transformed)
    for k in idx:
        e, i = E[k - 1], I[k - 1]
        Phi -= e * i
        if k in transformed:
            E[k - 1], I[k - 1] = -i, e
            transformed.remove(k)
        else:
            E[k - 1], I[k - 1] = i, -e
            transformed.add(k)
    return PhasePoint(Phi, tuple(E), tuple(I), point.labels, frozenset(transformed))


def verify_first_law(phi: ReducedPotential, point, rel_step: float = 1e-4) -> float:
    """Largest scaled mismatch between numerical dPhi/dE^a and the analytic I_a.

    Central differences with one Richardson level. Each component is scaled
    by |I_a| (or 1 where I_a vanishes). Raises DomainError if the stencil
    leaves the domain.
    """
    x = np.asarray(point, dtype=float)
    if x.shape != (2,):
        raise ValueError("point must be a coordinate pair")
    _, grad, _ = phi.derivatives(x[0], x[1])
    h = np.where(x != 0, np.abs(x), 1.0) * rel_step
    stencil = []
    for a in range(2):
        for s in (1.0, -1.0, 0.5, -0.5):
            p = x.copy()
            p[a] += s * h[a]
            stencil.append(p)
    stencil = np.array(stencil)
    if not phi.in_domain(stencil[:, 0], stencil[:, 1]):
        raise DomainError(f"first-law stencil around {tuple(x)} leaves the domain {phi.domain}")
    vals = np.asarray(phi.derivatives(stencil[:, 0], stencil[:, 1])[0], dtype=float)
    vals = np.broadcast_to(vals, (8,))
    residual = 0.0
    for a in range(2):
        vp, vm, vph, vmh = vals[4 * a : 4 * a + 4]
        d_full = (vp - vm) / (2 * h[a])
        d_half = (vph - vmh) / h[a]
        fd = (4 * d_half - d_full) / 3
        scale = abs(grad[a]) if grad[a] != 0 else 1.0
        residual = max(residual, abs(fd - grad[a]) / scale)
    return float(residual)
