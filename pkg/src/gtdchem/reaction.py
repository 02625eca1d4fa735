"""Reaction bookkeeping: species, stoichiometry and the extent of reaction.

Units are J, L, K, mol throughout, so pressures carry J/L.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

R_GAS = 8.314  # J/(mol K)
DOMAIN_MARGIN = 1e-9  # mol, keeps ln(n_i) finite at the interval ends


@dataclass(frozen=True)
class SpeciesParams:
    """Per-species constants of the fundamental equation.

    ``U0``, ``V0``, ``n0`` are the reference state (``U0`` is the total
    reference energy of ``n0`` moles). ``a`` and ``b`` are the van der Waals
    constants, both zero for an ideal gas.
    """

    label: str
    c: float
    s0: float
    U0: float
    V0: float = 1.0
    n0: float = 1.0
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        for name in ("c", "n0", "V0", "U0"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"species {self.label!r}: {name} must be > 0")
        for name in ("a", "b"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"species {self.label!r}: {name} must be >= 0")

    def T0(self, R: float = R_GAS) -> float:
        """Reference temperature fixed by ``U0 = c R T0 n0``."""
        return self.U0 / (self.c * R * self.n0)

    def beta0(self, R: float = R_GAS) -> float:
        return 1.0 / self.T0(R)

    @property
    def is_ideal(self) -> bool:
        return self.a == 0.0 and self.b == 0.0


@dataclass(frozen=True)
class ExtentInterval:
    xi_min: float
    xi_max: float

    def __post_init__(self):
        if not self.xi_min < self.xi_max:
            raise ConfigurationError(
                f"degenerate extent interval [{self.xi_min}, {self.xi_max}]"
            )

    def numeric(self, margin: float = DOMAIN_MARGIN) -> tuple[float, float]:
        """Closed interval used for evaluating potentials and metrics."""
        return self.xi_min + margin, self.xi_max - margin

    def contains(self, xi: float, closed: bool = True) -> bool:
        if closed:
            return self.xi_min <= xi <= self.xi_max
        return self.xi_min < xi < self.xi_max


@dataclass(frozen=True)
class ReactionSpec:
    species: tuple[SpeciesParams, ...]
    nu: tuple[float, ...]
    n_init: tuple[float, ...]
    T: float
    V: float
    R: float = R_GAS
    _nu_arr: np.ndarray = field(init=False, repr=False, compare=False)
    _n0_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __init__(
        self,
        species: Sequence[SpeciesParams],
        nu: Sequence[float],
        n_init: Sequence[float],
        T: float,
        V: float,
        R: float = R_GAS,
    ):
        object.__setattr__(self, "species", tuple(species))
        object.__setattr__(self, "nu", tuple(float(v) for v in nu))
        object.__setattr__(self, "n_init", tuple(float(v) for v in n_init))
        object.__setattr__(self, "T", float(T))
        object.__setattr__(self, "V", float(V))
        object.__setattr__(self, "R", float(R))
        self._validate()
        object.__setattr__(self, "_nu_arr", np.array(self.nu))
        object.__setattr__(self, "_n0_arr", np.array(self.n_init))

    def _validate(self):
        k = len(self.species)
        if k < 2 or len(self.nu) != k or len(self.n_init) != k:
            raise ConfigurationError(
                "species, nu and n_init must have equal length >= 2 "
                f"(got {k}, {len(self.nu)}, {len(self.n_init)})"
            )
        if not any(v < 0 for v in self.nu) or not any(v > 0 for v in self.nu):
            raise ConfigurationError("need at least one reactant (nu<0) and one product (nu>0)")
        if any(n < 0 for n in self.n_init):
            raise ConfigurationError("initial moles must be >= 0")
        if not self.T > 0:
            raise ConfigurationError("temperature_K must be > 0")
        if not self.V > 0:
            raise ConfigurationError("volume_L must be > 0")
        if not self.R > 0:
            raise ConfigurationError("R must be > 0")

    @property
    def beta(self) -> float:
        return 1.0 / self.T

    @property
    def nu_array(self) -> np.ndarray:
        return self._nu_arr

    @property
    def n_init_array(self) -> np.ndarray:
        return self._n0_arr

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.species]

    @property
    def is_ideal(self) -> bool:
        return all(s.is_ideal for s in self.species)

    def permuted(self, order: Sequence[int]) -> "ReactionSpec":
        return ReactionSpec(
            [self.species[i] for i in order],
            [self.nu[i] for i in order],
            [self.n_init[i] for i in order],
            self.T,
            self.V,
            self.R,
        )


def extent_bounds(spec: ReactionSpec) -> ExtentInterval:
    """Largest interval of extents keeping every mole count non-negative."""
    upper = [n / -v for n, v in zip(spec.n_init, spec.nu) if v < 0]
    lower = [n / v for n, v in zip(spec.n_init, spec.nu) if v > 0]
    return ExtentInterval(-min(lower), min(upper))


def moles_at(spec: ReactionSpec, xi: float) -> list[float]:
    """Mole numbers ``n_i = n_i0 + nu_i xi``.

    Raises DomainError naming the first species that would go negative.
    """
    bounds = extent_bounds(spec)
    if not bounds.contains(xi):
        for label, n0, v in zip(spec.labels, spec.n_init, spec.nu):
            if n0 + v * xi < 0:
                raise DomainError(
                    f"extent {xi} drives species {label!r} negative "
                    f"(admissible [{bounds.xi_min}, {bounds.xi_max}])"
                )
    return [n0 + v * xi for n0, v in zip(spec.n_init, spec.nu)]
