"""Fundamental equations of ideal and van der Waals gases and their
reduction to a two-coordinate potential on the equilibrium manifold.

Per-species potentials are functions of ``(U, V, n)`` (entropy) or
``(beta, V, n)`` (Massieu). The multi-species potential is their plain sum;
cross-interaction terms are not modelled (``interaction`` hooks exist but are
identically zero). Reducing to two coordinates uses the equal-temperature
energy split ``U_i(U, V, xi)``.

All derivative routines are analytic and vectorised over arrays of points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .reaction import (
    DOMAIN_MARGIN,
    R_GAS,
    ReactionSpec,
    SpeciesParams,
    extent_bounds,
    moles_at,
)

REPRESENTATIONS = ("entropy_U", "massieu_beta", "entropy_V")
MODELS = ("ideal", "vdw")


@dataclass(frozen=True)
class GasState:
    U: float
    V: float
    n: float


# --------------------------------------------------------------------------
# single-species fundamental equations


def ideal_entropy(state: GasState, params: SpeciesParams, R: float = R_GAS) -> float:
    """S = n s0 + n R ln[(U/U0)^c (V/V0) (n/n0)^-(c+1)]."""
    U, V, n = state.U, state.V, state.n
    if n == 0:
        return 0.0
    if not (U > 0 and V > 0 and n > 0):
        raise DomainError(f"ideal entropy needs U, V, n > 0 (got {state})")
    c = params.c
    log_arg = (
        c * np.log(U / params.U0)
        + np.log(V / params.V0)
        - (c + 1) * np.log(n / params.n0)
    )
    return float(n * params.s0 + n * R * log_arg)


def vdw_entropy(state: GasState, params: SpeciesParams, R: float = R_GAS) -> float:
    """S = n s0 + n R ln[((U/n + a n/V)/(c R T0))^c (n0/V0) (V/n - b)]."""
    U, V, n = state.U, state.V, state.n
    if n == 0:
        return 0.0
    if not (V > 0 and n > 0):
        raise DomainError(f"van der Waals entropy needs V, n > 0 (got {state})")
    w = U / n + params.a * n / V
    q = V / n - params.b
    if w <= 0:
        raise DomainError(f"nonpositive energy argument U/n + a n/V = {w}")
    if q <= 0:
        raise DomainError(f"V/n = {V / n} does not exceed covolume b = {params.b}")
    c = params.c
    log_arg = c * np.log(w / (c * R * params.T0(R))) + np.log(params.n0 / params.V0) + np.log(q)
    return float(n * params.s0 + n * R * log_arg)


def species_entropy(state: GasState, params: SpeciesParams, R: float = R_GAS) -> float:
    if params.is_ideal:
        return ideal_entropy(state, params, R)
    return vdw_entropy(state, params, R)


def entropy_derivatives(U, V, n, params: SpeciesParams, R: float = R_GAS):
    """Entropy of one species with its gradient and Hessian in (U, V, n).

    Handles both gas models (the ideal gas is a = b = 0). Inputs broadcast;
    returns ``(S, grad, hess)`` with shapes ``(...)``, ``(3, ...)``,
    ``(3, 3, ...)``.
    """
    U, V, n = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (U, V, n)))
    a, b, c = params.a, params.b, params.c
    if np.any(n <= 0) or np.any(V <= 0):
        raise DomainError("entropy derivatives need n > 0 and V > 0")
    w = U / n + a * n / V
    q = V / n - b
    if np.any(w <= 0):
        raise DomainError("nonpositive energy argument in entropy")
    if np.any(q <= 0):
        raise DomainError("molar volume does not exceed covolume")
    inv_n = 1.0 / n
    # first partials of w and q, index order (U, V, n)
    dw = np.empty((3,) + U.shape)
    dw[0] = inv_n
    dw[1] = -a * n / V**2
    dw[2] = -U * inv_n**2 + a / V
    dq = np.empty((3,) + U.shape)
    dq[0] = 0.0
    dq[1] = inv_n
    dq[2] = -V * inv_n**2
    L = c * np.log(w / (c * R * params.T0(R))) + np.log(params.n0 / params.V0) + np.log(q)
    dL = c * dw / w + dq / q
    ddL = -c * dw[:, None] * dw[None, :] / w**2 - dq[:, None] * dq[None, :] / q**2
    # sparse second partials of w and q
    ddL[0, 2] -= c * inv_n**2 / w
    ddL[2, 0] = ddL[0, 2]
    ddL[1, 1] += c * 2 * a * n / V**3 / w
    ddL[1, 2] += -c * a / V**2 / w - inv_n**2 / q
    ddL[2, 1] = ddL[1, 2]
    ddL[2, 2] += c * 2 * U * inv_n**3 / w + 2 * V * inv_n**3 / q

    S = n * params.s0 + n * R * L
    grad = n * R * dL
    grad[2] = grad[2] + params.s0 + R * L
    hess = n * R * ddL
    hess[2, :] = hess[2, :] + R * dL
    hess[:, 2] = hess[:, 2] + R * dL
    return S, grad, hess


def massieu_derivatives(beta, V, n, params: SpeciesParams, R: float = R_GAS):
    """Massieu potential S - beta U of one species in (beta, V, n).

    phi = n s0 + n R [c ln(beta0/beta) + ln(n0/V0) + ln(V/n - b)] - n c R + beta a n^2 / V
    """
    beta, V, n = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (beta, V, n)))
    a, b, c = params.a, params.b, params.c
    if np.any(beta <= 0) or np.any(n <= 0) or np.any(V <= 0):
        raise DomainError("Massieu derivatives need beta, V, n > 0")
    q = V / n - b
    if np.any(q <= 0):
        raise DomainError("molar volume does not exceed covolume")
    beta0 = params.beta0(R)
    L = c * np.log(beta0 / beta) + np.log(params.n0 / params.V0) + np.log(q)
    phi = n * params.s0 + n * R * L - n * c * R + beta * a * n**2 / V

    g_b = -n * c * R / beta + a * n**2 / V
    g_V = R / q - beta * a * n**2 / V**2
    g_n = params.s0 + R * L - R * V / (n * q) - c * R + 2 * beta * a * n / V
    h_bb = n * c * R / beta**2
    h_bV = -a * n**2 / V**2
    h_bn = -c * R / beta + 2 * a * n / V
    h_VV = -R / (n * q**2) + 2 * beta * a * n**2 / V**3
    h_Vn = R * V / (n**2 * q**2) - 2 * beta * a * n / V**2
    h_nn = -R * V / (n**2 * q) - R * V * b / (n**2 * q**2) + 2 * beta * a / V
    grad = np.stack([g_b, g_V, g_n])
    hess = np.array([[h_bb, h_bV, h_bn], [h_bV, h_VV, h_Vn], [h_bn, h_Vn, h_nn]])
    return phi, grad, hess


def chemical_potential(state: GasState, params: SpeciesParams, T: float, R: float = R_GAS) -> float:
    """mu = -T dS/dn at fixed U, V."""
    _, grad, _ = entropy_derivatives(state.U, state.V, state.n, params, R)
    return float(-T * grad[2])


def pressure(state: GasState, params: SpeciesParams, T: float, R: float = R_GAS) -> float:
    """p = T dS/dV at fixed U, n, in J/L. Zero for an empty species."""
    if state.n == 0:
        return 0.0
    _, grad, _ = entropy_derivatives(state.U, state.V, state.n, params, R)
    return float(T * grad[1])


def species_temperature(state: GasState, params: SpeciesParams, R: float = R_GAS) -> float:
    """T from 1/T = dS/dU, i.e. U/n + a n/V = c R T."""
    return (state.U / state.n + params.a * state.n / state.V) / (params.c * R)


def energy_at_temperature(params: SpeciesParams, T: float, V: float, n: float, R: float = R_GAS) -> float:
    """Internal energy of ``n`` moles at temperature T (caloric equation of state)."""
    return n * (params.c * R * T - params.a * n / V)


# --------------------------------------------------------------------------
# multi-species totals


def interaction_entropy(spec: ReactionSpec, states: Sequence[GasState]) -> float:
    """Cross-species coupling term of the total fundamental equation.

    Simple mixtures only: always zero.
    """
    return 0.0


def total_entropy(spec: ReactionSpec, per_species_states: Sequence[GasState], xi: float) -> float:
    n_expected = moles_at(spec, xi)
    if len(per_species_states) != len(spec.species):
        raise ValueError("one GasState per species required")
    for label, st, n in zip(spec.labels, per_species_states, n_expected):
        if not np.isclose(st.n, n, rtol=1e-12, atol=1e-15):
            raise ValueError(f"species {label!r}: state has n={st.n}, extent implies {n}")
    total = sum(
        species_entropy(st, p, spec.R) for st, p in zip(per_species_states, spec.species)
    )
    return total + interaction_entropy(spec, per_species_states)


def massieu_potential(spec: ReactionSpec, beta: float, xi: float) -> float:
    """Total Massieu potential phi = S - beta U at inverse temperature beta.

    Ideal gases use the closed form; van der Waals gases go through
    ``phi = -beta sum_i (mu_i n_i - p_i V)`` with each U_i fixed by beta.
    """
    if not beta > 0:
        raise DomainError("beta must be > 0")
    R, V = spec.R, spec.V
    ns = moles_at(spec, xi)
    T = 1.0 / beta
    total = 0.0
    for p, n in zip(spec.species, ns):
        if n == 0:
            continue
        if p.is_ideal:
            log_arg = p.c * np.log(p.beta0(R) / beta) - np.log(n / p.n0) + np.log(V / p.V0)
            total += n * (p.s0 + R * log_arg - p.c * R)
        else:
            st = GasState(energy_at_temperature(p, T, V, n, R), V, n)
            mu = chemical_potential(st, p, T, R)
            pr = pressure(st, p, T, R)
            total += -beta * (mu * n - pr * V)
    return float(total)


# --------------------------------------------------------------------------
# reduction to (E1, xi)


def _check_common_a(spec: ReactionSpec) -> float:
    a_values = {p.a for p in spec.species}
    if len(a_values) != 1:
        raise ConfigurationError(
            f"van der Waals reduction requires a common attraction constant a (got {sorted(a_values)})"
        )
    return a_values.pop()


def _energy_split(spec: ReactionSpec, U, V, xi, a: float):
    """Per-species energies U_i(U, V, xi) of an equal-temperature mixture.

    Returns ``(Ui, J, K)`` where ``J[i, p]`` and ``K[i, p, q]`` are the first
    and second partials of U_i with respect to ``(U, V, xi)``.
    """
    U, V, xi = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (U, V, xi)))
    nu = spec.nu_array.reshape((-1,) + (1,) * U.ndim)
    c = np.array([p.c for p in spec.species]).reshape(nu.shape)
    n = spec.n_init_array.reshape(nu.shape) + nu * xi
    C = np.sum(c * n, axis=0)
    if np.any(C <= 0):
        raise DomainError("sum of c_i n_i vanishes; energy split undefined")
    dC = np.sum(c * nu, axis=0)
    Q = np.sum(n**2, axis=0)
    dQ = 2 * np.sum(n * nu, axis=0)
    ddQ = 2 * np.sum(nu**2, axis=0)
    W = U + a * Q / V

    f = c * n / C
    df = c * (nu * C - n * dC) / C**2
    ddf = -2 * dC * df / C

    Ui = f * W - a * n**2 / V
    J = np.empty((n.shape[0], 3) + n.shape[1:])
    J[:, 0] = f
    J[:, 1] = -f * a * Q / V**2 + a * n**2 / V**2
    J[:, 2] = df * W + f * a * dQ / V - 2 * a * nu * n / V
    K = np.zeros((n.shape[0], 3, 3) + n.shape[1:])
    K[:, 0, 2] = K[:, 2, 0] = df
    K[:, 1, 1] = 2 * f * a * Q / V**3 - 2 * a * n**2 / V**3
    K[:, 1, 2] = K[:, 2, 1] = -df * a * Q / V**2 - f * a * dQ / V**2 + 2 * a * nu * n / V**2
    K[:, 2, 2] = ddf * W + 2 * df * a * dQ / V + f * a * ddQ / V - 2 * a * nu**2 / V
    return Ui, J, K


def reduce_ideal(spec: ReactionSpec, U_total: float, xi: float) -> np.ndarray:
    """Split U_total in proportion to c_i n_i(xi)."""
    if not U_total > 0:
        raise DomainError("U_total must be > 0")
    n = np.array(moles_at(spec, xi))
    c = np.array([p.c for p in spec.species])
    denom = float(np.sum(c * n))
    if denom <= 0:
        raise DomainError("sum of c_i n_i vanishes")
    return c * n / denom * U_total


def reduce_vdw(spec: ReactionSpec, U_total: float, xi: float) -> np.ndarray:
    """Equal-temperature energy split for van der Waals species sharing ``a``."""
    a = _check_common_a(spec)
    moles_at(spec, xi)
    Ui, _, _ = _energy_split(spec, U_total, spec.V, xi, a)
    return np.asarray(Ui, dtype=float)


def total_energy_at_temperature(spec: ReactionSpec, T: float, xi: float, V: float | None = None) -> float:
    V = spec.V if V is None else V
    return float(
        sum(energy_at_temperature(p, T, V, n, spec.R) for p, n in zip(spec.species, moles_at(spec, xi)))
    )


@dataclass(frozen=True)
class ReducedPotential:
    """Scalar potential Phi(E1, E2) with analytic first and second partials.

    ``derivatives(e1, e2)`` returns ``(Phi, grad, hess)`` with shapes
    ``(...)``, ``(2, ...)``, ``(2, 2, ...)`` for broadcastable array inputs.
    ``anchor`` is the value at which the first coordinate is held for
    one-dimensional scans. ``states``, when available, maps a point to the
    per-species gas states and the common temperature.
    """

    coords: tuple[str, str]
    derivatives: Callable
    domain: tuple[tuple[float, float], tuple[float, float]]
    anchor: float = 1.0
    kind: str = "generic"
    states: Callable | None = field(default=None, compare=False)
    spec: ReactionSpec | None = field(default=None, compare=False)

    def eval(self, e1, e2):
        phi, _, _ = self.derivatives(e1, e2)
        return phi if np.ndim(phi) else float(phi)

    def grad(self, e1, e2) -> np.ndarray:
        return self.derivatives(e1, e2)[1]

    def hess(self, e1, e2) -> np.ndarray:
        return self.derivatives(e1, e2)[2]

    def in_domain(self, e1, e2) -> bool:
        (lo1, hi1), (lo2, hi2) = self.domain
        e1, e2 = np.asarray(e1), np.asarray(e2)
        return bool(np.all((e1 > lo1) & (e1 < hi1) & (e2 >= lo2) & (e2 <= hi2)))

    @property
    def xi_domain(self) -> tuple[float, float]:
        return self.domain[1]


def infer_model(spec: ReactionSpec) -> str:
    return "ideal" if spec.is_ideal else "vdw"


def _sum_species(spec, per_species, n_stack, J_list, K_list):
    """Chain rule: sum_i f_i(x_i) with x_i(E) given by Jacobians J and second derivatives K."""
    phi = 0.0
    grad = 0.0
    hess = 0.0
    for i, p in enumerate(spec.species):
        f, df, ddf = per_species(i, p)
        J, K = J_list[i], K_list[i]
        phi = phi + f
        grad = grad + np.einsum("k...,kp...->p...", df, J)
        hess = (
            hess
            + np.einsum("kl...,kp...,lq...->pq...", ddf, J, J)
            + np.einsum("k...,kpq...->pq...", df, K)
        )
    return phi, grad, hess


def build_reduced_potential(
    spec: ReactionSpec,
    representation: str,
    model: str | None = None,
    xi_ref: float = 0.0,
    margin: float = DOMAIN_MARGIN,
) -> ReducedPotential:
    """Two-coordinate potential for the reaction.

    ``entropy_U``: S(U, xi) at the volume of ``spec``.
    ``massieu_beta``: phi(beta, xi) at the volume of ``spec``.
    ``entropy_V``: S(V, xi) at the total energy the mixture has at ``spec.T``
    and extent ``xi_ref``.

    The first coordinate is anchored at ``U(spec.T, xi_ref)``, ``1/spec.T`` and
    ``spec.V`` respectively.
    """
    if representation not in REPRESENTATIONS:
        raise ConfigurationError(f"unknown representation {representation!r}; choose from {REPRESENTATIONS}")
    inferred = infer_model(spec)
    model = inferred if model is None else model
    if model not in MODELS:
        raise ConfigurationError(f"unknown gas model {model!r}")
    if model == "ideal" and inferred != "ideal":
        raise ConfigurationError("model 'ideal' given but species carry nonzero a or b")

    bounds = extent_bounds(spec)
    xi_dom = bounds.numeric(margin)
    R, nu, n0 = spec.R, spec.nu_array, spec.n_init_array

    def moles(xi):
        return [n0[i] + nu[i] * xi for i in range(len(nu))]

    if representation == "massieu_beta":
        V = spec.V

        def derivatives(beta, xi):
            beta, xi = np.broadcast_arrays(np.asarray(beta, float), np.asarray(xi, float))
            ns = moles(xi)
            one, zero = np.ones_like(xi), np.zeros_like(xi)
            # x_i = (beta, V, n_i) as a function of (beta, xi)
            J = [np.array([[one, zero], [zero, zero], [zero, nu[i] * one]]) for i in range(len(nu))]
            K = [np.zeros((3, 2, 2) + xi.shape) for _ in nu]
            return _sum_species(
                spec, lambda i, p: massieu_derivatives(beta, V, ns[i], p, R), ns, J, K
            )

        def states(beta, xi):
            T = 1.0 / beta
            ns = moles(xi)
            return [
                GasState(energy_at_temperature(p, T, V, n, R), V, n) for p, n in zip(spec.species, ns)
            ], T

        return ReducedPotential(
            ("beta", "xi"), derivatives, ((0.0, np.inf), xi_dom), 1.0 / spec.T,
            "massieu", states, spec,
        )

    a = _check_common_a(spec) if model == "vdw" else 0.0
    max_n = np.maximum(n0 + nu * bounds.xi_min, n0 + nu * bounds.xi_max)
    v_lo = float(max(p.b * m for p, m in zip(spec.species, max_n)))

    if representation == "entropy_U":
        V_fixed = spec.V
        U_anchor = total_energy_at_temperature(spec, spec.T, xi_ref)

        def full(U, xi):
            return U, V_fixed, xi

        pick = (0, 2)
        coords = ("U", "xi")
        domain = ((0.0, np.inf), xi_dom)
        anchor = U_anchor
    else:
        U_fixed = total_energy_at_temperature(spec, spec.T, xi_ref)

        def full(V, xi):
            return U_fixed, V, xi

        pick = (1, 2)
        coords = ("V", "xi")
        domain = ((v_lo, np.inf), xi_dom)
        anchor = spec.V

    def derivatives(e1, e2):
        U, V, xi = np.broadcast_arrays(*(np.asarray(x, float) for x in full(e1, e2)))
        Ui, JU, KU = _energy_split(spec, U, V, xi, a)
        ns = moles(xi)
        one, zero = np.ones_like(xi), np.zeros_like(xi)
        J, K = [], []
        for i in range(len(nu)):
            # x_i = (U_i, V, n_i) as a function of (U, V, xi)
            Ji = np.array([JU[i], [zero, one, zero], [zero, zero, nu[i] * one]])
            Ki = np.zeros((3, 3, 3) + xi.shape)
            Ki[0] = KU[i]
            J.append(Ji[:, list(pick)])
            K.append(Ki[:, list(pick)][:, :, list(pick)])
        return _sum_species(
            spec, lambda i, p: entropy_derivatives(Ui[i], V, ns[i], p, R), ns, J, K
        )

    def states(e1, xi):
        U, V, xi = full(e1, xi)
        Ui, _, _ = _energy_split(spec, U, V, xi, a)
        ns = moles(xi)
        sts = [GasState(float(u), float(V), float(n)) for u, n in zip(np.atleast_1d(Ui), ns)]
        k = next(i for i, st in enumerate(sts) if st.n > 0)
        return sts, species_temperature(sts[k], spec.species[k], R)

    return ReducedPotential(coords, derivatives, domain, anchor, "entropy", states, spec)
