"""Independent symbolic oracles built with sympy.

The potentials here are written directly from the single-species fundamental
equations, without going through gtdchem, and differentiated symbolically.
"""

from __future__ import annotations

import functools

import mpmath
import numpy as np
import sympy as sp

R = sp.Rational(8314, 1000)
C = sp.Rational(3, 2)
V_TOTAL = 20
N_TOTAL = 1
# (s0, U0) for species A and B; V0 = n0 = 1
SPECIES = ((1, 1), (2, 2))

E1, XI = sp.symbols("E1 xi", positive=True)


def _ideal_species_entropy(U, V, n, s0, U0):
    return n * s0 + n * R * (C * sp.log(U / U0) + sp.log(V) - (C + 1) * sp.log(n))


def _vdw_species_entropy(U, V, n, s0, U0, a, b):
    T0 = U0 / (C * R)
    w = U / n + a * n / V
    return n * s0 + n * R * (C * sp.log(w / (C * R * T0)) + sp.log(V / n - b))


def entropy_ideal_U():
    """S(U, xi) of the two-gas mixture at V = 20 L with U split by moles."""
    nA, nB = 1 - XI, XI
    return sum(
        _ideal_species_entropy(n * E1 / N_TOTAL, V_TOTAL, n, s0, U0)
        for n, (s0, U0) in zip((nA, nB), SPECIES)
    )


def massieu_ideal_beta():
    """phi(beta, xi) = S - beta U with U = c R (nA + nB) / beta."""
    U = C * R * N_TOTAL / E1
    return entropy_ideal_U().subs(E1, U) - E1 * U


def massieu_vdw_beta(a, b):
    """phi(beta, xi) for two van der Waals gases with common a and b.

    Built as S - beta U at equal species temperature 1/beta, where
    U_i = c n_i R / beta - a n_i^2 / V.
    """
    nA, nB = 1 - XI, XI
    a, b = sp.nsimplify(a), sp.nsimplify(b)
    total = 0
    for n, (s0, U0) in zip((nA, nB), SPECIES):
        U = C * n * R / E1 - a * n**2 / V_TOTAL
        total += _vdw_species_entropy(U, V_TOTAL, n, s0, U0, a, b) - E1 * U
    return total


@functools.lru_cache(maxsize=None)
def _metric_expr(which, params):
    if which == "entropy_ideal_U":
        phi = entropy_ideal_U()
    elif which == "massieu_ideal_beta":
        phi = massieu_ideal_beta()
    else:
        phi = massieu_vdw_beta(*params)
    x = (E1, XI)
    d = [sp.diff(phi, v) for v in x]
    f = [x[0] * d[0], x[1] * d[1]]
    hess = [[sp.diff(d[i], x[j]) for j in range(2)] for i in range(2)]
    g11 = -hess[0][0] / f[0]
    g22 = -hess[1][1] / f[1]
    g12 = -sp.Rational(1, 2) * (1 / f[0] + 1 / f[1]) * hess[0][1]
    return phi, ((g11, g12), (g12, g22))


@functools.lru_cache(maxsize=None)
def _compiled(which, params, order):
    """mpmath callables for the metric (order 0) or its derivatives (order 1, 2)."""
    _, g = _metric_expr(which, params)
    x = (E1, XI)
    if order == 0:
        exprs = [g[i][j] for i in range(2) for j in range(2)]
    elif order == 1:
        exprs = [sp.diff(g[i][j], x[k]) for i in range(2) for j in range(2) for k in range(2)]
    else:
        exprs = [
            sp.diff(g[i][j], x[k], x[l]) for i in range(2) for j in range(2) for k in range(2) for l in range(2)
        ]
    return sp.lambdify(x, exprs, modules="mpmath")


def _eval(which, params, order, point):
    mpmath.mp.dps = 40
    args = (mpmath.mpf(sp.nsimplify(point[0]).evalf(45)), mpmath.mpf(sp.nsimplify(point[1]).evalf(45)))
    flat = _compiled(which, tuple(params), order)(*args)
    return np.array(flat, dtype=object).reshape((2,) * (order + 2))


def metric(which: str, point, params=()):
    g = _eval(which, params, 0, point)
    return [[float(g[i, j]) for j in range(2)] for i in range(2)]


def _inverse(G):
    det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    return np.array([[G[1, 1] / det, -G[0, 1] / det], [-G[1, 0] / det, G[0, 0] / det]], dtype=object), det


def _gamma(G, dG):
    inv, _ = _inverse(G)
    out = np.empty((2, 2, 2), dtype=object)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                out[a, b, c] = sum(
                    inv[a, d] * (dG[d, b, c] + dG[d, c, b] - dG[b, c, d]) for d in range(2)
                ) / 2
    return out


def christoffel(which: str, point, params=()):
    """Gamma[a][b][c] = Gamma^a_{bc} from the symbolic metric."""
    G = _eval(which, params, 0, point)
    dG = _eval(which, params, 1, point)  # dG[i, j, k] = d_k g_ij
    return _gamma(G, dG).astype(float).tolist()


def curvature_scalar(which: str, point, params=()):
    """Curvature scalar R = 2 R_1212 / det g from symbolic second derivatives of g."""
    G = _eval(which, params, 0, point)
    dG = _eval(which, params, 1, point)
    ddG = _eval(which, params, 2, point)  # ddG[i, j, k, l] = d_k d_l g_ij
    _, det = _inverse(G)
    gam = _gamma(G, dG)
    second = (ddG[0, 1, 1, 0] + ddG[1, 0, 0, 1] - ddG[0, 0, 1, 1] - ddG[1, 1, 0, 0]) / 2
    quad = sum(
        G[e, f] * (gam[e, 1, 0] * gam[f, 0, 1] - gam[e, 1, 1] * gam[f, 0, 0])
        for e in range(2)
        for f in range(2)
    )
    return float(2 * (second + quad) / det)
