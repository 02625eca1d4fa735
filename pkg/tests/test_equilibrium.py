from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import reference_spec
from gtdchem.equilibrium import (
    BOUNDARY,
    INTERIOR,
    affinity,
    find_equilibrium,
    ideal_closed_form_xi,
    scan_potential,
    singularity_function,
)
from gtdchem.errors import NumericError
from gtdchem.potentials import build_reduced_potential
from gtdchem.reaction import ReactionSpec, SpeciesParams

XI_F = 0.285071660649186


def test_closed_form_value():
    assert ideal_closed_form_xi(8.314) == pytest.approx(XI_F, rel=1e-14)


def test_closed_form_limits():
    # R -> 0 leaves only the energy gain of the product (full conversion);
    # R -> inf leaves the statistical weight 1 / (1 + 2 sqrt 2)
    assert ideal_closed_form_xi(1e-3) == 1.0
    assert ideal_closed_form_xi(1e8) == pytest.approx(1 / (1 + 2 * math.sqrt(2)), rel=1e-7)
    with pytest.raises(ValueError):
        ideal_closed_form_xi(0.0)


@given(st.floats(0.1, 100.0), st.floats(0.1, 100.0))
def test_closed_form_decreases_with_R(r1, r2):
    if r1 < r2:
        assert ideal_closed_form_xi(r1) >= ideal_closed_form_xi(r2)


@pytest.mark.parametrize("rep", ["entropy_U", "massieu_beta"])
def test_ideal_three_methods_agree(ideal_spec, rep):
    phi = build_reduced_potential(ideal_spec, rep)
    rep_ = find_equilibrium(ideal_spec, phi)
    assert rep_.status == INTERIOR
    for x in (rep_.xi_root, rep_.xi_scan, rep_.xi_singular):
        assert x == pytest.approx(XI_F, abs=1e-6)
    assert rep_.spread < 1e-6
    assert rep_.xi_root == pytest.approx(XI_F, abs=1e-12)


@pytest.mark.parametrize("rep", ["entropy_U", "massieu_beta", "entropy_V"])
def test_vdw_equilibrium(vdw_spec, rep):
    phi = build_reduced_potential(vdw_spec, rep)
    r = find_equilibrium(vdw_spec, phi)
    assert r.xi_root == pytest.approx(0.284, abs=5e-3)
    assert r.spread < 1e-6


def test_symmetric_reaction_equilibrates_at_half():
    A = SpeciesParams("A", c=1.5, s0=1.0, U0=1.0)
    B = SpeciesParams("B", c=1.5, s0=1.0, U0=1.0)
    spec = ReactionSpec([A, B], [-1, 1], [1, 0], 300, 20)
    r = find_equilibrium(spec, build_reduced_potential(spec, "massieu_beta"))
    assert r.xi_root == pytest.approx(0.5, abs=1e-12)
    assert r.xi_scan == pytest.approx(0.5, abs=1e-6)


def test_D_changes_sign_once_near_equilibrium(ideal_spec, ideal_entropy):
    xi = np.linspace(0.01, 0.99, 99)
    D = np.array([singularity_function(ideal_spec, ideal_entropy, x) for x in xi])
    flips = np.nonzero(np.sign(D[:-1]) != np.sign(D[1:]))[0]
    assert len(flips) == 1
    assert 0.28 <= xi[flips[0]] < XI_F < xi[flips[0] + 1] <= 0.29 + 1e-12
    assert D[0] < 0 < D[-1]


def test_D_matches_metric_denominator(ideal_spec, ideal_entropy):
    for x in (0.1, 0.7):
        dphi = ideal_entropy.grad(ideal_entropy.anchor, x)[1]
        assert singularity_function(ideal_spec, ideal_entropy, x) == pytest.approx(-x * dphi, rel=1e-10)


def test_affinity_diverges_as_product_vanishes(ideal_spec, ideal_entropy):
    vals = [affinity(ideal_spec, ideal_entropy, x) for x in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < -15
    # D itself tends to zero from below
    assert -1e-5 < singularity_function(ideal_spec, ideal_entropy, 1e-8) < 0


def test_boundary_when_product_is_strongly_favoured():
    spec = reference_spec()
    B = SpeciesParams("B", c=1.5, s0=5000.0, U0=2.0)
    spec = ReactionSpec([spec.species[0], B], [-1, 1], [1, 0], 300, 20)
    r = find_equilibrium(spec, build_reduced_potential(spec, "massieu_beta"))
    assert r.status == BOUNDARY and r.boundary == "xi_max"
    assert r.xi_root == pytest.approx(1.0, abs=1e-6)
    assert r.warnings


def test_multiple_sign_changes_raise(ideal_spec, ideal_entropy, monkeypatch):
    import gtdchem.equilibrium as eq

    monkeypatch.setattr(eq, "affinity", lambda spec, p, x, e1=None: math.sin(20 * x))
    with pytest.raises(NumericError, match="changes sign"):
        find_equilibrium(ideal_spec, ideal_entropy)


def test_scan_columns(ideal_spec, ideal_massieu):
    sc = scan_potential(ideal_spec, ideal_massieu, 101)
    assert sc.xi[0] == ideal_massieu.xi_domain[0] and sc.xi[-1] == ideal_massieu.xi_domain[1]
    i = int(np.argmax(sc.potential))
    assert abs(sc.xi[i] - XI_F) <= sc.xi[1] - sc.xi[0]
    assert np.all(np.isfinite(sc.g_xixi[1:-1]) | (np.abs(sc.D[1:-1]) < 1e-9))
    with pytest.raises(ValueError):
        scan_potential(ideal_spec, ideal_massieu, 1)


def test_potential_increases_towards_equilibrium(ideal_spec, ideal_massieu):
    # second law: the Massieu function grows monotonically as xi approaches
    # equilibrium from either side
    sc = scan_potential(ideal_spec, ideal_massieu, 400)
    left = sc.xi < XI_F
    assert np.all(np.diff(sc.potential[left]) > 0)
    assert np.all(np.diff(sc.potential[~left]) < 0)
