from __future__ import annotations

import pytest

from conftest import reference_spec
from gtdchem.errors import ConfigurationError, DomainError
from gtdchem.reaction import ExtentInterval, ReactionSpec, SpeciesParams, extent_bounds, moles_at


def test_reference_temperature_from_energy():
    p = SpeciesParams("A", c=1.5, s0=1.0, U0=1.0)
    assert p.T0(8.314) == pytest.approx(1.0 / (1.5 * 8.314))
    assert p.beta0(8.314) == pytest.approx(1.5 * 8.314)


@pytest.mark.parametrize("field,value", [("c", 0.0), ("U0", -1.0), ("V0", 0.0), ("n0", -2.0), ("a", -1.0), ("b", -0.1)])
def test_species_validation(field, value):
    kwargs = dict(label="A", c=1.5, s0=1.0, U0=1.0)
    kwargs[field] = value
    with pytest.raises(ConfigurationError, match=field):
        SpeciesParams(**kwargs)


def test_extent_interval_for_reference_reaction():
    spec = reference_spec()
    bounds = extent_bounds(spec)
    assert (bounds.xi_min, bounds.xi_max) == (0.0, 1.0)
    lo, hi = bounds.numeric()
    assert 0.0 < lo < 1e-6 and 1 - 1e-6 < hi < 1.0


def test_extent_interval_with_two_products():
    A = SpeciesParams("A", c=1.5, s0=1.0, U0=1.0)
    B = SpeciesParams("B", c=1.5, s0=2.0, U0=2.0)
    C = SpeciesParams("C", c=2.5, s0=3.0, U0=1.0)
    spec = ReactionSpec([A, B, C], [-2, 1, 1], [3, 0.5, 1], 300, 20)
    bounds = extent_bounds(spec)
    assert bounds.xi_min == pytest.approx(-0.5)
    assert bounds.xi_max == pytest.approx(1.5)


def test_moles_follow_stoichiometry():
    spec = reference_spec()
    assert moles_at(spec, 0.25) == pytest.approx([0.75, 0.25])


def test_moles_outside_interval_names_species():
    spec = reference_spec()
    with pytest.raises(DomainError, match="'A'"):
        moles_at(spec, 1.2)
    with pytest.raises(DomainError, match="'B'"):
        moles_at(spec, -0.1)


def test_degenerate_interval_rejected():
    with pytest.raises(ConfigurationError):
        ExtentInterval(0.5, 0.5)


@pytest.mark.parametrize(
    "kwargs,match",
    [
        (dict(nu=[-1, -1]), "product"),
        (dict(n_init=[-1, 0]), "initial moles"),
        (dict(T=0.0), "temperature_K"),
        (dict(V=-5.0), "volume_L"),
        (dict(nu=[-1]), "equal length"),
    ],
)
def test_reaction_validation(kwargs, match):
    A = SpeciesParams("A", c=1.5, s0=1.0, U0=1.0)
    B = SpeciesParams("B", c=1.5, s0=2.0, U0=2.0)
    args = dict(species=[A, B], nu=[-1, 1], n_init=[1, 0], T=300.0, V=20.0)
    args.update(kwargs)
    with pytest.raises(ConfigurationError, match=match):
        ReactionSpec(**args)


def test_permuted_reorders_every_field():
    spec = reference_spec()
    flipped = spec.permuted([1, 0])
    assert flipped.labels == ["B", "A"]
    assert flipped.nu == (1.0, -1.0)
    assert flipped.n_init == (0.0, 1.0)
