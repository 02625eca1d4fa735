from __future__ import annotations

import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from gtdchem.potentials import build_reduced_potential  # noqa: E402
from gtdchem.reaction import ReactionSpec, SpeciesParams  # noqa: E402

settings.register_profile("gtdchem", derandomize=True, deadline=None)
settings.load_profile("gtdchem")

A_VDW = 506.0
B_VDW = 0.050


def reference_spec(a: float = 0.0, b: float = 0.0, T: float = 300.0, V: float = 20.0) -> ReactionSpec:
    """A -> B with the reference species constants; a = b = 0 gives ideal gases."""
    A = SpeciesParams("A", c=1.5, s0=1.0, U0=1.0, a=a, b=b)
    B = SpeciesParams("B", c=1.5, s0=2.0, U0=2.0, a=a, b=b)
    return ReactionSpec([A, B], [-1, 1], [1, 0], T, V)


@pytest.fixture(scope="session")
def ideal_spec():
    return reference_spec()


@pytest.fixture(scope="session")
def vdw_spec():
    return reference_spec(A_VDW, B_VDW)


@pytest.fixture(scope="session")
def ideal_entropy(ideal_spec):
    return build_reduced_potential(ideal_spec, "entropy_U")


@pytest.fixture(scope="session")
def ideal_massieu(ideal_spec):
    return build_reduced_potential(ideal_spec, "massieu_beta")


@pytest.fixture(scope="session")
def vdw_massieu(vdw_spec):
    return build_reduced_potential(vdw_spec, "massieu_beta")


@pytest.fixture(scope="session")
def vdw_entropy(vdw_spec):
    return build_reduced_potential(vdw_spec, "entropy_U")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("GTDCHEM_SLOW"):
        return
    skip = pytest.mark.skip(reason="set GTDCHEM_SLOW=1 to run symbolic-curvature oracles")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


# one PASS/FAIL line per acceptance criterion, printed after the run
_ACCEPTANCE: dict[int, tuple[bool, str]] = {}
ACCEPTANCE_COUNT = 10


@pytest.fixture
def record():
    def _record(number: int, ok: bool, detail: str) -> None:
        prev = _ACCEPTANCE.get(number)
        if prev is not None:
            ok, detail = ok and prev[0], f"{prev[1]}; {detail}"
        _ACCEPTANCE[number] = (bool(ok), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, ACCEPTANCE_COUNT + 1):
        if k in _ACCEPTANCE:
            ok, detail = _ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: FAIL  (not evaluated: test errored or was deselected)")
