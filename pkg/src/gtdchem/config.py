"""Run configuration: INI files with unit-suffixed keys, or the same layout in JSON.

INI layout::

    [reaction]
    temperature_K = 300
    volume_L = 20
    R_J_per_mol_K = 8.314          ; optional
    model = ideal                   ; ideal | vdw (optional, inferred)
    representation = entropy_U      ; entropy_U | massieu_beta | entropy_V

    [species.A]                     ; one section per species, in order
    nu = -1
    n_init_mol = 1
    c = 1.5
    s0_J_per_mol_K = 1
    U0_J = 1
    V0_L = 1                        ; optional, default 1
    n0_mol = 1                      ; optional, default 1
    a_J_L_per_mol2 = 0              ; optional, default 0
    b_L_per_mol = 0                 ; optional, default 0

    [scan]        grid = 201
    [equilibrium] tolerance = 1e-3
    [geodesic]    xi0 = 0.01, 0.99 ; xi_dot0 = 1e-3, -1e-3 ; e1_dot0 = 0, 0
                  rtol, atol, h0, max_steps
    [curvature]   grid = 5 ; e1_min, e1_max, xi_min, xi_max ; tolerance

JSON uses the same names: ``{"reaction": {...}, "species": {"A": {...}},
"geodesic": {...}}``.
"""

from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError
from .geodesic import StepperConfig
from .potentials import MODELS, REPRESENTATIONS, infer_model
from .reaction import R_GAS, ReactionSpec, SpeciesParams

SPECIES_PREFIX = "species."

# key -> (SpeciesParams field, default, lower bound, strict)
_SPECIES_KEYS = {
    "c": ("c", None, 0.0, True),
    "s0_J_per_mol_K": ("s0", None, None, False),
    "U0_J": ("U0", None, 0.0, True),
    "V0_L": ("V0", 1.0, 0.0, True),
    "n0_mol": ("n0", 1.0, 0.0, True),
    "a_J_L_per_mol2": ("a", 0.0, 0.0, False),
    "b_L_per_mol": ("b", 0.0, 0.0, False),
}


@dataclass(frozen=True)
class GeodesicRun:
    xi0: float
    xi_dot0: float
    e1_dot0: float = 0.0
    e1_0: float | None = None


@dataclass(frozen=True)
class CurvatureGrid:
    grid: int = 5
    e1_min: float | None = None
    e1_max: float | None = None
    xi_min: float = 0.05
    xi_max: float = 0.95
    tolerance: float | None = None


@dataclass(frozen=True)
class RunConfig:
    reaction: ReactionSpec
    model: str
    representation: str
    scan_grid: int = 201
    equilibrium_tolerance: float = 1e-3
    geodesic_runs: tuple[GeodesicRun, ...] = ()
    stepper: StepperConfig = field(default_factory=StepperConfig)
    geodesic_tolerance: float | None = None
    curvature: CurvatureGrid = field(default_factory=CurvatureGrid)
    source: str = "<memory>"


class _Source:
    """Section/key lookups that remember where each key came from."""

    def __init__(self, sections: dict[str, dict[str, str]], path: str, text: str, ini: bool):
        self.sections = sections
        self.path = path
        self.text = text
        self.ini = ini

    def where(self, section: str, key: str | None = None) -> str:
        if not self.ini:
            return f"{self.path}: [{section}]" + (f" {key}" if key else "")
        line = _line_of(self.text, section, key)
        loc = f"{self.path}:{line}" if line else self.path
        return f"{loc}: [{section}]" + (f" {key}" if key else "")

    def fail(self, section: str, key: str | None, msg: str):
        raise ConfigurationError(f"{self.where(section, key)}: {msg}")

    def get(self, section: str, key: str, default=None, required=False):
        sec = self.sections.get(section, {})
        if key not in sec:
            if required:
                self.fail(section, key, "missing required key")
            return default
        return sec[key]

    def number(self, section: str, key: str, default=None, required=False, lower=None, strict=False):
        raw = self.get(section, key, default, required)
        if raw is None:
            return None
        try:
            value = float(raw)
        except (TypeError, ValueError):
            self.fail(section, key, f"expected a number, got {raw!r}")
        if not math.isfinite(value):
            self.fail(section, key, f"must be finite, got {raw!r}")
        if lower is not None and (value <= lower if strict else value < lower):
            self.fail(section, key, f"must be {'>' if strict else '>='} {lower:g}, got {value:g}")
        return value

    def integer(self, section: str, key: str, default=None, lower=1):
        raw = self.get(section, key, default)
        if raw is None:
            return None
        try:
            value = int(str(raw).strip())
        except ValueError:
            self.fail(section, key, f"expected an integer, got {raw!r}")
        if value < lower:
            self.fail(section, key, f"must be >= {lower}, got {value}")
        return value

    def numbers(self, section: str, key: str, default=None):
        raw = self.get(section, key, default)
        if raw is None:
            return None
        items = raw if isinstance(raw, (list, tuple)) else [s for s in re.split(r"[,\s]+", str(raw).strip()) if s]
        out = []
        for item in items:
            try:
                value = float(item)
            except (TypeError, ValueError):
                self.fail(section, key, f"expected a list of numbers, got {raw!r}")
            if not math.isfinite(value):
                self.fail(section, key, f"must be finite, got {item!r}")
            out.append(value)
        return out


def _line_of(text: str, section: str, key: str | None) -> int | None:
    in_section = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            in_section = stripped[1:-1].strip() == section
            if in_section and key is None:
                return lineno
            continue
        if in_section and key is not None:
            name = re.split(r"[=:]", stripped, maxsplit=1)[0].strip()
            if name == key:
                return lineno
    return None


def _read_ini(text: str, path: str) -> _Source:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str  # keys are case sensitive (U0_J, R_J_per_mol_K)
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: malformed config: {exc}") from None
    sections = {name: dict(parser[name]) for name in parser.sections()}
    return _Source(sections, path, text, ini=True)


def _read_json(text: str, path: str) -> _Source:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}: malformed JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    sections: dict[str, dict] = {}
    for name, body in data.items():
        if name == "species":
            if not isinstance(body, dict):
                raise ConfigurationError(f"{path}: 'species' must map labels to objects")
            for label, params in body.items():
                sections[SPECIES_PREFIX + label] = dict(params)
        elif isinstance(body, dict):
            sections[name] = dict(body)
        else:
            raise ConfigurationError(f"{path}: section {name!r} must be an object")
    return _Source(sections, path, text, ini=False)


def parse_config(text: str, path: str = "<string>", fmt: str | None = None) -> RunConfig:
    """Parse config text; ``fmt`` is ``"ini"`` or ``"json"`` (guessed when None)."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "ini"
    src = _read_json(text, path) if fmt == "json" else _read_ini(text, path)
    return _build(src)


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc.strerror}") from None
    fmt = "json" if p.suffix.lower() == ".json" else None
    return parse_config(text, str(p), fmt)


def _build(src: _Source) -> RunConfig:
    if "reaction" not in src.sections:
        raise ConfigurationError(f"{src.path}: missing [reaction] section")
    T = src.number("reaction", "temperature_K", required=True, lower=0.0, strict=True)
    V = src.number("reaction", "volume_L", required=True, lower=0.0, strict=True)
    R = src.number("reaction", "R_J_per_mol_K", default=R_GAS, lower=0.0, strict=True)

    species, nu, n_init = [], [], []
    for name, _ in src.sections.items():
        if not name.startswith(SPECIES_PREFIX):
            continue
        label = name[len(SPECIES_PREFIX):]
        unknown = set(src.sections[name]) - set(_SPECIES_KEYS) - {"nu", "n_init_mol"}
        if unknown:
            src.fail(name, sorted(unknown)[0], "unknown key")
        kwargs = {}
        for key, (attr, default, lower, strict) in _SPECIES_KEYS.items():
            kwargs[attr] = src.number(name, key, default=default, required=default is None, lower=lower, strict=strict)
        species.append(SpeciesParams(label, **kwargs))
        nu.append(src.number(name, "nu", required=True))
        n_init.append(src.number(name, "n_init_mol", required=True, lower=0.0))
    if len(species) < 2:
        raise ConfigurationError(f"{src.path}: need at least two [species.<label>] sections")
    reaction = ReactionSpec(species, nu, n_init, T, V, R)

    inferred = infer_model(reaction)
    model = src.get("reaction", "model", default=inferred)
    if model not in MODELS:
        src.fail("reaction", "model", f"must be one of {MODELS}, got {model!r}")
    if model == "ideal" and inferred != "ideal":
        src.fail("reaction", "model", "'ideal' conflicts with nonzero a_J_L_per_mol2 / b_L_per_mol")
    representation = src.get("reaction", "representation", default="entropy_U")
    if representation not in REPRESENTATIONS:
        src.fail("reaction", "representation", f"must be one of {REPRESENTATIONS}, got {representation!r}")

    scan_grid = src.integer("scan", "grid", default=201, lower=2)
    eq_tol = src.number("equilibrium", "tolerance", default=1e-3, lower=0.0)

    runs: tuple[GeodesicRun, ...] = ()
    stepper = StepperConfig()
    geo_tol = None
    if "geodesic" in src.sections:
        xi0 = src.numbers("geodesic", "xi0", default=[])
        xid = src.numbers("geodesic", "xi_dot0", default=[])
        e1d = src.numbers("geodesic", "e1_dot0", default=[0.0] * len(xi0))
        e10 = src.numbers("geodesic", "e1_0")
        if len(xid) != len(xi0):
            src.fail("geodesic", "xi_dot0", f"needs one entry per xi0 ({len(xi0)}), got {len(xid)}")
        if len(e1d) != len(xi0):
            src.fail("geodesic", "e1_dot0", f"needs one entry per xi0 ({len(xi0)}), got {len(e1d)}")
        if e10 is not None and len(e10) != len(xi0):
            src.fail("geodesic", "e1_0", f"needs one entry per xi0 ({len(xi0)}), got {len(e10)}")
        runs = tuple(
            GeodesicRun(x, v, w, None if e10 is None else e10[i])
            for i, (x, v, w) in enumerate(zip(xi0, xid, e1d))
        )
        stepper = StepperConfig(
            rtol=src.number("geodesic", "rtol", default=stepper.rtol, lower=0.0, strict=True),
            atol=src.number("geodesic", "atol", default=stepper.atol, lower=0.0, strict=True),
            h0=src.number("geodesic", "h0", default=stepper.h0, lower=0.0, strict=True),
            max_steps=src.integer("geodesic", "max_steps", default=stepper.max_steps),
        )
        geo_tol = src.number("geodesic", "tolerance", default=None, lower=0.0)

    curv = CurvatureGrid()
    if "curvature" in src.sections:
        curv = CurvatureGrid(
            grid=src.integer("curvature", "grid", default=curv.grid),
            e1_min=src.number("curvature", "e1_min", default=None),
            e1_max=src.number("curvature", "e1_max", default=None),
            xi_min=src.number("curvature", "xi_min", default=curv.xi_min),
            xi_max=src.number("curvature", "xi_max", default=curv.xi_max),
            tolerance=src.number("curvature", "tolerance", default=None, lower=0.0),
        )
        if not curv.xi_min <= curv.xi_max:
            src.fail("curvature", "xi_max", "must be >= xi_min")
        if curv.e1_min is not None and curv.e1_max is not None and not curv.e1_min <= curv.e1_max:
            src.fail("curvature", "e1_max", "must be >= e1_min")

    return RunConfig(
        reaction, model, representation, scan_grid, eq_tol, runs, stepper, geo_tol, curv, src.path
    )
