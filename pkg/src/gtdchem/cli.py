"""Command-line front end.

    gtdchem equilibrium --config run.ini [--out eq.csv] [--tolerance 1e-4]
    gtdchem scan        --config run.ini [--out scan.csv] [--grid 201]
    gtdchem geodesic    --config run.ini [--out geo.csv] [--tolerance 1e-2]
    gtdchem curvature   --config run.ini [--out curv.csv] [--grid 5] [--tolerance 1e-6]

``--config bundled:ideal`` and ``--config bundled:vdw`` load the packaged
reference configurations. ``--figure out.png`` additionally renders a PNG.
CSV goes to ``--out`` (default stdout); summaries go to stderr.

Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numeric
failure (including no interior equilibrium), 4 tolerance violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import equilibrium as eq
from .config import CurvatureGrid, RunConfig, load_config, parse_config
from .diffgeo import curvature_at
from .errors import ConfigurationError, DomainError, GTDError, SingularityError
from .geodesic import GeodesicState, Trajectory, batch_geodesics
from .potentials import REPRESENTATIONS, ReducedPotential, build_reduced_potential

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_TOLERANCE = 4

SINGULAR = "SINGULAR"
THREADS_ENV = "GTDCHEM_THREADS"

_UNITS = {
    "U": "J",
    "V": "L",
    "beta": "1/K",
    "xi": "mol",
}
_POTENTIAL_UNITS = {"entropy": "J/K", "massieu": "J/K"}


def fmt(x) -> str:
    """17-significant-digit float, or the SINGULAR sentinel for NaN/inf."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return SINGULAR
    return format(x, ".17g")


@dataclass
class CommandResult:
    """Rows to write plus the exit code and summary lines."""

    header: list[str]
    rows: list[list]
    comment: str
    exit_code: int = EXIT_OK
    summary: list[str] = field(default_factory=list)
    figure: object = None  # callable(path) drawing the PNG


def _units_comment(cfg: RunConfig, phi: ReducedPotential, command: str) -> str:
    e1, e2 = phi.coords
    return (
        f"# gtdchem {command}; model={cfg.model}; representation={cfg.representation}; "
        f"units: E1={e1} [{_UNITS[e1]}], E2={e2} [{_UNITS[e2]}], T [K], V [L], n [mol], U [J], "
        f"potential [{_POTENTIAL_UNITS[phi.kind]}], D [J/K], tau dimensionless"
    )


def _potential(cfg: RunConfig, xi_ref: float = 0.0) -> ReducedPotential:
    return build_reduced_potential(cfg.reaction, cfg.representation, cfg.model, xi_ref=xi_ref)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def cmd_equilibrium(cfg: RunConfig, tolerance: float | None = None) -> CommandResult:
    phi = _potential(cfg)
    report = eq.find_equilibrium(cfg.reaction, phi)
    tol = cfg.equilibrium_tolerance if tolerance is None else tolerance
    d = report.method_details
    root, sing = d.get("root", {}), d.get("singular", {})
    header = [
        "representation", "model", "status", "xi_root", "xi_scan", "xi_singular", "spread",
        "root_residual", "root_iterations", "singular_residual", "singular_iterations", "scan_grid_index",
    ]
    row = [
        cfg.representation, cfg.model, report.status, report.xi_root, report.xi_scan,
        report.xi_singular, report.spread, root.get("residual", math.nan),
        root.get("iterations", 0), sing.get("residual", math.nan), sing.get("iterations", 0),
        d["scan"]["grid_index"],
    ]
    summary = [
        f"status {report.status}" + (f" ({report.boundary})" if report.boundary else ""),
        f"xi_root     {report.xi_root:.10f} mol",
        f"xi_scan     {report.xi_scan:.10f} mol",
        f"xi_singular {report.xi_singular:.10f} mol",
        f"spread      {report.spread:.3e} (tolerance {tol:.1e})",
    ] + [f"warning: {w}" for w in report.warnings]
    code = EXIT_OK
    if report.status != eq.INTERIOR:
        code = EXIT_NUMERIC
        summary.append("no interior equilibrium: the reaction proceeds to the boundary")
    elif report.spread > tol:
        code = EXIT_TOLERANCE
        summary.append("spread exceeds tolerance")

    def figure(path):
        from .plotting import plot_scan

        plot_scan(eq.scan_potential(cfg.reaction, phi, cfg.scan_grid), phi.coords, path, report.xi_root)

    return CommandResult(header, [row], _units_comment(cfg, phi, "equilibrium"), code, summary, figure)


def cmd_scan(cfg: RunConfig, grid: int | None = None) -> CommandResult:
    phi = _potential(cfg)
    n = cfg.scan_grid if grid is None else grid
    if n < 2:
        raise ConfigurationError(f"--grid must be >= 2 for a scan, got {n}")
    scan = eq.scan_potential(cfg.reaction, phi, n)
    rows = [[x, p, dv, g] for x, p, dv, g in zip(scan.xi, scan.potential, scan.D, scan.g_xixi)]
    i = int(np.argmax(scan.potential))
    summary = [
        f"{n} points at {phi.coords[0]} = {scan.e1:.10g}",
        f"potential maximum at xi = {scan.xi[i]:.6f} mol",
    ]

    def figure(path):
        from .plotting import plot_scan

        plot_scan(scan, phi.coords, path)

    return CommandResult(
        ["xi", "potential", "D", "g_xixi"], rows, _units_comment(cfg, phi, "scan"), EXIT_OK, summary, figure
    )


def _run_geodesics(cfg: RunConfig):
    """Trajectories (or exceptions) in config order, plus the potentials used."""
    results: list = [None] * len(cfg.geodesic_runs)
    phis: list = [None] * len(cfg.geodesic_runs)
    groups: dict[float, list[int]] = {}
    for k, run in enumerate(cfg.geodesic_runs):
        groups.setdefault(run.xi0, []).append(k)
    workers = _threads()
    for xi0, members in groups.items():
        phi = _potential(cfg, xi_ref=xi0)
        inits = []
        for k in members:
            run = cfg.geodesic_runs[k]
            e1 = phi.anchor if run.e1_0 is None else run.e1_0
            inits.append(GeodesicState(0.0, (e1, run.xi0), (run.e1_dot0, run.xi_dot0)))
            phis[k] = phi
        for k, res in zip(members, batch_geodesics(phi, inits, cfg.stepper, workers=workers)):
            results[k] = res
    return results, phis


def cmd_geodesic(cfg: RunConfig, tolerance: float | None = None) -> CommandResult:
    if not cfg.geodesic_runs:
        raise ConfigurationError(f"{cfg.source}: [geodesic] needs at least one xi0 / xi_dot0 entry")
    tol = cfg.geodesic_tolerance if tolerance is None else tolerance
    results, phis = _run_geodesics(cfg)
    rows, summary = [], []
    failed = violated = False
    reference: dict[int, float] = {}
    for run_id, (res, phi) in enumerate(zip(results, phis)):
        run = cfg.geodesic_runs[run_id]
        head = f"run {run_id}: xi0={run.xi0:g} xi_dot0={run.xi_dot0:g}"
        if not isinstance(res, Trajectory):
            summary.append(f"{head}: FAILED ({type(res).__name__}: {res})")
            failed = True
            continue
        for s, n in zip(res.samples, res.norms):
            rows.append([run_id, s.tau, s.E[0], s.E[1], s.V[0], s.V[1], n])
        line = (
            f"{head}: {res.termination} xi*={res.xi_terminal:.6f} "
            f"norm_drift={res.norm_drift:.2e} steps={res.steps}"
        )
        if tol is not None and res.termination != "max_steps":
            key = id(phi)
            if key not in reference:
                reference[key] = eq.find_equilibrium(cfg.reaction, phi).xi_root
            miss = abs(res.xi_terminal - reference[key])
            line += f" |xi*-xi_root|={miss:.2e}"
            if miss > tol:
                line += " EXCEEDS TOLERANCE"
                violated = True
        summary.append(line)
    # a failed run outranks a tolerance miss
    code = EXIT_NUMERIC if failed else EXIT_TOLERANCE if violated else EXIT_OK

    def figure(path):
        from .plotting import plot_geodesics

        labels = [f"xi0={r.xi0:g}, xi_dot0={r.xi_dot0:g}" for r in cfg.geodesic_runs]
        plot_geodesics(results, labels, path)

    return CommandResult(
        ["run_id", "tau", "E1", "E2", "V1", "V2", "norm"], rows,
        _units_comment(cfg, phis[0] or _potential(cfg), "geodesic"), code, summary, figure,
    )


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    return np.array([(lo + hi) / 2]) if n == 1 else np.linspace(lo, hi, n)


def cmd_curvature(cfg: RunConfig, grid: int | None = None, tolerance: float | None = None) -> CommandResult:
    phi = _potential(cfg)
    cg: CurvatureGrid = cfg.curvature
    n = cg.grid if grid is None else grid
    if n < 1:
        raise ConfigurationError(f"--grid must be >= 1, got {n}")
    tol = cg.tolerance if tolerance is None else tolerance
    e1_lo = 0.8 * phi.anchor if cg.e1_min is None else cg.e1_min
    e1_hi = 1.2 * phi.anchor if cg.e1_max is None else cg.e1_max
    e1 = _axis(e1_lo, e1_hi, n)
    xi = _axis(cg.xi_min, cg.xi_max, n)
    points = [(a, b) for a in e1 for b in xi]

    def one(p):
        try:
            return curvature_at(phi, p).scalar, "ok"
        except SingularityError:
            return math.nan, "singular"
        except DomainError:
            return math.nan, "domain"

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, points))
    else:
        values = [one(p) for p in points]
    rows = [[a, b, r, status] for (a, b), (r, status) in zip(points, values)]
    finite = [abs(r) for r, _ in values if math.isfinite(r)]
    flagged = sum(1 for _, s in values if s != "ok")
    summary = [
        f"{len(points)} points, {flagged} flagged",
        f"max |R| = {max(finite):.3e}" if finite else "no finite curvature values",
    ]
    code = EXIT_OK
    if tol is not None and finite and max(finite) > tol:
        code = EXIT_TOLERANCE
        summary.append(f"max |R| exceeds tolerance {tol:.1e}")
    scalar = np.array([r for r, _ in values]).reshape(len(e1), len(xi))

    def figure(path):
        from .plotting import plot_curvature

        plot_curvature(e1, xi, scalar, phi.coords, path)

    return CommandResult(
        ["E1", "E2", "R_scalar", "status"], rows, _units_comment(cfg, phi, "curvature"), code, summary, figure
    )


def render_csv(result: CommandResult) -> str:
    buf = io.StringIO()
    buf.write(result.comment + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.header)
    for row in result.rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_config(spec: str) -> RunConfig:
    if spec.startswith("bundled:"):
        name = spec.split(":", 1)[1]
        ref = resources.files("gtdchem") / "data" / f"{name}.ini"
        if not ref.is_file():
            raise ConfigurationError(f"no bundled config named {name!r} (try 'ideal' or 'vdw')")
        return parse_config(ref.read_text(), spec, "ini")
    return load_config(spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtdchem", description="Geometrothermodynamics of a chemical reaction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("equilibrium", "equilibrium extent by three methods"),
        ("scan", "potential, D and g_xixi along xi"),
        ("geodesic", "geodesics from the configured initial conditions"),
        ("curvature", "curvature scalar on a grid"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="INI/JSON path, or bundled:ideal / bundled:vdw")
        p.add_argument("--out", help="CSV output path (default stdout)")
        p.add_argument("--figure", help="also render a PNG figure to this path")
        if name in ("scan", "curvature"):
            p.add_argument("--grid", type=int, help="grid size (points along xi, or per axis)")
        if name != "scan":
            p.add_argument("--tolerance", type=float, help="acceptance tolerance; violation exits with 4")
        p.add_argument("--representation", help="override the configured representation")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = read_config(args.config)
        if args.representation:
            if args.representation not in REPRESENTATIONS:
                raise ConfigurationError(
                    f"--representation must be one of {REPRESENTATIONS}, got {args.representation!r}"
                )
            cfg = replace(cfg, representation=args.representation)
        if args.command == "equilibrium":
            result = cmd_equilibrium(cfg, args.tolerance)
        elif args.command == "scan":
            result = cmd_scan(cfg, args.grid)
        elif args.command == "geodesic":
            result = cmd_geodesic(cfg, args.tolerance)
        else:
            result = cmd_curvature(cfg, args.grid, args.tolerance)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GTDError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    text = render_csv(result)
    try:
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        if args.figure:
            result.figure(args.figure)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for line in result.summary:
        print(line, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
