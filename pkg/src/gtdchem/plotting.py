"""PNG figures for the CLI's ``--figure`` option.

The CSV files are the machine-readable output; these figures are a visual
convenience drawn from the same arrays.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_scan(scan, coords: Sequence[str], path: str | Path, xi_eq: float | None = None) -> None:
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(scan.xi, scan.potential, color="C0")
    ax1.set_ylabel("potential")
    ax2.plot(scan.xi, scan.D, color="C1")
    ax2.axhline(0.0, color="0.6", lw=0.8)
    ax2.set_ylabel("D")
    ax2.set_xlabel(f"{coords[1]} (mol)")
    if xi_eq is not None:
        for ax in (ax1, ax2):
            ax.axvline(xi_eq, color="0.3", ls="--", lw=0.8)
    ax1.set_title(f"scan at {coords[0]} = {scan.e1:.6g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_geodesics(trajectories, labels: Sequence[str], path: str | Path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, (tr, label) in enumerate(zip(trajectories, labels)):
        if not hasattr(tr, "tau"):
            continue
        tau = tr.tau
        span = tau[-1] - tau[0]
        s = (tau - tau[0]) / span if span > 0 else tau * 0.0
        ax.plot(s, tr.xi, color=f"C{k % 10}", label=label)
    ax.set_xlabel("normalised affine parameter")
    ax.set_ylabel("xi (mol)")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_curvature(e1: np.ndarray, xi: np.ndarray, scalar: np.ndarray, coords: Sequence[str], path: str | Path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    masked = np.ma.masked_invalid(scalar)
    if e1.size > 1 and xi.size > 1:
        mesh = ax.pcolormesh(e1, xi, masked.T, shading="nearest")
    else:
        mesh = ax.scatter(np.repeat(e1, xi.size), np.tile(xi, e1.size), c=masked.ravel())
    fig.colorbar(mesh, ax=ax, label="curvature scalar")
    ax.set_xlabel(coords[0])
    ax.set_ylabel(f"{coords[1]} (mol)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
