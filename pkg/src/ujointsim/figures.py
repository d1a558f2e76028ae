"""Batch rendering of report figures for simulated trajectories.

Writes the three standard views next to the CSV output of a run: the
time response of the crosspiece coordinate, its phase portrait, and the
transmission-error phase plot with the wall positions marked.  Pure
file output on the Agg backend; nothing interactive.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .stepper import Trajectory

__all__ = ["save_report_figures"]

#: Cap on points per plotted line; longer series are strided.
_MAX_POINTS = 200_000


def _steady_window(traj: Trajectory) -> slice:
    """Index window emphasizing steady state: drop the transient when the
    horizon is long enough, otherwise show the second half."""
    t = traj.t
    if t.shape[0] < 4:
        return slice(None)
    t_end = float(t[-1])
    omega = traj.params.omega
    cut = 50.0 * 2.0 * math.pi / omega if omega > 0.0 else 0.5 * t_end
    if t_end < 2.0 * cut:
        cut = 0.5 * t_end
    start = int(np.searchsorted(t, cut))
    window = slice(start, None)
    if t.shape[0] - start > _MAX_POINTS:
        window = slice(start, None, (t.shape[0] - start) // _MAX_POINTS + 1)
    return window


def _full_window(traj: Trajectory) -> slice:
    n = traj.t.shape[0]
    return slice(None, None, n // _MAX_POINTS + 1 if n > _MAX_POINTS else None)


def save_report_figures(traj: Trajectory, outdir: Path) -> list[Path]:
    """Render time_response.png, phase_portrait.png and gap_phase.png."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []

    full = _full_window(traj)
    steady = _steady_window(traj)
    p = traj.params

    fig, axes = plt.subplots(2, 1, figsize=(7.0, 5.0), sharex=True)
    axes[0].plot(traj.t[full], traj.phi1c[full], lw=0.7, color="C0")
    axes[0].set_ylabel(r"$\varphi_{1c}$ [rad]")
    axes[1].plot(traj.t[full], traj.phi1c_dot[full], lw=0.7, color="C1")
    axes[1].set_ylabel(r"$\dot\varphi_{1c}$ [rad/s]")
    axes[1].set_xlabel("t [s]")
    axes[0].set_title(f"Time response (clearance = {p.clearance * 1e6:g} um)")
    fig.tight_layout()
    path = outdir / "time_response.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(5.4, 5.0))
    ax.plot(traj.phi1c[steady], traj.phi1c_dot[steady], lw=0.5, color="C0")
    ax.set_xlabel(r"$\varphi_{1c}$ [rad]")
    ax.set_ylabel(r"$\dot\varphi_{1c}$ [rad/s]")
    ax.set_title("Phase portrait (steady state)")
    fig.tight_layout()
    path = outdir / "phase_portrait.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)

    delta = traj.phi1[steady] - traj.phi1c[steady]
    delta_dot = traj.phi1_dot[steady] - traj.phi1c_dot[steady]
    fig, ax = plt.subplots(figsize=(5.4, 5.0))
    ax.plot(delta, delta_dot, lw=0.5, color="C2")
    if p.clearance > 0.0:
        wall = p.clearance / p.arm_length
        for x in (-wall, wall):
            ax.axvline(x, color="0.4", ls="--", lw=0.8)
    ax.set_xlabel(r"$\Delta$ [rad]")
    ax.set_ylabel(r"$\dot\Delta$ [rad/s]")
    ax.set_title("Transmission error phase plot")
    fig.tight_layout()
    path = outdir / "gap_phase.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    paths.append(path)

    return paths
