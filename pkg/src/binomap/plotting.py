"""Static figures and summary statistics for trajectories and records.

Figures are written as PNG files (matplotlib Agg backend); the numeric
side lands in a ``stats.json`` so scripted consumers never need to parse
an image.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .geometry import fit_plane, plane_residual
from .trajectory import ARMS, BimanualTrajectory

_PROJECTIONS = (("x", "y", 0, 1), ("x", "z", 0, 2), ("y", "z", 1, 2))


def trajectory_stats(traj: BimanualTrajectory, compare: BimanualTrajectory | None = None) -> dict:
    """Per-arm plane residuals, plus deviation stats against ``compare``."""
    stats: dict = {"frames": len(traj), "arms": {}}
    for name in ARMS:
        pos = traj.arm(name).positions
        arm_stats: dict = {}
        try:
            plane = fit_plane(pos)
            d = np.abs(plane.signed_distance(pos))
            arm_stats["plane_residual_max"] = float(d.max())
            arm_stats["plane_residual_mean"] = float(d.mean())
            arm_stats["plane_normal"] = [float(c) for c in plane.normal]
        except Exception as e:  # degenerate tracks still get basic stats
            arm_stats["plane_fit_error"] = str(e)
        stats["arms"][name] = arm_stats
    if compare is not None:
        if len(compare) != len(traj):
            raise ValueError("compared trajectories must have equal length")
        dev = []
        for name in ARMS:
            dev.append(np.linalg.norm(traj.arm(name).positions - compare.arm(name).positions, axis=1))
        dev = np.concatenate(dev)
        stats["deviation_max"] = float(dev.max())
        stats["deviation_mean"] = float(dev.mean())
    return stats


def record_stats(doc: dict) -> dict:
    """Attempt-schedule statistics from a primitive-record document."""
    attempts = doc.get("attempts", [])
    stats = {
        "skill": doc.get("skill"),
        "d": doc.get("d"),
        "s": doc.get("s"),
        "k_used": doc.get("provenance", {}).get("k_used", len(attempts)),
        "d_sequence": [a["d_k"] for a in attempts],
        "outcomes": [a["outcome"] for a in attempts],
    }
    return stats


def plot_polylines(traj: BimanualTrajectory, out_png, compare: BimanualTrajectory | None = None,
                   labels=("input", "compare")) -> None:
    """Axis-plane projections of both arms' waypoints."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    for ax, (nx, ny, ix, iy) in zip(axes, _PROJECTIONS):
        for name, color in zip(ARMS, ("tab:blue", "tab:red")):
            p = traj.arm(name).positions
            ax.plot(p[:, ix], p[:, iy], "-o", color=color, ms=2.5, lw=1.0,
                    label=f"{name} {labels[0]}")
            if compare is not None:
                q = compare.arm(name).positions
                ax.plot(q[:, ix], q[:, iy], "--", color=color, alpha=0.5, lw=1.0,
                        label=f"{name} {labels[1]}")
        ax.set_xlabel(f"{nx} [m]")
        ax.set_ylabel(f"{ny} [m]")
        ax.set_aspect("equal", adjustable="datalim")
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def plot_residual_hist(traj: BimanualTrajectory, out_png) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name in ARMS:
        pos = traj.arm(name).positions
        try:
            plane = fit_plane(pos)
        except Exception:
            continue
        ax.hist(np.abs(plane.signed_distance(pos)), bins=20, alpha=0.6, label=name)
    ax.set_xlabel("|plane residual| [m]")
    ax.set_ylabel("frames")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def plot_schedule(d_sequence, outcomes, out_png) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ks = np.arange(1, len(d_sequence) + 1)
    colors = ["tab:green" if o == "success" else "tab:orange" for o in outcomes]
    ax.bar(ks, np.asarray(d_sequence) * 1000.0, color=colors)
    ax.set_xlabel("attempt k")
    ax.set_ylabel("target distance d_k [mm]")
    ax.set_xticks(ks)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def write_stats(stats: dict, path) -> None:
    with open(Path(path), "w") as fp:
        json.dump(stats, fp, sort_keys=True, indent=1)
        fp.write("\n")
