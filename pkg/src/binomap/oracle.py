"""Deterministic verification oracles standing in for physical trials.

Both oracles are callables with the verifier signature
``oracle(trajectory, object_cloud) -> VerifierResult`` expected by the
contact-adjustment loop. The window oracle grades only the initial
contact distance against a hidden interval; the geometric oracle also
scans a frame range for contact loss and convex-hull over-compression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .contact import (OUTCOME_CONTACT_LOSS, OUTCOME_OVER_COMPRESSION, OUTCOME_SUCCESS,
                      VerifierResult)
from .pointcloud import PointCloud, min_distance
from .trajectory import ARMS, BimanualTrajectory


@dataclass(frozen=True)
class WindowOracle:
    """Success iff the primary arm's initial contact distance lies in
    the closed interval [lo, hi]."""

    lo: float
    hi: float
    primary_arm: str = "right"

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi:
            raise ValueError(f"window must satisfy 0 <= lo <= hi, got [{self.lo}, {self.hi}]")
        if self.primary_arm not in ARMS:
            raise ValueError(f"primary_arm must be one of {ARMS}")

    def __call__(self, traj: BimanualTrajectory, obj: PointCloud) -> VerifierResult:
        return verify_window(traj, obj, self)


def verify_window(traj: BimanualTrajectory, obj: PointCloud, window: WindowOracle) -> VerifierResult:
    d0, _ = min_distance(traj.arm(window.primary_arm).positions[0], obj)
    if d0 > window.hi:
        return VerifierResult(OUTCOME_CONTACT_LOSS,
                              f"initial distance {d0:.6g} m above window [{window.lo:.6g}, {window.hi:.6g}]")
    if d0 < window.lo:
        return VerifierResult(OUTCOME_OVER_COMPRESSION,
                              f"initial distance {d0:.6g} m below window [{window.lo:.6g}, {window.hi:.6g}]")
    return VerifierResult(OUTCOME_SUCCESS, f"initial distance {d0:.6g} m inside window")


@dataclass(frozen=True)
class OracleConfig:
    """Contact-window analysis over a frame range.

    loss_threshold: min distance above which contact counts as lost.
    compress_threshold: convex-hull penetration depth beyond which the
    pose counts as over-compressed. contact_frames: inclusive (first,
    last) frame range to scan, None for the whole trajectory.
    """

    loss_threshold: float = 0.005
    compress_threshold: float = 0.005
    contact_frames: tuple[int, int] | None = None
    primary_arm: str = "right"

    def __post_init__(self):
        if self.loss_threshold <= 0:
            raise ValueError("loss_threshold must be positive")
        if self.compress_threshold < 0:
            raise ValueError("compress_threshold must be >= 0")
        if self.primary_arm not in ARMS:
            raise ValueError(f"primary_arm must be one of {ARMS}")

    def __call__(self, traj: BimanualTrajectory, obj: PointCloud) -> VerifierResult:
        return verify_geometric(traj, obj, self)


def _hull_equations(points: np.ndarray):
    """Facet half-spaces (A, b) with A.x + b <= 0 inside, or None when the
    cloud cannot support a 3D hull (fewer than 4 non-coplanar points)."""
    if points.shape[0] < 4:
        return None
    try:
        hull = ConvexHull(points)
    except QhullError:
        return None
    return hull.equations[:, :3], hull.equations[:, 3]


def verify_geometric(traj: BimanualTrajectory, obj: PointCloud, cfg: OracleConfig) -> VerifierResult:
    """Scan the contact frames for lost contact and over-compression.

    Per frame, a primary-arm point inside the object's convex hull is
    graded by its penetration depth (distance to the nearest facet
    plane); a point outside is graded by its distance to the cloud. The
    lowest failing frame is reported. When the hull is degenerate the
    check falls back to distance-only and says so in the detail text.
    """
    n = len(traj)
    if cfg.contact_frames is None:
        first, last = 0, n - 1
    else:
        first, last = cfg.contact_frames
        if not (0 <= first <= last < n):
            raise ValueError(
                f"contact_frames {cfg.contact_frames} outside trajectory of length {n}")
    pts = obj.valid_points()
    hull = _hull_equations(pts)
    hull_note = "" if hull is not None else "; hull degenerate, over-compression check disabled"
    positions = traj.arm(cfg.primary_arm).positions
    for i in range(first, last + 1):
        p = positions[i]
        inside = False
        if hull is not None:
            A, b = hull
            slack = A @ p + b
            if np.max(slack) <= 1e-12:
                inside = True
                depth = -float(np.max(slack))
                if depth > cfg.compress_threshold:
                    return VerifierResult(
                        OUTCOME_OVER_COMPRESSION,
                        f"frame {i}: penetration depth {depth:.6g} m exceeds "
                        f"{cfg.compress_threshold:.6g} m")
        if not inside:
            d, _ = min_distance(p, obj)
            if d > cfg.loss_threshold:
                return VerifierResult(
                    OUTCOME_CONTACT_LOSS,
                    f"frame {i}: distance {d:.6g} m exceeds {cfg.loss_threshold:.6g} m"
                    + hull_note)
    return VerifierResult(OUTCOME_SUCCESS,
                          f"frames {first}..{last} within contact window" + hull_note)
