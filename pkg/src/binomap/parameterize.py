"""Stage 3: category-level primitive parameterization.

A verified primitive is resized for a new same-category object in one
non-iterative step: the object size difference is measured along the
inter-arm axis on a horizontal slice at the initial contact height, the
primary arm's verified start is offset outward by that difference, the
trajectory is rescaled once about its anchor, and finally relocated to
the new object's planar centroid.

Record wire format (``binomap-prim/1``): a JSON bundle holding the
refined trajectory inline, a reference path to the base object cloud,
the skill pattern, and the verified (d, s) pair from the adjustment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contact import SkillPattern, anchor_point, relocate, scale_primary
from .errors import DegenerateGeometry, EmptySlice, InputFormatError, NoAlignedPair
from .pointcloud import PointCloud, load_point_cloud
from .trajectory import BimanualTrajectory

RECORD_VERSION = "binomap-prim/1"


@dataclass(frozen=True)
class SliceConfig:
    """Horizontal-slice measurement parameters.

    slice_height: z of the slice (None means: take it from the primary
    arm's initial contact point when adapting). half_thickness: points
    within +-half_thickness of the slice height are kept.
    direction_tolerance: max angle (rad) between a point-pair direction
    and the measurement axis. max_slice_points: slices larger than this
    are thinned by uniform stride before the O(n^2) pair scan.
    """

    half_thickness: float = 0.005
    direction_tolerance: float = np.deg2rad(5.0)
    slice_height: float | None = None
    max_slice_points: int = 2000

    def __post_init__(self):
        if self.half_thickness <= 0:
            raise ValueError("half_thickness must be positive")
        if not 0.0 < self.direction_tolerance < np.pi / 2:
            raise ValueError("direction_tolerance must lie in (0, pi/2)")
        if self.max_slice_points < 2:
            raise ValueError("max_slice_points must be >= 2")


def slice_at_height(cloud: PointCloud, height: float, half_thickness: float) -> np.ndarray:
    """Points with |z - height| <= half_thickness."""
    pts = cloud.valid_points()
    keep = np.abs(pts[:, 2] - height) <= half_thickness
    return pts[keep]


def max_aligned_extent(points: np.ndarray, axis: np.ndarray, tolerance: float) -> float:
    """Largest pairwise distance among pairs aligned with +-axis.

    Brute-force O(n^2) scan, chunked to bound memory. Raises
    NoAlignedPair when no pair falls within the angular tolerance.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n = pts.shape[0]
    cos_tol = np.cos(tolerance)
    best = -1.0
    chunk = max(1, int(2e6) // max(n, 1))
    for start in range(0, n, chunk):
        block = pts[start:start + chunk]
        diff = block[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        nonzero = dist > 1e-12
        proj = np.abs(diff @ axis)
        aligned = nonzero & (proj >= cos_tol * dist)
        if np.any(aligned):
            best = max(best, float(dist[aligned].max()))
    if best < 0:
        raise NoAlignedPair(
            f"no point pair within {np.rad2deg(tolerance):.2f} deg of the measurement axis")
    return best


def _slice_extent(cloud: PointCloud, which: str, axis: np.ndarray, cfg: SliceConfig) -> float:
    if cfg.slice_height is None:
        raise ValueError("SliceConfig.slice_height must be set for a direct measurement")
    sl = slice_at_height(cloud, cfg.slice_height, cfg.half_thickness)
    if sl.shape[0] == 0:
        raise EmptySlice(
            f"{which} cloud has no points within {cfg.half_thickness} m of "
            f"z = {cfg.slice_height}", cloud=which, height=cfg.slice_height)
    if sl.shape[0] > cfg.max_slice_points:
        stride = int(np.ceil(sl.shape[0] / cfg.max_slice_points))
        sl = sl[::stride]
    try:
        return max_aligned_extent(sl, axis, cfg.direction_tolerance)
    except NoAlignedPair as e:
        raise NoAlignedPair(f"{which} cloud: {e}", cloud=which) from e


def size_delta(base: PointCloud, new: PointCloud, axis, cfg: SliceConfig) -> float:
    """Axis-aligned size difference new - base on the contact-height slice.

    ``axis`` is the (normalized) inter-arm initial-position difference;
    only point pairs whose direction lies within the configured angular
    tolerance of +-axis contribute. Antisymmetric by construction.
    """
    a = np.asarray(axis, dtype=float).reshape(3)
    norm = np.linalg.norm(a)
    if norm < 1e-12:
        raise DegenerateGeometry("measurement axis has zero length")
    a = a / norm
    return _slice_extent(new, "new", a, cfg) - _slice_extent(base, "base", a, cfg)


@dataclass
class PrimitiveRecord:
    """Verified primitive plus everything needed to re-target it."""

    trajectory: BimanualTrajectory
    base_cloud: PointCloud
    pattern: SkillPattern
    d: float
    s: float
    skill: str = ""
    provenance: dict = field(default_factory=dict)
    attempts: list = field(default_factory=list)

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("verified distance d must be >= 0")
        if len(self.base_cloud.valid_points()) == 0:
            raise ValueError("record requires a nonempty base cloud")
        if not self.skill:
            self.skill = self.pattern.kind


def adapt_primitive(rec: PrimitiveRecord, new: PointCloud, cfg: SliceConfig) -> BimanualTrajectory:
    """One-shot resize + relocate of a verified primitive.

    delta = size_delta along the inter-arm axis; the primary start moves
    outward along the anchor->start direction by delta (widening the
    span for larger objects, narrowing for smaller), scale_primary runs
    exactly once, and the result is relocated to the new cloud.
    """
    traj = rec.trajectory
    inter_arm = traj.left.positions[0] - traj.right.positions[0]
    if np.linalg.norm(inter_arm) < 1e-12:
        raise DegenerateGeometry("arms start at the same point; no measurement axis")
    if cfg.slice_height is None:
        contact_z = float(traj.arm(rec.pattern.primary_arm).positions[0][2])
        cfg = SliceConfig(half_thickness=cfg.half_thickness,
                          direction_tolerance=cfg.direction_tolerance,
                          slice_height=contact_z,
                          max_slice_points=cfg.max_slice_points)
    delta = size_delta(rec.base_cloud, new, inter_arm, cfg)
    anchor = anchor_point(traj, rec.pattern, rec.base_cloud)
    old_start = traj.arm(rec.pattern.primary_arm).positions[0]
    span = old_start - anchor
    span_norm = float(np.linalg.norm(span))
    if span_norm <= 1e-9:
        raise DegenerateGeometry("anchor coincides with the primary arm's start")
    new_start = old_start + delta * (span / span_norm)
    adjusted, _ = scale_primary(traj, rec.pattern, anchor, new_start)
    return relocate(adjusted, rec.base_cloud, new)


# ---------------------------------------------------------------------------
# Record I/O


def save_record(rec: PrimitiveRecord, path, base_cloud_path) -> None:
    """Write the record; the base cloud is stored by reference path
    (relative paths are resolved against the record's directory)."""
    doc = {
        "version": RECORD_VERSION,
        "skill": rec.skill,
        "pattern": rec.pattern.to_dict(),
        "d": float(rec.d),
        "s": float(rec.s),
        "base_cloud": str(base_cloud_path),
        "trajectory": rec.trajectory.to_dict(),
        "provenance": rec.provenance,
        "attempts": list(rec.attempts),
    }
    with open(Path(path), "w") as fp:
        json.dump(doc, fp, sort_keys=True, indent=1)
        fp.write("\n")


def load_record(path) -> PrimitiveRecord:
    path = Path(path)
    if not path.exists():
        raise InputFormatError(f"record file not found: {path}")
    try:
        with open(path) as fp:
            doc = json.load(fp)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(doc, dict) or doc.get("version") != RECORD_VERSION:
        raise InputFormatError(f"{path}: expected version {RECORD_VERSION!r}")
    try:
        cloud_path = Path(doc["base_cloud"])
        if not cloud_path.is_absolute():
            cloud_path = path.parent / cloud_path
        return PrimitiveRecord(
            trajectory=BimanualTrajectory.from_dict(doc["trajectory"]),
            base_cloud=load_point_cloud(cloud_path),
            pattern=SkillPattern.from_dict(doc["pattern"]),
            d=float(doc["d"]),
            s=float(doc["s"]),
            skill=doc.get("skill", ""),
            provenance=doc.get("provenance", {}),
            attempts=doc.get("attempts", []),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"{path}: malformed record ({e})") from e
