"""Stage 2b: geometry-aware iterative contact adjustment.

The primary arm's start point is retargeted toward the object until the
initial contact distance hits a decaying schedule d_k = d1 * gamma^(k-1),
the whole primary trajectory is rescaled about the skill's anchor by the
induced similarity factor, and a pluggable verifier accepts or rejects
each candidate. The support arm is never modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (AllAttemptsFailed, ArmDesynchronized, DegenerateGeometry, DegenerateInput,
                     Unreachable)
from .pointcloud import PointCloud, min_distance
from .trajectory import ARMS, ArmTrack, BimanualTrajectory

SKILL_KINDS = ("poking", "pivoting", "pushing", "wrapping")
REF_FIXED_ARM = "fixed_arm"
REF_FARTHEST = "object_farthest_point"
# Skills where both arms move in lockstep; inputs must keep the inter-arm
# distance constant to this tolerance before adjustment.
SYNCHRONIZED_KINDS = ("pushing", "wrapping")
SYNC_TOL = 1e-6

OUTCOME_SUCCESS = "success"
OUTCOME_CONTACT_LOSS = "contact_loss"
OUTCOME_OVER_COMPRESSION = "over_compression"
OUTCOME_OTHER = "other_failure"
OUTCOMES = (OUTCOME_SUCCESS, OUTCOME_CONTACT_LOSS, OUTCOME_OVER_COMPRESSION, OUTCOME_OTHER)


@dataclass(frozen=True)
class SkillPattern:
    """Which arm leads and what the trajectory scaling is anchored to.

    Poking anchors to the object point farthest from the active arm;
    pivoting/pushing/wrapping anchor to the support arm's initial
    position.
    """

    kind: str
    primary_arm: str = "right"
    reference: str | None = None

    def __post_init__(self):
        if self.kind not in SKILL_KINDS:
            raise ValueError(f"skill must be one of {SKILL_KINDS}, got {self.kind!r}")
        if self.primary_arm not in ARMS:
            raise ValueError(f"primary_arm must be one of {ARMS}, got {self.primary_arm!r}")
        expected = REF_FARTHEST if self.kind == "poking" else REF_FIXED_ARM
        if self.reference is None:
            object.__setattr__(self, "reference", expected)
        elif self.reference != expected:
            raise ValueError(f"{self.kind} requires reference {expected!r}, got {self.reference!r}")

    @property
    def support_arm(self) -> str:
        return "left" if self.primary_arm == "right" else "right"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "primary_arm": self.primary_arm, "reference": self.reference}

    @classmethod
    def from_dict(cls, doc: dict) -> "SkillPattern":
        return cls(kind=doc["kind"], primary_arm=doc.get("primary_arm", "right"),
                   reference=doc.get("reference"))


@dataclass(frozen=True)
class AdjustConfig:
    """Contact-adjustment schedule: d_k = d1 * gamma^(k-1), k = 1..k_max."""

    d1: float = 0.005
    gamma: float = 0.85
    k_max: int = 10

    def __post_init__(self):
        if self.d1 <= 0:
            raise ValueError("d1 must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")


@dataclass(frozen=True)
class VerifierResult:
    """Single verification outcome plus free-form detail text."""

    outcome: str
    detail: str = ""

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}, got {self.outcome!r}")

    @property
    def success(self) -> bool:
        return self.outcome == OUTCOME_SUCCESS


@dataclass(frozen=True)
class AttemptRecord:
    k: int
    d: float
    s: float
    result: VerifierResult

    def to_dict(self) -> dict:
        return {"k": self.k, "d_k": self.d, "s_k": self.s,
                "outcome": self.result.outcome, "detail": self.result.detail}


@dataclass
class AdjustResult:
    trajectory: BimanualTrajectory
    k_used: int
    attempts: list


def decay_schedule(cfg: AdjustConfig) -> np.ndarray:
    """The full target-distance sequence d1 * gamma^(k-1), k = 1..k_max."""
    return cfg.d1 * cfg.gamma ** np.arange(cfg.k_max)


def anchor_point(traj: BimanualTrajectory, pattern: SkillPattern, obj: PointCloud) -> np.ndarray:
    """Scaling anchor for the pattern.

    Poking: the object point farthest from the primary arm's initial
    position (ties resolve to the lowest index). Otherwise: the support
    arm's initial position.
    """
    if pattern.reference == REF_FARTHEST:
        pts = obj.valid_points()
        if pts.shape[0] == 0:
            raise DegenerateInput("anchor selection on an empty cloud")
        start = traj.arm(pattern.primary_arm).positions[0]
        d2 = np.einsum("ij,ij->i", pts - start, pts - start)
        return pts[int(np.argmax(d2))].copy()
    return traj.arm(pattern.support_arm).positions[0].copy()


def retarget_contact(p_start, obj: PointCloud, d_target: float) -> np.ndarray:
    """Slide a point along the ray toward its nearest object point until
    its distance to the cloud equals ``d_target``.

    The 1D distance profile along the ray is bracketed and solved by
    Brent's method; the result is checked to 1e-6 and Unreachable is
    raised rather than clamping when the target cannot be realized.
    """
    if d_target < 0:
        raise ValueError("d_target must be >= 0")
    p = np.asarray(p_start, dtype=float).reshape(3)
    d0, nearest = min_distance(p, obj)
    if abs(d0 - d_target) < 1e-12:
        return p.copy()
    if d0 < 1e-12:
        raise Unreachable("start point coincides with an object point; approach ray undefined")
    direction = (nearest - p) / d0

    def gap(s: float) -> float:
        return min_distance(p + s * direction, obj)[0] - d_target

    if d_target < d0:
        lo, hi = 0.0, d0  # gap(0) > 0, gap(d0) = -d_target <= 0
    else:
        # Move away from the object; expand the bracket until the gap flips.
        lo = -(d_target - d0)
        for _ in range(64):
            if gap(lo) >= 0.0:
                break
            lo *= 2.0
        else:
            raise Unreachable(f"could not bracket target distance {d_target}")
        lo, hi = lo, 0.0
    try:
        root = brentq(gap, lo, hi, xtol=1e-14, rtol=8.9e-16)
    except ValueError as e:
        raise Unreachable(f"root finding failed for target {d_target}: {e}") from e
    out = p + root * direction
    achieved = min_distance(out, obj)[0]
    if abs(achieved - d_target) > 1e-6:
        raise Unreachable(
            f"target distance {d_target} not realizable on the nearest-point ray "
            f"(achieved {achieved})")
    return out


def scale_primary(traj: BimanualTrajectory, pattern: SkillPattern, anchor, new_start
                  ) -> tuple[BimanualTrajectory, float]:
    """Similarity rescale of the primary arm about the anchor.

    s = ||new_start - anchor|| / ||old_start - anchor|| and every primary
    position becomes anchor + s * (p - anchor). The support arm and all
    orientations are unchanged.
    """
    anchor = np.asarray(anchor, dtype=float).reshape(3)
    new_start = np.asarray(new_start, dtype=float).reshape(3)
    primary = traj.arm(pattern.primary_arm)
    old_start = primary.positions[0]
    denom = float(np.linalg.norm(old_start - anchor))
    if denom <= 1e-9:
        raise DegenerateGeometry("anchor coincides with the primary arm's start")
    s = float(np.linalg.norm(new_start - anchor)) / denom
    scaled = anchor + s * (primary.positions - anchor)
    out = traj.with_arm(pattern.primary_arm, ArmTrack(scaled, primary.rotations.copy()))
    return out, s


def check_synchronized(traj: BimanualTrajectory, tol: float = SYNC_TOL) -> None:
    """Require the per-frame inter-arm distance to be constant within tol."""
    dist = np.linalg.norm(traj.right.positions - traj.left.positions, axis=1)
    spread = float(dist.max() - dist.min())
    if spread > tol:
        raise ArmDesynchronized(
            f"inter-arm distance varies by {spread:.3e} (> {tol:.0e}); "
            "synchronized skills require a constant arm separation")


def iterate_adjust(traj: BimanualTrajectory, pattern: SkillPattern, obj: PointCloud,
                   cfg: AdjustConfig, verifier) -> AdjustResult:
    """Run the decaying contact schedule until the verifier accepts.

    Every attempt restarts from the input trajectory: d_k is realized by
    retarget_contact, the primary arm is rescaled about the anchor, and
    the candidate goes to ``verifier(candidate, obj)``. Raises
    AllAttemptsFailed (carrying the attempt log and the last candidate)
    when no attempt within k_max succeeds.
    """
    if pattern.kind in SYNCHRONIZED_KINDS:
        check_synchronized(traj)
    anchor = anchor_point(traj, pattern, obj)
    start = traj.arm(pattern.primary_arm).positions[0]
    attempts: list[AttemptRecord] = []
    candidate = traj
    for k in range(1, cfg.k_max + 1):
        d_k = cfg.d1 * cfg.gamma ** (k - 1)
        new_start = retarget_contact(start, obj, d_k)
        candidate, s_k = scale_primary(traj, pattern, anchor, new_start)
        result = verifier(candidate, obj)
        attempts.append(AttemptRecord(k=k, d=float(d_k), s=s_k, result=result))
        if result.success:
            return AdjustResult(trajectory=candidate, k_used=k, attempts=attempts)
    raise AllAttemptsFailed(
        f"verifier rejected all {cfg.k_max} contact-adjustment attempts",
        attempts=attempts, last_trajectory=candidate)


def relocate(traj: BimanualTrajectory, base: PointCloud, new: PointCloud) -> BimanualTrajectory:
    """Translate both arms by the planar centroid displacement of the
    object (z component of the shift is discarded)."""
    delta = new.centroid() - base.centroid()
    delta[2] = 0.0
    return traj.translated(delta)
