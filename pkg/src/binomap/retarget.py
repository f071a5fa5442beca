"""Stage 1: turn per-frame 21-joint hand estimates into coarse gripper poses.

Each hand frame is reduced to a contact point (thumb-tip / index-tip
midpoint) and a palm frame built from the wrist->index and wrist->ring
rays. Contact points are projected into the image with pinhole
intrinsics and lifted back onto the organized scene cloud, which places
every coarse waypoint in the unified camera frame.

Hand sequence wire format (``binomap-hands/1``):

    {"version": "binomap-hands/1", "units": "meters", "t_s": ..., "t_e": ...,
     "frames": [{"frame_index": k,
                 "left": [21 x [x,y,z]], "right": [21 x [x,y,z]]}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BehindCamera, DegenerateHand, DegenerateInput, InputFormatError, NoValidPoint, PreconditionError
from .pointcloud import PointCloud
from .trajectory import ARMS, ArmTrack, BimanualTrajectory

HANDS_VERSION = "binomap-hands/1"
NUM_JOINTS = 21
# Below this cross-product norm the finger rays are treated as collinear.
COLLINEAR_EPS = 1e-8


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class JointIndexConfig:
    """Indices of the joints the retargeting actually uses.

    Defaults follow the standard 21-joint hand layout: wrist 0, thumb
    tip 4, index tip 8, ring tip 16.
    """

    wrist: int = 0
    thumb_tip: int = 4
    index_tip: int = 8
    ring_tip: int = 16

    def __post_init__(self):
        idx = (self.wrist, self.thumb_tip, self.index_tip, self.ring_tip)
        if len(set(idx)) != 4:
            raise ValueError(f"joint indices must be distinct, got {idx}")
        if any(not 0 <= i < NUM_JOINTS for i in idx):
            raise ValueError(f"joint indices must lie in [0, {NUM_JOINTS}), got {idx}")


@dataclass
class HandFrame:
    """21 labeled 3D joints for one hand at one timestep."""

    joints: np.ndarray
    handedness: str
    frame_index: int

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=float).reshape(-1, 3)
        if self.joints.shape[0] != NUM_JOINTS:
            raise DegenerateInput(
                f"hand frame needs {NUM_JOINTS} joints, got {self.joints.shape[0]}",
                frame_index=self.frame_index)
        if not np.all(np.isfinite(self.joints)):
            raise DegenerateInput("hand joints contain non-finite values",
                                  frame_index=self.frame_index)
        if self.handedness not in ARMS:
            raise DegenerateInput(f"handedness must be one of {ARMS}, got {self.handedness!r}")
        self.frame_index = int(self.frame_index)


@dataclass
class HandSequence:
    """Per-hand frame lists plus the retained [t_s, t_e] window."""

    left: list
    right: list
    t_s: int
    t_e: int

    def __post_init__(self):
        self.t_s, self.t_e = int(self.t_s), int(self.t_e)
        if self.t_s > self.t_e:
            raise DegenerateInput(f"t_s ({self.t_s}) must not exceed t_e ({self.t_e})")
        for name in ARMS:
            frames = getattr(self, name)
            indices = [f.frame_index for f in frames]
            if any(b <= a for a, b in zip(indices, indices[1:])):
                raise DegenerateInput(f"{name} frame indices must be strictly increasing")
        by_index = self.frames_by_index()
        for t in range(self.t_s, self.t_e + 1):
            for name in ARMS:
                if t not in by_index[name]:
                    raise DegenerateInput(f"frame {t}: {name} hand is missing",
                                          frame_index=t, arm=name)

    def frames_by_index(self) -> dict:
        return {name: {f.frame_index: f for f in getattr(self, name)} for name in ARMS}


def hand_pose(frame: HandFrame, cfg: JointIndexConfig = JointIndexConfig()) -> np.ndarray:
    """Palm frame from the wrist->index and wrist->ring rays.

    v_z = normalize(l_iw x l_rw), v_y = normalize((l_iw + l_rw) / 2),
    v_x = v_y x v_z; the result [v_x | v_y | v_z] is orthonormal with
    det +1 because v_y lies in span{l_iw, l_rw} and is therefore
    perpendicular to v_z. Raises DegenerateHand when the finger rays are
    collinear with the wrist (cross-product norm <= 1e-8).
    """
    joints = frame.joints
    wrist = joints[cfg.wrist]
    l_iw = joints[cfg.index_tip] - wrist
    l_rw = joints[cfg.ring_tip] - wrist
    vz = np.cross(l_iw, l_rw)
    nz = np.linalg.norm(vz)
    if nz <= COLLINEAR_EPS:
        raise DegenerateHand(
            f"index/ring rays are collinear (|cross| = {nz:.3e})",
            frame_index=frame.frame_index)
    vz = vz / nz
    vy = (l_iw + l_rw) / 2.0
    vy = vy / np.linalg.norm(vy)
    vx = np.cross(vy, vz)
    return np.column_stack([vx, vy, vz])


def contact_point(frame: HandFrame, cfg: JointIndexConfig = JointIndexConfig()) -> np.ndarray:
    """Midpoint between the thumb tip and the index finger tip."""
    return (frame.joints[cfg.thumb_tip] + frame.joints[cfg.index_tip]) / 2.0


def project_point(p, camera: CameraIntrinsics) -> tuple[int, int]:
    """Pinhole projection rounded to the nearest integer pixel."""
    x, y, z = np.asarray(p, dtype=float).reshape(3)
    if z <= 0:
        raise BehindCamera(f"point has non-positive depth z = {z!r}")
    u = int(np.rint(camera.fx * x / z + camera.cx))
    v = int(np.rint(camera.fy * y / z + camera.cy))
    return u, v


def lift_to_scene(pixel: tuple[int, int], scene: PointCloud) -> np.ndarray:
    """3D point stored at a pixel of an organized cloud.

    Falls back to the nearest valid pixel (Euclidean pixel distance,
    ties resolved row-major) when the queried pixel is masked out.
    Raises NoValidPoint when the whole mask is invalid.
    """
    if not scene.organized:
        raise DegenerateInput("lift_to_scene requires an organized cloud")
    u, v = int(pixel[0]), int(pixel[1])
    if not (0 <= u < scene.width and 0 <= v < scene.height):
        raise DegenerateInput(
            f"pixel ({u}, {v}) outside the {scene.width}x{scene.height} grid")
    idx = v * scene.width + u
    if scene.valid[idx]:
        return scene.points[idx].copy()
    valid_idx = np.flatnonzero(scene.valid)
    if valid_idx.size == 0:
        raise NoValidPoint("organized cloud has no valid pixels")
    vv, uu = np.divmod(valid_idx, scene.width)
    d2 = (uu - u) ** 2 + (vv - v) ** 2
    best = valid_idx[int(np.argmin(d2))]  # first minimum: row-major tie break
    return scene.points[best].copy()


def extract_coarse(seq: HandSequence, scene: PointCloud, camera: CameraIntrinsics,
                   cfg: JointIndexConfig = JointIndexConfig()) -> BimanualTrajectory:
    """Coarse bimanual trajectory over the retained [t_s, t_e] window.

    Per frame and per hand: position = lift(project(contact point)),
    orientation = palm frame from hand_pose. Precondition errors from the
    per-frame operations are re-raised with the frame index attached.
    """
    by_index = seq.frames_by_index()
    tracks = {name: ([], []) for name in ARMS}
    for t in range(seq.t_s, seq.t_e + 1):
        for name in ARMS:
            frame = by_index[name][t]
            try:
                rotation = hand_pose(frame, cfg)
                pixel = project_point(contact_point(frame, cfg), camera)
                position = lift_to_scene(pixel, scene)
            except PreconditionError as e:
                raise type(e)(f"frame {t} ({name}): {e}", frame_index=t, arm=name) from e
            tracks[name][0].append(position)
            tracks[name][1].append(rotation)
    return BimanualTrajectory(
        np.arange(seq.t_s, seq.t_e + 1),
        ArmTrack(np.asarray(tracks["left"][0]), np.asarray(tracks["left"][1])),
        ArmTrack(np.asarray(tracks["right"][0]), np.asarray(tracks["right"][1])),
    )


# ---------------------------------------------------------------------------
# Hand sequence I/O


def save_hand_sequence(seq: HandSequence, path) -> None:
    by_index = seq.frames_by_index()
    indices = sorted(set(by_index["left"]) | set(by_index["right"]))
    frames = []
    for t in indices:
        entry = {"frame_index": t}
        for name in ARMS:
            if t in by_index[name]:
                entry[name] = [[float(c) for c in row] for row in by_index[name][t].joints]
        frames.append(entry)
    doc = {"version": HANDS_VERSION, "units": "meters",
           "t_s": seq.t_s, "t_e": seq.t_e, "frames": frames}
    with open(Path(path), "w") as fp:
        json.dump(doc, fp, sort_keys=True)
        fp.write("\n")


def load_hand_sequence(path) -> HandSequence:
    path = Path(path)
    if not path.exists():
        raise InputFormatError(f"hand sequence file not found: {path}")
    try:
        with open(path) as fp:
            doc = json.load(fp)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(doc, dict) or doc.get("version") != HANDS_VERSION:
        raise InputFormatError(f"{path}: expected version {HANDS_VERSION!r}")
    try:
        t_s, t_e = int(doc["t_s"]), int(doc["t_e"])
        hands = {name: [] for name in ARMS}
        for entry in doc["frames"]:
            t = int(entry["frame_index"])
            for name in ARMS:
                if name in entry:
                    hands[name].append(HandFrame(np.asarray(entry[name], dtype=float),
                                                 handedness=name, frame_index=t))
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"{path}: malformed hand sequence ({e})") from e
    return HandSequence(left=hands["left"], right=hands["right"], t_s=t_s, t_e=t_e)
