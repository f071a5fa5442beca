"""Bimanual trajectory containers and their JSON wire format.

A trajectory is a pair of equal-length pose tracks indexed by frame
timesteps. The on-disk format is versioned ``binomap-traj/1``:

    {"version": "binomap-traj/1", "units": "meters",
     "frames": [{"timestep": t,
                 "left":  {"p": [x,y,z], "R": [9 row-major]},
                 "right": {"p": [x,y,z], "R": [9 row-major]}}, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInput, InputFormatError
from .geometry import is_rotation

TRAJ_VERSION = "binomap-traj/1"
ARMS = ("left", "right")


@dataclass(frozen=True)
class Pose:
    """End-effector position (m) and orientation at one timestep."""

    position: np.ndarray
    rotation: np.ndarray


@dataclass
class ArmTrack:
    """Pose sequence for one arm: positions (T, 3) and rotations (T, 3, 3)."""

    positions: np.ndarray
    rotations: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.rotations = np.asarray(self.rotations, dtype=float).reshape(-1, 3, 3)
        if self.positions.shape[0] != self.rotations.shape[0]:
            raise DegenerateInput(
                f"arm track has {self.positions.shape[0]} positions but "
                f"{self.rotations.shape[0]} rotations")
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.rotations))):
            raise DegenerateInput("arm track contains non-finite values")

    def __len__(self) -> int:
        return self.positions.shape[0]

    def pose(self, i: int) -> Pose:
        return Pose(self.positions[i].copy(), self.rotations[i].copy())

    def copy(self) -> "ArmTrack":
        return ArmTrack(self.positions.copy(), self.rotations.copy())


@dataclass
class BimanualTrajectory:
    """Time-indexed left/right pose sequences of equal length."""

    timesteps: np.ndarray
    left: ArmTrack
    right: ArmTrack

    def __post_init__(self):
        self.timesteps = np.asarray(self.timesteps, dtype=int).reshape(-1)
        n = self.timesteps.shape[0]
        if n == 0:
            raise DegenerateInput("trajectory must be nonempty")
        if len(self.left) != n or len(self.right) != n:
            raise DegenerateInput(
                f"arm lengths ({len(self.left)}, {len(self.right)}) do not match "
                f"{n} timesteps")

    def __len__(self) -> int:
        return self.timesteps.shape[0]

    def arm(self, name: str) -> ArmTrack:
        if name not in ARMS:
            raise ValueError(f"arm must be one of {ARMS}, got {name!r}")
        return self.left if name == "left" else self.right

    def with_arm(self, name: str, track: ArmTrack) -> "BimanualTrajectory":
        """New trajectory with one arm replaced; the other is copied verbatim."""
        if name == "left":
            return BimanualTrajectory(self.timesteps.copy(), track, self.right.copy())
        if name == "right":
            return BimanualTrajectory(self.timesteps.copy(), self.left.copy(), track)
        raise ValueError(f"arm must be one of {ARMS}, got {name!r}")

    def translated(self, delta) -> "BimanualTrajectory":
        """Both arms shifted by ``delta``; orientations unchanged."""
        d = np.asarray(delta, dtype=float).reshape(3)
        return BimanualTrajectory(
            self.timesteps.copy(),
            ArmTrack(self.left.positions + d, self.left.rotations.copy()),
            ArmTrack(self.right.positions + d, self.right.rotations.copy()),
        )

    def copy(self) -> "BimanualTrajectory":
        return BimanualTrajectory(self.timesteps.copy(), self.left.copy(), self.right.copy())

    def to_dict(self) -> dict:
        frames = []
        for i, t in enumerate(self.timesteps):
            frame = {"timestep": int(t)}
            for name in ARMS:
                track = self.arm(name)
                frame[name] = {
                    "p": [float(c) for c in track.positions[i]],
                    "R": [float(c) for c in track.rotations[i].reshape(9)],
                }
            frames.append(frame)
        return {"version": TRAJ_VERSION, "units": "meters", "frames": frames}

    @classmethod
    def from_dict(cls, doc: dict) -> "BimanualTrajectory":
        if not isinstance(doc, dict) or doc.get("version") != TRAJ_VERSION:
            raise InputFormatError(f"expected trajectory version {TRAJ_VERSION!r}")
        frames = doc.get("frames")
        if not frames:
            raise InputFormatError("trajectory file has no frames")
        timesteps, tracks = [], {name: ([], []) for name in ARMS}
        for frame in frames:
            try:
                timesteps.append(int(frame["timestep"]))
                for name in ARMS:
                    p = np.asarray(frame[name]["p"], dtype=float).reshape(3)
                    R = np.asarray(frame[name]["R"], dtype=float).reshape(3, 3)
                    if not is_rotation(R):
                        raise InputFormatError(
                            f"frame {frame['timestep']} {name} rotation is not in SO(3)")
                    tracks[name][0].append(p)
                    tracks[name][1].append(R)
            except (KeyError, TypeError, ValueError) as e:
                raise InputFormatError(f"malformed trajectory frame ({e})") from e
        return cls(
            np.asarray(timesteps),
            ArmTrack(np.asarray(tracks["left"][0]), np.asarray(tracks["left"][1])),
            ArmTrack(np.asarray(tracks["right"][0]), np.asarray(tracks["right"][1])),
        )


def save_trajectory(traj: BimanualTrajectory, path) -> None:
    with open(Path(path), "w") as fp:
        json.dump(traj.to_dict(), fp, sort_keys=True, indent=1)
        fp.write("\n")


def load_trajectory(path) -> BimanualTrajectory:
    path = Path(path)
    if not path.exists():
        raise InputFormatError(f"trajectory file not found: {path}")
    try:
        with open(path) as fp:
            doc = json.load(fp)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: not valid JSON ({e})") from e
    return BimanualTrajectory.from_dict(doc)
