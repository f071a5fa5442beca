"""Stage 2a: motion-smoothness post-optimization.

Positions of each arm are forced onto their least-squares plane and
refitted with a clamped cubic B-spline (least squares over a reduced
control polygon, endpoints interpolated). Rotations are rebuilt by
spherical interpolation between anchor frames chosen where the
positional correction was smallest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .errors import DegenerateInput
from .geometry import (Plane, fit_plane, in_plane_basis, project_to_plane, quat_to_rotation,
                       rotation_to_quat, slerp)
from .trajectory import ARMS, ArmTrack, BimanualTrajectory

SPLINE_DEGREE = 3


@dataclass(frozen=True)
class SmoothConfig:
    """Smoothing knobs.

    top_n: intermediate anchor count for rotation interpolation (the
    start and end frames are always anchors). control_points: size of
    the spline control polygon; None picks max(4, ceil(N/3)) for an
    N-point track. smoothing_weight: optional second-difference penalty
    on the control polygon (0 disables it; the control-point reduction
    already smooths).
    """

    top_n: int = 3
    control_points: int | None = None
    smoothing_weight: float = 0.0

    def __post_init__(self):
        if self.top_n < 0:
            raise ValueError("top_n must be >= 0")
        if self.control_points is not None and self.control_points < 4:
            raise ValueError("a clamped cubic spline needs >= 4 control points")
        if self.smoothing_weight < 0:
            raise ValueError("smoothing_weight must be >= 0")


@dataclass(frozen=True)
class AnchorSet:
    """Ordered frame indices whose rotations are held fixed."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int).reshape(-1)
        if idx.size == 0:
            raise ValueError("anchor set must be nonempty")
        if np.any(np.diff(idx) <= 0):
            raise ValueError(f"anchor indices must be strictly increasing, got {idx}")
        object.__setattr__(self, "indices", idx)

    def validate_for(self, length: int) -> None:
        idx = self.indices
        if idx[0] != 0 or idx[-1] != length - 1:
            raise ValueError(
                f"anchors must contain both endpoints 0 and {length - 1}, got {idx}")


def _clamped_knots(u: np.ndarray, n_ctrl: int) -> np.ndarray:
    """Clamped cubic knot vector with interior knots placed by parameter
    averaging, which keeps the least-squares system well conditioned."""
    k = SPLINE_DEGREE
    t = np.empty(n_ctrl + k + 1)
    t[:k + 1] = u[0]
    t[-(k + 1):] = u[-1]
    n_interior = n_ctrl - k - 1
    if n_interior > 0:
        d = len(u) / (n_ctrl - k)
        for j in range(1, n_interior + 1):
            i = int(np.floor(j * d))
            a = j * d - i
            t[k + j] = (1.0 - a) * u[i - 1] + a * u[i]
    return t


def fit_spline_2d(u: np.ndarray, values: np.ndarray, n_ctrl: int,
                  smoothing_weight: float = 0.0) -> np.ndarray:
    """Least-squares clamped cubic B-spline, evaluated back at ``u``.

    The first and last control points are pinned to the first and last
    data rows, so the fit interpolates the endpoints exactly. ``values``
    may have any number of columns (fitted jointly with one basis).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    y = np.asarray(values, dtype=float)
    y = y.reshape(len(u), -1)
    n_ctrl = int(n_ctrl)
    if n_ctrl < 4:
        raise DegenerateInput("spline fit needs >= 4 control points")
    if n_ctrl > len(u):
        raise DegenerateInput(
            f"control points ({n_ctrl}) exceed the number of samples ({len(u)})")
    knots = _clamped_knots(u, n_ctrl)
    B = BSpline.design_matrix(u, knots, SPLINE_DEGREE).toarray()
    rows = [B[:, 1:-1]]
    rhs = [y - np.outer(B[:, 0], y[0]) - np.outer(B[:, -1], y[-1])]
    if smoothing_weight > 0.0 and n_ctrl >= 3:
        D2 = np.zeros((n_ctrl - 2, n_ctrl))
        for i in range(n_ctrl - 2):
            D2[i, i:i + 3] = (1.0, -2.0, 1.0)
        P = np.sqrt(smoothing_weight) * D2
        rows.append(P[:, 1:-1])
        rhs.append(-np.outer(P[:, 0], y[0]) - np.outer(P[:, -1], y[-1]))
    interior, *_ = np.linalg.lstsq(np.vstack(rows), np.vstack(rhs), rcond=None)
    coef = np.vstack([y[0], interior, y[-1]])
    out = BSpline(knots, coef, SPLINE_DEGREE)(u)
    out[0] = y[0]
    out[-1] = y[-1]
    return out


def smooth_positions(points, cfg: SmoothConfig = SmoothConfig()) -> tuple[np.ndarray, Plane, np.ndarray]:
    """Coplanar spline smoothing of one arm's positions.

    Fits the least-squares plane, projects every point onto it, fits a
    clamped cubic B-spline in a 2D chart of the plane (chord-length
    parameterization), and maps the fit back to 3D. Returns
    (smoothed points, plane, per-frame deviations ||raw - smoothed||).
    Raises DegenerateInput for fewer than 4 points or collinear input.
    """
    P = np.asarray(points, dtype=float).reshape(-1, 3)
    n = P.shape[0]
    if n < 4:
        raise DegenerateInput(f"position smoothing needs >= 4 points, got {n}")
    plane = fit_plane(P)
    proj = project_to_plane(P, plane)
    e1, e2 = in_plane_basis(plane, P)
    origin = proj.mean(axis=0)
    uv = np.column_stack([(proj - origin) @ e1, (proj - origin) @ e2])
    chords = np.linalg.norm(np.diff(proj, axis=0), axis=1)
    u = np.concatenate([[0.0], np.cumsum(chords)])
    if u[-1] <= 0.0:
        raise DegenerateInput("trajectory has zero total arc length")
    n_ctrl = cfg.control_points if cfg.control_points is not None else max(4, int(np.ceil(n / 3)))
    uv_fit = fit_spline_2d(u, uv, n_ctrl, cfg.smoothing_weight)
    smoothed = origin + np.outer(uv_fit[:, 0], e1) + np.outer(uv_fit[:, 1], e2)
    smoothed[0] = proj[0]
    smoothed[-1] = proj[-1]
    deviations = np.linalg.norm(P - smoothed, axis=1)
    return smoothed, plane, deviations


def select_anchors(deviations, cfg: SmoothConfig = SmoothConfig()) -> AnchorSet:
    """Start, end, and the top_n intermediate frames with the smallest
    positional deviation (ties resolve to the lower index)."""
    dev = np.asarray(deviations, dtype=float).reshape(-1)
    n = dev.shape[0]
    if n == 0:
        raise DegenerateInput("deviations must be nonempty")
    if n <= 2:
        return AnchorSet(np.arange(n))
    interior = np.arange(1, n - 1)
    order = np.argsort(dev[1:-1], kind="stable")
    chosen = interior[order[:min(cfg.top_n, n - 2)]]
    return AnchorSet(np.array(sorted({0, n - 1} | set(int(i) for i in chosen))))


def smooth_rotations(rotations, anchors: AnchorSet) -> np.ndarray:
    """Geodesic re-interpolation of rotations between anchor frames.

    Rotations at anchor indices are preserved exactly. Between anchors
    i < j with m = j - i - 1 omitted frames, frame i + r receives
    slerp(q_i, q_j, r / (m + 1)).
    """
    R = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    anchors.validate_for(R.shape[0])
    out = R.copy()
    for i, j in zip(anchors.indices, anchors.indices[1:]):
        m = j - i - 1
        if m <= 0:
            continue
        qi = rotation_to_quat(R[i])
        qj = rotation_to_quat(R[j])
        for r in range(1, m + 1):
            out[i + r] = quat_to_rotation(slerp(qi, qj, r / (m + 1)))
    return out


@dataclass
class ArmSmoothing:
    """Per-arm diagnostics emitted alongside the smoothed trajectory."""

    plane: Plane
    deviations: np.ndarray
    anchors: AnchorSet

    def to_dict(self) -> dict:
        return {
            "plane": {"normal": [float(c) for c in self.plane.normal],
                      "offset": float(self.plane.offset)},
            "deviations": [float(d) for d in self.deviations],
            "anchors": [int(i) for i in self.anchors.indices],
        }


@dataclass
class SmoothResult:
    trajectory: BimanualTrajectory
    arms: dict = field(default_factory=dict)

    def diagnostics(self) -> dict:
        return {name: self.arms[name].to_dict() for name in ARMS}


def smooth_trajectory(traj: BimanualTrajectory, cfg: SmoothConfig = SmoothConfig(),
                      right_cfg: SmoothConfig | None = None) -> SmoothResult:
    """Positional then rotational smoothing, independently per arm.

    ``cfg`` applies to both arms unless ``right_cfg`` overrides the
    right one. Lengths and timesteps are preserved.
    """
    configs = {"left": cfg, "right": right_cfg if right_cfg is not None else cfg}
    out = traj.copy()
    info = {}
    for name in ARMS:
        track = traj.arm(name)
        smoothed, plane, deviations = smooth_positions(track.positions, configs[name])
        anchors = select_anchors(deviations, configs[name])
        rotations = smooth_rotations(track.rotations, anchors)
        out = out.with_arm(name, ArmTrack(smoothed, rotations))
        info[name] = ArmSmoothing(plane=plane, deviations=deviations, anchors=anchors)
    return SmoothResult(trajectory=out, arms=info)
