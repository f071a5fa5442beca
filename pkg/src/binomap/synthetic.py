"""Seeded synthetic datasets: four desk-scale manipulation scenarios.

Each scenario produces a hand-demonstration sequence, an organized scene
cloud, a segmented object cloud, a ground-truth trajectory, and a ready
pipeline config with a window verifier. Generation is deterministic in
(name, seed, sigma).

Generative model shared by all scenarios: the scene is a plane imaged by
a pinhole camera; ground-truth waypoints are chosen as exact scene grid
points (analytic paths projected to pixels and snapped to the stored
scene point), so retargeting reproduces them bitwise at sigma = 0. Hand
joints are synthesized around each waypoint so that the thumb/index
midpoint hits the waypoint and the wrist/index/ring rays reproduce the
intended palm frame. Object clouds are placed so that the pattern's
anchor, the primary start, and the nearest object point are collinear,
which makes every scheduled contact distance exactly realizable and the
window-oracle attempt count equal to its closed form.

Scenarios:

* pivot-bowl — right arm sweeps a 90 deg arc in a tilted plane around a
  bowl rim centered at the static-ish left arm's start; left arm drifts
  on a small arc. Window [3.0, 3.4] mm -> 4 attempts.
* poke-cup — right arm arcs toward a cup rim; anchor is the cup point
  farthest from the right start. Window [4.8, 5.2] mm -> 1 attempt.
* push-basket — both arms translate in lockstep along +x toward a basket
  face on a frontal plane. Window [4.1, 4.4] mm -> 2 attempts.
* wrap-ball — both arms translate in lockstep toward a ball. Window
  [3.5, 3.8] mm -> 3 attempts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import CONFIG_VERSION
from .errors import UnknownScenario
from .geometry import Plane, in_plane_basis, plane_residual, rotation_about_axis
from .pointcloud import PointCloud, save_point_cloud
from .retarget import (CameraIntrinsics, HandFrame, HandSequence, project_point,
                       save_hand_sequence)
from .trajectory import ArmTrack, BimanualTrajectory, save_trajectory

SCENARIO_NAMES = ("pivot-bowl", "poke-cup", "push-basket", "wrap-ball")

# Finger-length parameters of the synthetic hand (meters, hand-local).
_FINGER_LEN = 0.11
_FINGER_SPREAD = 0.35

# Filler joints (hand-local coordinates) for the 17 indices the pipeline
# never reads; four splayed fingers plus a thumb chain around the palm.
_FILLER_LOCAL = np.zeros((21, 3))
for _f, _x in enumerate((-0.045, -0.02, 0.005, 0.03, 0.05)):
    for _j, _y in enumerate((0.03, 0.06, 0.09, 0.105)):
        _FILLER_LOCAL[1 + 4 * _f + _j] = (_x, _y, 0.0)


@dataclass
class Scenario:
    """One generated dataset plus its pipeline configuration."""

    name: str
    seed: int
    sigma: float
    camera: CameraIntrinsics
    hands: HandSequence
    scene: PointCloud
    object_cloud: PointCloud
    ground_truth: BimanualTrajectory
    config_doc: dict
    expected_k: int
    window: tuple = field(default=(0.0, 0.0))


def _scene_from_plane(camera: CameraIntrinsics, width: int, height: int, plane: Plane) -> PointCloud:
    us, vs = np.meshgrid(np.arange(width), np.arange(height))
    dirs = np.stack([(us - camera.cx) / camera.fx,
                     (vs - camera.cy) / camera.fy,
                     np.ones_like(us, dtype=float)], axis=-1).reshape(-1, 3)
    t = -plane.offset / (dirs @ plane.normal)
    if np.any(t <= 0):
        raise ValueError("scene plane is not fully in front of the camera")
    points = dirs * t[:, None]
    return PointCloud(points=points, height=height, width=width,
                      valid=np.ones(height * width, dtype=bool))


def _snap(points: np.ndarray, camera: CameraIntrinsics, scene: PointCloud) -> np.ndarray:
    """Project analytic waypoints to pixels and take the stored scene points."""
    out = []
    for p in points:
        u, v = project_point(p, camera)
        if not (0 <= u < scene.width and 0 <= v < scene.height):
            raise ValueError(f"waypoint projects outside the image at ({u}, {v})")
        out.append(scene.point_at(u, v))
    return np.asarray(out)


def _arc(center: np.ndarray, radius: float, ea: np.ndarray, eb: np.ndarray,
         theta0: float, theta1: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    thetas = np.linspace(theta0, theta1, n)
    pts = center + radius * (np.outer(np.cos(thetas), ea) + np.outer(np.sin(thetas), eb))
    return pts, thetas


def _pixel_points(scene: PointCloud, pixels) -> np.ndarray:
    return np.asarray([scene.point_at(int(u), int(v)) for u, v in pixels])


def _hand_joints(contact: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """21 synthetic joints whose thumb/index midpoint is ``contact`` and
    whose wrist/index/ring rays reproduce ``rotation`` through the palm
    frame construction."""
    vx, vy, vz = rotation[:, 0], rotation[:, 1], rotation[:, 2]
    wrist = contact - _FINGER_LEN * vy + 0.02 * vz
    index_tip = wrist + _FINGER_LEN * (vy + _FINGER_SPREAD * vx)
    ring_tip = wrist + _FINGER_LEN * (vy - _FINGER_SPREAD * vx)
    thumb_tip = 2.0 * contact - index_tip
    joints = wrist + _FILLER_LOCAL @ rotation.T
    joints[0] = wrist
    joints[4] = thumb_tip
    joints[8] = index_tip
    joints[16] = ring_tip
    return joints


def _build_hands(left_pr, right_pr, t_s: int, t_e: int, parked, rng, sigma: float) -> HandSequence:
    """Hand frames over [t_s-? .. t_e+?] including junk frames outside the
    retained window (parked pose) to exercise clipping."""
    left_frames, right_frames = [], []
    lo = t_s - 1 if t_s > 0 else t_s
    hi = t_e + 1
    parked_p, parked_R = parked
    for t in range(lo, hi + 1):
        if t_s <= t <= t_e:
            lp, lR = left_pr[t - t_s]
            rp, rR = right_pr[t - t_s]
        else:
            lp, lR = parked_p, parked_R
            rp, rR = parked_p, parked_R
        lj = _hand_joints(np.asarray(lp), np.asarray(lR))
        rj = _hand_joints(np.asarray(rp), np.asarray(rR))
        if sigma > 0:
            lj = lj + rng.normal(0.0, sigma, (21, 3))
            rj = rj + rng.normal(0.0, sigma, (21, 3))
        left_frames.append(HandFrame(lj, "left", t))
        right_frames.append(HandFrame(rj, "right", t))
    return HandSequence(left=left_frames, right=right_frames, t_s=t_s, t_e=t_e)


def _ring_points(center, radius, u_dir, w_dir, count=72) -> np.ndarray:
    alphas = 2.0 * np.pi * np.arange(count) / count
    return center + radius * (np.outer(np.cos(alphas), u_dir) + np.outer(np.sin(alphas), w_dir))


def _config_doc(skill: str, primary: str, camera: CameraIntrinsics, window,
                control_points: int) -> dict:
    return {
        "version": CONFIG_VERSION,
        "skill": skill,
        "primary_arm": primary,
        "camera": {"fx": camera.fx, "fy": camera.fy, "cx": camera.cx, "cy": camera.cy},
        "joints": {"wrist": 0, "thumb_tip": 4, "index_tip": 8, "ring_tip": 16},
        "smooth": {"top_n": 3, "control_points": control_points, "smoothing_weight": 0.0},
        "adjust": {"d1": 0.005, "gamma": 0.85, "k_max": 10},
        "slice": {"half_thickness": 0.005,
                  "direction_tolerance_rad": float(np.deg2rad(5.0)),
                  "slice_height": None},
        "verifier": {"kind": "window", "lo": window[0], "hi": window[1]},
        "inputs": {"hands": "hands.json", "scene": "scene.json", "object": "object.ply"},
    }


def _assert_coplanar(traj: BimanualTrajectory, plane: Plane) -> None:
    for name in ("left", "right"):
        residual = plane_residual(traj.arm(name).positions, plane)
        assert residual < 1e-9, f"{name} ground truth off-plane by {residual}"


def _tilted_plane(beta: float, z0: float) -> Plane:
    s = np.sqrt(1.0 + beta * beta)
    return Plane(normal=np.array([beta, 0.0, 1.0]) / s, offset=-z0 / s)


def _pivot_bowl(seed: int, sigma: float) -> Scenario:
    camera = CameraIntrinsics(fx=240.0, fy=240.0, cx=80.0, cy=50.0)
    plane = _tilted_plane(beta=0.25, z0=0.9)
    scene = _scene_from_plane(camera, 160, 100, plane)
    e1, e2 = in_plane_basis(plane)
    n_frames = 40
    arc_center = scene.point_at(55, 50)
    arc_pts, thetas = _arc(arc_center, 0.10, e2, e1, 0.0, np.pi / 2, n_frames)
    right_pos = _snap(arc_pts, camera, scene)
    base_R = np.column_stack([e1, e2, plane.normal])
    right_rot = np.asarray([rotation_about_axis(plane.normal, th) @ base_R for th in thetas])

    left_anchor = scene.point_at(45, 50)
    left_arc_center = left_anchor - 0.025 * e1
    left_pts, _ = _arc(left_arc_center, 0.025, e1, e2, 0.0, 2.0 * np.pi / 3.0, n_frames)
    left_pos = _snap(left_pts, camera, scene)
    left_rot = np.repeat(base_R[None, :, :], n_frames, axis=0)

    # Bowl rim centered at the left start; the right start sits 8 mm
    # outside the rim on the center->start line.
    a = left_pos[0]
    p0 = right_pos[0]
    u_dir = (p0 - a) / np.linalg.norm(p0 - a)
    w_dir = np.cross(plane.normal, u_dir)
    rim_radius = float(np.linalg.norm(p0 - a)) - 0.008
    assert rim_radius > 0.02, "bowl rim collapsed; adjust scenario layout"
    rim = _ring_points(a, rim_radius, u_dir, w_dir, count=72)
    dome = [rim]
    for psi_deg in (20.0, 40.0, 60.0, 75.0):
        psi = np.deg2rad(psi_deg)
        ring_c = a - rim_radius * np.cos(psi) * plane.normal
        dome.append(_ring_points(ring_c, rim_radius * np.sin(psi), u_dir, w_dir, count=36))
    bowl = PointCloud(np.vstack(dome))

    t_s, t_e = 1, n_frames
    gt = BimanualTrajectory(np.arange(t_s, t_e + 1),
                            ArmTrack(left_pos, left_rot),
                            ArmTrack(right_pos, right_rot))
    _assert_coplanar(gt, plane)
    span = np.degrees(thetas[-1] - thetas[0])
    assert abs(span - 90.0) < 1e-9, f"arc spans {span} deg, expected 90"

    parked = (scene.point_at(120, 20), base_R)
    rng = np.random.default_rng(seed)
    hands = _build_hands(list(zip(left_pos, left_rot)), list(zip(right_pos, right_rot)),
                         t_s, t_e, parked, rng, sigma)
    window = (0.0030, 0.0034)
    return Scenario(name="pivot-bowl", seed=seed, sigma=sigma, camera=camera,
                    hands=hands, scene=scene, object_cloud=bowl, ground_truth=gt,
                    config_doc=_config_doc("pivoting", "right", camera, window, 8),
                    expected_k=4, window=window)


def _poke_cup(seed: int, sigma: float) -> Scenario:
    camera = CameraIntrinsics(fx=240.0, fy=240.0, cx=80.0, cy=50.0)
    plane = _tilted_plane(beta=0.15, z0=0.85)
    scene = _scene_from_plane(camera, 160, 100, plane)
    e1, e2 = in_plane_basis(plane)
    n_frames = 24
    arc_center = scene.point_at(95, 42)
    arc_pts, thetas = _arc(arc_center, 0.09, e2, e1, -np.deg2rad(10.0), np.deg2rad(35.0), n_frames)
    right_pos = _snap(arc_pts, camera, scene)
    base_R = np.column_stack([e1, e2, plane.normal])
    right_rot = np.asarray([rotation_about_axis(plane.normal, th) @ base_R for th in thetas])

    left_center = scene.point_at(128, 76)
    left_pts, _ = _arc(left_center, 0.02, e1, e2, 0.0, np.pi / 2, n_frames)
    left_pos = _snap(left_pts, camera, scene)
    left_rot = np.repeat(base_R[None, :, :], n_frames, axis=0)

    # Cup rim on the in-plane line from the right start toward the scene
    # interior; the anchor (farthest cup point) and the nearest rim point
    # both lie on that line.
    p0 = right_pos[0]
    probe = scene.point_at(60, 42)
    u_dir = probe - p0
    u_dir = u_dir / np.linalg.norm(u_dir)
    w_dir = np.cross(plane.normal, u_dir)
    cup_radius, d0 = 0.035, 0.007
    cup_center = p0 + (d0 + cup_radius) * u_dir
    cup = PointCloud(_ring_points(cup_center, cup_radius, -u_dir, w_dir, count=64))

    t_s, t_e = 0, n_frames - 1
    gt = BimanualTrajectory(np.arange(t_s, t_e + 1),
                            ArmTrack(left_pos, left_rot),
                            ArmTrack(right_pos, right_rot))
    _assert_coplanar(gt, plane)

    parked = (scene.point_at(20, 20), base_R)
    rng = np.random.default_rng(seed)
    hands = _build_hands(list(zip(left_pos, left_rot)), list(zip(right_pos, right_rot)),
                         t_s, t_e, parked, rng, sigma)
    window = (0.0048, 0.0052)
    return Scenario(name="poke-cup", seed=seed, sigma=sigma, camera=camera,
                    hands=hands, scene=scene, object_cloud=cup, ground_truth=gt,
                    config_doc=_config_doc("poking", "right", camera, window, 6),
                    expected_k=1, window=window)


def _lockstep_scenario(name: str, skill: str, seed: int, sigma: float, z0: float,
                       n_frames: int, u0: int, v0: int, du: int, bump_amp: float,
                       offset_px: int, d0: float, window, expected_k: int,
                       object_builder) -> Scenario:
    """Shared frame for the two translation-paired (synchronized) skills."""
    camera = CameraIntrinsics(fx=240.0, fy=240.0, cx=80.0, cy=50.0)
    plane = Plane(normal=np.array([0.0, 0.0, 1.0]), offset=-z0)
    scene = _scene_from_plane(camera, 160, 100, plane)
    i = np.arange(n_frames)
    bump = np.rint(bump_amp * np.sin(np.pi * i / (n_frames - 1))).astype(int)
    left_px = [(u0 + du * k, v0 + int(b)) for k, b in zip(i, bump)]
    right_px = [(u + offset_px, v) for u, v in left_px]
    left_pos = _pixel_points(scene, left_px)
    right_pos = _pixel_points(scene, right_px)
    base_R = np.eye(3)
    rot = np.repeat(base_R[None, :, :], n_frames, axis=0)

    a, p0 = left_pos[0], right_pos[0]
    u_dir = (p0 - a) / np.linalg.norm(p0 - a)
    obj = object_builder(p0, u_dir, d0)

    t_s, t_e = 0, n_frames - 1
    gt = BimanualTrajectory(np.arange(t_s, t_e + 1),
                            ArmTrack(left_pos, rot.copy()),
                            ArmTrack(right_pos, rot.copy()))
    _assert_coplanar(gt, plane)
    sep = np.linalg.norm(gt.right.positions - gt.left.positions, axis=1)
    assert float(sep.max() - sep.min()) < 1e-9, "lockstep arms drifted apart"

    parked = (scene.point_at(150, 10), base_R)
    rng = np.random.default_rng(seed)
    hands = _build_hands(list(zip(left_pos, rot)), list(zip(right_pos, rot)),
                         t_s, t_e, parked, rng, sigma)
    return Scenario(name=name, seed=seed, sigma=sigma, camera=camera, hands=hands,
                    scene=scene, object_cloud=obj, ground_truth=gt,
                    config_doc=_config_doc(skill, "right", camera, window, 6),
                    expected_k=expected_k, window=window)


def _push_basket(seed: int, sigma: float) -> Scenario:
    def basket(p0, u_dir, d0):
        # Vertical face grid orthogonal to the push direction; the point
        # straight ahead of the right start is included exactly.
        face_center = p0 + d0 * u_dir
        side = np.cross(np.array([0.0, 0.0, 1.0]), u_dir)
        rows = []
        for j in range(-4, 5):
            for m in range(-2, 3):
                rows.append(face_center + 0.012 * j * side + 0.012 * m * np.array([0.0, 0.0, 1.0]))
        return PointCloud(np.asarray(rows))

    return _lockstep_scenario("push-basket", "pushing", seed, sigma, z0=0.95,
                              n_frames=20, u0=30, v0=62, du=3, bump_amp=5.0,
                              offset_px=18, d0=0.006, window=(0.0041, 0.0044),
                              expected_k=2, object_builder=basket)


def _wrap_ball(seed: int, sigma: float) -> Scenario:
    def ball(p0, u_dir, d0):
        radius = 0.045
        center = p0 + (d0 + radius) * u_dir
        w1 = np.cross(np.array([0.0, 0.0, 1.0]), u_dir)
        w1 = w1 / np.linalg.norm(w1)
        w2 = np.cross(u_dir, w1)
        pts = [center - radius * u_dir, center + radius * u_dir]  # near/far poles
        for psi_deg in range(12, 180, 12):
            psi = np.deg2rad(psi_deg)
            ring_c = center - radius * np.cos(psi) * u_dir
            pts.append(_ring_points(ring_c, radius * np.sin(psi), w1, w2, count=16))
        return PointCloud(np.vstack([np.atleast_2d(p) for p in pts]))

    return _lockstep_scenario("wrap-ball", "wrapping", seed, sigma, z0=0.9,
                              n_frames=18, u0=36, v0=55, du=2, bump_amp=6.0,
                              offset_px=22, d0=0.0065, window=(0.0035, 0.0038),
                              expected_k=3, object_builder=ball)


_BUILDERS = {
    "pivot-bowl": _pivot_bowl,
    "poke-cup": _poke_cup,
    "push-basket": _push_basket,
    "wrap-ball": _wrap_ball,
}


def generate_scenario(name: str, seed: int, sigma: float = 0.0) -> Scenario:
    if name not in _BUILDERS:
        raise UnknownScenario(
            f"unknown scenario {name!r}; available: {', '.join(SCENARIO_NAMES)}")
    return _BUILDERS[name](int(seed), float(sigma))


def write_scenario(scn: Scenario, out_dir) -> dict:
    """Write the dataset files and the pipeline config; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "hands": out / "hands.json",
        "scene": out / "scene.json",
        "object": out / "object.ply",
        "ground_truth": out / "ground_truth_trajectory.json",
        "config": out / "config.json",
    }
    save_hand_sequence(scn.hands, paths["hands"])
    save_point_cloud(scn.scene, paths["scene"])
    save_point_cloud(scn.object_cloud, paths["object"])
    save_trajectory(scn.ground_truth, paths["ground_truth"])
    with open(paths["config"], "w") as fp:
        json.dump(scn.config_doc, fp, sort_keys=True, indent=1)
        fp.write("\n")
    return paths
