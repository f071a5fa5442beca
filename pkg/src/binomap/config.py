"""Pipeline configuration: parsing, validation, and factory helpers.

Config wire format (``binomap-config/1``), angles in radians, lengths in
meters. Relative input paths resolve against the config file's
directory.

    {"version": "binomap-config/1",
     "skill": "pivoting", "primary_arm": "right",
     "camera": {"fx":..., "fy":..., "cx":..., "cy":...},
     "joints": {"wrist":0, "thumb_tip":4, "index_tip":8, "ring_tip":16},
     "smooth": {"top_n":3, "control_points":null, "smoothing_weight":0.0},
     "adjust": {"d1":0.005, "gamma":0.85, "k_max":10},
     "slice":  {"half_thickness":0.005, "direction_tolerance_rad":0.0873,
                "slice_height":null},
     "verifier": {"kind":"window", "lo":0.003, "hi":0.0034}
                 | {"kind":"geometric", "loss_threshold":..., ...},
     "inputs": {"hands":"hands.json", "scene":"scene.json",
                "object":"object.ply"}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .contact import AdjustConfig, SkillPattern
from .errors import InputFormatError
from .oracle import OracleConfig, WindowOracle
from .parameterize import SliceConfig
from .retarget import CameraIntrinsics, JointIndexConfig
from .smoothing import SmoothConfig

CONFIG_VERSION = "binomap-config/1"


@dataclass
class PipelineConfig:
    pattern: SkillPattern
    camera: CameraIntrinsics
    joints: JointIndexConfig
    smooth: SmoothConfig
    adjust: AdjustConfig
    slice_cfg: SliceConfig
    verifier_spec: dict
    inputs: dict
    raw: dict = field(default_factory=dict, repr=False)

    def input_path(self, key: str) -> Path:
        return Path(self.inputs[key])

    def make_verifier(self):
        """Instantiate the configured verifier with the pattern's primary arm."""
        spec = dict(self.verifier_spec)
        kind = spec.pop("kind", "window")
        if kind == "window":
            return WindowOracle(lo=float(spec["lo"]), hi=float(spec["hi"]),
                                primary_arm=self.pattern.primary_arm)
        if kind == "geometric":
            frames = spec.get("contact_frames")
            return OracleConfig(
                loss_threshold=float(spec.get("loss_threshold", 0.005)),
                compress_threshold=float(spec.get("compress_threshold", 0.005)),
                contact_frames=tuple(int(i) for i in frames) if frames else None,
                primary_arm=self.pattern.primary_arm)
        raise InputFormatError(f"unknown verifier kind {kind!r}")


def _section(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise InputFormatError(f"config section {key!r} must be an object")
    return value


def parse_config(doc: dict, base_dir: Path | None = None) -> PipelineConfig:
    if not isinstance(doc, dict) or doc.get("version") != CONFIG_VERSION:
        raise InputFormatError(f"expected config version {CONFIG_VERSION!r}")
    try:
        pattern = SkillPattern(kind=doc["skill"], primary_arm=doc.get("primary_arm", "right"))
        cam = _section(doc, "camera")
        camera = CameraIntrinsics(fx=float(cam["fx"]), fy=float(cam["fy"]),
                                  cx=float(cam["cx"]), cy=float(cam["cy"]))
        joints = JointIndexConfig(**{k: int(v) for k, v in _section(doc, "joints").items()})
        sm = _section(doc, "smooth")
        smooth = SmoothConfig(
            top_n=int(sm.get("top_n", 3)),
            control_points=(int(sm["control_points"])
                            if sm.get("control_points") is not None else None),
            smoothing_weight=float(sm.get("smoothing_weight", 0.0)))
        ad = _section(doc, "adjust")
        adjust = AdjustConfig(d1=float(ad.get("d1", 0.005)),
                              gamma=float(ad.get("gamma", 0.85)),
                              k_max=int(ad.get("k_max", 10)))
        sl = _section(doc, "slice")
        slice_cfg = SliceConfig(
            half_thickness=float(sl.get("half_thickness", 0.005)),
            direction_tolerance=float(sl.get("direction_tolerance_rad", SliceConfig().direction_tolerance)),
            slice_height=(float(sl["slice_height"])
                          if sl.get("slice_height") is not None else None))
        verifier_spec = dict(_section(doc, "verifier") or {"kind": "window", "lo": 0.0, "hi": float("inf")})
        inputs = {k: str(v) for k, v in _section(doc, "inputs").items()}
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"malformed config ({e})") from e
    if base_dir is not None:
        inputs = {k: str(v if Path(v).is_absolute() else base_dir / v)
                  for k, v in inputs.items()}
    if len(set(inputs.values())) != len(inputs):
        raise InputFormatError(f"config input paths must be distinct, got {sorted(inputs.values())}")
    return PipelineConfig(pattern=pattern, camera=camera, joints=joints, smooth=smooth,
                          adjust=adjust, slice_cfg=slice_cfg, verifier_spec=verifier_spec,
                          inputs=inputs, raw=doc)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise InputFormatError(f"config file not found: {path}")
    try:
        with open(path) as fp:
            doc = json.load(fp)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: not valid JSON ({e})") from e
    return parse_config(doc, base_dir=path.parent)
