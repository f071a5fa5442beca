"""End-to-end orchestration: retarget -> smooth -> adjust -> record.

Every stage writes its output under the chosen directory with fixed
file names so repeated runs are byte-identical:

    raw_trajectory.json        coarse retargeted trajectory
    smoothed_trajectory.json   after coplanar spline + rotation smoothing
    smooth_diagnostics.json    planes, per-frame deviations, anchors
    adjusted_trajectory.json   after iterative contact adjustment
    attempts.jsonl             one JSON line per adjustment attempt
    primitive_record.json      final verified primitive (binomap-prim/1)
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .config import PipelineConfig
from .contact import AdjustResult, iterate_adjust
from .errors import AllAttemptsFailed
from .parameterize import PrimitiveRecord, save_record
from .pointcloud import load_point_cloud
from .retarget import extract_coarse, load_hand_sequence
from .smoothing import smooth_trajectory
from .trajectory import BimanualTrajectory, save_trajectory

log = logging.getLogger("binomap.pipeline")


@dataclass
class PipelineResult:
    record: PrimitiveRecord
    record_path: Path
    k_used: int


def write_attempt_log(attempts, path) -> None:
    lines = [json.dumps(rec.to_dict(), sort_keys=True) for rec in attempts]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def run_retarget(cfg: PipelineConfig) -> BimanualTrajectory:
    seq = load_hand_sequence(cfg.input_path("hands"))
    scene = load_point_cloud(cfg.input_path("scene"))
    log.info("retargeting frames %d..%d", seq.t_s, seq.t_e)
    return extract_coarse(seq, scene, cfg.camera, cfg.joints)


def run_adjust(cfg: PipelineConfig, traj: BimanualTrajectory, out_dir: Path) -> AdjustResult:
    obj = load_point_cloud(cfg.input_path("object"))
    verifier = cfg.make_verifier()
    try:
        result = iterate_adjust(traj, cfg.pattern, obj, cfg.adjust, verifier)
    except AllAttemptsFailed as e:
        # Persist the schedule even on failure so the run can be audited.
        write_attempt_log(e.attempts, out_dir / "attempts.jsonl")
        raise
    write_attempt_log(result.attempts, out_dir / "attempts.jsonl")
    return result


def run_pipeline(cfg: PipelineConfig, out_dir) -> PipelineResult:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    raw = run_retarget(cfg)
    save_trajectory(raw, out / "raw_trajectory.json")

    smoothed = smooth_trajectory(raw, cfg.smooth)
    save_trajectory(smoothed.trajectory, out / "smoothed_trajectory.json")
    with open(out / "smooth_diagnostics.json", "w") as fp:
        json.dump(smoothed.diagnostics(), fp, sort_keys=True, indent=1)
        fp.write("\n")

    adjust = run_adjust(cfg, smoothed.trajectory, out)
    save_trajectory(adjust.trajectory, out / "adjusted_trajectory.json")

    final = adjust.attempts[-1]
    object_path = cfg.input_path("object")
    record = PrimitiveRecord(
        trajectory=adjust.trajectory,
        base_cloud=load_point_cloud(object_path),
        pattern=cfg.pattern,
        d=final.d,
        s=final.s,
        skill=cfg.pattern.kind,
        provenance={"config": cfg.raw, "k_used": adjust.k_used},
        attempts=[rec.to_dict() for rec in adjust.attempts],
    )
    record_path = out / "primitive_record.json"
    save_record(record, record_path, _reference_path(object_path, out))
    log.info("pipeline converged at attempt %d (d = %.6g m)", adjust.k_used, final.d)
    return PipelineResult(record=record, record_path=record_path, k_used=adjust.k_used)


def _reference_path(target: Path, base: Path) -> str:
    """Relative reference when possible, keeping records relocatable."""
    try:
        return os.path.relpath(Path(target).resolve(), Path(base).resolve())
    except ValueError:  # different drive (windows); fall back to absolute
        return str(Path(target).resolve())
