"""Command-line front end.

Subcommands mirror the pipeline stages: ``gen`` builds a synthetic
dataset, ``retarget``/``smooth``/``adjust``/``relocate``/``param`` run
one stage each, ``pipeline`` chains retarget -> smooth -> adjust into a
primitive record, ``verify`` scores a trajectory with the configured
oracle, and ``plot`` renders figures plus a stats JSON.

Exit codes: 0 success, 2 input/format error, 3 precondition violation,
4 exhausted adjustment schedule. Failures print a single machine-readable
JSON object. Set BINOMAP_LOG=DEBUG|INFO|... for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import pipeline as pipe
from .config import load_config
from .errors import AllAttemptsFailed, BinomapError, InputFormatError
from .contact import iterate_adjust, relocate
from .parameterize import adapt_primitive, load_record
from .pointcloud import load_point_cloud
from .retarget import extract_coarse, load_hand_sequence
from .smoothing import smooth_trajectory
from .synthetic import SCENARIO_NAMES, generate_scenario, write_scenario
from .trajectory import load_trajectory, save_trajectory
from . import plotting

log = logging.getLogger("binomap")


def _emit(doc: dict) -> None:
    print(json.dumps(doc, sort_keys=True))


def _ok(outputs: dict, **extra) -> int:
    _emit({"status": "ok", "outputs": {k: str(v) for k, v in outputs.items()}, **extra})
    return 0


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(args) -> int:
    scn = generate_scenario(args.scenario, seed=args.seed, sigma=args.sigma)
    paths = write_scenario(scn, args.out)
    return _ok(paths, scenario=scn.name, seed=scn.seed, expected_k=scn.expected_k)


def cmd_retarget(args) -> int:
    cfg = load_config(args.config)
    seq = load_hand_sequence(args.hands)
    scene = load_point_cloud(args.scene)
    traj = extract_coarse(seq, scene, cfg.camera, cfg.joints)
    out = _out_dir(args) / "raw_trajectory.json"
    save_trajectory(traj, out)
    return _ok({"trajectory": out}, frames=len(traj))


def cmd_smooth(args) -> int:
    cfg = load_config(args.config)
    traj = load_trajectory(args.traj)
    result = smooth_trajectory(traj, cfg.smooth)
    out = _out_dir(args)
    traj_path = out / "smoothed_trajectory.json"
    diag_path = out / "smooth_diagnostics.json"
    save_trajectory(result.trajectory, traj_path)
    with open(diag_path, "w") as fp:
        json.dump(result.diagnostics(), fp, sort_keys=True, indent=1)
        fp.write("\n")
    return _ok({"trajectory": traj_path, "diagnostics": diag_path})


def cmd_adjust(args) -> int:
    cfg = load_config(args.config)
    traj = load_trajectory(args.traj)
    obj = load_point_cloud(args.object)
    out = _out_dir(args)
    try:
        result = iterate_adjust(traj, cfg.pattern, obj, cfg.adjust, cfg.make_verifier())
    except AllAttemptsFailed as e:
        pipe.write_attempt_log(e.attempts, out / "attempts.jsonl")
        raise
    pipe.write_attempt_log(result.attempts, out / "attempts.jsonl")
    traj_path = out / "adjusted_trajectory.json"
    save_trajectory(result.trajectory, traj_path)
    final = result.attempts[-1]
    return _ok({"trajectory": traj_path, "attempts": out / "attempts.jsonl"},
               k_used=result.k_used, d=final.d, s=final.s)


def cmd_relocate(args) -> int:
    traj = load_trajectory(args.traj)
    base = load_point_cloud(args.base)
    new = load_point_cloud(args.new)
    out = _out_dir(args) / "relocated_trajectory.json"
    save_trajectory(relocate(traj, base, new), out)
    return _ok({"trajectory": out})


def cmd_param(args) -> int:
    cfg = load_config(args.config)
    record = load_record(args.record)
    new = load_point_cloud(args.new)
    adapted = adapt_primitive(record, new, cfg.slice_cfg)
    out = _out_dir(args) / "adapted_trajectory.json"
    save_trajectory(adapted, out)
    return _ok({"trajectory": out})


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    traj = load_trajectory(args.traj)
    obj = load_point_cloud(args.object)
    result = cfg.make_verifier()(traj, obj)
    _emit({"status": "ok", "outcome": result.outcome, "detail": result.detail})
    return 0


def cmd_pipeline(args) -> int:
    cfg = load_config(args.config)
    result = pipe.run_pipeline(cfg, args.out)
    return _ok({"record": result.record_path}, k_used=result.k_used,
               d=result.record.d, s=result.record.s)


def cmd_plot(args) -> int:
    out = _out_dir(args)
    path = Path(args.input)
    if not path.exists():
        raise InputFormatError(f"input file not found: {path}")
    try:
        with open(path) as fp:
            doc = json.load(fp)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InputFormatError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(doc, dict):
        raise InputFormatError(f"{path}: expected a JSON object")
    version = doc.get("version", "")
    outputs: dict = {}
    if version == "binomap-prim/1":
        from .trajectory import BimanualTrajectory

        traj = BimanualTrajectory.from_dict(doc["trajectory"])
        stats = trajectory_and_figures(traj, out, outputs, compare=None)
        rec_stats = plotting.record_stats(doc)
        stats.update(rec_stats)
        plotting.plot_schedule(rec_stats["d_sequence"], rec_stats["outcomes"],
                               out / "schedule.png")
        outputs["schedule"] = out / "schedule.png"
    elif version == "binomap-traj/1":
        from .trajectory import BimanualTrajectory

        traj = BimanualTrajectory.from_dict(doc)
        compare = load_trajectory(args.compare) if args.compare else None
        stats = trajectory_and_figures(traj, out, outputs, compare=compare)
    else:
        raise InputFormatError(f"{path}: unsupported version {version!r}")
    stats_path = out / "stats.json"
    plotting.write_stats(stats, stats_path)
    outputs["stats"] = stats_path
    return _ok(outputs)


def trajectory_and_figures(traj, out: Path, outputs: dict, compare) -> dict:
    plotting.plot_polylines(traj, out / "trajectory.png", compare=compare)
    plotting.plot_residual_hist(traj, out / "plane_residuals.png")
    outputs["trajectory"] = out / "trajectory.png"
    outputs["plane_residuals"] = out / "plane_residuals.png"
    return plotting.trajectory_stats(traj, compare=compare)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binomap",
        description="Refine bimanual hand demonstrations into manipulation primitives.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--format", choices=["json"], default="json",
                       help="output format (only json)")
        return p

    p = add("gen", cmd_gen, "generate a bundled synthetic scenario dataset")
    p.add_argument("scenario", choices=SCENARIO_NAMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.0,
                   help="hand-joint noise stddev in meters (default 0)")
    p.add_argument("--out", required=True)

    p = add("retarget", cmd_retarget, "hand sequence + scene cloud -> coarse trajectory")
    p.add_argument("hands")
    p.add_argument("scene")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = add("smooth", cmd_smooth, "coplanar spline + rotation smoothing")
    p.add_argument("traj")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = add("adjust", cmd_adjust, "iterative geometry-aware contact adjustment")
    p.add_argument("traj")
    p.add_argument("object")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = add("relocate", cmd_relocate, "translate a primitive to a relocated object")
    p.add_argument("traj")
    p.add_argument("base")
    p.add_argument("new")
    p.add_argument("--out", required=True)

    p = add("param", cmd_param, "adapt a verified primitive to a same-category object")
    p.add_argument("record")
    p.add_argument("new")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = add("verify", cmd_verify, "score a trajectory with the configured oracle")
    p.add_argument("traj")
    p.add_argument("object")
    p.add_argument("--config", required=True)

    p = add("pipeline", cmd_pipeline, "retarget -> smooth -> adjust -> primitive record")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = add("plot", cmd_plot, "figures + stats for a trajectory or record file")
    p.add_argument("input")
    p.add_argument("--compare", default=None,
                   help="overlay a second trajectory (e.g. raw vs smoothed)")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("BINOMAP_LOG", "WARNING").upper(),
                        stream=sys.stderr, format="%(name)s %(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BinomapError as e:
        doc = {"status": "error", "error": type(e).__name__, "detail": str(e)}
        doc.update({k: v for k, v in getattr(e, "info", {}).items()})
        if isinstance(e, AllAttemptsFailed):
            doc["attempts"] = [rec.to_dict() for rec in e.attempts]
        _emit(doc)
        return e.exit_code
    except FileNotFoundError as e:
        _emit({"status": "error", "error": "InputFormatError", "detail": str(e)})
        return 2


def run() -> None:
    raise SystemExit(main())
