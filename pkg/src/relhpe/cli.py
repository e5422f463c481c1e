"""Command-line entry point.

Subcommands: ingest, pairs, eval, sweep, simulate, loss, report.
Global flags: --seed, --config <file>, --out <dir>, --format {csv,json}.

The config file is a flat JSON object; its keys are merged under any
explicitly passed flags, and unknown keys are rejected.  All angle I/O at
this surface is in degrees.  Every report embeds the config echo, the
seed, the format version, and input-file hashes, so identical inputs give
identical report bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import reports
from .anchors import AnchorPolicy
from .camera import CameraPose
from .errors import RelHpeError, StageCountMismatch
from .geometry import Rotation, euler_from_rotation
from .harness import (PairSet, build_easy_pairs, build_hard_pairs, evaluate,
                      export_canonical, ingest_biwi, ingest_canonical_all,
                      sweep)
from .losses import LossConfig, StagePrediction, loss_cam
from .simulate import (AbsoluteSimEstimator, NoiseModel, PoseSampler,
                       RelativeSimEstimator, load_predictions_csv, sample_logs)

EXIT_USAGE = 2


def _load_config(path, known_keys):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise RelHpeError(f"{path}: config must be a flat JSON object")
    unknown = sorted(set(cfg) - set(known_keys))
    if unknown:
        raise RelHpeError(f"{path}: unknown config keys: {', '.join(unknown)}")
    return cfg


def _merge(args, cfg, key, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return cfg.get(key, default)


def _ensure_out(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_reports(out, stem, env, csv_text, fmt, svg_text=None):
    written = []
    if fmt in ("json", None):
        path = os.path.join(out, f"{stem}.json")
        reports.write_json(path, env)
        written.append(path)
    if fmt in ("csv", None):
        path = os.path.join(out, f"{stem}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        written.append(path)
    if svg_text is not None:
        path = os.path.join(out, f"{stem}.svg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg_text)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args):
    cfg = _load_config(args.config, ("input_format", "pose_glob", "calib_name"))
    fmt = _merge(args, cfg, "input_format", "canonical")
    out = _ensure_out(args)
    if fmt == "biwi":
        pose_glob = _merge(args, cfg, "pose_glob", "frame_*_pose.txt")
        calib_name = _merge(args, cfg, "calib_name", "rgb.cal")
        logs = [ingest_biwi(args.input, pose_glob, calib_name)]
    else:
        logs = ingest_canonical_all(args.input)
    dest = os.path.join(out, "poselog.csv")
    export_canonical(logs, dest)
    n_frames = sum(len(l) for l in logs)
    dists = []
    for log in logs:
        e0 = euler_from_rotation(log.frames[0].pose.rotation)
        for f in log.frames:
            e = euler_from_rotation(f.pose.rotation)
            dists.append((e.yaw, e.pitch, e.roll))
    arr = np.array(dists)
    print(f"subjects: {len(logs)}  frames: {n_frames}")
    print(f"yaw range:   [{arr[:, 0].min():.2f}, {arr[:, 0].max():.2f}] deg")
    print(f"pitch range: [{arr[:, 1].min():.2f}, {arr[:, 1].max():.2f}] deg")
    print(f"roll range:  [{arr[:, 2].min():.2f}, {arr[:, 2].max():.2f}] deg")
    print(f"wrote {dest}")
    return 0


_PAIRS_KEYS = ("pair_kind", "neutral_thresh_deg", "extreme_thresh_deg",
               "max_gap_deg", "n_pairs")


def _build_pairs(log, args, cfg, seed):
    kind = _merge(args, cfg, "pair_kind", "hard")
    neutral = float(_merge(args, cfg, "neutral_thresh_deg", 15.0))
    n_pairs = int(_merge(args, cfg, "n_pairs", 360))
    if kind == "hard":
        extreme = float(_merge(args, cfg, "extreme_thresh_deg", 45.0))
        return build_hard_pairs(log, neutral, extreme, n_pairs, seed)
    max_gap = float(_merge(args, cfg, "max_gap_deg", 8.0))
    return build_easy_pairs(log, neutral, max_gap, n_pairs, seed)


def cmd_pairs(args):
    cfg = _load_config(args.config, _PAIRS_KEYS)
    out = _ensure_out(args)
    seed = args.seed if args.seed is not None else 0
    logs = ingest_canonical_all(args.input)
    written = []
    for log in logs:
        ps = _build_pairs(log, args, cfg, seed)
        env = reports.envelope(
            "pairs", {**cfg, "subject": log.subject_id}, seed,
            {args.input: reports.file_sha256(args.input)},
            reports.pairs_payload(ps))
        written += _write_reports(out, f"pairs_{log.subject_id}", env,
                                  reports.pairs_csv(ps), args.format)
    for path in written:
        print(f"wrote {path}")
    return 0


def _read_pairs_csv(path) -> PairSet:
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            pairs.append((row["anchor_id"], row["query_id"],
                          float(row["gap_deg"])))
    return PairSet("loaded", tuple(pairs), 0)


def cmd_eval(args):
    cfg = _load_config(args.config, ())
    out = _ensure_out(args)
    seed = args.seed if args.seed is not None else 0
    logs = ingest_canonical_all(args.truth)
    if len(logs) != 1:
        raise RelHpeError("eval expects a single-subject truth log")
    pairs = _read_pairs_csv(args.pairs)
    preds = load_predictions_csv(args.predictions)
    rep = evaluate(pairs, preds, logs[0])
    env = reports.envelope(
        "eval", cfg, seed,
        {p: reports.file_sha256(p) for p in (args.truth, args.pairs, args.predictions)},
        reports.metric_payload({"external": rep}))
    written = _write_reports(out, "eval", env,
                             reports.metric_csv({"external": rep}), args.format)
    for path in written:
        print(f"wrote {path}")
    print(f"n={rep.n} yaw={rep.yaw_mae:.4f} pitch={rep.pitch_mae:.4f} "
          f"roll={rep.roll_mae:.4f} mae={rep.mae:.4f} geodesic={rep.geodesic_mae:.4f}")
    return 0


_SWEEP_KEYS = ("axis", "bin_width_deg", "policy", "threshold_deg",
               "abs_base_deg", "abs_slope", "rel_base_deg", "rel_slope",
               "trans_noise_mm")


def _policy_from(args, cfg):
    kind = _merge(args, cfg, "policy", "fixed_first")
    threshold = _merge(args, cfg, "threshold_deg")
    return AnchorPolicy(kind, float(threshold) if threshold is not None else None)


def _sim_estimators(args, cfg, seed):
    return [
        AbsoluteSimEstimator("sim_absolute", NoiseModel(
            base_deg=float(_merge(args, cfg, "abs_base_deg", 2.0)),
            slope_deg_per_deg=float(_merge(args, cfg, "abs_slope", 0.15)),
            trans_noise_mm=float(_merge(args, cfg, "trans_noise_mm", 0.0)),
            seed=seed)),
        RelativeSimEstimator("sim_relative", NoiseModel(
            base_deg=float(_merge(args, cfg, "rel_base_deg", 0.5)),
            slope_deg_per_deg=float(_merge(args, cfg, "rel_slope", 0.02)),
            trans_noise_mm=float(_merge(args, cfg, "trans_noise_mm", 0.0)),
            seed=seed)),
    ]


def cmd_sweep(args):
    cfg = _load_config(args.config, _SWEEP_KEYS)
    out = _ensure_out(args)
    seed = args.seed if args.seed is not None else 0
    logs = ingest_canonical_all(args.input)
    policy = _policy_from(args, cfg)
    axis = _merge(args, cfg, "axis", "anchor_query_gap")
    bin_width = float(_merge(args, cfg, "bin_width_deg", 5.0))
    estimators = _sim_estimators(args, cfg, seed)
    rep = sweep(logs, estimators, policy, axis, bin_width)
    env = reports.envelope(
        "sweep", {**cfg, "axis": axis, "policy": policy.kind}, seed,
        {args.input: reports.file_sha256(args.input)},
        reports.sweep_payload(rep))
    written = _write_reports(out, "sweep", env, reports.sweep_csv(rep),
                             args.format, svg_text=reports.sweep_svg(rep))
    for path in written:
        print(f"wrote {path}")
    return 0


_SIM_KEYS = ("subjects", "frames_per_log", "yaw_min", "yaw_max",
             "pitch_min", "pitch_max", "roll_min", "roll_max")


def cmd_simulate(args):
    cfg = _load_config(args.config, _SIM_KEYS)
    out = _ensure_out(args)
    seed = args.seed if args.seed is not None else 0
    sampler = PoseSampler(
        yaw_range=(float(_merge(args, cfg, "yaw_min", -75.0)),
                   float(_merge(args, cfg, "yaw_max", 75.0))),
        pitch_range=(float(_merge(args, cfg, "pitch_min", -60.0)),
                     float(_merge(args, cfg, "pitch_max", 60.0))),
        roll_range=(float(_merge(args, cfg, "roll_min", -40.0)),
                    float(_merge(args, cfg, "roll_max", 40.0))),
        frames_per_log=int(_merge(args, cfg, "frames_per_log", 100)),
        subjects=int(_merge(args, cfg, "subjects", 4)),
        seed=seed)
    logs = sample_logs(sampler)
    dest = os.path.join(out, "simulated_poselog.csv")
    export_canonical(logs, dest)
    print(f"wrote {dest} ({sampler.subjects} subjects x {sampler.frames_per_log} frames)")
    return 0


_LOSS_KEYS = ("lambda_t", "lambda_r", "lambda_f", "gamma", "mode")


def _read_stage_file(path):
    """Per-stage camera poses: k,tx,ty,tz,qw,qx,qy,qz,fov_h_deg,fov_w_deg."""
    stages = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#") or row[0].strip() == "k":
                continue
            vals = [float(v) for v in row]
            stages.append((int(vals[0]), CameraPose(
                t=np.array(vals[1:4]), q=Rotation(*vals[4:8]),
                fov_h=math.radians(vals[8]), fov_w=math.radians(vals[9]))))
    return stages


def cmd_loss(args):
    cfg = _load_config(args.config, _LOSS_KEYS)
    out = _ensure_out(args)
    lc = LossConfig(lambda_t=float(cfg.get("lambda_t", 1.0)),
                    lambda_r=float(cfg.get("lambda_r", 1.0)),
                    lambda_f=float(cfg.get("lambda_f", 0.5)),
                    gamma=float(cfg.get("gamma", 0.6)),
                    mode=cfg.get("mode", "full"))
    pred_stages = _read_stage_file(args.predictions)
    true_stages = _read_stage_file(args.truth)
    if [k for k, _ in pred_stages] != [k for k, _ in true_stages]:
        raise StageCountMismatch(
            f"prediction stages {[k for k, _ in pred_stages]} != "
            f"truth stages {[k for k, _ in true_stages]}")
    stages = [StagePrediction(k, p, t)
              for (k, p), (_, t) in zip(pred_stages, true_stages)]
    total, breakdown = loss_cam(stages, lc)
    payload = {
        "total": total,
        "stages": [{"k": b.stage_index, "weight": b.weight,
                    "translation": b.translation, "rotation": b.rotation,
                    "fov": b.fov, "total": b.total} for b in breakdown],
    }
    env = reports.envelope(
        "loss", {**cfg, "mode": lc.mode, "gamma": lc.gamma},
        args.seed if args.seed is not None else 0,
        {p: reports.file_sha256(p) for p in (args.predictions, args.truth)},
        payload)
    dest = os.path.join(out, "loss.json")
    reports.write_json(dest, env)
    print(f"total: {total:.12g}")
    for b in breakdown:
        print(f"  stage {b.stage_index}: weight={b.weight:.6g} "
              f"T={b.translation:.6g} R={b.rotation:.6g} F={b.fov:.6g}")
    print(f"wrote {dest}")
    return 0


def cmd_report(args):
    """Re-emit CSV (and SVG for sweeps) from a JSON report envelope."""
    out = _ensure_out(args)
    with open(args.input, encoding="utf-8") as fh:
        env = json.load(fh)
    command = env.get("command")
    payload = env.get("payload", {})
    stem = os.path.splitext(os.path.basename(args.input))[0]
    written = []
    if command == "sweep":
        rows = []
        for b in payload["bins"]:
            for est in sorted(b["reports"]):
                r = b["reports"][est]
                rows.append([b["lo"], b["hi"], est, r["n"], r["yaw_mae"],
                             r["pitch_mae"], r["roll_mae"], r["mae"],
                             r["geodesic_mae"], b["pair_count"]])
        text = reports._csv_string(reports.SWEEP_CSV_COLUMNS, rows)
    elif command == "pairs":
        text = reports._csv_string(reports.PAIRS_CSV_COLUMNS,
                                   [list(p) for p in payload["pairs"]])
    elif command == "eval":
        rows = []
        for est in sorted(payload):
            r = payload[est]
            rows.append([est, r["n"], r["yaw_mae"], r["pitch_mae"],
                         r["roll_mae"], r["mae"], r["geodesic_mae"],
                         r.get("tx_mae_mm", ""), r.get("ty_mae_mm", ""),
                         r.get("tz_mae_mm", ""), r.get("t_l2_mm", "")])
        text = reports._csv_string(reports.METRIC_CSV_COLUMNS, rows)
    else:
        raise RelHpeError(f"cannot regenerate from a {command!r} report")
    dest = os.path.join(out, f"{stem}.csv")
    with open(dest, "w", encoding="utf-8") as fh:
        fh.write(text)
    written.append(dest)
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relhpe",
        description="Relative head-pose toolkit: ingestion, benchmark pairs, "
                    "metrics, sweeps, simulation, and loss evaluation.")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (echoed into reports)")
    parser.add_argument("--config", default=None, help="flat JSON config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="restrict report output to one format")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert input data to the canonical pose-log format")
    p.add_argument("input")
    p.add_argument("--input-format", dest="input_format",
                   choices=("canonical", "biwi"), default=None)
    p.add_argument("--pose-glob", dest="pose_glob", default=None,
                   help="BIWI per-frame pose file pattern")
    p.add_argument("--calib-name", dest="calib_name", default=None,
                   help="BIWI calibration file name")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pairs", help="build easy/hard benchmark pair sets")
    p.add_argument("input", help="canonical pose-log file")
    p.add_argument("--pair-kind", dest="pair_kind", choices=("easy", "hard"),
                   default=None)
    p.add_argument("--neutral-thresh-deg", dest="neutral_thresh_deg",
                   type=float, default=None)
    p.add_argument("--extreme-thresh-deg", dest="extreme_thresh_deg",
                   type=float, default=None)
    p.add_argument("--max-gap-deg", dest="max_gap_deg", type=float, default=None)
    p.add_argument("--n-pairs", dest="n_pairs", type=int, default=None)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("eval", help="evaluate external predictions over a pair set")
    p.add_argument("truth", help="canonical truth log (single subject)")
    p.add_argument("pairs", help="pairs CSV from the pairs command")
    p.add_argument("predictions", help="predictions CSV (query_id,qw..qz,tx..tz)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="binned error sweep with simulated estimators")
    p.add_argument("input", help="canonical pose-log file")
    p.add_argument("--axis", choices=("anchor_query_gap", "absolute_query_pose"),
                   default=None)
    p.add_argument("--policy", choices=("fixed_first", "nearest_within",
                                        "temporal_previous"), default=None)
    p.add_argument("--threshold-deg", dest="threshold_deg", type=float, default=None)
    p.add_argument("--bin-width-deg", dest="bin_width_deg", type=float, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="sample deterministic synthetic pose logs")
    p.add_argument("--subjects", type=int, default=None)
    p.add_argument("--frames-per-log", dest="frames_per_log", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("loss", help="multi-stage camera loss over stage files")
    p.add_argument("predictions", help="predicted stage file")
    p.add_argument("truth", help="ground-truth stage file")
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("report", help="re-emit CSV from a JSON report envelope")
    p.add_argument("input", help="JSON report file")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RelHpeError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
