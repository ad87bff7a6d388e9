"""Command line front end: ``swabsim run | calibrate | pose``."""
import argparse
import copy
import csv
import sys

import numpy as np

from . import __version__
from .config import load_config, load_scenario, scenario_names
from .errors import SwabSimError
from .pose import load_depth, load_landmarks, sampling_pose
from .runner import run_scenario, write_trace
from .tactile import fit_offset_calibration


def _cmd_run(args):
    if args.config and args.scenario:
        raise SystemExit("run: give --config or --scenario, not both")
    cfg = load_config(args.config) if args.config else load_scenario(args.scenario or "default")
    if args.seed is not None:
        if args.seed < 0:
            raise SystemExit("run: --seed must be >= 0")
        cfg = copy.deepcopy(cfg)
        cfg.sections["simulation"]["seed"] = args.seed
    trace, metrics = run_scenario(cfg)
    write_trace(trace, args.out, metrics)
    for p in metrics.phases:
        print(f"{p.name:8s} {p.status:12s} {p.duration:7.3f} s  steady {p.steady_force:.3f} N  band {p.band_fraction:.2f}")
    print(f"total {metrics.total_duration:.3f} s simulated ({metrics.cycles} cycles), {metrics.wall_clock:.2f} s wall clock")
    if not np.isnan(metrics.compliance_latency):
        print(f"compliance latency {metrics.compliance_latency:g} cycles")
    if metrics.fault:
        print(f"fault: {metrics.fault}", file=sys.stderr)
    return metrics.exit_code


def _read_samples(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header
                raise SwabSimError(f"{path}:{lineno}: expected 'offset_mm,force_n'") from None
    return np.array(rows).reshape(-1, 2)


def _cmd_calibrate(args):
    samples = _read_samples(args.samples)
    c2, c1, c0 = fit_offset_calibration(samples, through_origin=not args.free_intercept)
    pred = c2 * samples[:, 0] ** 2 + c1 * samples[:, 0] + c0
    mae = float(np.mean(np.abs(pred - samples[:, 1])))
    text = (
        f"# fitted from {len(samples)} samples of {args.samples}; mean absolute residual {mae!r} N\n"
        "[calibration]\n"
        f"offset_quadratic = {c2!r} {c1!r} {c0!r}\n"
    )
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise SwabSimError(f"cannot write {args.out}: {exc.strerror}") from exc
    print(f"force = {c2:.6g} x^2 + {c1:.6g} x + {c0:.6g}  (MAE {mae:.4f} N)")
    return 0


def _cmd_pose(args):
    pose = sampling_pose(load_landmarks(args.landmarks), load_depth(args.depth, args.intrinsics))
    fmt = lambda v: " ".join(f"{x:.6f}" for x in v)
    print(f"pixel {pose.pixel[0]} {pose.pixel[1]}")
    print(f"point {fmt(pose.point)}")
    print(f"direction {fmt(pose.direction)}")
    print(f"approach {fmt(pose.approach)}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="swabsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sampling scenario and write its trace")
    run.add_argument("--config", help="scenario file")
    run.add_argument("--scenario", help=f"shipped scenario ({', '.join(scenario_names())})")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.set_defaults(func=_cmd_run)

    cal = sub.add_parser("calibrate", help="fit the offset-to-force quadratic from samples")
    cal.add_argument("--samples", required=True, help="CSV of offset_mm,force_n")
    cal.add_argument("--out", required=True, help="where to write the [calibration] snippet")
    cal.add_argument("--free-intercept", action="store_true", help="also fit a constant term")
    cal.set_defaults(func=_cmd_calibrate)

    pose = sub.add_parser("pose", help="sampling point and direction from landmarks and depth")
    pose.add_argument("--landmarks", required=True, help="text file of 'u v tag' lines")
    pose.add_argument("--depth", required=True, help="16-bit PGM depth image")
    pose.add_argument("--intrinsics", required=True, help="'fx fy cx cy depth_scale' sidecar")
    pose.set_defaults(func=_cmd_pose)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SwabSimError, OSError) as exc:
        print(f"swabsim {args.command}: {exc}", file=sys.stderr)
        return 2
