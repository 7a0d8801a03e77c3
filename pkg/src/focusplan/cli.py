"""Command-line front end.

Exit status: 0 success, 1 validation failure (bad lens parameters, failed
coverage), 2 argument or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import af, optics, serialize, slicer
from .actuator import ActuatorCalibration, quantization_report
from .errors import FocusPlanError

LENS_FLAGS = {
    "focal_mm": "focal_length",
    "aperture": "f_number",
    "coc_mm": "coc",
    "near_mm": "near_focus_limit",
    "far_mm": "far_target",
    "sensor_diagonal_mm": "sensor_diagonal",
    "k": "k",
}


class UsageError(Exception):
    """Bad arguments or unreadable input; maps to exit status 2."""


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _merge_config(args, config=None):
    cfg = dict(config or {})
    if args.config:
        cfg = {**_read_json(args.config), **cfg}
    flags = {key: getattr(args, flag) for flag, key in LENS_FLAGS.items()
             if getattr(args, flag, None) is not None}
    if "coc" in flags and ({"sensor_diagonal", "k"} & flags.keys()):
        raise UsageError("conflicting CoC sources: give --coc-mm or --sensor-diagonal-mm/--k, not both")
    # a CoC source given on the command line replaces the one in the config
    if "coc" in flags:
        cfg.pop("sensor_diagonal", None)
        cfg.pop("k", None)
    elif {"sensor_diagonal", "k"} & flags.keys():
        cfg.pop("coc", None)
    cfg.update(flags)
    return cfg


def spec_from_config(cfg):
    """Build a LensSpec from merged config values (LensSpec field names)."""
    has_coc = cfg.get("coc") is not None
    has_sensor = cfg.get("sensor_diagonal") is not None
    if has_coc and has_sensor:
        raise UsageError("conflicting CoC sources: config gives both coc and sensor_diagonal")
    if cfg.get("k") is not None and not has_sensor:
        raise UsageError("--k needs --sensor-diagonal-mm")
    missing = [k for k in ("focal_length", "f_number", "near_focus_limit") if cfg.get(k) is None]
    if not (has_coc or has_sensor):
        missing.append("coc (or sensor_diagonal)")
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join(missing))
    try:
        values = {k: serialize.parse_num(v) for k, v in cfg.items()
                  if k in {"focal_length", "f_number", "coc", "near_focus_limit",
                           "far_target", "sensor_diagonal", "k"} and v is not None}
    except (TypeError, ValueError) as exc:
        raise UsageError(f"non-numeric parameter: {exc}") from exc
    if has_sensor:
        values["coc"] = optics.coc_from_sensor(values.pop("sensor_diagonal"), values.pop("k", 1730.0))
    return optics.LensSpec(**values)


def _calibration(args, cfg, derived):
    if getattr(args, "calibration", None):
        data = _read_json(args.calibration)
    elif isinstance(cfg.get("calibration"), dict):
        data = cfg["calibration"]
    else:
        return ActuatorCalibration.spanning(derived)
    try:
        return ActuatorCalibration.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"bad calibration: {exc}") from exc


def _emit(text, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _render(plan, fmt):
    return serialize.plan_to_csv(plan) if fmt == "csv" else serialize.plan_to_json(plan)


def cmd_plan(args):
    if getattr(args, "config_dir", None):
        return _plan_batch(args)
    spec = spec_from_config(_merge_config(args))
    if args.command == "bracket" and math.isinf(spec.far_target):
        raise UsageError("bracket needs a finite --far-mm")
    _emit(_render(slicer.plan(spec, args.direction), args.format), args.output)
    return 0


def _plan_batch(args):
    if not args.output_dir:
        raise UsageError("--config-dir needs --output-dir")
    src = Path(args.config_dir)
    if not src.is_dir():
        raise UsageError(f"not a directory: {src}")
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for path in sorted(src.glob("*.json")):
        try:
            spec = spec_from_config(_merge_config(args, _read_json(path)))
            text = _render(slicer.plan(spec, args.direction), args.format)
        except FocusPlanError as exc:
            print(f"{path.name}: {exc}", file=sys.stderr)
            status = 1
            continue
        (out / f"{path.stem}.{args.format}").write_text(text)
    return status


def _load_plan(args):
    path = Path(args.plan_file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            return serialize.plan_from_json(text)
        except (json.JSONDecodeError, KeyError) as exc:
            raise UsageError(f"malformed plan JSON {path}: {exc}") from exc
    spec = spec_from_config(_merge_config(args))
    try:
        return serialize.plan_from_csv(text, spec)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed plan CSV {path}: {exc}") from exc


def cmd_verify(args):
    plan = _load_plan(args)
    report = slicer.verify_coverage(plan, args.samples_per_slice)
    doc = {k: serialize.num(v) for k, v in report.to_dict().items()}
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    if not report.passed:
        print(
            f"coverage failed: blur {report.max_blur:.6g} mm > coc {report.coc:.6g} mm "
            f"at {report.worst_distance:.6g} mm",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_simulate(args):
    cfg = _merge_config(args)
    spec = spec_from_config(cfg)
    plan = slicer.plan(spec, args.direction)
    cal = _calibration(args, cfg, plan.derived)
    scene = af.SimulatedScene(args.distance_mm, args.noise_sigma, args.seed)
    trace = af.autofocus(plan, scene, cal, args.max_evals)
    _emit(trace.to_json(), args.output)
    return 0


def cmd_quantize(args):
    cfg = _merge_config(args)
    spec = spec_from_config(cfg)
    plan = slicer.plan(spec, args.direction)
    cal = _calibration(args, cfg, plan.derived)
    report = quantization_report(plan, cal)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "code", "clamped", "lens_distance_mm", "object_distance_mm",
                "focus_blur_mm", "near_blur_mm", "far_blur_mm", "collision", "blur_violation"])
    for e in report.entries:
        w.writerow([e.index, e.code, int(e.clamped), serialize.fmt(e.lens_distance),
                    serialize.fmt(e.object_distance), serialize.fmt(e.focus_blur),
                    serialize.fmt(e.near_blur), serialize.fmt(e.far_blur),
                    int(e.collision), int(e.blur_violation)])
    _emit(buf.getvalue(), args.output)
    return 0 if report.ok else 1


def plot_rows(plan, samples_per_slice=50):
    """``(distance, slice_index, blur)`` rows, log-uniform over the plan's range."""
    lo = plan.slices[0].near
    hi = plan.slices[-1].far
    if math.isinf(hi):
        hi = 4 * plan.derived.hyperfocal
    distances = np.geomspace(lo, hi, samples_per_slice * len(plan.slices))
    rows = []
    for d in distances:
        for s in plan.slices:
            rows.append((float(d), s.index, optics.blur_diameter(float(d), s.focus_distance, plan.spec)))
    return rows


def cmd_plotdata(args):
    spec = spec_from_config(_merge_config(args))
    plan = slicer.plan(spec, args.direction)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["distance_mm", "slice_index", "blur_mm"])
    for d, idx, b in plot_rows(plan, args.samples_per_slice):
        w.writerow([serialize.fmt(d), idx, serialize.fmt(b)])
    _emit(buf.getvalue(), args.output)
    return 0


def _lens_args(p, far_required=False):
    g = p.add_argument_group("lens module (mm)")
    g.add_argument("--config", help="JSON config with LensSpec fields; flags override it")
    g.add_argument("--focal-mm", type=float)
    g.add_argument("--aperture", type=float, help="f-number")
    g.add_argument("--coc-mm", type=float)
    g.add_argument("--sensor-diagonal-mm", type=float)
    g.add_argument("--k", type=float, help="CoC divisor for --sensor-diagonal-mm (default 1730)")
    g.add_argument("--near-mm", type=float)
    g.add_argument("--far-mm", type=float, required=far_required, help="default inf")
    p.add_argument("--direction", choices=["forward", "backward"], default="forward")
    p.add_argument("-o", "--output", help="write here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="focusplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("plan", "bracket"):
        p = sub.add_parser(name, help="forward/backward slicing to a CSV or JSON table"
                           if name == "plan" else "plan with a mandatory finite --far-mm")
        _lens_args(p, far_required=name == "bracket")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--config-dir", help="plan every *.json config in this directory")
        p.add_argument("--output-dir", help="destination for --config-dir results")
        p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="blur-oracle coverage check of a plan file")
    p.add_argument("plan_file")
    _lens_args(p)
    p.add_argument("--samples-per-slice", type=int, default=100)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="coarse + fine contrast AF run on a synthetic scene")
    _lens_args(p)
    p.add_argument("--calibration", help="actuator calibration JSON")
    p.add_argument("--distance-mm", type=float, required=True)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-evals", type=int, default=30)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("quantize", help="per-slice actuator code report")
    _lens_args(p)
    p.add_argument("--calibration", help="actuator calibration JSON")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("plotdata", help="distance-vs-blur curves per slice as CSV")
    _lens_args(p)
    p.add_argument("--samples-per-slice", type=int, default=50)
    p.set_defaults(func=cmd_plotdata)
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"focusplan: error: {exc}", file=sys.stderr)
        return 2
    except FocusPlanError as exc:
        print(f"focusplan: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())
