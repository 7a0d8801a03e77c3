"""CSV and JSON encodings for plans.

Floats are written with ``repr`` so they round-trip exactly, and infinity is
written as the literal string ``inf`` in both formats.
"""

from __future__ import annotations

import csv
import io
import json
import math

from .optics import DerivedOptics, LensSpec
from .slicer import Direction, FocusPlan, FocusSlice

CSV_HEADER = ("step", "focus_distance_mm", "near_limit_mm", "far_limit_mm", "lens_distance_mm")


def fmt(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def num(x):
    """JSON-safe number: floats stay floats, infinity becomes ``"inf"``."""
    if isinstance(x, float) and math.isinf(x):
        return fmt(x)
    return x


def parse_num(x):
    if isinstance(x, str):
        return float(x.strip())
    return float(x)


def _slice_row(s):
    return {
        "step": s.index,
        "focus_distance_mm": s.focus_distance,
        "near_limit_mm": s.near,
        "far_limit_mm": s.far,
        "lens_distance_mm": s.lens_distance,
    }


def plan_to_csv(plan):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in plan.slices:
        row = _slice_row(s)
        writer.writerow([row["step"]] + [fmt(row[k]) for k in CSV_HEADER[1:]])
    return buf.getvalue()


def spec_to_dict(spec):
    return {
        "focal_length": spec.focal_length,
        "f_number": spec.f_number,
        "coc": spec.coc,
        "near_focus_limit": spec.near_focus_limit,
        "far_target": num(spec.far_target),
    }


def spec_from_dict(data):
    return LensSpec(
        focal_length=parse_num(data["focal_length"]),
        f_number=parse_num(data["f_number"]),
        coc=parse_num(data["coc"]),
        near_focus_limit=parse_num(data["near_focus_limit"]),
        far_target=parse_num(data.get("far_target", "inf")),
    )


def plan_to_dict(plan):
    return {
        "spec": spec_to_dict(plan.spec),
        "derived": {
            "hyperfocal": plan.derived.hyperfocal,
            "lens_at_near": plan.derived.lens_at_near,
            "lens_at_hyperfocal": plan.derived.lens_at_hyperfocal,
        },
        "direction": plan.direction.value,
        "slices": [{k: num(v) for k, v in _slice_row(s).items()} for s in plan.slices],
    }


def plan_to_json(plan):
    return json.dumps(plan_to_dict(plan), indent=2) + "\n"


def _slices_from_rows(rows):
    return tuple(
        FocusSlice(
            index=int(r["step"]),
            focus_distance=parse_num(r["focus_distance_mm"]),
            near=parse_num(r["near_limit_mm"]),
            far=parse_num(r["far_limit_mm"]),
            lens_distance=parse_num(r["lens_distance_mm"]),
        )
        for r in rows
    )


def plan_from_dict(data):
    spec = spec_from_dict(data["spec"])
    return FocusPlan(
        spec=spec,
        derived=DerivedOptics.from_spec(spec),
        slices=_slices_from_rows(data["slices"]),
        direction=Direction(data.get("direction", "forward")),
    )


def plan_from_json(text):
    return plan_from_dict(json.loads(text))


def plan_from_csv(text, spec, direction=Direction.NEAR_TO_FAR):
    """Rebuild a plan from CSV rows; the CSV carries no lens parameters, so pass ``spec``."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")
    return FocusPlan(spec, DerivedOptics.from_spec(spec), _slices_from_rows(reader), direction)
