"""Two-point linear calibration between image-plane distance and actuator codes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import optics
from .errors import ParameterDomainError, PlanValidationError


@dataclass(frozen=True)
class ActuatorCalibration:
    """Linear map from lens codes to image-plane distance.

    Code 0 sits at ``lens_at_code_min`` (infinity end), ``code_max`` at
    ``lens_at_code_max`` (macro end).
    """

    lens_at_code_max: float
    lens_at_code_min: float
    code_max: int = 1023

    def __post_init__(self):
        problems = []
        if not (isinstance(self.code_max, int) and self.code_max >= 1):
            problems.append(f"code_max must be an integer >= 1, got {self.code_max!r}")
        lo, hi = self.lens_at_code_min, self.lens_at_code_max
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo > 0):
            problems.append(
                f"need lens_at_code_max > lens_at_code_min > 0, got {hi!r}, {lo!r}"
            )
        if problems:
            raise PlanValidationError(problems)

    @property
    def span(self):
        return self.lens_at_code_max - self.lens_at_code_min

    @property
    def code_step(self):
        """Image-plane travel per code, in mm."""
        return self.span / self.code_max

    @classmethod
    def spanning(cls, derived, code_max=1023):
        """Calibration whose endpoints sit on the near-limit and hyperfocal lens positions."""
        return cls(derived.lens_at_near, derived.lens_at_hyperfocal, code_max)

    def to_dict(self):
        return {
            "lens_at_code_max": self.lens_at_code_max,
            "lens_at_code_min": self.lens_at_code_min,
            "code_max": self.code_max,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            lens_at_code_max=float(data["lens_at_code_max"]),
            lens_at_code_min=float(data["lens_at_code_min"]),
            code_max=int(data["code_max"]),
        )


@dataclass(frozen=True)
class CodeResult:
    code: int
    clamped: bool = False


def _round_half_away(x):
    # snap near-ties so decimal inputs that are exact ties in base 10 round up
    base = math.floor(x)
    frac = x - base
    if frac >= 0.5 or math.isclose(frac, 0.5, rel_tol=0, abs_tol=1e-9):
        return int(base) + 1
    return int(base)


def to_code(d_i, cal):
    """Nearest actuator code for ``d_i``; out-of-range inputs clamp and set ``clamped``."""
    if not math.isfinite(d_i):
        raise ParameterDomainError("d_i", f"must be finite, got {d_i!r}")
    if d_i <= cal.lens_at_code_min:
        return CodeResult(0, d_i < cal.lens_at_code_min)
    if d_i >= cal.lens_at_code_max:
        return CodeResult(cal.code_max, d_i > cal.lens_at_code_max)
    x = cal.code_max * (d_i - cal.lens_at_code_min) / cal.span
    return CodeResult(min(_round_half_away(x), cal.code_max))


def from_code(code, cal):
    if not (isinstance(code, int) and 0 <= code <= cal.code_max):
        raise ParameterDomainError("code", f"must be an integer in [0, {cal.code_max}], got {code!r}")
    if code == cal.code_max:
        return cal.lens_at_code_max
    return cal.lens_at_code_min + code * cal.span / cal.code_max


def quantize(d_i, cal):
    """Image-plane distance the actuator actually reaches when asked for ``d_i``."""
    return from_code(to_code(d_i, cal).code, cal)


@dataclass(frozen=True)
class QuantizedSlice:
    index: int
    code: int
    clamped: bool
    lens_distance: float
    object_distance: float
    focus_blur: float
    near_blur: float
    far_blur: float
    collision: bool
    blur_violation: bool


@dataclass(frozen=True)
class QuantizationReport:
    entries: tuple

    @property
    def collisions(self):
        return [e.index for e in self.entries if e.collision]

    @property
    def blur_violations(self):
        return [e.index for e in self.entries if e.blur_violation]

    @property
    def ok(self):
        return not self.collisions and not self.blur_violations


def quantization_report(plan, cal, tolerance=0.05):
    """Per-slice effect of driving the lens through ``cal``.

    ``focus_blur`` is the blur at the slice's intended focus distance once the
    lens sits at the quantized position. ``near_blur``/``far_blur`` are the blurs
    at the slice boundaries. Any shift off the exact position lifts one boundary
    above ``c``, so a boundary is flagged only when it exceeds ``c`` by more
    than the relative ``tolerance``. A collision means two slices map to the
    same code.
    """
    spec = plan.spec
    f = spec.focal_length
    limit = spec.coc * (1 + tolerance)
    codes = [to_code(s.lens_distance, cal) for s in plan.slices]
    entries = []
    for k, (s, cr) in enumerate(zip(plan.slices, codes)):
        d_i = from_code(cr.code, cal)
        obj = optics.image_to_object(d_i, f) if d_i > f else optics.INFINITY
        near_blur = optics.blur_at_lens_position(s.near, d_i, spec)
        far_blur = optics.blur_at_lens_position(s.far, d_i, spec)
        collision = any(
            codes[j].code == cr.code for j in (k - 1, k + 1) if 0 <= j < len(codes)
        )
        entries.append(
            QuantizedSlice(
                index=s.index,
                code=cr.code,
                clamped=cr.clamped,
                lens_distance=d_i,
                object_distance=obj,
                focus_blur=optics.blur_at_lens_position(s.focus_distance, d_i, spec),
                near_blur=near_blur,
                far_blur=far_blur,
                collision=collision,
                blur_violation=max(near_blur, far_blur) > limit,
            )
        )
    return QuantizationReport(tuple(entries))
