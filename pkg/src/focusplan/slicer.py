"""Partition a focus range into adjacent depth-of-field slices.

Forward slicing starts at the practical near focus limit and walks toward
infinity: the far limit of one slice becomes the near limit of the next, and the
next focus distance is solved from that near limit. Backward slicing walks the
same chain from the far end. In both directions the leftover overlap is pushed
to the end where the walk stops.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import optics
from .errors import PlanValidationError
from .optics import INFINITY, DerivedOptics, LensSpec

# guard against runaway loops; the slice count grows like f / (N * c)
MAX_ITERATIONS = 1_000_000


class Direction(enum.Enum):
    NEAR_TO_FAR = "forward"
    FAR_TO_NEAR = "backward"


@dataclass(frozen=True)
class FocusSlice:
    """One DoF slice. ``index`` is the step number; the forward preamble is -1."""

    index: int
    focus_distance: float
    near: float
    far: float
    lens_distance: float
    clamped: bool = False


@dataclass(frozen=True)
class FocusPlan:
    spec: LensSpec
    derived: DerivedOptics
    slices: tuple
    direction: Direction = Direction.NEAR_TO_FAR

    @property
    def iterated(self):
        """Slices produced by the slicing loop, excluding the near-limit preamble."""
        return tuple(s for s in self.slices if s.index >= 0)

    @property
    def preamble(self):
        for s in self.slices:
            if s.index < 0:
                return s
        return None

    def __len__(self):
        return len(self.slices)


def _make_slice(index, d_o, spec, near=None, far=None, clamped=False):
    return FocusSlice(
        index=index,
        focus_distance=d_o,
        near=optics.near_limit(d_o, spec) if near is None else near,
        far=optics.far_limit(d_o, spec) if far is None else far,
        lens_distance=optics.object_to_image(d_o, spec.focal_length),
        clamped=clamped,
    )


def slice_forward(spec, max_iterations=MAX_ITERATIONS):
    """Plan focus positions from the near focus limit toward the far target.

    The near focus limit itself is emitted first as a preamble slice with index
    -1. Iterated slices are numbered from 0. When the next focus distance would
    pass the hyperfocal distance (or reach far enough that its far limit passes a
    finite ``far_target``), the last slice is clamped to the smallest focus
    distance that still reaches the target, so the overlap sits at the far end.
    """
    derived = DerivedOptics.from_spec(spec)
    H = derived.hyperfocal
    end = optics.object_from_far_limit(spec.far_target, spec)

    if spec.near_focus_limit >= H:
        only = _make_slice(0, H, spec, clamped=True)
        return FocusPlan(spec, derived, (only,), Direction.NEAR_TO_FAR)

    d_o = spec.near_focus_limit
    slices = [_make_slice(-1, d_o, spec)]
    for index in range(max_iterations + 1):
        far = slices[-1].far
        if far >= spec.far_target:
            break
        if index == max_iterations:
            raise RuntimeError(f"slicing did not terminate within {max_iterations} steps")
        if far < H - spec.focal_length:
            d_o = optics.object_from_near_limit(far, spec)
        else:
            d_o = INFINITY
        if d_o >= end:
            slices.append(_make_slice(index, end, spec, clamped=True))
            break
        slices.append(_make_slice(index, d_o, spec, near=far))
    return FocusPlan(spec, derived, tuple(slices), Direction.NEAR_TO_FAR)


def slice_backward(spec, max_iterations=MAX_ITERATIONS):
    """Plan focus positions from the far target back toward the near focus limit.

    The walk stops once a slice's near limit reaches the near focus limit. A focus
    distance closer than the near focus limit is clamped to it, putting the
    overlap at the near end. The result is re-indexed in increasing distance.
    """
    derived = DerivedOptics.from_spec(spec)
    H = derived.hyperfocal

    if spec.near_focus_limit >= H:
        only = _make_slice(0, H, spec, clamped=True)
        return FocusPlan(spec, derived, (only,), Direction.FAR_TO_NEAR)

    generated = []
    far = spec.far_target
    for _ in range(max_iterations):
        d_o = optics.object_from_far_limit(far, spec)
        if d_o <= spec.near_focus_limit:
            generated.append(
                _make_slice(0, spec.near_focus_limit, spec, clamped=True)
            )
            break
        s = _make_slice(0, d_o, spec, far=far)
        generated.append(s)
        if s.near <= spec.near_focus_limit:
            break
        far = s.near
    else:
        raise RuntimeError(f"slicing did not terminate within {max_iterations} steps")

    slices = tuple(
        FocusSlice(i, s.focus_distance, s.near, s.far, s.lens_distance, s.clamped)
        for i, s in enumerate(reversed(generated))
    )
    return FocusPlan(spec, derived, slices, Direction.FAR_TO_NEAR)


def plan(spec, direction=Direction.NEAR_TO_FAR):
    if isinstance(direction, str):
        direction = Direction(direction)
    if direction is Direction.NEAR_TO_FAR:
        return slice_forward(spec)
    return slice_backward(spec)


def validate_plan(plan):
    """Return a list of structural invariant violations (empty when well formed).

    Gaps between slices are not structural; :func:`verify_coverage` finds them.
    """
    problems = []
    f = plan.spec.focal_length
    if not plan.slices:
        problems.append("plan has no slices")
    prev = None
    for k, s in enumerate(plan.slices):
        tag = f"slice {k} (step {s.index})"
        if not (math.isfinite(s.focus_distance) and s.focus_distance > f):
            problems.append(f"{tag}: focus distance {s.focus_distance} not in (f, inf)")
            continue
        if not (0 < s.near < s.focus_distance < s.far):
            problems.append(f"{tag}: expected near < focus < far")
        expected = optics.object_to_image(s.focus_distance, f)
        if not math.isclose(s.lens_distance, expected, rel_tol=1e-9):
            problems.append(f"{tag}: lens distance {s.lens_distance} != {expected}")
        if prev is not None:
            if s.focus_distance <= prev.focus_distance:
                problems.append(f"{tag}: focus distance not increasing")
            if s.index <= prev.index:
                problems.append(f"{tag}: step index not increasing")
        prev = s
    return problems


@dataclass
class CoverageReport:
    passed: bool
    max_blur: float
    worst_distance: float
    coc: float
    n_samples: int
    range_near: float
    range_far: float
    violations: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_blur_mm": self.max_blur,
            "worst_distance_mm": self.worst_distance,
            "coc_mm": self.coc,
            "n_samples": self.n_samples,
            "range_near_mm": self.range_near,
            "range_far_mm": self.range_far,
            "violations": self.violations,
        }


def _min_blur(distances, plan):
    """Smallest blur over all slices, for each distance.

    For a fixed object distance the blur only grows as the focus distance moves
    away from it on either side, so the two slices bracketing the distance are
    the only candidates.
    """
    spec = plan.spec
    f, N = spec.focal_length, spec.f_number
    focus = np.array([s.focus_distance for s in plan.slices])
    d = np.asarray(distances, dtype=float)
    hi = np.clip(np.searchsorted(focus, d), 0, len(focus) - 1)
    lo = np.clip(hi - 1, 0, len(focus) - 1)

    def blur(d_o):
        scale = f * f / (N * (d_o - f))
        with np.errstate(invalid="ignore"):
            rel = np.where(np.isinf(d), 1.0, np.abs(d - d_o) / d)
        return scale * rel

    return np.minimum(blur(focus[lo]), blur(focus[hi]))


def verify_coverage(plan, samples_per_slice=100):
    """Check that every distance in the plan's range is within ``coc`` of some slice.

    The range runs from the first slice's near limit to the last slice's far
    limit. Samples are every slice boundary plus ``samples_per_slice``
    log-spaced points between each pair of consecutive boundaries, so a missing
    slice always leaves sampled points in the hole it opens.
    """
    if samples_per_slice < 1:
        raise ValueError("samples_per_slice must be positive")
    problems = validate_plan(plan)
    if problems:
        raise PlanValidationError(problems)

    lo, hi = plan.slices[0].near, plan.slices[-1].far
    bounds = sorted({x for s in plan.slices for x in (s.near, s.far) if lo <= x <= hi})
    finite = [b for b in bounds if math.isfinite(b)]
    if math.isinf(hi):
        # sample out to where blur is indistinguishable from its limit at infinity
        finite.append(max(finite[-1] * 1e6, 1e12))
    log_b = np.log(np.asarray(finite, dtype=float))
    t = np.linspace(0.0, 1.0, samples_per_slice + 2)[1:-1]
    inner = np.exp(log_b[:-1, None] + t[None, :] * np.diff(log_b)[:, None])
    samples = np.concatenate([np.asarray(bounds, dtype=float), inner.ravel()])
    blur = _min_blur(samples, plan)

    c = plan.spec.coc
    limit = c * (1 + 1e-9)
    worst = int(np.argmax(blur))
    return CoverageReport(
        passed=bool(np.all(blur <= limit)),
        max_blur=float(blur[worst]),
        worst_distance=float(samples[worst]),
        coc=c,
        n_samples=int(samples.size),
        range_near=lo,
        range_far=hi,
        violations=int(np.count_nonzero(blur > limit)),
    )
