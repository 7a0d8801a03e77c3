"""Thin-lens depth-of-field geometry.

All lengths are millimeters. Infinity is ``math.inf`` (exported as ``INFINITY``)
and is handled explicitly wherever a limit can reach it.

The hyperfocal distance uses the ``H = f**2 / (N * c) + f`` convention. With it,
the near and far limit formulas place the defocus blur at exactly ``c`` on both
DoF boundaries, which is what lets adjacent slices tile a range without gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    FocusDomainError,
    ImageDomainError,
    NoFiniteFocusError,
    ParameterDomainError,
)

INFINITY = math.inf


def _positive(name, value):
    if not isinstance(value, (int, float)) or math.isnan(value) or value <= 0:
        raise ParameterDomainError(name, f"must be positive, got {value!r}")
    return float(value)


def _finite_positive(name, value):
    value = _positive(name, value)
    if math.isinf(value):
        raise ParameterDomainError(name, "must be finite")
    return value


@dataclass(frozen=True)
class LensSpec:
    """Physical parameters of a camera module.

    Parameters
    ----------
    focal_length : float
        Focal length in mm.
    f_number : float
        Aperture number N.
    coc : float
        Acceptable circle-of-confusion diameter in mm.
    near_focus_limit : float
        Nearest practically focusable object distance in mm.
    far_target : float
        Distance beyond which coverage is not required, or ``INFINITY``.
    """

    focal_length: float
    f_number: float
    coc: float
    near_focus_limit: float
    far_target: float = INFINITY

    def __post_init__(self):
        for name in ("focal_length", "f_number", "coc", "near_focus_limit"):
            object.__setattr__(self, name, _finite_positive(name, getattr(self, name)))
        object.__setattr__(self, "far_target", _positive("far_target", self.far_target))
        if self.near_focus_limit <= self.focal_length:
            raise ParameterDomainError(
                "near_focus_limit", "near focus limit must exceed focal length"
            )
        if self.far_target <= self.near_focus_limit:
            raise ParameterDomainError(
                "far_target", "far target must exceed near focus limit"
            )

    @property
    def aperture_diameter(self):
        return self.focal_length / self.f_number


@dataclass(frozen=True)
class DerivedOptics:
    hyperfocal: float
    lens_at_near: float
    lens_at_hyperfocal: float

    @classmethod
    def from_spec(cls, spec):
        H = hyperfocal(spec)
        return cls(
            hyperfocal=H,
            lens_at_near=object_to_image(spec.near_focus_limit, spec.focal_length),
            lens_at_hyperfocal=object_to_image(H, spec.focal_length),
        )


def hyperfocal(spec):
    """Hyperfocal distance ``f**2 / (N * c) + f`` in mm."""
    f = spec.focal_length
    return f * f / (spec.f_number * spec.coc) + f


def coc_from_sensor(sensor_diagonal, k=1730.0):
    """Circle of confusion from the sensor diagonal and a viewing constant ``k``.

    ``k`` is typically 1500-2000; 1730 is the common industry choice. Larger ``k``
    means a stricter sharpness criterion.
    """
    return _finite_positive("sensor_diagonal", sensor_diagonal) / _finite_positive("k", k)


def _check_focus(d_o, f):
    if isinstance(d_o, (int, float)) and not math.isnan(d_o) and d_o > f:
        return float(d_o)
    raise FocusDomainError(
        f"object distance {d_o!r} mm is at or inside the focal length {f} mm"
    )


def near_limit(d_o, spec):
    """Nearest acceptably sharp distance when focused at ``d_o``. Always finite."""
    f = spec.focal_length
    d_o = _check_focus(d_o, f)
    if math.isinf(d_o):
        raise FocusDomainError("near_limit requires a finite focus distance")
    H = hyperfocal(spec)
    return d_o * (H - f) / (H + d_o - 2 * f)


def far_limit(d_o, spec):
    """Farthest acceptably sharp distance; ``INFINITY`` once ``d_o >= H``."""
    f = spec.focal_length
    d_o = _check_focus(d_o, f)
    if math.isinf(d_o):
        raise FocusDomainError("far_limit requires a finite focus distance")
    H = hyperfocal(spec)
    if d_o >= H:
        return INFINITY
    return d_o * (H - f) / (H - d_o)


def dof(d_o, spec):
    """Depth of field as ``far_limit - near_limit``."""
    far = far_limit(d_o, spec)
    if math.isinf(far):
        return INFINITY
    return far - near_limit(d_o, spec)


def object_from_near_limit(near, spec):
    """Focus distance whose near limit is ``near``. Inverse of :func:`near_limit`."""
    near = _finite_positive("near", near)
    f = spec.focal_length
    H = hyperfocal(spec)
    denom = H - f - near
    if denom <= 0:
        raise NoFiniteFocusError(
            f"near limit {near} mm >= H - f = {H - f} mm has no finite focus distance"
        )
    return near * (H - 2 * f) / denom


def object_from_far_limit(far, spec):
    """Focus distance whose far limit is ``far``; ``INFINITY`` maps to H."""
    far = _positive("far", far)
    H = hyperfocal(spec)
    if math.isinf(far):
        return H
    return far * H / (H - spec.focal_length + far)


def object_to_image(d_o, focal_length):
    """Thin-lens image distance for an object at ``d_o`` (``f`` at infinity)."""
    f = focal_length
    d_o = _check_focus(d_o, f)
    if math.isinf(d_o):
        return float(f)
    # f + f**2/(d_o - f) rather than d_o*f/(d_o - f): half the rounding error far out
    return f + f * f / (d_o - f)


def image_to_object(d_i, focal_length):
    """Object distance imaged sharply at ``d_i``; inverse of :func:`object_to_image`."""
    f = focal_length
    if not isinstance(d_i, (int, float)) or math.isnan(d_i) or d_i <= f:
        raise ImageDomainError(
            f"image distance {d_i!r} mm is at or inside the focal length {f} mm"
        )
    if math.isinf(d_i):
        return float(f)
    return f + f * f / (d_i - f)


def blur_diameter(d, d_o, spec):
    """Geometric defocus blur-disc diameter on the image plane.

    Object at ``d``, lens focused at ``d_o``::

        b = f**2 * |d - d_o| / (N * d * (d_o - f))

    This is derived from similar triangles on the light cone and is independent
    of the limit formulas, so it serves as the oracle for them. ``d`` may be
    ``INFINITY``.
    """
    f = spec.focal_length
    d_o = _check_focus(d_o, f)
    if math.isinf(d_o):
        raise FocusDomainError("blur_diameter requires a finite focus distance")
    d = _positive("d", d)
    scale = f * f / (spec.f_number * (d_o - f))
    if math.isinf(d):
        return scale
    return scale * abs(d - d_o) / d


def blur_at_lens_position(d, d_i, spec):
    """Blur for an object at ``d`` with the sensor ``d_i`` behind the lens.

    Image-side form of :func:`blur_diameter`, ``(f/N) * |d_i - v| / v`` where ``v``
    is the sharp image distance of ``d``. Unlike the object-side form it stays
    defined for ``d_i <= f`` (sensor focused past infinity), which quantized
    actuator positions can reach.
    """
    d_i = _finite_positive("d_i", d_i)
    v = object_to_image(d, spec.focal_length)
    return spec.aperture_diameter * abs(d_i - v) / v
