"""Lens-position planning for autofocus coarse search and focus bracketing."""

from .actuator import ActuatorCalibration, from_code, quantization_report, to_code
from .af import SearchTrace, SimulatedScene, autofocus, coarse_search, fine_search, sharpness
from .errors import (
    FocusDomainError,
    FocusPlanError,
    ImageDomainError,
    NoFiniteFocusError,
    ParameterDomainError,
    PlanValidationError,
)
from .optics import (
    INFINITY,
    DerivedOptics,
    LensSpec,
    blur_at_lens_position,
    blur_diameter,
    coc_from_sensor,
    dof,
    far_limit,
    hyperfocal,
    image_to_object,
    near_limit,
    object_from_far_limit,
    object_from_near_limit,
    object_to_image,
)
from .slicer import (
    CoverageReport,
    Direction,
    FocusPlan,
    FocusSlice,
    slice_backward,
    slice_forward,
    verify_coverage,
)

__version__ = "0.1.0"
