"""Exception hierarchy shared by every focusplan module."""


class FocusPlanError(ValueError):
    """Base class for all domain errors raised by focusplan."""


class ParameterDomainError(FocusPlanError):
    """A parameter lies outside its allowed domain."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class FocusDomainError(FocusPlanError):
    """Object distance at or inside the focal point; no real image exists."""


class ImageDomainError(FocusPlanError):
    """Image-plane distance at or inside the focal length."""


class NoFiniteFocusError(FocusPlanError):
    """The requested near limit is only reached as the focus distance goes to infinity."""


class PlanValidationError(FocusPlanError):
    """A plan violates one or more structural invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
