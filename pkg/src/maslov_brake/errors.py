"""Exception and warning types shared across the package."""


class MaslovBrakeError(Exception):
    """Base class for all package errors."""


class NumericalError(MaslovBrakeError):
    """A numerical procedure did not converge or lost accuracy (CLI exit code 3)."""


class SymplecticityError(NumericalError):
    pass


class UnwrapError(NumericalError):
    """Phase steps too large to unwrap continuously."""


class StabilizationError(NumericalError):
    """An index value failed to stabilize over a perturbation ladder or truncation range."""


class DegenerateEndpointError(MaslovBrakeError):
    pass


class TheoryViolation(MaslovBrakeError):
    """A property guaranteed by the index theory failed (CLI exit code 1)."""


class PreconditionError(MaslovBrakeError):
    """Input does not satisfy the hypotheses required by an operation."""


class ConstantOrbitError(NumericalError):
    pass


class ConfigError(MaslovBrakeError):
    """Malformed run configuration (CLI exit code 2)."""


class BorderlineWarning(UserWarning):
    """A rank or gap decision was made close to its threshold."""
