"""Exception hierarchy for opentdse."""


class OpenTDSEError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(OpenTDSEError):
    """Configuration is not runnable; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NonCommensurateGrid(ConfigError):
    def __init__(self, message):
        super().__init__([message])


class DomainError(OpenTDSEError, ValueError):
    """Argument outside the domain where a closed form is defined."""


class OutOfBand(DomainError):
    """Energy outside the tight-binding band."""


class DegenerateWavevector(DomainError):
    pass


class TruncatedSupport(OpenTDSEError):
    """Grid does not hold the packet tail to the required accuracy."""


class NonPositiveMask(OpenTDSEError, ValueError):
    def __init__(self, nodes):
        self.nodes = list(nodes)
        super().__init__(f"mask has non-positive values at {len(self.nodes)} node(s)")


class NumericalFailure(OpenTDSEError):
    """Base for failures detected while stepping."""


class NumericalBlowup(NumericalFailure):
    pass


class NonFiniteField(NumericalFailure):
    pass


class BoundaryContamination(NumericalFailure):
    pass


class StopRuleNeverMet(NumericalFailure):
    pass


class MisalignedTrajectories(OpenTDSEError):
    pass
