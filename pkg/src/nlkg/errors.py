"""Exception types shared across the package."""


class NlkgError(Exception):
    """Base class for all package errors."""


class NoBracket(NlkgError):
    """The shooting bracket does not enclose a sign change."""


class NotConverged(NlkgError):
    """An iterative solve exceeded its iteration cap."""


class PositiveGroundEigenvalue(NlkgError):
    """Lowest eigenvalue of the linearized operator came out >= 0."""


class GridMismatch(NlkgError):
    """Two fields were combined that do not share a grid."""


class CenterOutOfDomain(NlkgError):
    """A requested soliton center is too close to the boundary."""


class NewtonDiverged(NlkgError):
    """Center fitting left the tubular neighborhood."""


class CollisionDetected(NlkgError):
    """Reduced-flow centers approached below the minimum distance."""


class CentersTooClose(NlkgError):
    """Localized runs require well separated centers."""


class SameOutcomeAtEndpoints(NlkgError):
    """Threshold bisection endpoints classify identically."""


class UndeterminedDominates(NlkgError):
    """Too many consecutive bisection probes were inconclusive."""


class QuadrantInconsistent(NlkgError):
    """Probe labels violate the monotone quadrant structure."""


class NonFinite(NlkgError):
    """A field state produced NaN or Inf."""


class ParseError(NlkgError):
    """A config file could not be parsed."""


class ValidationError(NlkgError):
    """A config violated one or more constraints.

    ``violations`` lists every failed constraint at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
