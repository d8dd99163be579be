"""Exception hierarchy shared by all solver stages."""


class ErnstMaxwellError(Exception):
    """Base class for every error raised by :mod:`ernstmx`."""


class DomainError(ErnstMaxwellError, ValueError):
    """(x, y) lies outside the triangle x >= 0, y >= 0, x + y < 1."""


class BranchCutError(ErnstMaxwellError, ValueError):
    """Spectral parameter sits on the branch cut [x, 1 - y]."""


class DegenerateError(ErnstMaxwellError, ValueError):
    """A cut image collapses to a single point (x = 0 or y = 0)."""


class ContourInfeasible(ErnstMaxwellError):
    pass


class ValidationError(ErnstMaxwellError, ValueError):
    """Boundary data violate the corner/positivity assumptions.

    ``problems`` lists every violated condition, not just the first one.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class FormatError(ErnstMaxwellError, ValueError):
    pass


class PositivityError(ErnstMaxwellError, ValueError):
    """f = Re E - |H|^2 is not strictly positive."""


class ToleranceError(ErnstMaxwellError, RuntimeError):
    pass


class AdmissibilityError(ErnstMaxwellError, ValueError):
    """A spectral point falls on the segment where the frame is not analytic."""


class SparsityError(ErnstMaxwellError, RuntimeError):
    pass


class ProximityError(ErnstMaxwellError, ValueError):
    """Evaluation point too close to the contour for an off-contour transform."""


class ResolutionError(ErnstMaxwellError, RuntimeError):
    """Laurent coefficients of a contour function fail to decay."""


class SingularSystemError(ErnstMaxwellError, RuntimeError):
    pass


class NonConvergence(ErnstMaxwellError, RuntimeError):
    pass


class DegenerateRecovery(ErnstMaxwellError, RuntimeError):
    pass


class GridTooCoarse(ErnstMaxwellError, ValueError):
    pass


class ExtrapolationUnstable(ErnstMaxwellError, RuntimeError):
    pass
