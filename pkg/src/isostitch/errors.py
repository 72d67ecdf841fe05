"""Exception types shared across the package."""


class IsostitchError(Exception):
    """Base class for package-specific errors."""


class ValidationError(IsostitchError, ValueError):
    """Invalid argument: bad shape, non-finite entry, out-of-range parameter."""


class DimensionMismatch(ValidationError):
    """Operands live in spaces of different dimension."""


class EmptyCloudError(ValidationError):
    """A nonempty point cloud was required."""


class DomainViolation(IsostitchError):
    """A map oracle was evaluated outside its declared domain."""


class DegenerateDiscretization(IsostitchError):
    """A refinement step emptied the cloud: the slack is too small for the grid pitch."""


class ConvergenceFailure(IsostitchError):
    """Iteration cap reached before the stopping tolerance."""


class RankDeficientData(IsostitchError):
    """Source points do not affinely span the space."""


class StageFailure(IsostitchError):
    """A certification stage of a pipeline failed.

    ``stage`` identifies the failing step so callers can report it or map
    it to an exit code.
    """

    def __init__(self, stage, detail=""):
        self.stage = stage
        self.detail = detail
        super().__init__(f"{stage}: {detail}" if detail else stage)


class PreconditionFailure(StageFailure):
    """An input violated a checked hypothesis (distinct from a failed conclusion)."""
