"""Exception hierarchy shared by every module of the package."""


class StaircaseError(Exception):
    """Base class for all domain errors."""


class PolicyUndefined(StaircaseError):
    """A cut or spacer policy cannot produce a value for the requested stage."""


class StageMissing(StaircaseError):
    """The stage table does not reach a stage the operation needs."""


class CannotExtend(StaircaseError):
    """Refinement stopped before the requested tolerance was met."""


class CellBudgetExceeded(CannotExtend):
    """Materializing a level array would exceed STAIRCASE_MAX_STAGE_CELLS."""


class ColumnOutOfRange(StaircaseError, IndexError):
    pass


class LevelOutOfRange(StaircaseError, IndexError):
    pass


class BadReference(StaircaseError, ValueError):
    """Probability normalization got a reference measure that cannot be used."""


class DepthInsufficient(StaircaseError):
    """The oracle stage is too shallow for the requested shift."""


class MultiplierNotFound(StaircaseError, LookupError):
    pass


class SpecSyntaxError(StaircaseError, ValueError):
    """A config line, set spec or rake spec could not be parsed."""
