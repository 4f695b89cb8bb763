"""Exception hierarchy.

``MathematicalFailure`` subclasses signal that the inputs were well formed but
the mathematics refused (a pole, a non-principal polarization, ...).  The CLI
maps those to exit status 2 and everything else to exit status 1.
"""


class CMSiegelError(Exception):
    """Base class for all library errors."""


class MathematicalFailure(CMSiegelError):
    """Well-formed input on which the requested computation is impossible."""


# zmatrix
class NotSimilitude(MathematicalFailure):
    pass


class NotSp(MathematicalFailure):
    pass


class NotExtendable(MathematicalFailure):
    pass


class BudgetExceeded(CMSiegelError):
    pass


# cmfield
class ValidationFailed(CMSiegelError):
    def __init__(self, invariant, detail=""):
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class UnsupportedField(MathematicalFailure):
    pass


class NotACMType(UnsupportedField):
    pass


# polarization
class NotIntegral(MathematicalFailure):
    pass


class NotPrincipal(MathematicalFailure):
    pass


class NotFound(MathematicalFailure):
    pass


class Degenerate(MathematicalFailure):
    pass


class NotInSiegelSpace(MathematicalFailure):
    pass


# modfun
class PoleDetected(MathematicalFailure):
    pass


class PrecisionUnreachable(MathematicalFailure):
    pass


class StageError(CMSiegelError):
    """Wraps an upstream failure with the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
