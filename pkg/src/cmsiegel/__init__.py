"""Class invariants of CM fields from Siegel modular functions evaluated at CM points."""

__version__ = "0.1.0"

from .errors import (CMSiegelError, MathematicalFailure, NotPrincipal, PoleDetected,  # noqa: E402
                     PrecisionUnreachable, StageError)

__all__ = ["CMSiegelError", "MathematicalFailure", "NotPrincipal", "PoleDetected", "PrecisionUnreachable",
           "StageError", "__version__"]
