"""Exception types shared across the package.

Grouped here so callers can catch package-level failures without importing
the module that raised them.  Numerical *findings* (a failed inequality, an
assumption audit miss) are reported in result objects, never raised; the
exceptions below mark structural misuse or breakdown of an algorithm.
"""

from __future__ import annotations


class AgepdeError(Exception):
    """Base class for all package-specific errors."""


class NonIntegerStepRatio(AgepdeError):
    """Time and age extents are not integer multiples of the shared step."""


class InvalidDimension(AgepdeError):
    """Spatial dimension outside the supported range {1, 2}."""


class RectOffGrid(AgepdeError):
    """A time-age rectangle corner does not lie on grid nodes."""


class BreakpointOffGrid(AgepdeError):
    """A cutoff breakpoint does not lie on grid nodes."""


class TraceFlagMissing(AgepdeError):
    """An operation requires zero-trace flags the field does not declare."""


class MissingContext(AgepdeError):
    """A nonlocal source term was evaluated without its context field."""


class LinearSolveDiverged(AgepdeError):
    """The inner symmetric-positive-definite solve failed to converge."""


class StiffSourceStep(AgepdeError):
    """Explicit source step too large for the local reaction stiffness."""


class PreconditionViolated(AgepdeError):
    """A verification was invoked outside its guaranteed parameter range."""


class FluxMismatch(AgepdeError):
    """Prescribed boundary flux disagrees with the discrete normal flux."""


class PowerIterationStalled(AgepdeError):
    """Trace-constant power iteration failed to settle within max sweeps."""


class MissingKeyError(AgepdeError):
    """Required configuration key absent (message names section.key)."""


class UnknownKeyError(AgepdeError):
    """Unrecognized configuration key (message names section.key)."""
