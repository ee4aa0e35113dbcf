"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1,
degenerate-regime and numerical errors exit 2.
"""


class StickyEconError(Exception):
    """Base class for all package errors."""


class ConfigError(StickyEconError):
    """A scenario or parameter file is malformed or inconsistent."""


class InvalidParams(StickyEconError):
    """Model parameters violate their admissibility constraints."""


class DegenerateSystem(StickyEconError):
    """The reduced linear system is not defined for these parameters."""


class DegenerateSegment(StickyEconError):
    """The equilibrium segment is not defined (zero output feedback or unit feedback gain)."""


class NonInvertible(StickyEconError):
    """A Prandtl-Ishlinskii operator has a non-increasing primary response branch."""


class NoConsistentBranch(StickyEconError):
    """The implicit one-step equations admit no consistent hysteresis branch."""


class NonFinite(StickyEconError):
    """A state component overflowed to inf or nan during stepping."""


class InvalidRegime(StickyEconError):
    """Parameters fall outside the regime a stepper or reduction requires."""


class WindowTooShort(StickyEconError):
    """A statistics window contains fewer than two samples."""
