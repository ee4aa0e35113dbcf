"""Hysteresis operators and a sticky-expectations macro model built on them.

The package has three layers.  ``hysteresis`` implements scalar play and
stop operators and their weighted Prandtl-Ishlinskii aggregates, with an
exact inversion.  ``model`` and ``stability`` hold the closed-form side
of the sticky-expectations economy: the explicit linear-with-play form,
its equilibrium segment, and the stuck-mode / far-field stability
criteria.  ``sim`` runs seeded scenario experiments against both the
explicit steppers and independent implicit-equation oracles.
"""

from .errors import (
    ConfigError,
    DegenerateSegment,
    DegenerateSystem,
    InvalidParams,
    InvalidRegime,
    NoConsistentBranch,
    NonFinite,
    NonInvertible,
    StickyEconError,
    WindowTooShort,
)
from .hysteresis import (
    PiComponent,
    PiOperator,
    PlayState,
    PrimaryResponse,
    StopState,
    pi_invert,
    saturate,
)
from .model import (
    PARAM_FIELDS,
    DerivedSystem,
    EquilibriumSegment,
    ModelParams,
    derive,
    equilibrium_segment,
    forcing,
)
from .stability import (
    AttractorReport,
    CharPoly2,
    JuryVerdict,
    StabilityReport,
    SweepAxis,
    SweepResult,
    TaylorLinearization,
    char_poly_A,
    char_poly_B,
    classify_attractor,
    estimate_basin_radius,
    far_field_matrix,
    jury,
    spectral_radius,
    stability_report,
    sticky_taylor_linearization,
    stuck_mode_matrix,
    sweep,
)
from . import sim

__version__ = "0.1.0"

__all__ = [
    "AttractorReport",
    "CharPoly2",
    "ConfigError",
    "DegenerateSegment",
    "DegenerateSystem",
    "DerivedSystem",
    "EquilibriumSegment",
    "InvalidParams",
    "InvalidRegime",
    "JuryVerdict",
    "ModelParams",
    "NoConsistentBranch",
    "NonFinite",
    "NonInvertible",
    "PARAM_FIELDS",
    "PiComponent",
    "PiOperator",
    "PlayState",
    "PrimaryResponse",
    "StabilityReport",
    "StickyEconError",
    "StopState",
    "SweepAxis",
    "SweepResult",
    "TaylorLinearization",
    "WindowTooShort",
    "char_poly_A",
    "char_poly_B",
    "classify_attractor",
    "derive",
    "equilibrium_segment",
    "estimate_basin_radius",
    "far_field_matrix",
    "forcing",
    "jury",
    "pi_invert",
    "saturate",
    "sim",
    "spectral_radius",
    "stability_report",
    "sticky_taylor_linearization",
    "stuck_mode_matrix",
    "sweep",
    "__version__",
]
