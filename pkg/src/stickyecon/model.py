"""Model parameters, the derived explicit system, and the equilibrium segment.

The underlying model has three blocks: an output gap ``y`` that responds
to the gap between the policy rate and expected inflation, an inflation
rate ``x`` driven by sticky expectations ``p`` (a play operator applied
to ``x``), and a policy rule ``r = c1 * x + c2 * y``.  Eliminating ``r``
and ``p`` gives an explicit piecewise-linear system in ``z = (y, x)``:

    z_t = A z_{t-1} + s_t * d + N xi_t

where ``s = x - p`` is the perception gap, confined to ``[-rho, rho]``,
and ``xi = (eps, eta)`` are the demand and supply disturbances.  The gap
itself follows a scalar stop recursion driven by the forcing term

    f_t = (alpha / delta) * (b2 y_{t-1} + (1 - b1)(1 + a c2) x_{t-1}
                             + b2 eps_t + (1 + a c2) eta_t)

through the invariant ``alpha * x_t + s_t = f_t``.  Every point of the
segment ``z_*(s) = s * (b1/b2, (b2 + b1 c2) / (b2 (1 - c1)))`` with
``s in [-rho, rho]`` is an equilibrium, so the model has a continuum of
steady states rather than a single one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateSegment, DegenerateSystem, InvalidParams

__all__ = [
    "ModelParams",
    "DerivedSystem",
    "EquilibriumSegment",
    "derive",
    "forcing",
    "equilibrium_segment",
]

PARAM_FIELDS = ("a", "b1", "b2", "c1", "c2", "rho")


@dataclass(frozen=True)
class ModelParams:
    """Structural parameters.

    a    response of the output gap to the real-rate gap, >= 0
    b1   weight of expectations in the inflation equation, in [0, 1)
    b2   output-gap pass-through to inflation, >= 0
    c1   policy response to inflation, >= 0
    c2   policy response to the output gap, >= 0
    rho  expectation stickiness half-width, >= 0
    """

    a: float
    b1: float
    b2: float
    c1: float
    c2: float
    rho: float

    def __post_init__(self) -> None:
        for name in PARAM_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidParams(f"parameter {name} must be a number, got {value!r}")
            if not np.isfinite(value):
                raise InvalidParams(f"parameter {name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))
        if self.a < 0 or self.b2 < 0 or self.c1 < 0 or self.c2 < 0:
            raise InvalidParams(
                f"a, b2, c1, c2 must be >= 0, got a={self.a}, b2={self.b2}, "
                f"c1={self.c1}, c2={self.c2}"
            )
        if not 0 <= self.b1 < 1:
            raise InvalidParams(f"b1 must lie in [0, 1), got {self.b1}")
        if self.rho < 0:
            raise InvalidParams(f"rho must be >= 0, got {self.rho}")

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> ModelParams:
        """Build from a config section with exactly the fields a, b1, b2, c1, c2, rho."""
        missing = [k for k in PARAM_FIELDS if k not in mapping]
        if missing:
            raise InvalidParams(f"missing parameter fields: {', '.join(missing)}")
        unknown = [k for k in mapping if k not in PARAM_FIELDS]
        if unknown:
            raise InvalidParams(f"unknown parameter fields: {', '.join(sorted(unknown))}")
        return cls(**{k: mapping[k] for k in PARAM_FIELDS})


@dataclass(frozen=True, eq=False)
class DerivedSystem:
    """Coefficients of the explicit form ``z_t = A z_{t-1} + s_t d + N xi_t``.

    ``alpha`` couples inflation to the perception gap through
    ``alpha * x_t + s_t = f_t``; ``stop_threshold`` is the rescaled band
    ``(1 + alpha) * rho`` of the stop recursion driven by the forcing term.
    State ordering is ``z = (y, x)`` everywhere.
    """

    params: ModelParams
    A: np.ndarray
    N: np.ndarray
    d: np.ndarray
    delta: float
    alpha: float
    stop_threshold: float


def derive(params: ModelParams) -> DerivedSystem:
    """Reduce the implicit three-block model to its explicit form.

    Raises DegenerateSystem when the reduction is undefined: delta == 0,
    vanishing expectation feedback (beta == 0), or alpha <= 0.
    """
    a, b1, b2, c1, c2 = params.a, params.b1, params.b2, params.c1, params.c2
    lever = 1.0 + a * c2
    delta = (1.0 - b1) * lever + a * b2 * (c1 - 1.0)
    beta = b1 * lever + a * b2
    if delta == 0.0:
        raise DegenerateSystem("delta = 0: the one-step map is not defined")
    if beta == 0.0:
        raise DegenerateSystem(
            "expectation feedback vanishes (b1 (1 + a c2) + a b2 = 0); "
            "the perception-gap reduction is not defined"
        )
    alpha = delta / beta
    if alpha <= 0.0:
        raise DegenerateSystem(
            f"alpha = {alpha:g} <= 0 (delta = {delta:g}); the explicit form requires alpha > 0"
        )
    A = np.array(
        [
            [1.0 - b1, a * (1.0 - b1) * (1.0 - c1)],
            [b2, (1.0 - b1) * lever],
        ]
    ) / delta
    N = np.array(
        [
            [1.0 - b1, a * (1.0 - c1)],
            [b2, lever],
        ]
    ) / delta
    d = np.array([a * (b1 * c1 - 1.0), -(a * b2 + b1 * lever)]) / delta
    return DerivedSystem(
        params=params,
        A=A,
        N=N,
        d=d,
        delta=delta,
        alpha=alpha,
        stop_threshold=(1.0 + alpha) * params.rho,
    )


def forcing(
    system: DerivedSystem, z_prev: Sequence[float], eps: float = 0.0, eta: float = 0.0
) -> float:
    """Forcing term ``f_t`` given the previous state and current disturbances."""
    p = system.params
    lever = 1.0 + p.a * p.c2
    y, x = float(z_prev[0]), float(z_prev[1])
    return (system.alpha / system.delta) * (
        p.b2 * y + (1.0 - p.b1) * lever * x + p.b2 * eps + lever * eta
    )


@dataclass(frozen=True, eq=False)
class EquilibriumSegment:
    """The continuum of steady states ``z_*(s) = s * direction``.

    ``s`` ranges over ``[-rho, rho]``; ``endpoint_lo`` and ``endpoint_hi``
    are the states at the band edges.  For c1 > 1 the direction components
    have opposite signs (higher equilibrium inflation pairs with a lower
    output gap); for c1 < 1 they share a sign.
    """

    direction: np.ndarray
    s_range: tuple[float, float]
    endpoint_lo: np.ndarray
    endpoint_hi: np.ndarray

    def point_at(self, s_star: float) -> np.ndarray:
        """Equilibrium state for a given perception gap in s_range."""
        lo, hi = self.s_range
        if not lo <= s_star <= hi:
            raise ValueError(f"s_star {s_star} outside the gap band [{lo}, {hi}]")
        return s_star * self.direction

    def distance_to(self, z: Sequence[float]) -> float:
        """Euclidean distance from a state to the segment (endpoints included)."""
        point = np.asarray(z, dtype=float)
        lo, hi = self.endpoint_lo, self.endpoint_hi
        span = hi - lo
        norm2 = float(span @ span)
        if norm2 == 0.0:
            return float(np.hypot(*(point - lo)))
        t = float((point - lo) @ span) / norm2
        t = min(1.0, max(0.0, t))
        return float(np.hypot(*(point - (lo + t * span))))


def equilibrium_segment(params: ModelParams, check_tol: float = 1e-10) -> EquilibriumSegment:
    """Equilibrium segment for the given parameters.

    Requires b2 > 0 and c1 != 1 (DegenerateSegment otherwise).  The closed
    form is cross-checked against the derived system: the residual of
    ``(I - A) z_* - s_* d`` at both endpoints must stay within check_tol.
    """
    if params.b2 == 0.0:
        raise DegenerateSegment("b2 = 0: the equilibrium direction is not defined")
    if params.c1 == 1.0:
        raise DegenerateSegment("c1 = 1: the equilibrium segment degenerates")
    direction = np.array(
        [
            params.b1 / params.b2,
            (params.b2 + params.b1 * params.c2) / (params.b2 * (1.0 - params.c1)),
        ]
    )
    system = derive(params)
    eye_minus_a = np.eye(2) - system.A
    scale = max(1.0, float(np.max(np.abs(direction))), params.rho)
    for s_star in (-params.rho, params.rho):
        residual = eye_minus_a @ (s_star * direction) - s_star * system.d
        if float(np.max(np.abs(residual))) > check_tol * scale:
            raise DegenerateSystem(
                f"equilibrium identity residual {residual} exceeds {check_tol} at s={s_star}"
            )
    return EquilibriumSegment(
        direction=direction,
        s_range=(-params.rho, params.rho),
        endpoint_lo=-params.rho * direction,
        endpoint_hi=params.rho * direction,
    )
