"""Explicit one-step maps for each model variant.

Every stepper owns its state and advances it with ``step(eps, eta)``,
returning the record tuple ``(y, x, p, s, r, f)`` (multi-agent steppers
append per-agent lists).  The dynamics run in closed form: the perception
gap follows a scalar stop recursion on the forcing term, then the state
update is a fixed 2x2 affine map.  These maps are validated elsewhere
against independent solvers of the original implicit equations.
"""

from __future__ import annotations

from ..errors import ConfigError, InvalidRegime
from ..hysteresis import PiComponent, PiOperator, StopState, pi_invert
from ..model import DerivedSystem, ModelParams

__all__ = [
    "StickyStepper",
    "MultiAgentStepper",
    "StickyTaylorStepper",
]


def _load_system_scalars(obj, system: DerivedSystem) -> None:
    """Cache the affine-map coefficients as plain floats on a stepper."""
    p = system.params
    (obj.a11, obj.a12), (obj.a21, obj.a22) = system.A
    (obj.n11, obj.n12), (obj.n21, obj.n22) = system.N
    obj.d1, obj.d2 = system.d
    lever = 1.0 + p.a * p.c2
    coef = system.alpha / system.delta
    obj.fy = coef * p.b2
    obj.fx = coef * (1.0 - p.b1) * lever
    obj.feps = coef * p.b2
    obj.feta = coef * lever
    obj.c1 = p.c1
    obj.c2 = p.c2
    obj.one_plus_alpha = 1.0 + system.alpha
    obj.band = system.stop_threshold


class StickyStepper:
    """Single representative agent: expectations are a play on inflation.

    The gap state is kept rescaled (``S = (1 + alpha) * s``) so the stop
    recursion driven by the forcing term uses the band
    ``(1 + alpha) * rho`` directly.
    """

    def __init__(self, system: DerivedSystem, y0: float, x0: float, s0: float = 0.0):
        p = system.params
        if abs(s0) > p.rho:
            raise ConfigError(f"initial perception gap {s0} outside [-{p.rho}, {p.rho}]")
        _load_system_scalars(self, system)
        self.y = float(y0)
        self.x = float(x0)
        self.S = self.one_plus_alpha * s0
        self.f_prev = system.alpha * x0 + s0

    def step(self, eps: float = 0.0, eta: float = 0.0):
        f = self.fy * self.y + self.fx * self.x + self.feps * eps + self.feta * eta
        u = f - self.f_prev + self.S
        band = self.band
        S = band if u >= band else (-band if u <= -band else u)
        s = S / self.one_plus_alpha
        y = self.a11 * self.y + self.a12 * self.x + self.d1 * s + self.n11 * eps + self.n12 * eta
        x = self.a21 * self.y + self.a22 * self.x + self.d2 * s + self.n21 * eps + self.n22 * eta
        self.y, self.x, self.S, self.f_prev = y, x, S, f
        return y, x, x - s, s, self.c1 * x + self.c2 * y, f


class MultiAgentStepper:
    """Heterogeneous agents: a convex mix of plays with distinct bands.

    The aggregate gap is obtained from a Prandtl-Ishlinskii operator on
    the forcing term, built generically by inverting the forward operator
    ``alpha * id + sum(mu_i * stop_i)``; per-agent stop states are then
    advanced with the realized inflation to keep individual records.
    """

    def __init__(
        self,
        system: DerivedSystem,
        agents: list[tuple[float, float]],
        y0: float,
        x0: float,
        values0: list[float] | None = None,
    ):
        if not agents:
            raise ConfigError("multi-agent variant needs at least one agent")
        weights = [w for _, w in agents]
        if any(w <= 0 for w in weights):
            raise ConfigError(f"agent weights must be positive, got {weights}")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ConfigError(f"agent weights must sum to 1, got sum {sum(weights)!r}")
        if values0 is None:
            values0 = [0.0] * len(agents)
        if len(values0) != len(agents):
            raise ConfigError(
                f"{len(values0)} initial gap values for {len(agents)} agents"
            )
        try:
            self.forward = PiOperator(
                system.alpha,
                [
                    PiComponent(w, StopState(rho, v, float(x0)))
                    for (rho, w), v in zip(agents, values0)
                ],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        inverse = pi_invert(self.forward)
        # Gap operator: s = f - alpha * x. Its linear weight is exactly zero
        # and its stop states coincide with the inverse operator's.
        self.gap = PiOperator(
            0.0,
            [
                PiComponent(-system.alpha * c.weight, c.state)
                for c in inverse.components
            ],
        )
        _load_system_scalars(self, system)
        self.y = float(y0)
        self.x = float(x0)

    def step(self, eps: float = 0.0, eta: float = 0.0):
        f = self.fy * self.y + self.fx * self.x + self.feps * eps + self.feta * eta
        s = self.gap.step(f)
        y = self.a11 * self.y + self.a12 * self.x + self.d1 * s + self.n11 * eps + self.n12 * eta
        x = self.a21 * self.y + self.a22 * self.x + self.d2 * s + self.n21 * eps + self.n22 * eta
        self.y, self.x = y, x
        agent_s = [c.state.step(x) for c in self.forward.components]
        agent_p = [x - v for v in agent_s]
        return y, x, x - s, s, self.c1 * x + self.c2 * y, f, agent_p, agent_s


class StickyTaylorStepper:
    """Sticky policy rate: the play sits on the Taylor rule, not expectations.

    The model is ``y_t = y_{t-1} - a (r_t - x_t) + eps_t``,
    ``x_t = x_{t-1} + b2/(1 - b1) y_t + eta_t`` and ``r_t`` a play with
    band ``sigma`` applied to the rule value ``g_t = c1 x_t + c2 y_t``.
    Requires c2 > 0 and 1 - b1 - a*b2 > 0; outside that regime the
    reduction used here is not monotone and the stepper refuses to run.
    """

    def __init__(
        self,
        params: ModelParams,
        sigma: float,
        y0: float,
        x0: float,
        r0: float | None = None,
    ):
        a, b1, b2, c1, c2 = params.a, params.b1, params.b2, params.c1, params.c2
        if sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {sigma}")
        if c2 <= 0:
            raise InvalidRegime(f"sticky Taylor reduction requires c2 > 0, got c2={c2}")
        slack = 1.0 - b1 - a * b2
        if slack <= 0:
            raise InvalidRegime(
                f"sticky Taylor reduction requires 1 - b1 - a*b2 > 0, got {slack:g}"
            )
        self.sigma = float(sigma)
        rate_mix = b2 * c1 + c2 * (1.0 - b1)
        self.alpha_t = c2 * slack / rate_mix
        self.kappa = a * c2
        self.w_supply = c2 * (1.0 - b1) * (c1 + a * c2) / rate_mix
        self.rate_mix = rate_mix
        self.c1, self.c2, self.b1, self.b2 = c1, c2, b1, b2
        self.band = self.alpha_t * self.sigma

        self.y = float(y0)
        self.x = float(x0)
        g0 = c1 * self.x + c2 * self.y
        r0 = g0 if r0 is None else float(r0)
        if abs(g0 - r0) > self.sigma:
            raise ConfigError(
                f"initial rule gap {g0 - r0} outside [-{self.sigma}, {self.sigma}]"
            )
        self.g = g0
        self.S = self.alpha_t * (g0 - r0)
        self.f_prev = self.alpha_t * g0 + self.kappa * r0

    def step(self, eps: float = 0.0, eta: float = 0.0):
        f = (
            self.g
            - self.c1 * self.x
            + self.w_supply * (self.x + eta)
            + self.c2 * eps
        )
        u = f - self.f_prev + self.S
        band = self.band
        S = band if u >= band else (-band if u <= -band else u)
        denom = self.alpha_t + self.kappa
        g = f / denom + (self.kappa / (self.alpha_t * denom)) * S
        s = S / self.alpha_t
        r = g - s
        x = (self.c2 * (1.0 - self.b1) * (self.x + eta) + self.b2 * g) / self.rate_mix
        y = (g - self.c1 * x) / self.c2
        self.y, self.x, self.g, self.S, self.f_prev = y, x, g, S, f
        return y, x, x, s, r, f
