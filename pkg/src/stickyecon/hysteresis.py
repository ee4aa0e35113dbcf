"""Scalar hysteresis operators: play, stop, and Prandtl-Ishlinskii sums.

The play operator with threshold ``rho`` tracks its input through a dead
band: the output stays put while the input moves within ``rho`` of it and
is dragged along once the gap saturates.  The stop operator is its
complement, ``stop = input - play``, confined to ``[-rho, rho]``.  A
Prandtl-Ishlinskii (PI) operator is a linear term plus a weighted sum of
stop operators with increasing thresholds; its response to a monotone
input from rest is a piecewise-linear "primary response" curve, and when
every branch of that curve slopes upward the operator has an exact
inverse that is again a PI operator.

Usage:

    >>> play = PlayState(threshold=1.0, output=0.0)
    >>> play.step(2.0)
    1.0
    >>> play.step(1.5)     # back inside the band: output is stuck
    1.0

All operators are rate independent: refining a monotone input segment
with intermediate points does not change the final state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import NonInvertible

__all__ = [
    "saturate",
    "PlayState",
    "StopState",
    "PiComponent",
    "PiOperator",
    "PrimaryResponse",
    "pi_invert",
]

# Slack for validating that component states could have come from a common
# input history; covers rounding in long float histories.
_NESTING_SLACK = 1e-9


def saturate(x: float, threshold: float) -> float:
    """Clamp ``x`` to ``[-threshold, threshold]``, boundary values inclusive."""
    if threshold < 0:
        raise ValueError(f"saturation threshold must be >= 0, got {threshold}")
    if x >= threshold:
        return threshold
    if x <= -threshold:
        return -threshold
    return x


@dataclass
class PlayState:
    """Play (backlash) operator state.

    ``output`` is the last emitted value.  A threshold of zero makes the
    operator the identity.  Start from ``output == x0`` (the rest state
    relative to the first input) to keep play/stop duality exact.
    """

    threshold: float
    output: float = 0.0

    def __post_init__(self) -> None:
        if not self.threshold >= 0:
            raise ValueError(f"play threshold must be >= 0, got {self.threshold}")

    def step(self, x: float) -> float:
        # The stuck branch returns the stored value untouched, so repeated
        # inputs inside the band are exactly idempotent.
        if x - self.output > self.threshold:
            self.output = x - self.threshold
        elif self.output - x > self.threshold:
            self.output = x + self.threshold
        return self.output

    def copy(self) -> PlayState:
        return PlayState(self.threshold, self.output)


@dataclass
class StopState:
    """Stop operator state: ``value`` in ``[-threshold, threshold]``.

    Advancing with input ``x`` applies the increment ``x - last_input`` to
    ``value`` and clamps.  Equivalently ``value == x - play(x)`` when both
    operators start consistently (``play output + value == input``).
    """

    threshold: float
    value: float = 0.0
    last_input: float = 0.0

    def __post_init__(self) -> None:
        if not self.threshold >= 0:
            raise ValueError(f"stop threshold must be >= 0, got {self.threshold}")
        if abs(self.value) > self.threshold:
            raise ValueError(
                f"stop value {self.value} outside band [-{self.threshold}, {self.threshold}]"
            )

    def step(self, x: float) -> float:
        self.value = saturate(x - self.last_input + self.value, self.threshold)
        self.last_input = x
        return self.value

    def copy(self) -> StopState:
        return StopState(self.threshold, self.value, self.last_input)


@dataclass
class PiComponent:
    """One weighted stop inside a PI operator. Weights may have any sign."""

    weight: float
    state: StopState

    @property
    def threshold(self) -> float:
        return self.state.threshold


@dataclass
class PiOperator:
    """Linear term plus weighted stop operators with increasing thresholds.

    ``step`` advances every component with the same input and returns
    ``linear_weight * x + sum(weight_i * value_i)``.
    """

    linear_weight: float
    components: list[PiComponent] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.linear_weight >= 0:
            raise ValueError(f"linear weight must be >= 0, got {self.linear_weight}")
        thresholds = [c.threshold for c in self.components]
        for lo, hi in zip(thresholds, thresholds[1:]):
            if not hi > lo:
                raise ValueError(f"thresholds must be strictly increasing, got {thresholds}")

    def step(self, x: float) -> float:
        acc = self.linear_weight * x
        for comp in self.components:
            acc += comp.weight * comp.state.step(x)
        return acc

    def copy(self) -> PiOperator:
        return PiOperator(
            self.linear_weight,
            [PiComponent(c.weight, c.state.copy()) for c in self.components],
        )

    # -- analysis ---------------------------------------------------------

    def _kappas(self) -> list[float]:
        """Branch slopes of the primary response, innermost first, then terminal."""
        n = len(self.components)
        kappas = [0.0] * (n + 1)
        acc = self.linear_weight
        for i in range(n - 1, -1, -1):
            acc += self.components[i].weight
            kappas[i] = acc
        kappas[n] = self.linear_weight
        return kappas

    def primary_response(self) -> PrimaryResponse:
        """Response curve to a monotone input from rest (odd in the input)."""
        kappas = self._kappas()
        pts = []
        prev_x = 0.0
        prev_y = 0.0
        for i, comp in enumerate(self.components):
            y = prev_y + kappas[i] * (comp.threshold - prev_x)
            pts.append((comp.threshold, y))
            prev_x, prev_y = comp.threshold, y
        return PrimaryResponse(tuple(pts), self.linear_weight)

    # -- serialization ----------------------------------------------------

    def _common_last_input(self) -> float:
        if not self.components:
            return 0.0
        lasts = {c.state.last_input for c in self.components}
        if len(lasts) > 1:
            raise ValueError(
                "component states have diverging last inputs; "
                "drive them through PiOperator.step to keep a common history"
            )
        return self.components[0].state.last_input

    def to_dict(self) -> dict:
        return {
            "linear_weight": self.linear_weight,
            "last_input": self._common_last_input(),
            "components": [
                {"threshold": c.threshold, "weight": c.weight, "value": c.state.value}
                for c in self.components
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> PiOperator:
        try:
            linear = float(data["linear_weight"])
            raw = data["components"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed operator object: {exc}") from exc
        last = float(data.get("last_input", 0.0))
        comps = []
        for entry in raw:
            try:
                comps.append(
                    PiComponent(
                        float(entry["weight"]),
                        StopState(float(entry["threshold"]), float(entry["value"]), last),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ValueError(f"malformed operator component {entry!r}: {exc}") from exc
        return cls(linear, comps)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> PiOperator:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PrimaryResponse:
    """Piecewise-linear monotone-loading curve of a PI operator.

    ``breakpoints`` are (input, output) pairs at the component thresholds,
    ascending; the curve starts at the origin and continues with
    ``terminal_slope`` beyond the last breakpoint.  The full curve is the
    odd extension.
    """

    breakpoints: tuple[tuple[float, float], ...]
    terminal_slope: float

    def evaluate(self, x: float) -> float:
        if x < 0:
            return -self.evaluate(-x)
        prev_x = 0.0
        prev_y = 0.0
        for bx, by in self.breakpoints:
            if x <= bx:
                if bx == prev_x:
                    return by
                return prev_y + (by - prev_y) * (x - prev_x) / (bx - prev_x)
            prev_x, prev_y = bx, by
        return prev_y + self.terminal_slope * (x - prev_x)

    def slopes(self) -> list[float]:
        """Slope of each segment, terminal last. Zero-length segments report their limit."""
        out = []
        prev_x = 0.0
        prev_y = 0.0
        for bx, by in self.breakpoints:
            out.append((by - prev_y) / (bx - prev_x) if bx > prev_x else float("inf"))
            prev_x, prev_y = bx, by
        out.append(self.terminal_slope)
        return out

    def is_invertible(self) -> bool:
        return all(s > 0 for s in self.slopes())

    def inverse(self) -> PrimaryResponse:
        if not self.is_invertible():
            raise NonInvertible("primary response is not strictly increasing")
        return PrimaryResponse(
            tuple((y, x) for x, y in self.breakpoints), 1.0 / self.terminal_slope
        )


def pi_invert(op: PiOperator) -> PiOperator:
    """Exact inverse of an invertible PI operator, mapped to the current state.

    The inverse has linear weight ``1/linear_weight``, thresholds at the
    primary-response values of the original thresholds, and weights given
    by differences of reciprocal branch slopes.  Component states are
    mapped so that composing the two operators is the identity on all
    future inputs, not just from rest.

    Raises NonInvertible if any primary-response branch slope is <= 0 or
    if the component states could not have come from a common input
    history.
    """
    n = len(op.components)
    kappas = op._kappas()
    if any(not (k > 0) for k in kappas):
        raise NonInvertible(f"primary response has a branch slope <= 0: {kappas}")
    if n == 0:
        return PiOperator(1.0 / op.linear_weight)

    thresholds = [c.threshold for c in op.components]
    weights = [c.weight for c in op.components]
    values = [c.state.value for c in op.components]
    last = op._common_last_input()

    # States from a common history are nested: adjacent stop values differ
    # by no more than the threshold gap.
    for i in range(n - 1):
        gap = thresholds[i + 1] - thresholds[i]
        if abs(values[i + 1] - values[i]) > gap + _NESTING_SLACK:
            raise NonInvertible(
                f"component states {values[i]}, {values[i + 1]} at thresholds "
                f"{thresholds[i]}, {thresholds[i + 1]} are not jointly reachable"
            )

    # Thresholds of the inverse: primary response at the original thresholds,
    # accumulated segment by segment so they come out strictly increasing.
    inv_thresholds = []
    acc = 0.0
    prev = 0.0
    for i in range(n):
        acc += kappas[i] * (thresholds[i] - prev)
        prev = thresholds[i]
        inv_thresholds.append(acc)

    inv_weights = [1.0 / kappas[i] - 1.0 / kappas[i + 1] for i in range(n)]

    # Current output of the forward operator: shared last input of the inverse.
    f_now = op.linear_weight * last
    for w, v in zip(weights, values):
        f_now += w * v

    # State mapping: the inverse component i sits at distance
    # F_up(threshold_i - value_i) below its own threshold, where F_up is the
    # forward operator's response to a rising input from the current state.
    headroom = [thresholds[j] - values[j] for j in range(n)]

    def rising_response(h: float) -> float:
        acc = op.linear_weight * h
        for j in range(n):
            acc += weights[j] * min(h, headroom[j])
        return acc

    comps = []
    for i in range(n):
        s_hat = inv_thresholds[i] - rising_response(headroom[i])
        s_hat = saturate(s_hat, inv_thresholds[i])
        comps.append(PiComponent(inv_weights[i], StopState(inv_thresholds[i], s_hat, f_now)))
    return PiOperator(1.0 / op.linear_weight, comps)
