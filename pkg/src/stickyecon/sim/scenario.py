"""Scenario description: what to simulate, with which disturbances.

A scenario file (JSON or TOML) looks like:

    {
      "name": "demo",
      "variant": "sticky_expectations",
      "params": {"a": 0.2, "b1": 0.5, "b2": 0.05, "c1": 1.5, "c2": 0.5, "rho": 0.5},
      "horizon": 3000,
      "initial": {"s_star": 0.0},
      "noise": {"sigma_eps": 0.5, "sigma_eta": 0.5, "seed": 42},
      "noise_gates": [[500, 2500]],
      "shocks": [{"t_start": 1000, "duration": 10, "channel": "supply", "magnitude": 5.0}]
    }

Variants: ``sticky_expectations`` (single agent), ``multi_agent`` (adds an
``agents`` list of ``{rho, weight}``), ``sticky_taylor`` (adds ``sigma``;
the play sits on the policy rule), and ``no_stickiness`` (threshold forced
to zero regardless of ``params.rho``).

``initial`` accepts either explicit state (``y``, ``x``, optional gap ``s``,
per-agent ``agent_values``, rule value ``r``) or ``s_star`` to start exactly
on the equilibrium continuum at that gap.  Noise is i.i.d. Gaussian per
channel; ``noise_gates`` lists [start, stop) step windows where noise is
active (no gates means always on).  Shocks add a constant to one channel
over their window and apply whether or not noise is gated on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import ConfigError
from ..model import ModelParams

__all__ = [
    "NoiseSpec",
    "ShockEvent",
    "AgentSpec",
    "RunLimits",
    "InitialState",
    "Scenario",
    "scenario_from_dict",
    "load_scenario",
    "load_preset",
    "list_presets",
]

VARIANTS = ("sticky_expectations", "multi_agent", "sticky_taylor", "no_stickiness")
CHANNELS = ("demand", "supply")


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian disturbance scales and the RNG seed (same seed, same stream)."""

    sigma_eps: float = 0.0
    sigma_eta: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma_eps < 0 or self.sigma_eta < 0:
            raise ConfigError(
                f"noise scales must be >= 0, got {self.sigma_eps}, {self.sigma_eta}"
            )
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")


@dataclass(frozen=True)
class ShockEvent:
    """Additive constant on one channel over steps [t_start, t_start + duration)."""

    t_start: int
    duration: int
    channel: str
    magnitude: float

    def __post_init__(self) -> None:
        if not isinstance(self.t_start, int) or self.t_start < 1:
            raise ConfigError(f"shock t_start must be an integer >= 1, got {self.t_start!r}")
        if not isinstance(self.duration, int) or self.duration < 1:
            raise ConfigError(f"shock duration must be an integer >= 1, got {self.duration!r}")
        if self.channel not in CHANNELS:
            raise ConfigError(f"shock channel must be one of {CHANNELS}, got {self.channel!r}")

    @property
    def t_stop(self) -> int:
        return self.t_start + self.duration

    def active(self, t: int) -> bool:
        return self.t_start <= t < self.t_stop


@dataclass(frozen=True)
class AgentSpec:
    rho: float
    weight: float

    def __post_init__(self) -> None:
        if self.rho < 0:
            raise ConfigError(f"agent rho must be >= 0, got {self.rho}")
        if self.weight <= 0:
            raise ConfigError(f"agent weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class RunLimits:
    """Numerical guardrails, all overridable per scenario."""

    blowup: float = 1e6
    conv_tol: float = 1e-8
    stats_window: int = 2000

    def __post_init__(self) -> None:
        if self.blowup <= 0 or self.conv_tol <= 0 or self.stats_window < 2:
            raise ConfigError(
                f"invalid limits: blowup={self.blowup}, conv_tol={self.conv_tol}, "
                f"stats_window={self.stats_window}"
            )


@dataclass(frozen=True)
class InitialState:
    """Either explicit (y, x, ...) or s_star for an on-segment start."""

    y: float = 0.0
    x: float = 0.0
    s: float = 0.0
    s_star: float | None = None
    agent_values: tuple[float, ...] | None = None
    r: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    variant: str
    params: ModelParams
    horizon: int
    initial: InitialState = field(default_factory=InitialState)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    shocks: tuple[ShockEvent, ...] = ()
    noise_gates: tuple[tuple[int, int], ...] = ()
    agents: tuple[AgentSpec, ...] = ()
    sigma: float | None = None
    limits: RunLimits = field(default_factory=RunLimits)
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if not isinstance(self.horizon, int) or self.horizon < 0:
            raise ConfigError(f"horizon must be an integer >= 0, got {self.horizon!r}")
        for start, stop in self.noise_gates:
            if not (isinstance(start, int) and isinstance(stop, int) and 0 <= start < stop):
                raise ConfigError(f"bad noise gate [{start}, {stop})")
        gates = sorted(self.noise_gates)
        for (s1, e1), (s2, e2) in zip(gates, gates[1:]):
            if s2 < e1:
                raise ConfigError(f"noise gates [{s1},{e1}) and [{s2},{e2}) overlap")
        for channel in CHANNELS:
            events = sorted(
                (e for e in self.shocks if e.channel == channel), key=lambda e: e.t_start
            )
            for e1, e2 in zip(events, events[1:]):
                if e2.t_start < e1.t_stop:
                    raise ConfigError(
                        f"{channel} shocks at t={e1.t_start} and t={e2.t_start} overlap"
                    )
        if self.variant == "multi_agent":
            if not self.agents:
                raise ConfigError("multi_agent scenario needs an agents list")
            rhos = [a.rho for a in self.agents]
            if sorted(rhos) != rhos or len(set(rhos)) != len(rhos):
                raise ConfigError(f"agent thresholds must be strictly increasing, got {rhos}")
            total = sum(a.weight for a in self.agents)
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(f"agent weights must sum to 1, got {total!r}")
        elif self.agents:
            raise ConfigError(f"agents list is only valid for multi_agent, not {self.variant}")
        if self.variant == "sticky_taylor":
            if self.sigma is None or self.sigma < 0:
                raise ConfigError(f"sticky_taylor scenario needs sigma >= 0, got {self.sigma!r}")
        elif self.sigma is not None:
            raise ConfigError(f"sigma is only valid for sticky_taylor, not {self.variant}")
        if self.variant == "no_stickiness" and self.initial.s not in (0, 0.0):
            raise ConfigError("no_stickiness runs with a zero gap; initial.s must be 0")

    def noise_active(self, t: int) -> bool:
        if not self.noise_gates:
            return True
        return any(start <= t < stop for start, stop in self.noise_gates)

    def to_dict(self) -> dict:
        out: dict = {
            "name": self.name,
            "variant": self.variant,
            "params": {k: getattr(self.params, k) for k in ("a", "b1", "b2", "c1", "c2", "rho")},
            "horizon": self.horizon,
            "noise": {
                "sigma_eps": self.noise.sigma_eps,
                "sigma_eta": self.noise.sigma_eta,
                "seed": self.noise.seed,
            },
        }
        init: dict = {}
        if self.initial.s_star is not None:
            init["s_star"] = self.initial.s_star
        else:
            init["y"] = self.initial.y
            init["x"] = self.initial.x
            if self.initial.s:
                init["s"] = self.initial.s
            if self.initial.agent_values is not None:
                init["agent_values"] = list(self.initial.agent_values)
            if self.initial.r is not None:
                init["r"] = self.initial.r
        out["initial"] = init
        if self.shocks:
            out["shocks"] = [
                {
                    "t_start": e.t_start,
                    "duration": e.duration,
                    "channel": e.channel,
                    "magnitude": e.magnitude,
                }
                for e in self.shocks
            ]
        if self.noise_gates:
            out["noise_gates"] = [list(g) for g in self.noise_gates]
        if self.agents:
            out["agents"] = [{"rho": a.rho, "weight": a.weight} for a in self.agents]
        if self.sigma is not None:
            out["sigma"] = self.sigma
        out["limits"] = {
            "blowup": self.limits.blowup,
            "conv_tol": self.limits.conv_tol,
            "stats_window": self.limits.stats_window,
        }
        if self.provenance:
            out["provenance"] = self.provenance
        return out


_TOP_KEYS = {
    "name",
    "variant",
    "params",
    "horizon",
    "initial",
    "noise",
    "shocks",
    "noise_gates",
    "agents",
    "sigma",
    "limits",
    "provenance",
}
_INITIAL_KEYS = {"y", "x", "s", "s_star", "agent_values", "r"}


def _reject_unknown(mapping: Mapping, allowed: set, where: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"unknown {where} fields: {', '.join(unknown)}")


def scenario_from_dict(data: Mapping, name: str | None = None) -> Scenario:
    if not isinstance(data, Mapping):
        raise ConfigError(f"scenario must be an object, got {type(data).__name__}")
    _reject_unknown(data, _TOP_KEYS, "scenario")
    for key in ("variant", "params", "horizon"):
        if key not in data:
            raise ConfigError(f"scenario is missing required field {key!r}")
    try:
        params = ModelParams.from_mapping(data["params"])
    except Exception as exc:
        raise ConfigError(f"bad params section: {exc}") from exc

    raw_init = data.get("initial", {})
    _reject_unknown(raw_init, _INITIAL_KEYS, "initial")
    if "s_star" in raw_init and (set(raw_init) - {"s_star"}):
        raise ConfigError("initial.s_star cannot be combined with explicit state fields")
    agent_values = raw_init.get("agent_values")
    initial = InitialState(
        y=float(raw_init.get("y", 0.0)),
        x=float(raw_init.get("x", 0.0)),
        s=float(raw_init.get("s", 0.0)),
        s_star=None if raw_init.get("s_star") is None else float(raw_init["s_star"]),
        agent_values=None if agent_values is None else tuple(float(v) for v in agent_values),
        r=None if raw_init.get("r") is None else float(raw_init["r"]),
    )

    raw_noise = data.get("noise", {})
    _reject_unknown(raw_noise, {"sigma_eps", "sigma_eta", "seed"}, "noise")
    noise = NoiseSpec(
        sigma_eps=float(raw_noise.get("sigma_eps", 0.0)),
        sigma_eta=float(raw_noise.get("sigma_eta", 0.0)),
        seed=raw_noise.get("seed", 0),
    )

    shocks = []
    for entry in data.get("shocks", ()):
        _reject_unknown(entry, {"t_start", "duration", "channel", "magnitude"}, "shock")
        try:
            shocks.append(
                ShockEvent(
                    t_start=entry["t_start"],
                    duration=entry["duration"],
                    channel=entry["channel"],
                    magnitude=float(entry["magnitude"]),
                )
            )
        except KeyError as exc:
            raise ConfigError(f"shock entry {entry!r} is missing {exc}") from exc

    gates = []
    for gate in data.get("noise_gates", ()):
        if len(gate) != 2:
            raise ConfigError(f"noise gate must be a [start, stop) pair, got {gate!r}")
        gates.append((gate[0], gate[1]))

    agents = []
    for entry in data.get("agents", ()):
        _reject_unknown(entry, {"rho", "weight"}, "agent")
        try:
            agents.append(AgentSpec(rho=float(entry["rho"]), weight=float(entry["weight"])))
        except KeyError as exc:
            raise ConfigError(f"agent entry {entry!r} is missing {exc}") from exc

    raw_limits = data.get("limits", {})
    _reject_unknown(raw_limits, {"blowup", "conv_tol", "stats_window"}, "limits")
    limits = RunLimits(
        blowup=float(raw_limits.get("blowup", 1e6)),
        conv_tol=float(raw_limits.get("conv_tol", 1e-8)),
        stats_window=raw_limits.get("stats_window", 2000),
    )

    horizon = data["horizon"]
    if isinstance(horizon, float) and horizon.is_integer():
        horizon = int(horizon)
    return Scenario(
        name=str(data.get("name", name or "scenario")),
        variant=data["variant"],
        params=params,
        horizon=horizon,
        initial=initial,
        noise=noise,
        shocks=tuple(shocks),
        noise_gates=tuple(gates),
        agents=tuple(agents),
        sigma=None if data.get("sigma") is None else float(data["sigma"]),
        limits=limits,
        provenance=str(data.get("provenance", "")),
    )


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario from a .json or .toml file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    if path.suffix == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            data = tomllib.loads(path.read_text())
        except Exception as exc:
            raise ConfigError(f"cannot parse TOML {path}: {exc}") from exc
    elif path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse JSON {path}: {exc}") from exc
    else:
        raise ConfigError(f"scenario file must be .json or .toml, got {path.suffix!r}")
    return scenario_from_dict(data, name=path.stem)


def list_presets() -> list[str]:
    """Names of scenario presets shipped with the package."""
    pkg = resources.files("stickyecon.presets")
    return sorted(p.name[: -len(".json")] for p in pkg.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> Scenario:
    pkg = resources.files("stickyecon.presets")
    candidate = pkg / f"{name}.json"
    if not candidate.is_file():
        known = ", ".join(list_presets())
        raise ConfigError(f"unknown preset {name!r}; available: {known}")
    return scenario_from_dict(json.loads(candidate.read_text()), name=name)
