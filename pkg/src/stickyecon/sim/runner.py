"""Drive a scenario to a Trajectory, plus summary statistics and file output.

The simulation loop is variant-agnostic: it resolves the initial state,
pre-draws the full Gaussian disturbance arrays (both channels are always
drawn, so gating or zero scales never shift the stream), applies gates
and shock windows, then advances the stepper until the horizon, a state
component exceeds the blow-up bound (divergence flag, truncated
trajectory), or a non-finite value appears.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError, WindowTooShort
from ..model import EquilibriumSegment, derive, equilibrium_segment
from .scenario import Scenario
from .steppers import MultiAgentStepper, StickyStepper, StickyTaylorStepper

__all__ = [
    "Trajectory",
    "VolatilityStats",
    "simulate",
    "volatility_stats",
    "write_trajectory_csv",
    "write_agents_csv",
    "write_summary_json",
]

CSV_HEADER = "t,y,x,p,s,r,f,eps,eta"


@dataclass
class Trajectory:
    """Recorded run. Row 0 is the initial state; row t is the state after step t."""

    scenario: Scenario
    seed: int
    t: np.ndarray
    y: np.ndarray
    x: np.ndarray
    p: np.ndarray
    s: np.ndarray
    r: np.ndarray
    f: np.ndarray
    eps: np.ndarray
    eta: np.ndarray
    diverged: bool = False
    divergence_step: int | None = None
    agent_p: np.ndarray | None = None
    agent_s: np.ndarray | None = None

    @property
    def steps_recorded(self) -> int:
        return len(self.t) - 1


@dataclass(frozen=True)
class VolatilityStats:
    sd_y: float
    sd_x: float
    window: tuple[int, int]
    n: int


def _segment_for(scenario: Scenario) -> EquilibriumSegment | None:
    """Equilibrium segment matching the scenario variant, None when undefined."""
    params = scenario.params
    try:
        if scenario.variant == "sticky_expectations":
            return equilibrium_segment(params)
        if scenario.variant == "no_stickiness":
            return equilibrium_segment(replace(params, rho=0.0))
        if scenario.variant == "multi_agent":
            band = sum(a.weight * a.rho for a in scenario.agents)
            return equilibrium_segment(replace(params, rho=band))
        # sticky_taylor: equilibria sit at (y, x) = (0, s / (c1 - 1)), |s| <= sigma
        if params.c1 == 1.0:
            return None
        direction = np.array([0.0, 1.0 / (params.c1 - 1.0)])
        sigma = float(scenario.sigma)
        return EquilibriumSegment(
            direction=direction,
            s_range=(-sigma, sigma),
            endpoint_lo=-sigma * direction,
            endpoint_hi=sigma * direction,
        )
    except Exception:
        return None


def _resolve_initial(scenario: Scenario):
    """Return (stepper, row0) for the scenario; row0 = (y, x, p, s, r, f, agent_p, agent_s)."""
    params = scenario.params
    init = scenario.initial
    variant = scenario.variant

    if variant in ("sticky_expectations", "no_stickiness"):
        if init.agent_values is not None:
            raise ConfigError(f"agent_values is not valid for {variant}")
        if init.r is not None:
            raise ConfigError(f"initial.r is not valid for {variant}")
        eff = params if variant == "sticky_expectations" else replace(params, rho=0.0)
        if init.s_star is not None:
            if abs(init.s_star) > eff.rho:
                raise ConfigError(
                    f"s_star {init.s_star} outside the gap band [-{eff.rho}, {eff.rho}]"
                )
            z0 = equilibrium_segment(eff).point_at(init.s_star)
            y0, x0, s0 = float(z0[0]), float(z0[1]), float(init.s_star)
        else:
            y0, x0, s0 = init.y, init.x, init.s
        system = derive(eff)
        stepper = StickyStepper(system, y0, x0, s0)
        row0 = (y0, x0, x0 - s0, s0, params.c1 * x0 + params.c2 * y0,
                system.alpha * x0 + s0, None, None)
        return stepper, row0

    if variant == "multi_agent":
        if init.s != 0.0:
            raise ConfigError("use initial.agent_values (or s_star) for multi_agent, not s")
        if init.r is not None:
            raise ConfigError("initial.r is not valid for multi_agent")
        agents = [(a.rho, a.weight) for a in scenario.agents]
        if init.s_star is not None:
            min_rho = min(a.rho for a in scenario.agents)
            if abs(init.s_star) > min_rho:
                raise ConfigError(
                    f"s_star {init.s_star} exceeds the tightest agent band {min_rho}"
                )
            band = sum(a.weight * a.rho for a in scenario.agents)
            z0 = equilibrium_segment(replace(params, rho=band)).point_at(init.s_star)
            y0, x0 = float(z0[0]), float(z0[1])
            values = [float(init.s_star)] * len(agents)
        else:
            y0, x0 = init.y, init.x
            values = list(init.agent_values) if init.agent_values is not None else [0.0] * len(agents)
        system = derive(params)
        stepper = MultiAgentStepper(system, agents, y0, x0, values)
        s0 = sum(w * v for (_, w), v in zip(agents, values))
        row0 = (y0, x0, x0 - s0, s0, params.c1 * x0 + params.c2 * y0,
                system.alpha * x0 + s0,
                [x0 - v for v in values], list(values))
        return stepper, row0

    # sticky_taylor
    if init.agent_values is not None:
        raise ConfigError("agent_values is not valid for sticky_taylor")
    sigma = float(scenario.sigma)
    if init.s_star is not None:
        if abs(init.s_star) > sigma:
            raise ConfigError(f"s_star {init.s_star} outside the rule band [-{sigma}, {sigma}]")
        if params.c1 == 1.0:
            raise ConfigError("sticky_taylor equilibria need c1 != 1 for an s_star start")
        x0 = init.s_star / (params.c1 - 1.0)
        y0 = 0.0
        r0 = params.c1 * x0 - init.s_star
    else:
        y0, x0 = init.y, init.x
        g0 = params.c1 * x0 + params.c2 * y0
        if init.r is not None and init.s != 0.0:
            raise ConfigError("give either initial.r or initial.s for sticky_taylor, not both")
        r0 = init.r if init.r is not None else g0 - init.s
    stepper = StickyTaylorStepper(params, sigma, y0, x0, r0)
    g0 = params.c1 * x0 + params.c2 * y0
    row0 = (y0, x0, x0, g0 - r0, r0, stepper.f_prev, None, None)
    return stepper, row0


def simulate(scenario: Scenario, seed: int | None = None) -> Trajectory:
    """Run a scenario. ``seed`` overrides the scenario's noise seed."""
    stepper, row0 = _resolve_initial(scenario)
    horizon = scenario.horizon
    used_seed = scenario.noise.seed if seed is None else int(seed)

    rng = np.random.default_rng(used_seed)
    eps_raw = scenario.noise.sigma_eps * rng.standard_normal(horizon)
    eta_raw = scenario.noise.sigma_eta * rng.standard_normal(horizon)
    for t in range(1, horizon + 1):
        if not scenario.noise_active(t):
            eps_raw[t - 1] = 0.0
            eta_raw[t - 1] = 0.0
    for event in scenario.shocks:
        lo = max(0, event.t_start - 1)
        hi = min(horizon, event.t_stop - 1)
        target = eps_raw if event.channel == "demand" else eta_raw
        target[lo:hi] += event.magnitude

    n_agents = len(scenario.agents)
    cols = {name: np.empty(horizon + 1) for name in ("y", "x", "p", "s", "r", "f", "eps", "eta")}
    agent_p = np.empty((horizon + 1, n_agents)) if n_agents else None
    agent_s = np.empty((horizon + 1, n_agents)) if n_agents else None

    y0, x0, p0, s0, r0, f0, ap0, as0 = row0
    for name, value in zip(("y", "x", "p", "s", "r", "f", "eps", "eta"),
                           (y0, x0, p0, s0, r0, f0, 0.0, 0.0)):
        cols[name][0] = value
    if n_agents:
        agent_p[0] = ap0
        agent_s[0] = as0

    blowup = scenario.limits.blowup
    diverged = False
    divergence_step = None
    recorded = 0
    for t in range(1, horizon + 1):
        e, n = eps_raw[t - 1], eta_raw[t - 1]
        rec = stepper.step(e, n)
        yv, xv = rec[0], rec[1]
        if not (np.isfinite(yv) and np.isfinite(xv)):
            diverged = True
            divergence_step = t
            break
        cols["y"][t], cols["x"][t], cols["p"][t] = yv, xv, rec[2]
        cols["s"][t], cols["r"][t], cols["f"][t] = rec[3], rec[4], rec[5]
        cols["eps"][t], cols["eta"][t] = e, n
        if n_agents:
            agent_p[t] = rec[6]
            agent_s[t] = rec[7]
        recorded = t
        if abs(yv) > blowup or abs(xv) > blowup:
            diverged = True
            divergence_step = t
            break

    rows = recorded + 1
    return Trajectory(
        scenario=scenario,
        seed=used_seed,
        t=np.arange(rows),
        y=cols["y"][:rows],
        x=cols["x"][:rows],
        p=cols["p"][:rows],
        s=cols["s"][:rows],
        r=cols["r"][:rows],
        f=cols["f"][:rows],
        eps=cols["eps"][:rows],
        eta=cols["eta"][:rows],
        diverged=diverged,
        divergence_step=divergence_step,
        agent_p=agent_p[:rows] if n_agents else None,
        agent_s=agent_s[:rows] if n_agents else None,
    )


def volatility_stats(
    traj: Trajectory, window: int | tuple[int, int] | None = None
) -> VolatilityStats:
    """Sample standard deviations of y and x over a row window.

    ``window`` is either an int (the last so many rows) or an explicit
    ``(start, stop)`` row range; the default is the last
    ``limits.stats_window`` recorded rows.
    """
    rows = len(traj.t)
    if window is None:
        window = traj.scenario.limits.stats_window
    if isinstance(window, int):
        start = max(0, rows - window)
        stop = rows
    else:
        start, stop = window
    if not (0 <= start < stop <= rows):
        raise WindowTooShort(f"window [{start}, {stop}) does not fit {rows} recorded rows")
    if stop - start < 2:
        raise WindowTooShort(f"window [{start}, {stop}) has fewer than two samples")
    return VolatilityStats(
        sd_y=float(np.std(traj.y[start:stop], ddof=1)),
        sd_x=float(np.std(traj.x[start:stop], ddof=1)),
        window=(start, stop),
        n=stop - start,
    )


def summarize(traj: Trajectory) -> dict:
    """Run summary: volatility, convergence/divergence, shock bookkeeping."""
    scenario = traj.scenario
    rows = len(traj.t)
    last = rows - 1
    summary: dict = {
        "name": scenario.name,
        "variant": scenario.variant,
        "seed": traj.seed,
        "horizon": scenario.horizon,
        "steps_recorded": traj.steps_recorded,
        "diverged": traj.diverged,
        "divergence_step": traj.divergence_step,
    }
    if rows >= 2:
        stats = volatility_stats(traj)
        summary["sd_y"] = stats.sd_y
        summary["sd_x"] = stats.sd_x
        summary["stats_window"] = list(stats.window)
    else:
        summary["sd_y"] = None
        summary["sd_x"] = None
        summary["stats_window"] = None
    summary["final"] = {
        "t": int(traj.t[last]),
        "y": float(traj.y[last]),
        "x": float(traj.x[last]),
        "p": float(traj.p[last]),
        "s": float(traj.s[last]),
        "r": float(traj.r[last]),
    }
    summary["max_abs"] = {
        "y": float(np.max(np.abs(traj.y))),
        "x": float(np.max(np.abs(traj.x))),
    }
    segment = _segment_for(scenario)
    if segment is not None:
        distance = segment.distance_to((traj.y[last], traj.x[last]))
        summary["distance_to_segment"] = distance
        summary["converged"] = bool(distance < scenario.limits.conv_tol)
    else:
        summary["distance_to_segment"] = None
        summary["converged"] = None
    if scenario.shocks:
        first = min(e.t_start for e in scenario.shocks)
        pre_t = min(first - 1, last)
        summary["pre_shock"] = {
            "t": int(pre_t),
            "x": float(traj.x[pre_t]),
            "s": float(traj.s[pre_t]),
        }
        summary["post_shock"] = {
            "t": int(traj.t[last]),
            "x": float(traj.x[last]),
            "s": float(traj.s[last]),
        }
    else:
        summary["pre_shock"] = None
        summary["post_shock"] = None
    return summary


def _fmt(value: float) -> str:
    return repr(float(value))


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    """Fixed-schema CSV: header t,y,x,p,s,r,f,eps,eta, one row per step."""
    lines = [CSV_HEADER]
    for i in range(len(traj.t)):
        lines.append(
            ",".join(
                [str(int(traj.t[i]))]
                + [_fmt(col[i]) for col in (traj.y, traj.x, traj.p, traj.s,
                                            traj.r, traj.f, traj.eps, traj.eta)]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_agents_csv(traj: Trajectory, path: str | Path) -> None:
    """Per-agent expectations and gaps: header t,p1,...,pN,s1,...,sN."""
    if traj.agent_p is None:
        raise ValueError("trajectory has no per-agent records")
    n = traj.agent_p.shape[1]
    header = "t," + ",".join(f"p{i + 1}" for i in range(n)) + "," + ",".join(
        f"s{i + 1}" for i in range(n)
    )
    lines = [header]
    for i in range(len(traj.t)):
        lines.append(
            ",".join(
                [str(int(traj.t[i]))]
                + [_fmt(v) for v in traj.agent_p[i]]
                + [_fmt(v) for v in traj.agent_s[i]]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_json(traj: Trajectory, path: str | Path) -> None:
    payload = {"scenario": traj.scenario.to_dict(), "summary": summarize(traj)}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
