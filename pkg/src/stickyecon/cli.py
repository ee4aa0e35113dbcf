"""Command line front end.

Subcommands: ``simulate`` (one scenario to trajectory.csv + summary.json),
``stability`` (closed-form analysis to JSON), ``sweep`` (a quantity over a
parameter grid to CSV), ``equilibria`` (the equilibrium segment, optionally
with basin probes), and ``reproduce`` (rerun every bundled preset and check
the behavior each one exists to demonstrate).

Exit codes: 0 success, 1 configuration problems (bad flags, bad scenario
files, invalid parameters), 2 regime or numerical failures (degenerate
systems, no consistent branch, non-finite states), 3 reproduce checks
failed.  All outputs are deterministic: rerunning a command with the same
inputs produces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DegenerateSegment,
    DegenerateSystem,
    InvalidParams,
    InvalidRegime,
    NoConsistentBranch,
    NonFinite,
    NonInvertible,
    WindowTooShort,
)
from .model import PARAM_FIELDS, ModelParams, derive, equilibrium_segment
from .sim import (
    Scenario,
    list_presets,
    load_preset,
    load_scenario,
    simulate,
    summarize,
    volatility_stats,
    write_agents_csv,
    write_summary_json,
    write_trajectory_csv,
)
from .stability import (
    SweepAxis,
    classify_attractor,
    estimate_basin_radius,
    stability_report,
    sticky_taylor_linearization,
    sweep,
)

_CONFIG_ERRORS = (ConfigError, InvalidParams)
_NUMERIC_ERRORS = (
    DegenerateSystem,
    DegenerateSegment,
    InvalidRegime,
    NonInvertible,
    NoConsistentBranch,
    NonFinite,
    WindowTooShort,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; we reserve 2 for numerics."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stickyecon", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_source(p, with_params=True):
        p.add_argument("--preset", help="bundled scenario name (see README for the list)")
        p.add_argument("--scenario", help="path to a scenario .json or .toml file")
        if with_params:
            p.add_argument(
                "--params",
                help="inline parameters, e.g. a=0.2,b1=0.5,b2=0.05,c1=1.5,c2=0.5,rho=0.5",
            )

    p_sim = sub.add_parser("simulate", help="run one scenario")
    add_source(p_sim, with_params=False)
    p_sim.add_argument("--seed", type=int, help="override the scenario seed")
    p_sim.add_argument("--out", required=True, help="output directory")

    p_stab = sub.add_parser(
        "stability", help="closed-form stability analysis"
    )
    add_source(p_stab)
    p_stab.add_argument(
        "--taylor",
        action="store_true",
        help="include the sticky-Taylor stuck-rule linearization",
    )
    p_stab.add_argument("--out", help="output directory (default: print to stdout)")

    p_sweep = sub.add_parser(
        "sweep", help="a quantity over a parameter grid"
    )
    add_source(p_sweep)
    p_sweep.add_argument(
        "--quantity",
        required=True,
        choices=("radius_A", "radius_B", "sd_x", "sd_y"),
    )
    p_sweep.add_argument(
        "--axis",
        required=True,
        help="grid spec name=start:stop:count or name=v1,v2,...",
    )
    p_sweep.add_argument("--axis2", help="optional second axis, same format")
    p_sweep.add_argument(
        "--seeds", default="0", help="seed list 0,1,2 or range 0:20 (sd sweeps)"
    )
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_sweep.add_argument("--out", required=True, help="output directory")

    p_eq = sub.add_parser(
        "equilibria", help="describe the equilibrium segment"
    )
    add_source(p_eq)
    p_eq.add_argument("--samples", type=int, default=5, help="points along the segment")
    p_eq.add_argument(
        "--basin",
        action="store_true",
        help="probe the attraction basin radius at each sample (slow)",
    )
    p_eq.add_argument("--out", help="output directory (default: print to stdout)")

    p_rep = sub.add_parser(
        "reproduce", help="rerun all presets and check them"
    )
    p_rep.add_argument("--out", required=True, help="output directory")
    p_rep.add_argument(
        "--only", help="comma-separated preset names (default: all of them)"
    )
    return parser


def _parse_inline_params(text: str) -> ModelParams:
    values = {}
    for item in text.split(","):
        if "=" not in item:
            raise ConfigError(f"bad --params item {item!r}, expected name=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in PARAM_FIELDS:
            raise ConfigError(f"unknown parameter {key!r}, expected one of {PARAM_FIELDS}")
        try:
            values[key] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return ModelParams.from_mapping(values)


def _load_source_scenario(args) -> Scenario | None:
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario)
    if getattr(args, "preset", None):
        return load_preset(args.preset)
    return None


def _resolve_params(args) -> ModelParams:
    if getattr(args, "params", None):
        return _parse_inline_params(args.params)
    scenario = _load_source_scenario(args)
    if scenario is not None:
        return scenario.params
    raise ConfigError("no parameters given; use --params, --preset, or --scenario")


def _parse_axis(spec: str) -> SweepAxis:
    if "=" not in spec:
        raise ConfigError(f"bad axis spec {spec!r}, expected name=start:stop:count")
    name, _, grid = spec.partition("=")
    name = name.strip()
    try:
        if ":" in grid:
            parts = grid.split(":")
            if len(parts) != 3:
                raise ValueError("range form needs start:stop:count")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError("count must be >= 1")
            values = tuple(float(v) for v in np.linspace(start, stop, count))
        else:
            values = tuple(float(v) for v in grid.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad axis spec {spec!r}: {exc}") from exc
    return SweepAxis(name=name, values=values)


def _parse_seeds(spec: str) -> tuple[int, ...]:
    try:
        if ":" in spec:
            start, _, stop = spec.partition(":")
            seeds = tuple(range(int(start), int(stop)))
        else:
            seeds = tuple(int(v) for v in spec.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --seeds spec {spec!r}") from exc
    if not seeds:
        raise ConfigError(f"--seeds spec {spec!r} is empty")
    return seeds


def _write_json(payload: dict, out: str | None, filename: str) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / filename).write_text(text)


def _cmd_simulate(args) -> int:
    scenario = _load_source_scenario(args)
    if scenario is None:
        raise ConfigError("simulate needs --preset or --scenario")
    traj = simulate(scenario, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_summary_json(traj, out / "summary.json")
    if traj.agent_p is not None:
        write_agents_csv(traj, out / "agents.csv")
    summary = summarize(traj)
    status = "diverged" if traj.diverged else "ok"
    print(f"{scenario.name}: {traj.steps_recorded} steps, {status}, wrote {out}")
    return 0


def _cmd_stability(args) -> int:
    params = _resolve_params(args)
    report = stability_report(params).to_dict()
    if args.taylor:
        lin = sticky_taylor_linearization(params)
        report["sticky_taylor"] = {
            "matrix": [[float(v) for v in row] for row in lin.matrix],
            "det": lin.det,
            "char_poly": {"p": lin.poly.p, "q": lin.poly.q},
            "expanding": lin.expanding,
            "marginal": lin.marginal,
        }
    _write_json(report, args.out, "stability.json")
    return 0


def _cmd_sweep(args) -> int:
    axes = [_parse_axis(args.axis)]
    if args.axis2:
        axes.append(_parse_axis(args.axis2))
    scenario = _load_source_scenario(args)
    params = None
    if getattr(args, "params", None):
        params = _parse_inline_params(args.params)
    elif scenario is not None:
        params = scenario.params
    result = sweep(
        args.quantity,
        axes,
        params=params,
        scenario=scenario,
        seeds=_parse_seeds(args.seeds),
        jobs=args.jobs,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.to_csv(out / "sweep.csv")
    (out / "sweep.json").write_text(json.dumps(result.meta, indent=2) + "\n")
    print(
        f"{args.quantity}: {result.values.size} cells, "
        f"{result.meta['degenerate_cells']} degenerate, wrote {out}"
    )
    return 0


def _cmd_equilibria(args) -> int:
    params = _resolve_params(args)
    system = derive(params)
    segment = equilibrium_segment(params)
    if args.samples < 2:
        raise ConfigError(f"--samples must be >= 2, got {args.samples}")
    s_values = np.linspace(-params.rho, params.rho, args.samples)
    samples = []
    for s_star in s_values:
        z = segment.point_at(float(s_star))
        entry = {"s_star": float(s_star), "y": float(z[0]), "x": float(z[1])}
        if args.basin:
            entry["basin_radius"] = estimate_basin_radius(params, float(s_star))
        samples.append(entry)
    payload = {
        "params": {k: getattr(params, k) for k in PARAM_FIELDS},
        "delta": system.delta,
        "alpha": system.alpha,
        "direction": [float(v) for v in segment.direction],
        "s_range": list(segment.s_range),
        "endpoint_lo": [float(v) for v in segment.endpoint_lo],
        "endpoint_hi": [float(v) for v in segment.endpoint_hi],
        "samples": samples,
    }
    _write_json(payload, args.out, "equilibria.json")
    return 0


# -- reproduce: preset-by-preset behavior checks ------------------------------


def _check(name: str, passed: bool, value) -> dict:
    return {"check": name, "passed": bool(passed), "value": value}


def _preset_checks(name: str, traj, summary: dict) -> list[dict]:
    checks = []
    rho = traj.scenario.params.rho
    if name == "band_wander_return":
        peak = float(np.max(np.abs(traj.s)))
        checks.append(_check("gap stays inside band", peak < rho, peak))
        final_x = abs(summary["final"]["x"])
        checks.append(_check("inflation returns exactly", final_x < 1e-6, final_x))
    elif name == "band_escape_shift":
        peak = float(np.max(np.abs(traj.s)))
        checks.append(_check("gap reaches band edge", peak >= rho - 1e-9, peak))
        final_x = abs(summary["final"]["x"])
        checks.append(_check("equilibrium shifted", final_x > 0.05, final_x))
    elif name == "edge_ratchet_inward":
        final_s = summary["final"]["s"]
        checks.append(_check("gap ratchets inward", abs(final_s) < 0.4, final_s))
        checks.append(_check("settles on segment", summary["converged"], summary["distance_to_segment"]))
    elif name == "shock_no_memory":
        final = max(abs(summary["final"]["y"]), abs(summary["final"]["x"]))
        checks.append(_check("returns to origin", final < 1e-8, final))
    elif name == "shock_permanent_shift":
        shift = abs(summary["post_shock"]["s"] - summary["pre_shock"]["s"])
        checks.append(_check("gap permanently shifted", shift > 0.1, shift))
        checks.append(_check("settles on segment", summary["converged"], summary["distance_to_segment"]))
    elif name in ("directional_shock_pos", "directional_shock_neg"):
        magnitude = traj.scenario.shocks[0].magnitude
        final_s = summary["final"]["s"]
        opposite = final_s * magnitude < 0
        checks.append(_check("gap sign opposes shock sign", opposite, final_s))
        checks.append(_check("displacement is large", abs(final_s) > 0.5, final_s))
    elif name == "large_shock_rebound":
        final_s = summary["final"]["s"]
        checks.append(_check("rebound undoes part of the drag", abs(final_s) < 0.5, final_s))
        checks.append(_check("settles on segment", summary["converged"], summary["distance_to_segment"]))
    elif name == "runaway_escape":
        checks.append(_check("run diverges", traj.diverged, summary["divergence_step"]))
    elif name == "runaway_control":
        checks.append(_check("run stays finite", not traj.diverged, summary["max_abs"]["y"]))
        dist = summary["distance_to_segment"]
        checks.append(_check("returns to segment", dist is not None and dist < 1e-6, dist))
    elif name in ("noise_baseline", "policy_tradeoff_base"):
        checks.append(_check("run stays finite", not traj.diverged, summary["max_abs"]["x"]))
        checks.append(_check("volatility is resolved", summary["sd_x"] > 0, summary["sd_x"]))
    elif name == "rule_limit_cycle":
        report = classify_attractor(traj, tol=1e-7, max_period=64, transient=100_000)
        checks.append(_check("attractor is periodic", report.kind == "periodic", report.kind))
        checks.append(_check("period is 50", report.period == 50, report.period))
        recurrence = report.recurrence_error
        checks.append(
            _check("recurrence below 1e-7",
                   recurrence is not None and recurrence < 1e-7, recurrence)
        )
    elif name == "rule_restless":
        report = classify_attractor(traj, tol=1e-7, max_period=64, transient=100_000)
        checks.append(
            _check("bounded but never settles", report.kind == "aperiodic_bounded", report.kind)
        )
    elif name == "mixed_thresholds":
        weights = np.array([a.weight for a in traj.scenario.agents])
        rhos = np.array([a.rho for a in traj.scenario.agents])
        worst = float(np.max(np.abs(traj.agent_p @ weights - traj.p)))
        checks.append(_check("aggregate is the weighted mean", worst < 1e-9, worst))
        band = float(np.max(np.abs(traj.agent_s) - rhos[None, :]))
        checks.append(_check("each gap respects its band", band <= 1e-12, band))
    else:
        checks.append(_check("run stays finite", not traj.diverged, summary["max_abs"]["x"]))
    return checks


def _cmd_reproduce(args) -> int:
    names = list_presets()
    if args.only:
        wanted = [n.strip() for n in args.only.split(",") if n.strip()]
        unknown = sorted(set(wanted) - set(names))
        if unknown:
            raise ConfigError(f"unknown presets: {', '.join(unknown)}")
        names = [n for n in names if n in wanted]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    all_checks: dict[str, list[dict]] = {}
    for name in names:
        scenario = load_preset(name)
        traj = simulate(scenario)
        directory = out / name
        directory.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(traj, directory / "trajectory.csv")
        write_summary_json(traj, directory / "summary.json")
        if traj.agent_p is not None:
            write_agents_csv(traj, directory / "agents.csv")
        summary = summarize(traj)
        checks = _preset_checks(name, traj, summary)
        all_checks[name] = checks
        status = "ok" if all(c["passed"] for c in checks) else "FAILED"
        print(f"{name}: {len(checks)} checks {status}")
    all_passed = all(c["passed"] for checks in all_checks.values() for c in checks)
    payload = {"presets": all_checks, "all_passed": all_passed}
    (out / "checks.json").write_text(json.dumps(payload, indent=2) + "\n")
    if not all_passed:
        failed = [
            f"{name}: {c['check']}"
            for name, checks in all_checks.items()
            for c in checks
            if not c["passed"]
        ]
        print("failed checks: " + "; ".join(failed), file=sys.stderr)
        return 3
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "stability": _cmd_stability,
    "sweep": _cmd_sweep,
    "equilibria": _cmd_equilibria,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _CONFIG_ERRORS as exc:
        print(f"stickyecon: configuration error: {exc}", file=sys.stderr)
        return 1
    except _NUMERIC_ERRORS as exc:
        print(f"stickyecon: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
