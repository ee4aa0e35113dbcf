"""Stability analysis: local and far-field linearizations, sweeps, attractors.

Inside the stickiness band the expectation is frozen, so the dynamics are
the "stuck-mode" linear map B; once the play is dragged the relevant map
is the far-field matrix A of the explicit form.  B is a contraction for
every admissible parameter set, which is what makes every point of the
equilibrium segment locally attracting; A contracts exactly when the
policy response to inflation exceeds one (given alpha > 0), which is what
separates globally stable dynamics from runaway-prone ones.

The Jury conditions for a monic quadratic ``l^2 + p l + q`` are
``P(1) > 0``, ``P(-1) > 0`` and ``|q| < 1``; all three strict means both
roots lie inside the unit circle.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DegenerateSegment, DegenerateSystem, InvalidParams, InvalidRegime
from .model import ModelParams, PARAM_FIELDS, equilibrium_segment, derive

if TYPE_CHECKING:
    from .sim.runner import Trajectory
    from .sim.scenario import Scenario

__all__ = [
    "CharPoly2",
    "JuryVerdict",
    "jury",
    "char_poly_A",
    "char_poly_B",
    "far_field_matrix",
    "stuck_mode_matrix",
    "spectral_radius",
    "StabilityReport",
    "stability_report",
    "SweepAxis",
    "SweepResult",
    "sweep",
    "TaylorLinearization",
    "sticky_taylor_linearization",
    "AttractorReport",
    "classify_attractor",
    "estimate_basin_radius",
]

JURY_MARGIN = 1e-9


@dataclass(frozen=True)
class CharPoly2:
    """Monic quadratic ``lambda^2 + p lambda + q``."""

    p: float
    q: float

    def evaluate(self, lam: float) -> float:
        return lam * lam + self.p * lam + self.q

    def roots(self) -> tuple[complex, complex]:
        disc = self.p * self.p - 4.0 * self.q
        if disc >= 0.0:
            root = disc ** 0.5
            return ((-self.p - root) / 2.0 + 0j, (-self.p + root) / 2.0 + 0j)
        root = (-disc) ** 0.5
        return (complex(-self.p, -root) / 2.0, complex(-self.p, root) / 2.0)

    def radius(self) -> float:
        return max(abs(r) for r in self.roots())


@dataclass(frozen=True)
class JuryVerdict:
    """The three Jury values and the verdict.

    ``stable`` requires every condition to clear its boundary by more
    than the margin.  ``marginal`` means the polynomial is not stable but
    sits within the margin band of the stable set (some root within the
    margin of the unit circle, none clearly outside); a clear violation
    of any condition is reported as plain unstable.
    """

    at_one: float
    at_minus_one: float
    abs_q: float
    stable: bool
    marginal: bool


def jury(poly: CharPoly2, margin: float = JURY_MARGIN) -> JuryVerdict:
    at_one = poly.evaluate(1.0)
    at_minus_one = poly.evaluate(-1.0)
    abs_q = abs(poly.q)
    stable = at_one > margin and at_minus_one > margin and abs_q < 1.0 - margin
    marginal = (not stable) and (
        at_one > -margin and at_minus_one > -margin and abs_q < 1.0 + margin
    )
    return JuryVerdict(at_one, at_minus_one, abs_q, stable, marginal)


def _delta(params: ModelParams) -> float:
    return (1.0 - params.b1) * (1.0 + params.a * params.c2) + params.a * params.b2 * (
        params.c1 - 1.0
    )


def far_field_matrix(params: ModelParams) -> np.ndarray:
    """The matrix A of the explicit form (defined whenever delta != 0)."""
    a, b1, b2, c1, c2 = params.a, params.b1, params.b2, params.c1, params.c2
    delta = _delta(params)
    if delta == 0.0:
        raise DegenerateSystem("delta = 0: far-field map undefined")
    return np.array(
        [[1.0 - b1, a * (1.0 - b1) * (1.0 - c1)], [b2, (1.0 - b1) * (1.0 + a * c2)]]
    ) / delta


def stuck_mode_matrix(params: ModelParams) -> np.ndarray:
    """Linear map that applies while the expectation stays frozen."""
    a, b1, b2, c1, c2 = params.a, params.b1, params.b2, params.c1, params.c2
    den = 1.0 + a * (b2 * c1 + c2)
    return np.array(
        [[1.0, -a * c1 * (1.0 - b1)], [b2, (1.0 - b1) * (1.0 + a * c2)]]
    ) / den


def char_poly_A(params: ModelParams) -> CharPoly2:
    delta = _delta(params)
    if delta == 0.0:
        raise DegenerateSystem("delta = 0: far-field map undefined")
    one_b1 = 1.0 - params.b1
    return CharPoly2(
        p=-one_b1 * (2.0 + params.a * params.c2) / delta,
        q=one_b1 / delta,
    )


def char_poly_B(params: ModelParams) -> CharPoly2:
    a, b1, c2 = params.a, params.b1, params.c2
    den = 1.0 + a * (params.b2 * params.c1 + c2)
    return CharPoly2(
        p=-(1.0 + (1.0 - b1) * (1.0 + a * c2)) / den,
        q=(1.0 - b1) / den,
    )


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


@dataclass(frozen=True)
class StabilityReport:
    params: ModelParams
    delta: float
    alpha: float | None
    poly_a: CharPoly2 | None
    poly_b: CharPoly2
    jury_a: JuryVerdict | None
    jury_b: JuryVerdict
    radius_a: float | None
    radius_b: float
    segment_span: dict | None
    regime: str

    def to_dict(self) -> dict:
        def poly_dict(poly):
            return None if poly is None else {"p": poly.p, "q": poly.q}

        def jury_dict(verdict):
            if verdict is None:
                return None
            return {
                "at_one": verdict.at_one,
                "at_minus_one": verdict.at_minus_one,
                "abs_q": verdict.abs_q,
                "stable": verdict.stable,
                "marginal": verdict.marginal,
            }

        return {
            "params": {k: getattr(self.params, k) for k in PARAM_FIELDS},
            "delta": self.delta,
            "alpha": self.alpha,
            "char_poly_far_field": poly_dict(self.poly_a),
            "char_poly_stuck_mode": poly_dict(self.poly_b),
            "jury_far_field": jury_dict(self.jury_a),
            "jury_stuck_mode": jury_dict(self.jury_b),
            "spectral_radius_far_field": self.radius_a,
            "spectral_radius_stuck_mode": self.radius_b,
            "equilibrium_segment": self.segment_span,
            "regime": self.regime,
        }


def stability_report(params: ModelParams) -> StabilityReport:
    """Full local/far-field stability picture for one parameter set."""
    delta = _delta(params)
    beta = params.b1 * (1.0 + params.a * params.c2) + params.a * params.b2
    alpha = delta / beta if beta != 0.0 else None
    poly_b = char_poly_B(params)
    verdict_b = jury(poly_b)
    try:
        poly_a = char_poly_A(params)
        verdict_a = jury(poly_a)
        radius_a = poly_a.radius()
    except DegenerateSystem:
        poly_a = None
        verdict_a = None
        radius_a = None
    try:
        segment = equilibrium_segment(params)
        segment_span = {
            "direction": [float(v) for v in segment.direction],
            "s_range": list(segment.s_range),
            "endpoint_lo": [float(v) for v in segment.endpoint_lo],
            "endpoint_hi": [float(v) for v in segment.endpoint_hi],
        }
    except (DegenerateSegment, DegenerateSystem):
        segment_span = None
    if verdict_a is None:
        regime = "far_field_undefined"
    elif verdict_a.marginal:
        regime = "far_field_marginal"
    elif verdict_a.stable:
        regime = "far_field_contractive"
    else:
        regime = "far_field_expanding"
    return StabilityReport(
        params=params,
        delta=delta,
        alpha=alpha,
        poly_a=poly_a,
        poly_b=poly_b,
        jury_a=verdict_a,
        jury_b=verdict_b,
        radius_a=radius_a,
        radius_b=poly_b.radius(),
        segment_span=segment_span,
        regime=regime,
    )


# -- parameter sweeps -------------------------------------------------------

SWEEP_QUANTITIES = ("radius_A", "radius_B", "sd_x", "sd_y")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        valid = PARAM_FIELDS + ("sigma",)
        if self.name not in valid:
            raise InvalidParams(f"sweep axis must be one of {valid}, got {self.name!r}")
        if not self.values:
            raise InvalidParams(f"sweep axis {self.name} has no values")


@dataclass
class SweepResult:
    quantity: str
    axes: tuple[SweepAxis, ...]
    values: np.ndarray
    meta: dict

    def to_csv(self, path: str | Path) -> None:
        """Rows axis1,axis2,value; axis2 is empty for one-dimensional sweeps."""
        lines = ["axis1,axis2,value"]
        if len(self.axes) == 1:
            for v1, val in zip(self.axes[0].values, self.values):
                lines.append(f"{v1!r},,{_nan_fmt(val)}")
        else:
            for i, v1 in enumerate(self.axes[0].values):
                for j, v2 in enumerate(self.axes[1].values):
                    lines.append(f"{v1!r},{v2!r},{_nan_fmt(self.values[i, j])}")
        Path(path).write_text("\n".join(lines) + "\n")


def _nan_fmt(value: float) -> str:
    return "nan" if not np.isfinite(value) else repr(float(value))


def _cell_params(base: ModelParams, names: Sequence[str], values: Sequence[float]):
    updates = {n: v for n, v in zip(names, values) if n != "sigma"}
    sigma = next((v for n, v in zip(names, values) if n == "sigma"), None)
    return replace(base, **updates) if updates else base, sigma


def _sweep_cell(task) -> float:
    quantity, base_params, scenario, seeds, names, values = task
    try:
        params, sigma = _cell_params(base_params, names, values)
    except InvalidParams:
        return float("nan")
    if quantity in ("radius_A", "radius_B"):
        try:
            poly = char_poly_A(params) if quantity == "radius_A" else char_poly_B(params)
            return poly.radius()
        except DegenerateSystem:
            return float("nan")
    # sd_x / sd_y: seed-averaged volatility of a simulated scenario
    from .sim.runner import simulate, volatility_stats

    kwargs = {"params": params}
    if sigma is not None:
        kwargs["sigma"] = sigma
    cell_scenario = replace(scenario, **kwargs)
    acc = 0.0
    for seed in seeds:
        traj = simulate(cell_scenario, seed=seed)
        if traj.diverged or traj.steps_recorded < 2:
            return float("nan")
        stats = volatility_stats(traj)
        acc += stats.sd_x if quantity == "sd_x" else stats.sd_y
    return acc / len(seeds)


def sweep(
    quantity: str,
    axes: Sequence[SweepAxis],
    *,
    params: ModelParams | None = None,
    scenario: "Scenario | None" = None,
    seeds: Sequence[int] = (0,),
    jobs: int = 1,
) -> SweepResult:
    """Evaluate a quantity over a 1D or 2D parameter grid.

    ``radius_A`` and ``radius_B`` need only ``params``; ``sd_x``/``sd_y``
    need a ``scenario`` template whose parameters are overridden per cell
    and which is run once per seed.  Degenerate or divergent cells come
    back as NaN.  With ``jobs > 1`` cells are evaluated in worker
    processes; the grid order (and hence the output) is unchanged.
    """
    if quantity not in SWEEP_QUANTITIES:
        raise InvalidParams(f"quantity must be one of {SWEEP_QUANTITIES}, got {quantity!r}")
    axes = tuple(axes)
    if len(axes) not in (1, 2):
        raise InvalidParams(f"sweep needs 1 or 2 axes, got {len(axes)}")
    if quantity in ("sd_x", "sd_y"):
        if scenario is None:
            raise InvalidParams(f"{quantity} sweep needs a scenario template")
        base_params = scenario.params
    else:
        if params is None and scenario is None:
            raise InvalidParams(f"{quantity} sweep needs params")
        base_params = params if params is not None else scenario.params
    names = [ax.name for ax in axes]
    if len(axes) == 1:
        grid = [(v,) for v in axes[0].values]
        shape: tuple[int, ...] = (len(axes[0].values),)
    else:
        grid = [(v1, v2) for v1 in axes[0].values for v2 in axes[1].values]
        shape = (len(axes[0].values), len(axes[1].values))
    tasks = [(quantity, base_params, scenario, tuple(seeds), names, values) for values in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(_sweep_cell, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        flat = [_sweep_cell(task) for task in tasks]
    values = np.array(flat).reshape(shape)
    meta = {
        "quantity": quantity,
        "axes": [{"name": ax.name, "values": list(ax.values)} for ax in axes],
        "seeds": list(seeds),
        "degenerate_cells": int(np.count_nonzero(~np.isfinite(values))),
    }
    return SweepResult(quantity=quantity, axes=axes, values=values, meta=meta)


# -- sticky-Taylor linearization -------------------------------------------


@dataclass(frozen=True)
class TaylorLinearization:
    """Stuck-rule linear map of the sticky-Taylor model and its verdict.

    ``det > 1`` means the map expands areas, so every interior equilibrium
    is unstable and bounded trajectories cannot settle on one.
    """

    matrix: np.ndarray
    det: float
    poly: CharPoly2
    expanding: bool
    marginal: bool


def sticky_taylor_linearization(params: ModelParams) -> TaylorLinearization:
    a, b1, b2 = params.a, params.b1, params.b2
    slack = 1.0 - b1 - a * b2
    if slack <= 0.0:
        raise InvalidRegime(
            f"sticky Taylor regime requires 1 - b1 - a*b2 > 0, got {slack:g}"
        )
    matrix = np.array([[1.0 - b1, a * (1.0 - b1)], [b2, 1.0 - b1]]) / slack
    det = (1.0 - b1) / slack
    trace = 2.0 * (1.0 - b1) / slack
    poly = CharPoly2(p=-trace, q=det)
    return TaylorLinearization(
        matrix=matrix,
        det=det,
        poly=poly,
        expanding=det > 1.0 + JURY_MARGIN,
        marginal=abs(det - 1.0) <= JURY_MARGIN,
    )


# -- attractor classification ----------------------------------------------


@dataclass(frozen=True)
class AttractorReport:
    kind: str  # fixed_point | periodic | aperiodic_bounded | divergent
    period: int | None
    recurrence_error: float | None
    bbox: dict
    tol: float
    transient: int
    max_period: int


def classify_attractor(
    traj: "Trajectory",
    tol: float = 1e-7,
    max_period: int = 256,
    transient: int = 10_000,
) -> AttractorReport:
    """Classify the long-run behavior of a recorded trajectory.

    Discards ``transient`` rows, then scans periods 1..max_period in
    ascending order over a verification window at the end of the run, so
    a reported period is minimal by construction (period 1 is reported as
    a fixed point).  Bounded runs with no recurring period are
    ``aperiodic_bounded``; non-finite or blow-up runs are ``divergent``.
    """
    window = max(2 * max_period, 64)
    y, x, s = traj.y, traj.x, traj.s
    rows = len(y)
    bbox = {
        "y_min": float(np.min(y)),
        "y_max": float(np.max(y)),
        "x_min": float(np.min(x)),
        "x_max": float(np.max(x)),
    }

    def report(kind, period=None, err=None):
        return AttractorReport(
            kind=kind,
            period=period,
            recurrence_error=err,
            bbox=bbox,
            tol=tol,
            transient=transient,
            max_period=max_period,
        )

    if traj.diverged or not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
        return report("divergent")
    if rows <= transient + window + max_period:
        raise ValueError(
            f"trajectory has {rows} rows; classification needs more than "
            f"{transient + window + max_period} (transient + window + max_period)"
        )
    tail_y, tail_x, tail_s = y[transient:], x[transient:], s[transient:]
    for period in range(1, max_period + 1):
        err = 0.0
        for series in (tail_y, tail_x, tail_s):
            a_seg = series[-window:]
            b_seg = series[-window - period : -period]
            err = max(err, float(np.max(np.abs(a_seg - b_seg))))
            if err >= tol:
                break
        if err < tol:
            if period == 1:
                return report("fixed_point", None, err)
            return report("periodic", period, err)
    blowup = traj.scenario.limits.blowup
    if max(abs(bbox["y_min"]), abs(bbox["y_max"])) > blowup or max(
        abs(bbox["x_min"]), abs(bbox["x_max"])
    ) > blowup:
        return report("divergent")
    return report("aperiodic_bounded")


# -- basin probe ------------------------------------------------------------


def estimate_basin_radius(
    params: ModelParams,
    s_star: float,
    *,
    direction: Sequence[float] | None = None,
    r_max: float = 20.0,
    steps: int = 4000,
    bisections: int = 18,
    same_s_tol: float = 5e-3,
) -> float:
    """Sampling probe for the attraction basin of one segment equilibrium.

    Displaces (y, x) by a radius along +/- the probe direction (default:
    perpendicular to the segment) while the remembered expectation stays
    where it was, so the gap jumps with the displacement and the play is
    dragged immediately if the jump leaves the band.  Bisects for the
    largest radius at which both signs relax back to an equilibrium whose
    gap is within ``same_s_tol`` of ``s_star``; as long as the play is
    never dragged the stuck-mode map restores the gap exactly, so the
    tolerance separates "same equilibrium" from "moved along the
    segment".  A sampling estimate only: it certifies nothing.
    """
    from .hysteresis import PlayState
    from .sim.steppers import StickyStepper

    segment = equilibrium_segment(params)
    if abs(s_star) > params.rho:
        raise InvalidParams(f"s_star {s_star} outside [-{params.rho}, {params.rho}]")
    z_star = segment.point_at(s_star)
    p_star = float(z_star[1]) - s_star
    if direction is None:
        perp = np.array([segment.direction[1], -segment.direction[0]])
    else:
        perp = np.asarray(direction, dtype=float)
    norm = float(np.hypot(*perp))
    if norm == 0.0:
        raise InvalidParams("probe direction must be nonzero")
    perp = perp / norm
    system = derive(params)

    def returns_home(radius: float) -> bool:
        for sign in (1.0, -1.0):
            z0 = z_star + sign * radius * perp
            play = PlayState(params.rho, output=p_star)
            play.step(float(z0[1]))
            s0 = float(z0[1]) - play.output
            stepper = StickyStepper(system, float(z0[0]), float(z0[1]), s0)
            s_final = s0
            for _ in range(steps):
                out = stepper.step(0.0, 0.0)
                s_final = out[3]
            if segment.distance_to((stepper.y, stepper.x)) > 1e-6:
                return False
            if abs(s_final - s_star) > same_s_tol:
                return False
        return True

    if not returns_home(0.0):
        return 0.0
    if returns_home(r_max):
        return r_max
    lo, hi = 0.0, r_max
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if returns_home(mid):
            lo = mid
        else:
            hi = mid
    return lo
