"""Acceptance criteria, one test per criterion with pinned tolerances.

These are the behavioral contracts the package exists to satisfy; the
terminal summary hook in conftest prints one PASS/FAIL line for each.
Every tolerance is stated inline next to the assertion it guards.  Each
criterion is self-contained and uses the implicit-branch oracles, not
the explicit steppers, wherever a second route exists.
"""

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from stickyecon import (
    ModelParams,
    PiComponent,
    PiOperator,
    PlayState,
    StopState,
    SweepAxis,
    char_poly_A,
    char_poly_B,
    classify_attractor,
    derive,
    equilibrium_segment,
    jury,
    pi_invert,
    sticky_taylor_linearization,
    sweep,
)
from stickyecon.cli import main as cli_main
from stickyecon.sim import (
    MultiAgentStepper,
    StickyStepper,
    StickyTaylorStepper,
    load_preset,
    simulate,
    step_implicit_oracle,
    step_multi_implicit_oracle,
    step_taylor_implicit_oracle,
    summarize,
)

from conftest import BASE, RUNAWAY, draw_valid_params

# Frozen base-calibration constants.  The radii are closed-form
# (sqrt(0.5/0.555) and the dominant root of the stuck-mode quadratic);
# the volatility rows are seed-averaged sample statistics over seeds
# 0..19 and are exactly reproducible from the preset definitions.
RADIUS_A_BASE = 0.9491579957524989
RADIUS_B_BASE = 0.8813144363882977
SD_X_BY_RHO = (3.2083111962845963, 2.684539949614983,
               2.1404891332361435, 1.3608148396774706)
SD_X_BY_C2 = (2.8757972086120533, 2.252857872468359, 2.0793121697130945,
              2.0556846973232283, 2.0901447107900903, 2.1533144551387613,
              2.271906192786142, 2.475486864023401)


def _random_invertible_operator(rng):
    n = int(rng.integers(0, 5))
    alpha = float(rng.uniform(0.3, 2.0))
    thresholds = np.sort(rng.uniform(0.1, 3.0, size=n)) + 1e-3 * np.arange(n)
    weights = rng.uniform(0.0, 1.5, size=n)  # nonnegative: slopes stay >= alpha
    return PiOperator(
        alpha,
        [PiComponent(float(w), StopState(float(t))) for w, t in zip(weights, thresholds)],
    )


def test_criterion_01_operator_laws():
    rng = np.random.default_rng(101)

    # play + stop recovers the input bitwise on the dyadic grid k / 2^20
    thresholds = (0.25, 0.5, 0.75, 1.0, 1.5)
    for i in range(1000):
        threshold = thresholds[i % len(thresholds)]
        play = PlayState(threshold)
        stop = StopState(threshold)
        for k in rng.integers(-(2**26), 2**26, size=40):
            x = float(k) / 2**20
            assert play.step(x) + stop.step(x) == x  # exact, no tolerance

    # a stuck play is bitwise idempotent under repeated identical inputs
    play = PlayState(0.7, output=0.1)
    x = 0.1 + 0.3 * math.pi
    first = play.step(x)
    for _ in range(100):
        assert play.step(x) == first

    # rate independence: refining a monotone segment cannot change the output
    for _ in range(200):
        x0, x1 = sorted(rng.uniform(-5, 5, size=2))
        threshold = float(rng.uniform(0.1, 2.0))
        direct = PlayState(threshold)
        direct.step(x0)
        refined = PlayState(threshold)
        refined.step(x0)
        direct_out = direct.step(x1)
        for u in np.linspace(x0, x1, 17):
            refined_out = refined.step(float(u))
        assert refined_out == direct_out  # exact

    # Prandtl-Ishlinskii inversion: inverse(forward(x)) == x to 1e-12
    worst = 0.0
    for _ in range(1000):
        op = _random_invertible_operator(rng)
        for x in rng.normal(0, 1.5, size=int(rng.integers(0, 20))):
            op.step(float(x))  # arbitrary interior starting state
        inv = pi_invert(op)
        fwd = op.copy()
        for x in rng.normal(0, 1.5, size=25):
            y = fwd.step(float(x))
            worst = max(worst, abs(inv.step(y) - float(x)))
    assert worst < 1e-12


def test_criterion_02_explicit_matches_implicit():
    # base calibration, one long noisy run: agreement to 1e-10 throughout
    rng = np.random.default_rng(202)
    stepper = StickyStepper(derive(BASE), 0.0, 0.0)
    y, x, p = 0.0, 0.0, 0.0
    worst = 0.0
    for _ in range(10_000):
        eps, eta = rng.normal(0, 0.5, size=2)
        ys, xs, ps, *_ = stepper.step(eps, eta)
        y, x, p = step_implicit_oracle(BASE, y, x, p, eps, eta)
        scale = max(1.0, abs(y), abs(x))
        worst = max(worst, abs(ys - y) / scale, abs(xs - x) / scale, abs(ps - p) / scale)
    assert worst < 1e-10

    # 100 random admissible parameter sets, 200 steps each
    for _ in range(100):
        params = draw_valid_params(rng)
        stepper = StickyStepper(derive(params), 0.0, 0.0)
        y, x, p = 0.0, 0.0, 0.0
        for _ in range(200):
            eps, eta = rng.normal(0, 0.3, size=2)
            ys, xs, ps, *_ = stepper.step(eps, eta)
            y, x, p = step_implicit_oracle(params, y, x, p, eps, eta)
            scale = max(1.0, abs(y), abs(x))
            assert abs(ys - y) < 1e-10 * scale, params
            assert abs(xs - x) < 1e-10 * scale, params

    # two heterogeneous agents against the 3^n-branch solver
    agents = [(0.25, 0.4), (1.0, 0.6)]
    stepper = MultiAgentStepper(derive(BASE), agents, 0.0, 0.0)
    y, x, p = 0.0, 0.0, [0.0, 0.0]
    worst = 0.0
    for _ in range(2000):
        eps, eta = rng.normal(0, 0.4, size=2)
        rec = stepper.step(eps, eta)
        y, x, p = step_multi_implicit_oracle(BASE, agents, y, x, p, eps, eta)
        scale = max(1.0, abs(y), abs(x))
        worst = max(worst, abs(rec[0] - y) / scale, abs(rec[1] - x) / scale)
        worst = max(worst, max(abs(u - v) for u, v in zip(rec[6], p)) / scale)
    assert worst < 1e-9

    # sticky Taylor rule against its own implicit solver
    stepper = StickyTaylorStepper(BASE, 1.0, 0.2, 0.1)
    y, x = 0.2, 0.1
    r = BASE.c1 * x + BASE.c2 * y
    worst = 0.0
    for _ in range(3000):
        eps, eta = rng.normal(0, 0.5, size=2)
        ys, xs, _, _, rs, _ = stepper.step(eps, eta)
        y, x, r = step_taylor_implicit_oracle(BASE, 1.0, y, x, r, eps, eta)
        scale = max(1.0, abs(y), abs(x), abs(r))
        worst = max(worst, abs(ys - y) / scale, abs(xs - x) / scale, abs(rs - r) / scale)
    assert worst < 1e-10


def test_criterion_03_equilibrium_segment():
    # frozen endpoints, base calibration: gap +/- 0.5 maps to (+/-5, -/+6)
    segment = equilibrium_segment(BASE)
    np.testing.assert_allclose(segment.endpoint_hi, [5.0, -6.0], atol=1e-12)
    np.testing.assert_allclose(segment.endpoint_lo, [-5.0, 6.0], atol=1e-12)
    # weak-policy calibration: output and inflation co-move (c1 < 1)
    segment_r = equilibrium_segment(RUNAWAY)
    np.testing.assert_allclose(segment_r.endpoint_hi, [10.0, 11.0], atol=1e-12)
    np.testing.assert_allclose(segment_r.endpoint_lo, [-10.0, -11.0], atol=1e-12)

    # every sampled segment point is a fixed point of the implicit solver
    for params, segment in ((BASE, segment), (RUNAWAY, segment_r)):
        for s_star in np.linspace(-params.rho, params.rho, 9):
            y0, x0 = (float(v) for v in segment.point_at(float(s_star)))
            p0 = x0 - float(s_star)
            y1, x1, p1 = step_implicit_oracle(params, y0, x0, p0)
            scale = max(1.0, abs(y0), abs(x0))
            assert abs(y1 - y0) < 1e-12 * scale
            assert abs(x1 - x0) < 1e-12 * scale
            assert p1 == p0  # the play must stay stuck exactly


def test_criterion_04_stability_tests():
    rng = np.random.default_rng(404)

    # the stuck-mode map is a contraction for every positive draw
    for _ in range(10_000):
        params = ModelParams(
            a=rng.uniform(0.01, 2.0),
            b1=rng.uniform(0.01, 0.99),
            b2=rng.uniform(0.01, 2.0),
            c1=rng.uniform(0.01, 3.0),
            c2=rng.uniform(0.01, 2.0),
            rho=0.5,
        )
        poly = char_poly_B(params)
        assert jury(poly).stable, params
        assert poly.radius() < 1.0, params

    # the far-field map contracts exactly when policy leans against
    # inflation more than one for one
    checked = 0
    while checked < 1000:
        params = draw_valid_params(rng)
        if abs(params.c1 - 1.0) <= 0.01:
            continue
        assert jury(char_poly_A(params)).stable == (params.c1 > 1.0), params
        checked += 1

    # frozen radii at the base calibration, and their ordering
    radius_a = char_poly_A(BASE).radius()
    radius_b = char_poly_B(BASE).radius()
    assert radius_a == pytest.approx(RADIUS_A_BASE, abs=1e-13)
    assert radius_b == pytest.approx(RADIUS_B_BASE, abs=1e-13)
    assert radius_b < radius_a


def test_criterion_05_noise_free_convergence():
    segment = equilibrium_segment(BASE)
    system = derive(BASE)
    rng = np.random.default_rng(505)
    for _ in range(100):
        y0, x0 = rng.uniform(-8.0, 8.0, size=2)
        s0 = float(rng.uniform(-BASE.rho, BASE.rho))
        stepper = StickyStepper(system, float(y0), float(x0), s0)
        s_final = s0
        for _ in range(5000):
            s_final = stepper.step()[3]
        assert segment.distance_to((stepper.y, stepper.x)) < 1e-8, (y0, x0, s0)
        assert abs(s_final) <= BASE.rho + 1e-12


def test_criterion_06_runaway_escape():
    escape = simulate(load_preset("runaway_escape"))
    assert escape.diverged
    assert escape.divergence_step == 213  # frozen: seeded run, fixed shock
    assert escape.steps_recorded < escape.scenario.horizon

    control = simulate(load_preset("runaway_control"))
    assert not control.diverged
    summary = summarize(control)
    assert summary["distance_to_segment"] < 1e-6
    assert summary["converged"] is True


def test_criterion_07_stickiness_lowers_volatility():
    template = load_preset("noise_baseline")
    result = sweep(
        "sd_x",
        [SweepAxis("rho", (0.0, 0.25, 0.5, 1.0))],
        scenario=template,
        seeds=tuple(range(20)),
    )
    values = [float(v) for v in result.values]
    for wide, wider in zip(values, values[1:]):
        assert wider < wide  # strictly decreasing in the band width
    np.testing.assert_allclose(values, SD_X_BY_RHO, rtol=1e-9)


def test_criterion_08_interior_minima():
    # far-field radius over the demand sensitivity dips at a = 0.8, where
    # the eigenvalues collide; the minimum value is 5/6 (double root, so
    # the computed radius carries sqrt-amplified rounding of order 1e-8)
    grid_a = (0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0)
    radii = [char_poly_A(replace(BASE, a=v)).radius() for v in grid_a]
    k = int(np.argmin(radii))
    assert grid_a[k] == 0.8
    assert radii[k] == pytest.approx(5.0 / 6.0, abs=1e-7)
    assert radii[0] > radii[k] + 0.05
    assert radii[-1] > radii[k] + 0.05

    # output-noise pass-through: with demand shocks dominating, sd_x over
    # c2 has a strictly interior minimum (too-passive and too-active
    # output responses both amplify inflation volatility)
    template = load_preset("policy_tradeoff_base")
    grid_c2 = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 2.0)
    result = sweep(
        "sd_x", [SweepAxis("c2", grid_c2)], scenario=template, seeds=tuple(range(20))
    )
    values = [float(v) for v in result.values]
    k = int(np.argmin(values))
    assert 0 < k < len(grid_c2) - 1
    assert 0.6 <= grid_c2[k] <= 1.0
    assert values[0] > values[k] + 0.3
    assert values[-1] > values[k] + 0.3
    np.testing.assert_allclose(values, SD_X_BY_C2, rtol=1e-9)


def test_criterion_09_sticky_taylor():
    sigma = 1.0
    s_star = 0.4
    x_star = s_star / (BASE.c1 - 1.0)
    r_star = BASE.c1 * x_star - s_star

    # the implicit solver holds the interior equilibrium bitwise
    y, x, r = 0.0, x_star, r_star
    for _ in range(50):
        y, x, r = step_taylor_implicit_oracle(BASE, sigma, y, x, r)
    assert (y, x, r) == (0.0, x_star, r_star)

    # the explicit stepper holds it to 1e-12 over a short horizon (the
    # equilibrium is unstable, so rounding grows exponentially later)
    stepper = StickyTaylorStepper(BASE, sigma, 0.0, x_star, r_star)
    for _ in range(30):
        out = stepper.step()
        assert abs(out[0]) < 1e-12
        assert abs(out[1] - x_star) < 1e-12

    # the stuck-rule map expands areas: no interior equilibrium attracts
    lin = sticky_taylor_linearization(BASE)
    assert lin.det == pytest.approx(1.0204081632653061, abs=1e-14)
    assert lin.det > 1.0 and lin.expanding

    # a 1e-8 perturbation grows past 1e-3 within 2000 steps
    stepper = StickyTaylorStepper(BASE, sigma, 1e-8, x_star, r_star)
    escaped = False
    for _ in range(2000):
        out = stepper.step()
        if abs(out[1] - x_star) > 1e-3:
            escaped = True
            break
    assert escaped

    # stronger policy locks the bounded run onto an exact limit cycle
    cycle = simulate(load_preset("rule_limit_cycle"))
    report = classify_attractor(cycle, tol=1e-7, max_period=64, transient=100_000)
    assert report.kind == "periodic"
    assert report.period == 50
    assert report.recurrence_error < 1e-7

    # the base calibration stays bounded but never settles or repeats
    restless = simulate(load_preset("rule_restless"))
    report = classify_attractor(restless, tol=1e-7, max_period=64, transient=100_000)
    assert report.kind == "aperiodic_bounded"


def test_criterion_10_reproduce_byte_identical(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert cli_main(["reproduce", "--out", str(first)]) == 0
    assert cli_main(["reproduce", "--out", str(second)]) == 0

    checks = json.loads((first / "checks.json").read_text())
    assert checks["all_passed"] is True
    assert len(checks["presets"]) == 15

    files_first = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
    files_second = sorted(p.relative_to(second) for p in second.rglob("*") if p.is_file())
    assert files_first == files_second
    assert len(files_first) > 30  # trajectory + summary per preset, plus checks
    for rel in files_first:
        assert (first / rel).read_bytes() == (second / rel).read_bytes(), rel
