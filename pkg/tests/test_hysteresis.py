"""Play/stop operator laws and exact Prandtl-Ishlinskii inversion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stickyecon import (
    NonInvertible,
    PiComponent,
    PiOperator,
    PlayState,
    StopState,
    pi_invert,
    saturate,
)

# Inputs on the dyadic grid k / 2^20: increments and clamps stay exactly
# representable, so play + stop == input holds bitwise along any history.
_DYADIC = st.integers(min_value=-(2**26), max_value=2**26).map(lambda k: k / 2**20)
_DYADIC_POS = st.integers(min_value=1, max_value=2**26).map(lambda k: k / 2**20)

_GENERIC = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


def test_saturate_examples():
    assert saturate(0.3, 1.0) == 0.3
    assert saturate(1.7, 1.0) == 1.0
    assert saturate(-2.0, 1.0) == -1.0
    assert saturate(1.0, 1.0) == 1.0
    assert saturate(-1.0, 1.0) == -1.0
    assert saturate(5.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        saturate(0.0, -0.1)


def test_play_drag_and_stick():
    play = PlayState(threshold=1.0)
    assert play.step(2.0) == 1.0
    assert play.step(1.5) == 1.0
    assert play.step(0.5) == 1.0
    assert play.step(-0.5) == 0.5
    assert play.step(3.0) == 2.0


def test_play_zero_threshold_is_identity():
    play = PlayState(threshold=0.0)
    for x in (0.3, -1.7, 0.3, 12.0):
        assert play.step(x) == x


def test_play_stuck_repeats_are_bitwise_idempotent():
    play = PlayState(threshold=0.7, output=0.1)
    x = 0.1 + 0.3 * math.pi  # inside the band, not exactly representable
    first = play.step(x)
    for _ in range(50):
        assert play.step(x) == first


def test_stop_validates_initial_value():
    with pytest.raises(ValueError):
        StopState(threshold=0.5, value=0.6)
    with pytest.raises(ValueError):
        StopState(threshold=-1.0)
    StopState(threshold=0.5, value=0.5)  # boundary is allowed


def test_negative_play_threshold_rejected():
    with pytest.raises(ValueError):
        PlayState(threshold=-0.5)


@settings(max_examples=200)
@given(st.lists(_DYADIC, min_size=1, max_size=60), _DYADIC_POS)
def test_play_plus_stop_is_input_bitwise_on_dyadic_grid(xs, threshold):
    play = PlayState(threshold, output=0.0)
    stop = StopState(threshold, value=0.0, last_input=0.0)
    for x in xs:
        p = play.step(x)
        s = stop.step(x)
        assert p + s == x
        assert abs(s) <= threshold


@settings(max_examples=200)
@given(
    st.lists(_GENERIC, min_size=1, max_size=60),
    st.floats(min_value=0.01, max_value=10, allow_nan=False),
)
def test_play_plus_stop_is_input_for_generic_floats(xs, threshold):
    play = PlayState(threshold, output=0.0)
    stop = StopState(threshold, value=0.0, last_input=0.0)
    for x in xs:
        p = play.step(x)
        s = stop.step(x)
        assert abs(p + s - x) < 1e-12
        assert abs(s) <= threshold
        # The drag branch computes p = x -/+ threshold, which rounds at the
        # magnitude of x, so the band holds up to a relative slack.
        assert abs(x - p) <= threshold + 1e-12 * max(1.0, abs(x))


@settings(max_examples=150)
@given(
    st.lists(_GENERIC, min_size=2, max_size=20),
    st.floats(min_value=0.01, max_value=5, allow_nan=False),
    st.integers(min_value=2, max_value=7),
)
def test_rate_independence_under_monotone_refinement(waypoints, threshold, pieces):
    """Splitting each monotone leg into sub-steps cannot change the outcome."""
    coarse = PlayState(threshold)
    fine = PlayState(threshold)
    prev = 0.0
    for x in waypoints:
        coarse.step(x)
        for k in range(1, pieces + 1):
            fine.step(prev + (x - prev) * k / pieces)
        prev = x
        assert fine.output == pytest.approx(coarse.output, abs=1e-12)


def test_pi_operator_threshold_ordering_enforced():
    comps = [
        PiComponent(1.0, StopState(0.5)),
        PiComponent(1.0, StopState(0.5)),
    ]
    with pytest.raises(ValueError):
        PiOperator(1.0, comps)
    with pytest.raises(ValueError):
        PiOperator(-0.1, [])


def test_pi_step_is_weighted_sum():
    op = PiOperator(
        0.5,
        [
            PiComponent(2.0, StopState(1.0)),
            PiComponent(-0.5, StopState(3.0)),
        ],
    )
    # x = 2: stops clamp at 1.0 and pass 2.0
    assert op.step(2.0) == pytest.approx(0.5 * 2.0 + 2.0 * 1.0 - 0.5 * 2.0)


def test_primary_response_two_branch_slopes():
    alpha, rho = 0.8, 1.5
    op = PiOperator(alpha, [PiComponent(1.0, StopState(rho))])
    curve = op.primary_response()
    assert curve.slopes() == [pytest.approx(alpha + 1.0), pytest.approx(alpha)]
    assert curve.breakpoints == ((rho, pytest.approx((alpha + 1.0) * rho)),)
    assert curve.evaluate(rho / 2) == pytest.approx((alpha + 1.0) * rho / 2)
    assert curve.evaluate(2 * rho) == pytest.approx((alpha + 1.0) * rho + alpha * rho)
    # odd extension
    assert curve.evaluate(-2 * rho) == -curve.evaluate(2 * rho)
    assert curve.is_invertible()
    inv = curve.inverse()
    assert inv.breakpoints == ((pytest.approx((alpha + 1.0) * rho), rho),)
    assert inv.terminal_slope == pytest.approx(1.0 / alpha)


def test_single_stop_inverse_fields():
    """The one-component inverse in closed form."""
    alpha, rho = 0.8, 1.5
    op = PiOperator(alpha, [PiComponent(1.0, StopState(rho))])
    inv = pi_invert(op)
    assert inv.linear_weight == pytest.approx(1.0 / alpha)
    assert len(inv.components) == 1
    comp = inv.components[0]
    assert comp.threshold == pytest.approx((1.0 + alpha) * rho)
    assert comp.weight == pytest.approx(-1.0 / (alpha * (1.0 + alpha)))


def _random_invertible_operator(rng):
    n = int(rng.integers(0, 5))
    alpha = float(rng.uniform(0.2, 2.0))
    thresholds = np.sort(rng.uniform(0.1, 3.0, size=n))
    while n > 1 and np.min(np.diff(thresholds)) < 1e-3:
        thresholds = np.sort(rng.uniform(0.1, 3.0, size=n))
    weights = rng.uniform(-0.3, 1.5, size=n)
    comps = [PiComponent(float(w), StopState(float(t))) for w, t in zip(weights, thresholds)]
    op = PiOperator(alpha, comps)
    if any(k <= 1e-3 for k in op._kappas()):
        return _random_invertible_operator(rng)
    return op


def test_inverse_composition_recovers_inputs_mid_trajectory():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(300):
        op = _random_invertible_operator(rng)
        # Drive to an arbitrary interior state first.
        for x in rng.normal(0, 1.5, size=int(rng.integers(1, 40))):
            op.step(float(x))
        inv = pi_invert(op)
        fwd = op.copy()
        for x in rng.normal(0, 1.5, size=30):
            y = fwd.step(float(x))
            back = inv.step(y)
            worst = max(worst, abs(back - float(x)))
    assert worst < 1e-12


def test_forward_composition_recovers_outputs_mid_trajectory():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(150):
        op = _random_invertible_operator(rng)
        for x in rng.normal(0, 1.5, size=int(rng.integers(1, 40))):
            op.step(float(x))
        inv = pi_invert(op)
        fwd = op.copy()
        last = fwd._common_last_input()
        f_now = fwd.linear_weight * last + sum(
            c.weight * c.state.value for c in fwd.components
        )
        for y in f_now + rng.normal(0, 1.0, size=30).cumsum():
            x = inv.step(float(y))
            forward = fwd.step(x)
            worst = max(worst, abs(forward - float(y)))
    assert worst < 1e-12


def test_inverting_twice_returns_the_original():
    rng = np.random.default_rng(21)
    for _ in range(50):
        op = _random_invertible_operator(rng)
        for x in rng.normal(0, 1.0, size=25):
            op.step(float(x))
        double = pi_invert(pi_invert(op))
        assert double.linear_weight == pytest.approx(op.linear_weight, rel=1e-12)
        assert len(double.components) == len(op.components)
        for a, b in zip(double.components, op.components):
            assert a.threshold == pytest.approx(b.threshold, rel=1e-9)
            assert a.weight == pytest.approx(b.weight, rel=1e-9)
            assert a.state.value == pytest.approx(b.state.value, abs=1e-9)


def test_pi_invert_rejects_flat_or_falling_response():
    with pytest.raises(NonInvertible):
        pi_invert(PiOperator(0.0, []))  # flat terminal branch
    falling = PiOperator(0.5, [PiComponent(-1.0, StopState(1.0))])
    with pytest.raises(NonInvertible):
        pi_invert(falling)


def test_pi_invert_rejects_unreachable_states():
    # |value gap| > threshold gap cannot arise from a shared input history.
    comps = [
        PiComponent(1.0, StopState(0.5, value=0.5, last_input=0.0)),
        PiComponent(1.0, StopState(1.0, value=-0.4, last_input=0.0)),
    ]
    with pytest.raises(NonInvertible):
        pi_invert(PiOperator(1.0, comps))


def test_pi_invert_with_no_components_is_reciprocal():
    inv = pi_invert(PiOperator(2.0, []))
    assert inv.linear_weight == 0.5
    assert inv.components == []


def test_serialization_round_trip_preserves_behavior():
    rng = np.random.default_rng(3)
    op = _random_invertible_operator(rng)
    for x in rng.normal(0, 1.0, size=20):
        op.step(float(x))
    clone = PiOperator.from_json(op.to_json())
    for x in rng.normal(0, 1.0, size=20):
        assert clone.step(float(x)) == op.step(float(x))


def test_serialization_records_last_input():
    op = PiOperator(1.0, [PiComponent(1.0, StopState(0.5))])
    op.step(2.5)
    data = op.to_dict()
    assert data["last_input"] == 2.5
    assert data["components"][0]["value"] == 0.5
    # Old payloads without the field still load, from rest.
    del data["last_input"]
    loaded = PiOperator.from_dict(data)
    assert loaded.components[0].state.last_input == 0.0


def test_from_dict_rejects_malformed_payloads():
    with pytest.raises(ValueError):
        PiOperator.from_dict({"components": []})
    with pytest.raises(ValueError):
        PiOperator.from_dict({"linear_weight": 1.0, "components": [{"weight": 1.0}]})


def test_divergent_component_histories_are_rejected_on_export():
    comps = [
        PiComponent(1.0, StopState(0.5, value=0.0, last_input=1.0)),
        PiComponent(1.0, StopState(1.0, value=0.0, last_input=2.0)),
    ]
    op = PiOperator(1.0, comps)
    with pytest.raises(ValueError):
        op.to_dict()


def test_copy_is_independent():
    op = PiOperator(1.0, [PiComponent(1.0, StopState(0.5))])
    clone = op.copy()
    op.step(3.0)
    assert clone.components[0].state.value == 0.0
