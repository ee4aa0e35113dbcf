"""Implicit one-step solvers, independent of the explicit steppers.

Each solver takes the previous state and the raw structural parameters,
enumerates the hysteresis branches (stuck, dragged up, dragged down per
play operator), solves the resulting linear 2x2 system for that branch,
and keeps the solution whose branch condition is self-consistent.  For
alpha > 0 exactly one branch is consistent up to boundary ties, where the
adjacent branches agree by continuity.

Nothing here is shared with the explicit steppers: these routines work
from the original implicit equations only and exist to cross-check the
closed forms.
"""

from __future__ import annotations

import itertools

from ..errors import DegenerateSystem, NoConsistentBranch
from ..model import ModelParams

__all__ = [
    "step_implicit_oracle",
    "step_multi_implicit_oracle",
    "step_taylor_implicit_oracle",
]

# Slack on branch conditions: a solution landing exactly on a band edge may
# fall a rounding error outside the closed branch region.
_EDGE_SLACK = 1e-9


def _solve2(m11: float, m12: float, m21: float, m22: float, r1: float, r2: float):
    det = m11 * m22 - m12 * m21
    if det == 0.0:
        raise DegenerateSystem("singular one-step system in implicit solve")
    return (r1 * m22 - m12 * r2) / det, (m11 * r2 - m21 * r1) / det


def step_implicit_oracle(
    params: ModelParams,
    y_prev: float,
    x_prev: float,
    p_prev: float,
    eps: float = 0.0,
    eta: float = 0.0,
):
    """One step of the single-agent sticky-expectations model, solved implicitly.

    Returns (y, x, p). Raises NoConsistentBranch when no play branch is
    self-consistent (possible when alpha <= 0).
    """
    a, b1, b2, c1, c2 = params.a, params.b1, params.b2, params.c1, params.c2
    rho = params.rho

    # stuck: p = p_prev
    y, x = _solve2(
        1.0 + a * c2, a * c1,
        -b2, 1.0,
        y_prev + a * p_prev + eps,
        b1 * p_prev + (1.0 - b1) * x_prev + eta,
    )
    if abs(x - p_prev) <= rho + _EDGE_SLACK:
        return y, x, p_prev

    # dragged: p = x -/+ rho
    for sign in (1.0, -1.0):
        y, x = _solve2(
            1.0 + a * c2, a * (c1 - 1.0),
            -b2, 1.0 - b1,
            y_prev - sign * a * rho + eps,
            -sign * b1 * rho + (1.0 - b1) * x_prev + eta,
        )
        if sign * (x - p_prev) >= rho - _EDGE_SLACK:
            return y, x, x - sign * rho

    raise NoConsistentBranch(
        f"no play branch consistent from (y={y_prev}, x={x_prev}, p={p_prev})"
    )


def step_multi_implicit_oracle(
    params: ModelParams,
    agents: list[tuple[float, float]],
    y_prev: float,
    x_prev: float,
    p_prev: list[float],
    eps: float = 0.0,
    eta: float = 0.0,
):
    """One step of the heterogeneous-agents model, solved implicitly.

    ``agents`` is a list of (rho_i, weight_i); ``p_prev`` the per-agent
    expectations. Enumerates all 3^n branch combinations. Returns
    (y, x, [p_i]).
    """
    a, b1, b2, c1, c2 = params.a, params.b1, params.b2, params.c1, params.c2
    n = len(agents)
    for combo in itertools.product((0, 1, -1), repeat=n):
        # Aggregate expectation as an affine function of x: p = base + slope * x.
        base = 0.0
        slope = 0.0
        for (rho_i, w_i), prev_i, branch in zip(agents, p_prev, combo):
            if branch == 0:
                base += w_i * prev_i
            else:
                base -= branch * w_i * rho_i
                slope += w_i
        y, x = _solve2(
            1.0 + a * c2, a * (c1 - slope),
            -b2, 1.0 - b1 * slope,
            y_prev + a * base + eps,
            b1 * base + (1.0 - b1) * x_prev + eta,
        )
        consistent = True
        p_new = []
        for (rho_i, _), prev_i, branch in zip(agents, p_prev, combo):
            if branch == 0:
                if abs(x - prev_i) > rho_i + _EDGE_SLACK:
                    consistent = False
                    break
                p_new.append(prev_i)
            else:
                if branch * (x - prev_i) < rho_i - _EDGE_SLACK:
                    consistent = False
                    break
                p_new.append(x - branch * rho_i)
        if consistent:
            return y, x, p_new
    raise NoConsistentBranch(
        f"no branch combination consistent from (y={y_prev}, x={x_prev}, p={p_prev})"
    )


def step_taylor_implicit_oracle(
    params: ModelParams,
    sigma: float,
    y_prev: float,
    x_prev: float,
    r_prev: float,
    eps: float = 0.0,
    eta: float = 0.0,
):
    """One step of the sticky-Taylor model, solved implicitly.

    The play sits on the rule value g = c1 x + c2 y; expectations equal
    current inflation. Returns (y, x, r).
    """
    a, b1, b2, c1, c2 = params.a, params.b1, params.b2, params.c1, params.c2
    if b1 >= 1.0:
        raise DegenerateSystem(f"b1 = {b1} >= 1")
    pass_through = b2 / (1.0 - b1)

    # stuck: r = r_prev
    y, x = _solve2(
        1.0, -a,
        -pass_through, 1.0,
        y_prev - a * r_prev + eps,
        x_prev + eta,
    )
    g = c1 * x + c2 * y
    if abs(g - r_prev) <= sigma + _EDGE_SLACK:
        return y, x, r_prev

    # dragged: r = g -/+ sigma
    for sign in (1.0, -1.0):
        y, x = _solve2(
            1.0 + a * c2, a * (c1 - 1.0),
            -pass_through, 1.0,
            y_prev + sign * a * sigma + eps,
            x_prev + eta,
        )
        g = c1 * x + c2 * y
        if sign * (g - r_prev) >= sigma - _EDGE_SLACK:
            return y, x, g - sign * sigma
    raise NoConsistentBranch(
        f"no rule branch consistent from (y={y_prev}, x={x_prev}, r={r_prev})"
    )
