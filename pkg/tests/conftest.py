"""Shared fixtures and the acceptance summary printer."""

from __future__ import annotations

import numpy as np
import pytest

from stickyecon import ModelParams

# The base calibration used throughout the docs and presets, and the
# runaway-prone variant (weak inflation response).
BASE = ModelParams(a=0.2, b1=0.5, b2=0.05, c1=1.5, c2=0.5, rho=0.5)
RUNAWAY = ModelParams(a=0.3, b1=0.5, b2=0.05, c1=0.9, c2=0.01, rho=1.0)


def draw_valid_params(rng: np.random.Generator, rho=(0.1, 1.5)) -> ModelParams:
    """A random parameter set that is comfortably inside the valid regime.

    Keeps delta, beta, and alpha bounded away from zero so each draw
    supports the explicit form and the gap recursion.
    """
    while True:
        a = rng.uniform(0.05, 2.0)
        b1 = rng.uniform(0.05, 0.95)
        b2 = rng.uniform(0.05, 2.0)
        c1 = rng.uniform(0.05, 3.0)
        c2 = rng.uniform(0.05, 2.0)
        delta = (1 - b1) * (1 + a * c2) + a * b2 * (c1 - 1)
        beta = b1 * (1 + a * c2) + a * b2
        if delta > 0.05 and beta > 0.05 and delta / beta > 0.05:
            return ModelParams(
                a=a, b1=b1, b2=b2, c1=c1, c2=c2, rho=float(rng.uniform(*rho))
            )


@pytest.fixture
def base_params() -> ModelParams:
    return BASE


@pytest.fixture
def runaway_params() -> ModelParams:
    return RUNAWAY


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE_LABELS = {
    "test_criterion_01_operator_laws": "play/stop laws and exact PI inversion",
    "test_criterion_02_explicit_matches_implicit": "explicit steppers match implicit oracles",
    "test_criterion_03_equilibrium_segment": "equilibrium segment endpoints and fixed points",
    "test_criterion_04_stability_tests": "Jury verdicts and spectral radii",
    "test_criterion_05_noise_free_convergence": "noise-free runs converge to the segment",
    "test_criterion_06_runaway_escape": "basin escape diverges, strong-policy control does not",
    "test_criterion_07_stickiness_lowers_volatility": "seed-averaged sd_x falls as the band widens",
    "test_criterion_08_interior_minima": "far-field radius and sd_x have interior minima",
    "test_criterion_09_sticky_taylor": "play on the rule: unstable interior, cycle, restlessness",
    "test_criterion_10_reproduce_byte_identical": "reproduce passes and reruns byte-identically",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            if name in ACCEPTANCE_LABELS:
                results[name] = "PASS" if outcome == "passed" else "FAIL"
    if not results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for i, name in enumerate(sorted(ACCEPTANCE_LABELS), start=1):
        status = results.get(name, "NOT RUN")
        terminalreporter.write_line(f"  [{i:2d}] {status:7s} {ACCEPTANCE_LABELS[name]}")
