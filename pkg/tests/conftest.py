"""Shared fixtures and independent numerical oracles for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from backreach.hybfile import parse
from backreach.model import (
    AxisAffineJump,
    DecoupledDynamics,
    HybridAutomaton,
    Phase,
    RectConstraint,
    StateVector,
    Transition,
)
from backreach.regions import MonotoneRegion, from_rect

REPO_ROOT = Path(__file__).resolve().parent.parent
BATCH_HYB = REPO_ROOT / "batch.hyb"


@pytest.fixture(scope="session")
def batch_source() -> str:
    return BATCH_HYB.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def batch_model(batch_source) -> HybridAutomaton:
    return parse(batch_source)


@pytest.fixture(scope="session")
def gc_rect() -> RectConstraint:
    return RectConstraint(0, 4, 0, 4)


@pytest.fixture(scope="session")
def nominal_square() -> MonotoneRegion:
    return from_rect(RectConstraint(2, 2.1, 2, 2.1))


@pytest.fixture(scope="session")
def l1_dynamics() -> DecoupledDynamics:
    return DecoupledDynamics.from_coeffs(2, 10, 1, 3)


@pytest.fixture(scope="session")
def l2_dynamics() -> DecoupledDynamics:
    return DecoupledDynamics.from_coeffs(2, -2, 1, 3)


# ---------------------------------------------------------------------------
# independent oracles


def rk4_flow(a: np.ndarray, b: np.ndarray, x0: np.ndarray, t_end: float,
             step: float) -> np.ndarray:
    """Classic fourth-order Runge-Kutta for x' = -a*x + b, vectorized over
    (..., axis) arrays.  Deliberately independent of the closed forms."""
    n = int(round(t_end / step))
    x = x0.astype(float).copy()
    h = step

    def f(state: np.ndarray) -> np.ndarray:
        return -a * state + b

    for _ in range(n):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    rem = t_end - n * step
    if rem > 0:
        k1 = f(x)
        k2 = f(x + 0.5 * rem * k1)
        k3 = f(x + 0.5 * rem * k2)
        k4 = f(x + rem * k3)
        x = x + (rem / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def scan_first_hit(dyn: DecoupledDynamics, x0: StateVector, region: MonotoneRegion,
                   t_max: float, step: float = 1e-4) -> float | None:
    """Brute-force first-entry time by dense forward scanning."""
    ts = np.arange(0.0, t_max + step, step)
    x1 = np.asarray([_axis_closed(dyn.axis1, x0.x1, t) for t in ts])
    x2 = np.asarray([_axis_closed(dyn.axis2, x0.x2, t) for t in ts])
    inside = region.contains_vec(x1, x2)
    idx = np.nonzero(inside)[0]
    if idx.size == 0:
        return None
    return float(ts[idx[0]])


def _axis_closed(axis, x0: float, t: float) -> float:
    if axis.a > 0:
        xe = axis.b / axis.a
        return xe + (x0 - xe) * np.exp(-axis.a * t)
    return x0 + axis.b * t


def random_valid_model(rng: np.random.Generator, n_phases: int | None = None,
                       ) -> HybridAutomaton:
    """Generate a structurally valid automaton with full-precision floats."""
    if n_phases is None:
        n_phases = int(rng.integers(1, 6))
    gx = sorted(rng.uniform(-10, 10, 2))
    gy = sorted(rng.uniform(-10, 10, 2))
    gc = RectConstraint(gx[0], gx[1], gy[0], gy[1])

    phases = []
    for i in range(n_phases):
        a1, a2 = rng.uniform(0, 5, 2)
        if rng.random() < 0.3:
            a1 = 0.0
        if rng.random() < 0.3:
            a2 = 0.0
        b1, b2 = rng.uniform(-5, 5, 2)
        if rng.random() < 0.5:
            xs = sorted(rng.uniform(gx[0], gx[1], 2))
            ys = sorted(rng.uniform(gy[0], gy[1], 2))
            rect = RectConstraint(xs[0], xs[1], ys[0], ys[1])
        else:
            rect = gc
        mark = "none"
        if i == 0:
            mark = "initial"
        elif i == n_phases - 1 and n_phases > 1:
            mark = "final"
        phases.append(Phase(
            f"p{i}",
            DecoupledDynamics.from_coeffs(float(a1), float(b1), float(a2), float(b2)),
            rect, mark,
        ))
    if n_phases == 1:
        phases[0] = Phase(phases[0].id, phases[0].dynamics, phases[0].constraint, "initial")

    transitions = []
    used = set()
    for _ in range(int(rng.integers(0, 2 * n_phases + 1))):
        i, j = rng.integers(0, n_phases, 2)
        if i == j or (i, j) in used:
            continue
        used.add((i, j))
        if rng.random() < 0.5:
            jump = AxisAffineJump()
        else:
            jump = AxisAffineJump(
                float(np.exp(rng.uniform(-1, 1))), float(rng.uniform(-2, 2)),
                float(np.exp(rng.uniform(-1, 1))), float(rng.uniform(-2, 2)),
            )
        transitions.append(Transition(f"p{i}", f"p{j}", jump))

    return HybridAutomaton(f"model{int(rng.integers(0, 10**6))}", gc,
                           tuple(phases), tuple(transitions))


def random_point_in(rect: RectConstraint, rng: np.random.Generator) -> StateVector:
    return StateVector(
        float(rng.uniform(rect.x1_lo, rect.x1_hi)),
        float(rng.uniform(rect.x2_lo, rect.x2_hi)),
    )
