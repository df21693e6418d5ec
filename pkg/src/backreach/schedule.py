"""Switching-schedule synthesis and closed-form replay.

The built-in strategy is switch-as-soon-as-possible: dwell in each phase
exactly until the flow first enters the jump-set of the outgoing transition,
nudged slightly into the interior so later numerics stay off chain
boundaries.  Because the backward analysis guarantees that every jump-set
point maps into the downstream extended jump-set, the greedy choice is always
safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .flows import flow_at, orbit_hits_region
from .model import HybridAutomaton, StateVector
from .reach import PathAnalysis

DELTA_DWELL = 1e-6
DEFAULT_DT = 1e-3

STRATEGY_ASAP = "asap"
KNOWN_STRATEGIES = (STRATEGY_ASAP, "alap")  # alap is a declared slot, not implemented


class ScheduleStallError(RuntimeError):
    """No finite hit time found despite a feasible analysis."""

    def __init__(self, step_index: int, entry: StateVector):
        super().__init__(
            f"schedule stall at step {step_index} from ({entry.x1:.9g}, {entry.x2:.9g})")
        self.step_index = step_index
        self.entry = entry


@dataclass(frozen=True, slots=True)
class ScheduleStep:
    phase: str
    dwell: float
    exit_state: StateVector


@dataclass(frozen=True)
class SwitchSchedule:
    init: StateVector
    steps: tuple[ScheduleStep, ...]
    final: str

    @property
    def total_time(self) -> float:
        return sum(s.dwell for s in self.steps)

    @property
    def final_state(self) -> StateVector | None:
        return self.steps[-1].exit_state if self.steps else self.init


def synthesize_schedule(analysis: PathAnalysis, automaton: HybridAutomaton,
                        init: StateVector, strategy: str = STRATEGY_ASAP,
                        ) -> SwitchSchedule:
    """ASAP schedule realizing the analyzed path from the given start state."""
    if strategy != STRATEGY_ASAP:
        raise NotImplementedError(f"strategy {strategy!r} is not implemented")
    if not analysis.feasible:
        raise ValueError("cannot synthesize a schedule for an infeasible analysis")
    if not any(c.contains(init) for c in analysis.first_lam_ext):
        raise ValueError("start state lies outside the first extended jump-set")

    path = analysis.path
    entry = init
    steps: list[ScheduleStep] = []
    for i, rec in enumerate(analysis.records):
        ph = automaton.phase(path[i])
        hit: float | None = None
        for comp in rec.lam:
            t = orbit_hits_region(ph.dynamics, entry, comp)
            if t is not None and (hit is None or t < hit):
                hit = t
        if hit is None:
            raise ScheduleStallError(i, entry)
        dwell = hit
        hit_state = flow_at(ph.dynamics, entry, hit)
        interior = any(c.contains(hit_state, tol=-1e-7) for c in rec.lam)
        if not interior:
            # boundary-tangent hit: push slightly into the jump-set interior
            nudged = flow_at(ph.dynamics, entry, hit + DELTA_DWELL)
            if any(c.contains(nudged, tol=0.0) for c in rec.lam):
                dwell = hit + DELTA_DWELL
        exit_state = flow_at(ph.dynamics, entry, dwell)
        steps.append(ScheduleStep(path[i], dwell, exit_state))
        entry = automaton.transition(path[i], path[i + 1]).jump.apply(exit_state)
    return SwitchSchedule(init, tuple(steps), path[-1])


@dataclass(frozen=True, slots=True)
class SimSample:
    t: float
    phase: str
    state: StateVector


@dataclass(frozen=True)
class SimTrace:
    samples: tuple[SimSample, ...]
    min_margin: float
    final_state: StateVector
    final_phase: str

    @property
    def constraint_respected(self) -> bool:
        return self.min_margin >= -1e-6


def simulate(schedule: SwitchSchedule, automaton: HybridAutomaton,
             dt: float = DEFAULT_DT) -> SimTrace:
    """Replay the schedule with the exact closed-form flow.

    Samples every dt within each dwell plus the exact switch instants,
    applies the transition jumps, and records the minimum signed margin to
    the active phase constraint.  Violations show up as a negative margin;
    they are reported, never raised.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    samples: list[SimSample] = []
    min_margin = math.inf
    t_abs = 0.0
    state = schedule.init

    for k, step in enumerate(schedule.steps):
        ph = automaton.phase(step.phase)
        locals_: list[float] = [j * dt for j in range(int(step.dwell / dt) + 1)]
        if not locals_ or locals_[-1] < step.dwell:
            locals_.append(step.dwell)
        for tl in locals_:
            x = flow_at(ph.dynamics, state, tl)
            min_margin = min(min_margin, ph.constraint.margin(x))
            t = t_abs + tl
            if samples and t <= samples[-1].t:
                continue  # switch instant already recorded in the previous phase
            samples.append(SimSample(t, step.phase, x))
        exit_state = flow_at(ph.dynamics, state, step.dwell)
        min_margin = min(min_margin, ph.constraint.margin(exit_state))
        if k + 1 < len(schedule.steps):
            nxt = schedule.steps[k + 1].phase
        else:
            nxt = schedule.final
        jump = automaton.transition(step.phase, nxt).jump
        state = jump.apply(exit_state)
        min_margin = min(min_margin, automaton.phase(nxt).constraint.margin(state))
        t_abs += step.dwell

    if not samples:
        samples.append(SimSample(0.0, schedule.final, state))
    final_phase = schedule.final
    return SimTrace(tuple(samples), min_margin, state, final_phase)
