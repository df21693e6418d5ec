"""Hybrid automaton data model: phases with decoupled linear dynamics,
rectangular constraints, and transitions with per-axis affine jumps.

All values are immutable after construction; every operation here is a pure
function, so the model is safe to share across threads or requests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

MARK_NONE = "none"
MARK_INITIAL = "initial"
MARK_FINAL = "final"

_MARKS = (MARK_NONE, MARK_INITIAL, MARK_FINAL)


@dataclass(frozen=True, slots=True)
class StateVector:
    """A point (x1, x2) of the planar continuous state space."""

    x1: float
    x2: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.x1, self.x2)


@dataclass(frozen=True, slots=True)
class AxisDynamics:
    """One axis of a decoupled linear vector field: x' = -a*x + b, a >= 0."""

    a: float
    b: float

    @property
    def equilibrium(self) -> float | None:
        """Value the axis converges to, or None for a pure integrator."""
        return self.b / self.a if self.a > 0 else None


@dataclass(frozen=True, slots=True)
class DecoupledDynamics:
    axis1: AxisDynamics
    axis2: AxisDynamics

    @classmethod
    def from_coeffs(cls, a1: float, b1: float, a2: float, b2: float) -> "DecoupledDynamics":
        return cls(AxisDynamics(a1, b1), AxisDynamics(a2, b2))

    @property
    def is_stationary(self) -> bool:
        d1, d2 = self.axis1, self.axis2
        return d1.a == 0 and d1.b == 0 and d2.a == 0 and d2.b == 0


@dataclass(frozen=True, slots=True)
class RectConstraint:
    """Axis-aligned rectangle x1_lo <= x1 <= x1_hi, x2_lo <= x2 <= x2_hi."""

    x1_lo: float
    x1_hi: float
    x2_lo: float
    x2_hi: float

    def contains(self, p: StateVector, tol: float = 0.0) -> bool:
        return (
            self.x1_lo - tol <= p.x1 <= self.x1_hi + tol
            and self.x2_lo - tol <= p.x2 <= self.x2_hi + tol
        )

    def contains_rect(self, other: "RectConstraint") -> bool:
        return (
            self.x1_lo <= other.x1_lo
            and other.x1_hi <= self.x1_hi
            and self.x2_lo <= other.x2_lo
            and other.x2_hi <= self.x2_hi
        )

    def margin(self, p: StateVector) -> float:
        """Signed distance to the boundary; positive inside."""
        return min(p.x1 - self.x1_lo, self.x1_hi - p.x1, p.x2 - self.x2_lo, self.x2_hi - p.x2)


@dataclass(frozen=True, slots=True)
class AxisAffineJump:
    """Per-axis affine reset x_j(t+) = alpha_j * x_j(t-) + beta_j.

    Scale factors must be strictly positive so the reset maps x1-monotone
    regions to x1-monotone regions.
    """

    alpha1: float = 1.0
    beta1: float = 0.0
    alpha2: float = 1.0
    beta2: float = 0.0

    @property
    def is_identity(self) -> bool:
        return self.alpha1 == 1.0 and self.beta1 == 0.0 and self.alpha2 == 1.0 and self.beta2 == 0.0

    def apply(self, p: StateVector) -> StateVector:
        return StateVector(self.alpha1 * p.x1 + self.beta1, self.alpha2 * p.x2 + self.beta2)

    def inverse(self) -> "AxisAffineJump":
        return AxisAffineJump(
            1.0 / self.alpha1, -self.beta1 / self.alpha1,
            1.0 / self.alpha2, -self.beta2 / self.alpha2,
        )


IDENTITY_JUMP = AxisAffineJump()


@dataclass(frozen=True, slots=True)
class Phase:
    id: str
    dynamics: DecoupledDynamics
    constraint: RectConstraint
    marked: str = MARK_NONE


@dataclass(frozen=True, slots=True)
class Transition:
    source: str
    target: str
    jump: AxisAffineJump = IDENTITY_JUMP


@dataclass(frozen=True)
class HybridAutomaton:
    name: str
    global_constraint: RectConstraint
    phases: tuple[Phase, ...]
    transitions: tuple[Transition, ...]

    def phase(self, phase_id: str) -> Phase:
        for ph in self.phases:
            if ph.id == phase_id:
                return ph
        raise KeyError(f"unknown phase id {phase_id!r}")

    def transition(self, source: str, target: str) -> Transition:
        for tr in self.transitions:
            if tr.source == source and tr.target == target:
                return tr
        raise KeyError(f"no transition {source!r} -> {target!r}")

    def has_transition(self, source: str, target: str) -> bool:
        return any(tr.source == source and tr.target == target for tr in self.transitions)

    def successors(self, source: str) -> list[str]:
        return sorted(tr.target for tr in self.transitions if tr.source == source)

    def marked_phases(self, mark: str) -> list[str]:
        return [ph.id for ph in self.phases if ph.marked == mark]


@dataclass(frozen=True, slots=True)
class Violation:
    """One invariant breach found by validate; element names the offender."""

    element: str
    message: str
    severity: str = "error"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def errors(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "error")


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _check_rect(rect: RectConstraint, element: str, out: list[Violation]) -> None:
    if not _finite(rect.x1_lo, rect.x1_hi, rect.x2_lo, rect.x2_hi):
        out.append(Violation(element, "non-finite constraint bound"))
        return
    if rect.x1_lo > rect.x1_hi:
        out.append(Violation(element, "empty x1 interval (x1_lo > x1_hi)"))
    if rect.x2_lo > rect.x2_hi:
        out.append(Violation(element, "empty x2 interval (x2_lo > x2_hi)"))


def validate(automaton: HybridAutomaton) -> ValidationReport:
    """Check every structural invariant; violations are data, not failures.

    Missing initial/final marks are reported as warnings: they only matter
    for end-to-end path analysis, and partial models (e.g. a single phase)
    are otherwise well-formed.
    """
    out: list[Violation] = []
    gc = automaton.global_constraint
    _check_rect(gc, "global constraint", out)

    seen: set[str] = set()
    for ph in automaton.phases:
        el = f"phase {ph.id}"
        if ph.id in seen:
            out.append(Violation(el, "duplicate phase id"))
        seen.add(ph.id)
        if ph.marked not in _MARKS:
            out.append(Violation(el, f"unknown mark {ph.marked!r}"))
        for axis_name, ax in (("x1", ph.dynamics.axis1), ("x2", ph.dynamics.axis2)):
            if not _finite(ax.a, ax.b):
                out.append(Violation(el, f"non-finite {axis_name} dynamics coefficient"))
            elif ax.a < 0:
                out.append(Violation(el, f"negative decay coefficient on {axis_name}"))
        _check_rect(ph.constraint, el, out)
        if not gc.contains_rect(ph.constraint):
            out.append(Violation(el, "constraint not contained in global constraint"))

    pairs: set[tuple[str, str]] = set()
    for tr in automaton.transitions:
        el = f"transition {tr.source}->{tr.target}"
        if tr.source == tr.target:
            out.append(Violation(el, "self-loop transition"))
        for end in (tr.source, tr.target):
            if end not in seen:
                out.append(Violation(el, f"unknown phase id {end!r}"))
        if (tr.source, tr.target) in pairs:
            out.append(Violation(el, "duplicate transition for ordered pair"))
        pairs.add((tr.source, tr.target))
        if not _finite(tr.jump.alpha1, tr.jump.beta1, tr.jump.alpha2, tr.jump.beta2):
            out.append(Violation(el, "non-finite jump coefficient"))
        elif tr.jump.alpha1 <= 0 or tr.jump.alpha2 <= 0:
            out.append(Violation(el, "jump scale factor must be strictly positive"))

    if not automaton.marked_phases(MARK_INITIAL):
        out.append(Violation("automaton", "no phase marked initial", severity="warning"))
    if not automaton.marked_phases(MARK_FINAL):
        out.append(Violation("automaton", "no phase marked final", severity="warning"))

    return ValidationReport(tuple(out))
