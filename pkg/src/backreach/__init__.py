"""Backward reachability and switching-schedule synthesis for planar hybrid
automata with decoupled linear dynamics."""

__version__ = "0.1.0"

from .model import (
    AxisAffineJump,
    AxisDynamics,
    DecoupledDynamics,
    HybridAutomaton,
    Phase,
    RectConstraint,
    StateVector,
    Transition,
    ValidationReport,
    validate,
)
from .hybfile import ParseDiagnostic, ParseFailure, parse, parse_with_diagnostics, serialize
from .regions import MonotoneRegion, from_rect, intersect, is_empty, preimage_jump
from .flows import classify, flow_at, orbit_hits_region, time_to_coord, trajectory_curve
from .reach import (
    ConstructionError,
    PathAnalysis,
    analyze_path,
    extended_jump_set,
    jump_set,
    search_paths,
)
from .schedule import ScheduleStallError, SwitchSchedule, simulate, synthesize_schedule
from .oracle import GridIndicator, compare, grid_reach
from .report import Scene, render_svg, report_json, schedule_json

__all__ = [
    "AxisAffineJump",
    "AxisDynamics",
    "ConstructionError",
    "DecoupledDynamics",
    "GridIndicator",
    "HybridAutomaton",
    "MonotoneRegion",
    "ParseDiagnostic",
    "ParseFailure",
    "PathAnalysis",
    "Phase",
    "RectConstraint",
    "Scene",
    "ScheduleStallError",
    "StateVector",
    "SwitchSchedule",
    "Transition",
    "ValidationReport",
    "analyze_path",
    "classify",
    "compare",
    "extended_jump_set",
    "flow_at",
    "from_rect",
    "grid_reach",
    "intersect",
    "is_empty",
    "jump_set",
    "orbit_hits_region",
    "parse",
    "parse_with_diagnostics",
    "preimage_jump",
    "render_svg",
    "report_json",
    "schedule_json",
    "search_paths",
    "serialize",
    "simulate",
    "synthesize_schedule",
    "time_to_coord",
    "trajectory_curve",
    "validate",
]
