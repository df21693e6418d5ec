"""Machine-readable analysis reports and SVG state-space figures.

All numeric output uses a fixed 12-significant-digit decimal form so that
reports and figures are byte-reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import RectConstraint, StateVector
from .reach import PathAnalysis
from .regions import MonotoneRegion
from .schedule import SimTrace, SwitchSchedule


def fmt_number(x: float) -> str:
    """Canonical 12-significant-digit decimal rendering."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(float(x), ".12g")


def canonical_json(obj) -> str:
    """Deterministic JSON with insertion-ordered keys and canonical floats."""
    if isinstance(obj, dict):
        inner = ",".join(f"{canonical_json(str(k))}:{canonical_json(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_number(obj)
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{out}"'
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def schedule_dict(schedule: SwitchSchedule) -> dict:
    return {
        "init": [schedule.init.x1, schedule.init.x2],
        "steps": [
            {
                "phase": s.phase,
                "dwell": s.dwell,
                "exit": [s.exit_state.x1, s.exit_state.x2],
            }
            for s in schedule.steps
        ],
        "final": schedule.final,
    }


def schedule_json(schedule: SwitchSchedule) -> str:
    return canonical_json(schedule_dict(schedule))


def schedule_from_dict(d: dict) -> SwitchSchedule:
    from .schedule import ScheduleStep

    steps = tuple(
        ScheduleStep(s["phase"], float(s["dwell"]),
                     StateVector(float(s["exit"][0]), float(s["exit"][1])))
        for s in d["steps"]
    )
    return SwitchSchedule(StateVector(float(d["init"][0]), float(d["init"][1])),
                          steps, d["final"])


def report_dict(analysis: PathAnalysis,
                schedule: SwitchSchedule | None = None) -> dict:
    out: dict = {
        "path": list(analysis.path),
        "feasible": analysis.feasible,
    }
    if analysis.failing_index is not None:
        out["failing_index"] = analysis.failing_index
    out["transitions"] = [
        {
            "from": rec.source,
            "to": rec.target,
            "lambda": [r.descriptor() for r in rec.lam],
            "lambda_ext": [r.descriptor() for r in rec.lam_ext],
        }
        for rec in analysis.records
    ]
    if schedule is not None:
        out["schedule"] = schedule_dict(schedule)
    return out


def report_json(analysis: PathAnalysis,
                schedule: SwitchSchedule | None = None) -> str:
    return canonical_json(report_dict(analysis, schedule))


# ---------------------------------------------------------------------------
# SVG scenes


@dataclass(frozen=True)
class RegionFill:
    region: MonotoneRegion
    fill: str = "#7fb3d5"
    opacity: float = 0.5


@dataclass(frozen=True)
class CurveStroke:
    points: tuple[tuple[float, float], ...]
    stroke: str = "#1a5276"
    width: float = 1.5
    dashed: bool = False


@dataclass(frozen=True)
class PointMarker:
    x: float
    y: float
    color: str = "#c0392b"
    radius: float = 3.0


@dataclass(frozen=True)
class TrajectoryPolyline:
    points: tuple[tuple[float, float], ...]
    stroke: str = "#239b56"
    width: float = 1.2


@dataclass(frozen=True)
class TextLabel:
    x: float
    y: float
    text: str
    size: int = 12
    color: str = "#17202a"


Layer = RegionFill | CurveStroke | PointMarker | TrajectoryPolyline | TextLabel


@dataclass(frozen=True)
class Scene:
    frame: RectConstraint
    layers: tuple[Layer, ...] = ()
    title: str = ""


REGION_SAMPLES = 160  # >= 128 abscissae when tracing chain silhouettes

_EXT_COLORS = ("#aed6f1", "#a9dfbf", "#f9e79f", "#d7bde2", "#f5cba7", "#a3e4d7")
_LAM_COLORS = ("#5499c7", "#52be80", "#f4d03f", "#a569bd", "#eb984e", "#48c9b0")


def build_analysis_scene(automaton, analysis: PathAnalysis, trace: SimTrace | None = None,
                         ) -> "Scene":
    """State-space figure of a path analysis: extended jump-sets behind
    jump-sets, phase constraints, and the simulated trajectory if given."""
    layers: list[Layer] = []
    for pid in (analysis.path[0], analysis.path[-1]):
        rect = automaton.phase(pid).constraint
        pts = (
            (rect.x1_lo, rect.x2_lo), (rect.x1_hi, rect.x2_lo),
            (rect.x1_hi, rect.x2_hi), (rect.x1_lo, rect.x2_hi),
            (rect.x1_lo, rect.x2_lo),
        )
        layers.append(CurveStroke(pts, stroke="#7b7d7d", width=1.0, dashed=True))
    for i, rec in enumerate(analysis.records):
        for region in rec.lam_ext:
            layers.append(RegionFill(region, fill=_EXT_COLORS[i % len(_EXT_COLORS)],
                                     opacity=0.45))
        for region in rec.lam:
            layers.append(RegionFill(region, fill=_LAM_COLORS[i % len(_LAM_COLORS)],
                                     opacity=0.55))
    if analysis.init is not None:
        layers.append(PointMarker(analysis.init.x1, analysis.init.x2))
    if trace is not None:
        pts = tuple((s.state.x1, s.state.x2) for s in trace.samples)
        if len(pts) >= 2:
            layers.append(TrajectoryPolyline(pts))
    verdict = "feasible" if analysis.feasible else "infeasible"
    title = " -> ".join(analysis.path) + f" ({verdict})"
    return Scene(automaton.global_constraint, tuple(layers), title)


def region_outline(region: MonotoneRegion, samples: int = REGION_SAMPLES,
                   ) -> list[tuple[float, float]]:
    """Closed polygon tracing the region: lower chain left-to-right, then
    upper chain right-to-left."""
    u, v = region.x1_lo, region.x1_hi
    if v - u <= 0:
        lo, hi = region.lower_at(u), region.upper_at(u)
        return [(u, lo), (u, hi)]
    xs = [u + (v - u) * k / (samples - 1) for k in range(samples)]
    for chain in (region.lower, region.upper):
        for seg in chain:
            for x in (seg.x1_a, seg.x1_b):
                if u < x < v:
                    xs.append(x)
    xs = sorted(set(xs))
    pts = [(x, float(region.lower_at(x))) for x in xs]
    pts += [(x, float(region.upper_at(x))) for x in reversed(xs)]
    return pts


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(scene: Scene, size: int = 600, margin: int = 40) -> bytes:
    """Render the scene as a standalone SVG 1.1 document (byte-deterministic)."""
    f = scene.frame
    if f.x1_hi <= f.x1_lo or f.x2_hi <= f.x2_lo:
        raise ValueError("scene frame must be non-degenerate")
    span_x = f.x1_hi - f.x1_lo
    span_y = f.x2_hi - f.x2_lo
    inner = size - 2 * margin

    def px(x: float) -> str:
        return format(margin + (x - f.x1_lo) / span_x * inner, ".3f")

    def py(y: float) -> str:
        return format(size - margin - (y - f.x2_lo) / span_y * inner, ".3f")

    parts: list[str] = []
    parts.append(
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size}" height="{size}" viewBox="0 0 {size} {size}">'
    )
    parts.append(f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>')

    for layer in scene.layers:
        if isinstance(layer, RegionFill):
            pts = region_outline(layer.region)
            d = " ".join(
                f"{'M' if i == 0 else 'L'} {px(x)} {py(y)}" for i, (x, y) in enumerate(pts)
            ) + " Z"
            parts.append(
                f'<path d="{d}" fill="{layer.fill}" fill-opacity="{fmt_number(layer.opacity)}" '
                f'stroke="none" class="region"/>'
            )
        elif isinstance(layer, CurveStroke):
            d = " ".join(
                f"{'M' if i == 0 else 'L'} {px(x)} {py(y)}"
                for i, (x, y) in enumerate(layer.points)
            )
            dash = ' stroke-dasharray="4 3"' if layer.dashed else ""
            parts.append(
                f'<path d="{d}" fill="none" stroke="{layer.stroke}" '
                f'stroke-width="{fmt_number(layer.width)}"{dash}/>'
            )
        elif isinstance(layer, PointMarker):
            parts.append(
                f'<circle cx="{px(layer.x)}" cy="{py(layer.y)}" '
                f'r="{fmt_number(layer.radius)}" fill="{layer.color}"/>'
            )
        elif isinstance(layer, TrajectoryPolyline):
            pts = " ".join(f"{px(x)},{py(y)}" for x, y in layer.points)
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{layer.stroke}" '
                f'stroke-width="{fmt_number(layer.width)}"/>'
            )
        elif isinstance(layer, TextLabel):
            parts.append(
                f'<text x="{px(layer.x)}" y="{py(layer.y)}" font-size="{layer.size}" '
                f'fill="{layer.color}" font-family="sans-serif">{_esc(layer.text)}</text>'
            )

    # frame and axis ticks on top of the data layers
    parts.append(
        f'<rect x="{px(f.x1_lo)}" y="{py(f.x2_hi)}" '
        f'width="{format(inner, ".3f")}" height="{format(inner, ".3f")}" '
        f'fill="none" stroke="#17202a" stroke-width="1"/>'
    )
    ticks = 5
    for k in range(ticks):
        tx = f.x1_lo + span_x * k / (ticks - 1)
        ty = f.x2_lo + span_y * k / (ticks - 1)
        parts.append(
            f'<line x1="{px(tx)}" y1="{py(f.x2_lo)}" x2="{px(tx)}" '
            f'y2="{format(size - margin + 5, ".3f")}" stroke="#17202a" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px(tx)}" y="{size - margin + 18}" font-size="10" '
            f'text-anchor="middle" font-family="sans-serif">{fmt_number(round(tx, 9))}</text>'
        )
        parts.append(
            f'<line x1="{format(margin - 5, ".3f")}" y1="{py(ty)}" x2="{px(f.x1_lo)}" '
            f'y2="{py(ty)}" stroke="#17202a" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{margin - 8}" y="{py(ty)}" font-size="10" '
            f'text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif">{fmt_number(round(ty, 9))}</text>'
        )
    if scene.title:
        parts.append(
            f'<text x="{size // 2}" y="{margin - 12}" font-size="14" text-anchor="middle" '
            f'font-family="sans-serif">{_esc(scene.title)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts).encode("utf-8")
