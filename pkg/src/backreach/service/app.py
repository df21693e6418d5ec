"""FastAPI service exposing the analysis pipeline.

Every endpoint is stateless: the model source travels with the request and
all results are returned in the response body.  Reports, schedules and
figures that must be byte-reproducible are returned as pre-serialized
strings so clients can write them verbatim.
"""

from __future__ import annotations

import base64

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..hybfile import ParseDiagnostic, parse_with_diagnostics
from ..model import MARK_FINAL, MARK_INITIAL, HybridAutomaton, RectConstraint, StateVector
from ..oracle import compare, grid_reach, metadata_dict, pgm_bytes
from ..reach import ConstructionError, analyze_path, extended_jump_set, search_paths
from ..regions import MonotoneRegion, from_rect, intersect
from ..report import (
    build_analysis_scene,
    render_svg,
    report_json,
    schedule_from_dict,
    schedule_json,
)
from ..schedule import simulate, synthesize_schedule
from .schemas import (
    CheckRequest,
    CheckResponse,
    DiagnosticOut,
    OracleRequest,
    OracleResponse,
    ParseRequest,
    ParseResponse,
    PlotRequest,
    PlotResponse,
    SearchRequest,
    SearchResponse,
    SimulateRequest,
    SimulateResponse,
    SynthRequest,
    SynthResponse,
)

app = FastAPI(
    title="backreach",
    description="Backward reachability and switching-schedule synthesis "
                "for planar hybrid automata with decoupled linear dynamics.",
    version=__version__,
)


def _diag_out(d: ParseDiagnostic) -> DiagnosticOut:
    return DiagnosticOut(
        line=d.span.line, column=d.span.column, length=d.span.length,
        message=d.message, severity=d.severity,
    )


def _load_model(source: str) -> HybridAutomaton:
    model, diagnostics = parse_with_diagnostics(source)
    if model is None:
        raise HTTPException(status_code=422, detail={
            "message": "model does not parse",
            "diagnostics": [_diag_out(d).model_dump() for d in diagnostics],
        })
    return model


def _run_analysis(model: HybridAutomaton, path: list[str], init):
    init_sv = StateVector(*init) if init is not None else None
    try:
        return analyze_path(model, tuple(path), init_sv), init_sv
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except ConstructionError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/parse", response_model=ParseResponse)
def parse_endpoint(req: ParseRequest) -> ParseResponse:
    model, diagnostics = parse_with_diagnostics(req.source)
    if model is None:
        return ParseResponse(ok=False, diagnostics=[_diag_out(d) for d in diagnostics])
    return ParseResponse(
        ok=True,
        name=model.name,
        phases=[p.id for p in model.phases],
        transitions=[[t.source, t.target] for t in model.transitions],
        diagnostics=[_diag_out(d) for d in diagnostics],
    )


@app.post("/check", response_model=CheckResponse)
def check_endpoint(req: CheckRequest) -> CheckResponse:
    model = _load_model(req.source)
    analysis, init_sv = _run_analysis(model, req.path, req.init)

    schedule = None
    trace = None
    if analysis.feasible and init_sv is not None:
        try:
            schedule = synthesize_schedule(analysis, model, init_sv, req.strategy)
        except NotImplementedError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        trace = simulate(schedule, model, req.dt)

    resp = CheckResponse(feasible=analysis.feasible, failing_index=analysis.failing_index)
    if req.include_report:
        resp.report = report_json(analysis, schedule)
    if req.include_svg:
        scene = build_analysis_scene(model, analysis, trace)
        resp.svg = render_svg(scene).decode("utf-8")
    if schedule is not None and trace is not None:
        resp.schedule = schedule_json(schedule)
        resp.min_margin = trace.min_margin
        resp.final_state = (trace.final_state.x1, trace.final_state.x2)
        resp.total_time = schedule.total_time
    return resp


@app.post("/search", response_model=SearchResponse)
def search_endpoint(req: SearchRequest) -> SearchResponse:
    model = _load_model(req.source)
    src, dst = req.src, req.dst
    if src is None:
        initials = model.marked_phases(MARK_INITIAL)
        if len(initials) != 1:
            raise HTTPException(
                status_code=400,
                detail="src not given and the model does not have exactly one initial phase")
        src = initials[0]
    if dst is None:
        finals = model.marked_phases(MARK_FINAL)
        if len(finals) != 1:
            raise HTTPException(
                status_code=400,
                detail="dst not given and the model does not have exactly one final phase")
        dst = finals[0]
    init_sv = StateVector(*req.init) if req.init is not None else None
    try:
        analyses = search_paths(model, src, dst, req.max_len, init_sv)
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return SearchResponse(src=src, dst=dst, paths=[list(a.path) for a in analyses])


@app.post("/synth", response_model=SynthResponse)
def synth_endpoint(req: SynthRequest) -> SynthResponse:
    model = _load_model(req.source)
    analysis, init_sv = _run_analysis(model, req.path, req.init)
    if not analysis.feasible:
        return SynthResponse(feasible=False)
    try:
        schedule = synthesize_schedule(analysis, model, init_sv, req.strategy)
    except NotImplementedError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return SynthResponse(
        feasible=True,
        schedule=schedule_json(schedule),
        total_time=schedule.total_time,
        final_state=(schedule.final_state.x1, schedule.final_state.x2),
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(req: SimulateRequest) -> SimulateResponse:
    model = _load_model(req.source)
    try:
        schedule = schedule_from_dict(req.schedule)
        trace = simulate(schedule, model, req.dt)
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=400, detail=f"bad schedule: {exc}") from exc
    final_phase = model.phase(trace.final_phase)
    return SimulateResponse(
        min_margin=trace.min_margin,
        final_state=(trace.final_state.x1, trace.final_state.x2),
        final_phase=trace.final_phase,
        final_in_constraint=final_phase.constraint.contains(trace.final_state, tol=1e-6),
        constraint_respected=trace.constraint_respected,
        samples=len(trace.samples),
    )


@app.post("/plot", response_model=PlotResponse)
def plot_endpoint(req: PlotRequest) -> PlotResponse:
    model = _load_model(req.source)
    analysis, init_sv = _run_analysis(model, req.path, req.init)
    trace = None
    if analysis.feasible and init_sv is not None:
        schedule = synthesize_schedule(analysis, model, init_sv)
        trace = simulate(schedule, model)
    scene = build_analysis_scene(model, analysis, trace)
    return PlotResponse(feasible=analysis.feasible, svg=render_svg(scene).decode("utf-8"))


@app.post("/oracle", response_model=OracleResponse)
def oracle_endpoint(req: OracleRequest) -> OracleResponse:
    model = _load_model(req.source)
    try:
        phase = model.phase(req.phase)
    except KeyError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    x1_lo, x1_hi, x2_lo, x2_hi = req.target_rect
    if x1_lo > x1_hi or x2_lo > x2_hi:
        raise HTTPException(status_code=400, detail="malformed target rectangle")
    target = from_rect(RectConstraint(x1_lo, x1_hi, x2_lo, x2_hi))
    lam = intersect(from_rect(phase.constraint), target)
    if not lam:
        raise HTTPException(
            status_code=400, detail="target does not intersect the phase constraint")
    analytic: list[MonotoneRegion] = []
    try:
        for comp in lam:
            analytic.extend(extended_jump_set(phase, comp))
    except ConstructionError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    indicator = grid_reach(phase, lam[0], req.resolution)
    if len(lam) > 1:  # pointwise OR over components
        for comp in lam[1:]:
            extra = grid_reach(phase, comp, req.resolution)
            indicator.cells[:] |= extra.cells
    agreement = compare(indicator, analytic)
    resp = OracleResponse(
        agreement=agreement.agree_fraction,
        considered=agreement.considered,
        excluded=agreement.excluded,
        disagreements=list(agreement.disagreements),
        nx=indicator.nx,
        ny=indicator.ny,
        metadata=metadata_dict(indicator),
    )
    if req.include_pgm:
        resp.pgm_base64 = base64.b64encode(pgm_bytes(indicator)).decode("ascii")
    return resp
