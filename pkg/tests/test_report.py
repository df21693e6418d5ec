"""JSON reports and SVG figures."""

import json

import numpy as np

from backreach.model import RectConstraint, StateVector
from backreach.reach import analyze_path
from backreach.regions import from_rect, region_from_descriptor
from backreach.report import (
    RegionFill,
    Scene,
    build_analysis_scene,
    canonical_json,
    fmt_number,
    region_outline,
    render_svg,
    report_json,
    schedule_from_dict,
    schedule_json,
)
from backreach.schedule import simulate, synthesize_schedule

PI = ("l0", "l1", "l2", "l1", "l3")
INIT = StateVector(0.05, 0.05)


def test_fmt_number_canonical():
    assert fmt_number(0.5) == "0.5"
    assert fmt_number(2.0) == "2"
    assert fmt_number(1.0 / 3.0) == "0.333333333333"
    assert fmt_number(1e-5) == "1e-05"


def test_canonical_json_is_valid_json():
    doc = canonical_json({"a": [1, 2.5, None, True], "b": "x\"y"})
    assert json.loads(doc) == {"a": [1, 2.5, None, True], "b": 'x"y'}


def test_report_structure_feasible(batch_model):
    analysis = analyze_path(batch_model, PI, INIT)
    schedule = synthesize_schedule(analysis, batch_model, INIT)
    doc = json.loads(report_json(analysis, schedule))
    assert doc["feasible"] is True
    assert "failing_index" not in doc
    assert len(doc["transitions"]) == 4
    for rec in doc["transitions"]:
        assert rec["lambda"] and rec["lambda_ext"]
        for region in rec["lambda"] + rec["lambda_ext"]:
            assert set(region) == {"x1_range", "lower", "upper"}
    assert doc["schedule"]["final"] == "l3"
    assert len(doc["schedule"]["steps"]) == 4


def test_report_structure_infeasible(batch_model):
    analysis = analyze_path(batch_model, ("l0", "l1", "l3"), INIT)
    doc = json.loads(report_json(analysis))
    assert doc["feasible"] is False
    assert doc["failing_index"] == 0
    assert "schedule" not in doc


def test_report_deterministic(batch_model):
    a = analyze_path(batch_model, PI, INIT)
    b = analyze_path(batch_model, PI, INIT)
    assert report_json(a) == report_json(b)


def test_region_descriptors_round_trip_from_report(batch_model):
    rng = np.random.default_rng(3)
    analysis = analyze_path(batch_model, PI, INIT)
    doc = json.loads(report_json(analysis))
    for rec, orig in zip(doc["transitions"], analysis.records):
        for desc, region in zip(rec["lambda_ext"], orig.lam_ext):
            rebuilt = region_from_descriptor(desc)
            for _ in range(250):
                p = StateVector(float(rng.uniform(-0.5, 4.5)),
                                float(rng.uniform(-0.5, 4.5)))
                strict_in = region.contains(p, tol=-1e-7)
                strict_out = not region.contains(p, tol=1e-7)
                if strict_in or strict_out:
                    assert rebuilt.contains(p) == region.contains(p)


def test_schedule_json_round_trip(batch_model):
    # 12 significant digits: values agree to ~1e-11 relative after reload
    analysis = analyze_path(batch_model, PI, INIT)
    schedule = synthesize_schedule(analysis, batch_model, INIT)
    again = schedule_from_dict(json.loads(schedule_json(schedule)))
    assert again.final == schedule.final
    assert again.init == schedule.init
    assert len(again.steps) == len(schedule.steps)
    for a, b in zip(again.steps, schedule.steps):
        assert a.phase == b.phase
        assert abs(a.dwell - b.dwell) < 1e-9
        assert abs(a.exit_state.x1 - b.exit_state.x1) < 1e-9
        assert abs(a.exit_state.x2 - b.exit_state.x2) < 1e-9


# ---------------------------------------------------------------------------
# SVG


def test_svg_single_rectangle_region():
    frame = RectConstraint(0, 4, 0, 4)
    scene = Scene(frame, (RegionFill(from_rect(RectConstraint(1, 2, 1, 2))),))
    svg = render_svg(scene)
    text = svg.decode("utf-8")
    assert text.startswith("<?xml")
    assert text.count('class="region"') == 1
    assert "</svg>" in text


def test_svg_empty_scene_valid():
    svg = render_svg(Scene(RectConstraint(0, 4, 0, 4)))
    text = svg.decode("utf-8")
    assert "<svg" in text and "</svg>" in text
    assert 'class="region"' not in text


def test_svg_deterministic(batch_model):
    analysis = analyze_path(batch_model, PI, INIT)
    schedule = synthesize_schedule(analysis, batch_model, INIT)
    trace = simulate(schedule, batch_model)
    scene = build_analysis_scene(batch_model, analysis, trace)
    assert render_svg(scene) == render_svg(scene)


def test_svg_silhouette_matches_membership(batch_model, nominal_square):
    """The polygon drawn for a region must match membership within ~2 px."""
    from backreach.reach import extended_jump_set

    phase = batch_model.phase("l1")
    region = extended_jump_set(phase, nominal_square)[0]
    pts = region_outline(region)

    n = 400
    frame = batch_model.global_constraint
    px = 4.0 / n  # world units per pixel at 400x400 over [0,4]^2

    # even-odd polygon rasterization on the pixel grid
    xs = np.linspace(frame.x1_lo + px / 2, frame.x1_hi - px / 2, n)
    ys = np.linspace(frame.x2_lo + px / 2, frame.x2_hi - px / 2, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    poly = np.array(pts)
    inside = np.zeros(gx.shape, dtype=bool)
    x0s, y0s = poly[:-1, 0], poly[:-1, 1]
    x1s, y1s = poly[1:, 0], poly[1:, 1]
    for (xa, ya, xb, yb) in zip(x0s, y0s, x1s, y1s):
        cond = (ya > gy) != (yb > gy)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = xa + (gy - ya) / (yb - ya) * (xb - xa)
        inside ^= cond & (gx < xcross)

    member = region.contains_vec(gx.reshape(-1), gy.reshape(-1)).reshape(gx.shape)
    mismatch = inside != member
    # allow disagreement only within a 2-pixel band of the boundary
    band = np.zeros_like(mismatch)
    shifts = range(-2, 3)
    for dx in shifts:
        for dy in shifts:
            rolled = np.roll(np.roll(member, dx, axis=0), dy, axis=1)
            band |= rolled != member
    bad = mismatch & ~band
    assert not bad.any(), f"{bad.sum()} pixels off outside the 2px band"
