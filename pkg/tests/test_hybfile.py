"""Parser and serializer tests, including the round-trip property."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backreach.hybfile import ParseFailure, parse, parse_with_diagnostics, serialize
from backreach.model import RectConstraint

from conftest import random_valid_model

MINIMAL = """
automaton tiny
global constraint x1 in [0, 1], x2 in [0, 1]
phase only {
  dynamics x1' = 0; x2' = 0
  marked initial
}
"""


def test_batch_parses_to_expected_dynamics(batch_model):
    l1 = batch_model.phase("l1")
    assert (l1.dynamics.axis1.a, l1.dynamics.axis1.b) == (2.0, 10.0)
    assert (l1.dynamics.axis2.a, l1.dynamics.axis2.b) == (1.0, 3.0)
    l2 = batch_model.phase("l2")
    assert (l2.dynamics.axis1.a, l2.dynamics.axis1.b) == (2.0, -2.0)
    l0 = batch_model.phase("l0")
    assert l0.constraint == RectConstraint(0, 0.1, 0, 0.1)
    assert l0.marked == "initial"
    assert batch_model.phase("l3").marked == "final"
    assert batch_model.global_constraint == RectConstraint(0, 4, 0, 4)
    pairs = {(t.source, t.target) for t in batch_model.transitions}
    assert pairs == {("l0", "l1"), ("l1", "l2"), ("l2", "l1"), ("l1", "l3")}
    assert all(t.jump.is_identity for t in batch_model.transitions)


def test_zero_dynamics_parse():
    model = parse(MINIMAL)
    dyn = model.phase("only").dynamics
    assert (dyn.axis1.a, dyn.axis1.b, dyn.axis2.a, dyn.axis2.b) == (0, 0, 0, 0)


def test_omitted_constraint_defaults_to_global():
    model = parse(MINIMAL)
    assert model.phase("only").constraint == model.global_constraint


def test_coupled_dynamics_rejected_at_offending_token():
    src = MINIMAL.replace("x1' = 0", "x1' = 3 - x2")
    with pytest.raises(ParseFailure) as err:
        parse(src)
    diags = err.value.diagnostics
    assert any("coupled dynamics" in d.message for d in diags)
    d = next(d for d in diags if "coupled dynamics" in d.message)
    line_text = src.split("\n")[d.span.line - 1]
    assert line_text[d.span.column - 1: d.span.column - 1 + d.span.length] == "x2"


def test_positive_self_coefficient_rejected():
    src = MINIMAL.replace("x1' = 0", "x1' = 1 + 2*x1")
    with pytest.raises(ParseFailure) as err:
        parse(src)
    assert any("positive self-coefficient" in d.message for d in err.value.diagnostics)


def test_unknown_phase_in_transition_rejected():
    src = MINIMAL + "transition only -> ghost\n"
    with pytest.raises(ParseFailure) as err:
        parse(src)
    assert any("unknown phase id" in d.message for d in err.value.diagnostics)


def test_duplicate_phase_rejected():
    src = MINIMAL + """
phase only {
  dynamics x1' = 0; x2' = 0
}
"""
    with pytest.raises(ParseFailure) as err:
        parse(src)
    assert any("duplicate phase id" in d.message for d in err.value.diagnostics)


def test_syntax_error_has_position():
    with pytest.raises(ParseFailure) as err:
        parse("automaton m global constraint x1 in [0 1], x2 in [0, 1]")
    d = err.value.diagnostics[0]
    assert d.span.line == 1 and d.span.column > 0


def test_diagnostic_spans_inside_source():
    bad_sources = [
        "automaton",
        "automaton m global constraint x1 in [0,1], x2 in [0,1]",
        MINIMAL.replace("x1' = 0", "x1' = x2"),
        MINIMAL + "transition only -> only\n",
    ]
    for src in bad_sources:
        _, diags = parse_with_diagnostics(src)
        lines = src.split("\n")
        for d in diags:
            assert 1 <= d.span.line <= len(lines)
            assert d.span.column >= 1
            assert d.span.column - 1 + d.span.length <= len(lines[d.span.line - 1]) + 1


def test_parse_never_returns_invalid_model():
    from backreach.model import validate

    model, diags = parse_with_diagnostics(MINIMAL)
    assert model is not None
    assert not validate(model).errors


def test_batch_round_trip(batch_model, batch_source):
    text = serialize(batch_model)
    again = parse(text)
    assert again == batch_model
    assert serialize(again) == text


def test_serialize_deterministic(batch_model):
    assert serialize(batch_model) == serialize(batch_model)


def test_minimal_model_serializes():
    model = parse(MINIMAL)
    text = serialize(model)
    assert parse(text) == model


def test_jump_serialization_round_trip():
    src = MINIMAL + """
phase other {
  dynamics x1' = 1 - x1; x2' = 0.5
  marked final
}
transition only -> other { jump x1' = 2.0*x1 + -0.5; x2' = 0.25*x2 - 1.5 }
"""
    model = parse(src)
    jump = model.transition("only", "other").jump
    assert (jump.alpha1, jump.beta1, jump.alpha2, jump.beta2) == (2.0, -0.5, 0.25, -1.5)
    assert parse(serialize(model)) == model


def test_round_trip_on_random_models():
    rng = np.random.default_rng(42)
    for _ in range(50):
        model = random_valid_model(rng)
        text = serialize(model)
        again = parse(text)
        assert again == model, f"round-trip mismatch for {model.name}"
        assert serialize(again) == text


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(0, 10, allow_nan=False),
    b=st.floats(-10, 10, allow_nan=False),
    lo=st.floats(-5, 0, allow_nan=False),
    hi=st.floats(0.1, 5, allow_nan=False),
)
def test_round_trip_property_single_phase(a, b, lo, hi):
    from backreach.model import (
        DecoupledDynamics,
        HybridAutomaton,
        Phase,
    )

    gc = RectConstraint(lo, hi, lo, hi)
    model = HybridAutomaton(
        "prop", gc,
        (Phase("p0", DecoupledDynamics.from_coeffs(a, b, 0, 0), gc, "initial"),),
        (),
    )
    assert parse(serialize(model)) == model
