"""Parser and serializer for the textual automaton format (.hyb).

Grammar (whitespace-insensitive, `#` comments to end of line)::

    model       := "automaton" IDENT global phase+ transition*
    global      := "global" "constraint" bounds
    bounds      := "x1" "in" interval "," "x2" "in" interval
    interval    := "[" number "," number "]"
    phase       := "phase" IDENT "{" "dynamics" ode ";" ode
                   ("constraint" bounds)? ("marked" ("initial"|"final"))? "}"
    ode         := VAR "'" "=" affine
    affine      := ("-")? term (("+"|"-") term)*
    term        := NUMBER | NUMBER "*" VAR | VAR
    transition  := "transition" IDENT "->" IDENT ("{" "jump" jmap ";" jmap "}")?
    jmap        := VAR "'" "=" number "*" VAR ("+"|"-") NUMBER
    number      := ("-")? NUMBER

Dynamics are affine expressions in the phase's own variable; any mention of
the other variable is rejected where it occurs, which enforces decoupling at
the syntax boundary.  Parsed dynamics are normalized to x' = -a*x + b with
a >= 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    MARK_FINAL,
    MARK_INITIAL,
    MARK_NONE,
    AxisAffineJump,
    AxisDynamics,
    DecoupledDynamics,
    HybridAutomaton,
    IDENTITY_JUMP,
    Phase,
    RectConstraint,
    Transition,
    validate,
)


@dataclass(frozen=True, slots=True)
class SourceSpan:
    line: int
    column: int
    length: int


@dataclass(frozen=True, slots=True)
class ParseDiagnostic:
    span: SourceSpan
    message: str
    severity: str = "error"

    def render(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.severity}: {self.message}"


class ParseFailure(Exception):
    """Parsing failed; carries positioned diagnostics."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        super().__init__("; ".join(d.render() for d in diagnostics))
        self.diagnostics = diagnostics


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(\.\d*)?([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<symbol>[{}\[\],;'=*+\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class _Token:
    type: str  # "number" | "ident" | "symbol" | "eof"
    value: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, len(self.value))


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseFailure([ParseDiagnostic(
                SourceSpan(line, col, 1), f"unexpected character {source[pos]!r}")])
        text = m.group(0)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            if kind == "arrow":
                kind = "symbol"
            tokens.append(_Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0
        self.diagnostics: list[ParseDiagnostic] = []

    # -- token plumbing ----------------------------------------------------

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        if tok.type != "eof":
            self.i += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.cur
        raise ParseFailure(self.diagnostics + [ParseDiagnostic(tok.span, message)])

    def error_at(self, message: str, tok: _Token) -> None:
        self.diagnostics.append(ParseDiagnostic(tok.span, message))

    def expect_symbol(self, sym: str) -> _Token:
        if self.cur.type == "symbol" and self.cur.value == sym:
            return self.advance()
        self.fail(f"expected {sym!r}, found {self.cur.value or 'end of input'!r}")

    def expect_ident(self, what: str = "identifier") -> _Token:
        if self.cur.type == "ident":
            return self.advance()
        self.fail(f"expected {what}, found {self.cur.value or 'end of input'!r}")

    def expect_keyword(self, word: str) -> _Token:
        if self.cur.type == "ident" and self.cur.value == word:
            return self.advance()
        self.fail(f"expected keyword {word!r}, found {self.cur.value or 'end of input'!r}")

    def at_keyword(self, word: str) -> bool:
        return self.cur.type == "ident" and self.cur.value == word

    def expect_number(self) -> tuple[float, _Token]:
        sign = 1.0
        first = self.cur
        if self.cur.type == "symbol" and self.cur.value == "-":
            self.advance()
            sign = -1.0
        if self.cur.type != "number":
            self.fail("expected a number", first)
        tok = self.advance()
        return sign * float(tok.value), tok

    # -- grammar -----------------------------------------------------------

    def parse_model(self) -> tuple[HybridAutomaton, dict[str, SourceSpan]]:
        self.expect_keyword("automaton")
        name_tok = self.expect_ident("automaton name")
        spans: dict[str, SourceSpan] = {"automaton": name_tok.span,
                                        "global constraint": name_tok.span}
        self.expect_keyword("global")
        self.expect_keyword("constraint")
        gc = self.parse_bounds()
        spans["global constraint"] = name_tok.span

        phases: list[Phase] = []
        while self.at_keyword("phase"):
            phase, span = self.parse_phase(gc)
            phases.append(phase)
            spans.setdefault(f"phase {phase.id}", span)
        if not phases:
            self.fail("expected at least one phase")

        transitions: list[Transition] = []
        while self.at_keyword("transition"):
            tr, span = self.parse_transition()
            transitions.append(tr)
            spans.setdefault(f"transition {tr.source}->{tr.target}", span)
        if self.cur.type != "eof":
            self.fail(f"unexpected {self.cur.value!r}")

        return (
            HybridAutomaton(name_tok.value, gc, tuple(phases), tuple(transitions)),
            spans,
        )

    def parse_bounds(self) -> RectConstraint:
        self.expect_keyword("x1")
        self.expect_keyword("in")
        x1_lo, x1_hi = self.parse_interval()
        self.expect_symbol(",")
        self.expect_keyword("x2")
        self.expect_keyword("in")
        x2_lo, x2_hi = self.parse_interval()
        return RectConstraint(x1_lo, x1_hi, x2_lo, x2_hi)

    def parse_interval(self) -> tuple[float, float]:
        self.expect_symbol("[")
        lo, _ = self.expect_number()
        self.expect_symbol(",")
        hi, _ = self.expect_number()
        self.expect_symbol("]")
        return lo, hi

    def parse_phase(self, gc: RectConstraint) -> tuple[Phase, SourceSpan]:
        self.expect_keyword("phase")
        id_tok = self.expect_ident("phase id")
        self.expect_symbol("{")
        self.expect_keyword("dynamics")
        ax1 = self.parse_ode("x1")
        self.expect_symbol(";")
        ax2 = self.parse_ode("x2")
        constraint = gc
        if self.at_keyword("constraint"):
            self.advance()
            constraint = self.parse_bounds()
        marked = MARK_NONE
        if self.at_keyword("marked"):
            self.advance()
            mark_tok = self.expect_ident("'initial' or 'final'")
            if mark_tok.value == "initial":
                marked = MARK_INITIAL
            elif mark_tok.value == "final":
                marked = MARK_FINAL
            else:
                self.fail("expected 'initial' or 'final'", mark_tok)
        self.expect_symbol("}")
        return Phase(id_tok.value, DecoupledDynamics(ax1, ax2), constraint, marked), id_tok.span

    def parse_ode(self, var: str) -> AxisDynamics:
        var_tok = self.expect_ident("state variable")
        if var_tok.value not in ("x1", "x2"):
            self.fail("expected 'x1' or 'x2'", var_tok)
        if var_tok.value != var:
            self.fail(f"expected the {var} equation here", var_tok)
        self.expect_symbol("'")
        self.expect_symbol("=")
        coeff, const = self.parse_affine(var)
        a = -coeff
        if a < 0:
            self.error_at(
                f"positive self-coefficient: {var}' grows with {var} (a = {a} < 0)",
                var_tok,
            )
        return AxisDynamics(a, const)

    def parse_affine(self, var: str) -> tuple[float, float]:
        """Affine expression over `var` only; returns (coefficient, constant)."""
        coeff = 0.0
        const = 0.0
        sign = 1.0
        if self.cur.type == "symbol" and self.cur.value == "-":
            self.advance()
            sign = -1.0
        while True:
            c, k = self.parse_term(var, sign)
            coeff += c
            const += k
            if self.cur.type == "symbol" and self.cur.value in ("+", "-"):
                sign = 1.0 if self.advance().value == "+" else -1.0
            else:
                return coeff, const

    def parse_term(self, var: str, sign: float) -> tuple[float, float]:
        if self.cur.type == "number":
            num_tok = self.advance()
            value = sign * float(num_tok.value)
            if self.cur.type == "symbol" and self.cur.value == "*":
                self.advance()
                var_tok = self.expect_ident("state variable")
                self.check_own_var(var, var_tok)
                return value, 0.0
            return 0.0, value
        if self.cur.type == "ident":
            var_tok = self.advance()
            self.check_own_var(var, var_tok)
            return sign, 0.0
        self.fail("expected a term")

    def check_own_var(self, var: str, tok: _Token) -> None:
        if tok.value not in ("x1", "x2"):
            self.fail(f"unknown variable {tok.value!r}", tok)
        if tok.value != var:
            self.error_at(
                f"coupled dynamics: {var}' must not depend on {tok.value}", tok)

    def parse_transition(self) -> tuple[Transition, SourceSpan]:
        kw = self.expect_keyword("transition")
        src = self.expect_ident("source phase id")
        self.expect_symbol("->")
        dst = self.expect_ident("target phase id")
        jump = IDENTITY_JUMP
        if self.cur.type == "symbol" and self.cur.value == "{":
            self.advance()
            self.expect_keyword("jump")
            a1, b1 = self.parse_jmap("x1")
            self.expect_symbol(";")
            a2, b2 = self.parse_jmap("x2")
            self.expect_symbol("}")
            jump = AxisAffineJump(a1, b1, a2, b2)
        return Transition(src.value, dst.value, jump), kw.span

    def parse_jmap(self, var: str) -> tuple[float, float]:
        var_tok = self.expect_ident("state variable")
        if var_tok.value != var:
            self.fail(f"expected the {var} jump here", var_tok)
        self.expect_symbol("'")
        self.expect_symbol("=")
        alpha, alpha_tok = self.expect_number()
        self.expect_symbol("*")
        rhs_tok = self.expect_ident("state variable")
        if rhs_tok.value != var:
            self.fail(f"jump for {var} must scale {var}", rhs_tok)
        if self.cur.type == "symbol" and self.cur.value in ("+", "-"):
            sign = 1.0 if self.advance().value == "+" else -1.0
        else:
            self.fail("expected '+' or '-'")
        raw_beta, _ = self.expect_number()
        beta = sign * raw_beta
        if alpha <= 0:
            self.error_at("jump scale factor must be strictly positive", alpha_tok)
        return alpha, beta


def parse_with_diagnostics(source: str,
                           ) -> tuple[HybridAutomaton | None, list[ParseDiagnostic]]:
    """Parse, returning (model, diagnostics); model is None on failure.

    Warning-severity diagnostics (e.g. missing marked phases) accompany a
    successfully parsed model.
    """
    try:
        tokens = _tokenize(source)
        parser = _Parser(tokens)
        model, spans = parser.parse_model()
        diagnostics = list(parser.diagnostics)
    except ParseFailure as exc:
        return None, exc.diagnostics

    report = validate(model)
    for violation in report.violations:
        span = spans.get(violation.element, spans.get("automaton", SourceSpan(1, 1, 0)))
        diagnostics.append(ParseDiagnostic(span, violation.message, violation.severity))
    if any(d.severity == "error" for d in diagnostics):
        return None, diagnostics
    return model, diagnostics


def parse(source: str) -> HybridAutomaton:
    """Parse or raise ParseFailure with positioned diagnostics."""
    model, diagnostics = parse_with_diagnostics(source)
    if model is None:
        raise ParseFailure([d for d in diagnostics if d.severity == "error"] or diagnostics)
    return model


# ---------------------------------------------------------------------------
# serialization


def _num(x: float) -> str:
    return repr(float(x))


def _fmt_affine(axis: AxisDynamics, var: str) -> str:
    """Render x' = -a*x + b canonically, constant first (e.g. ``10 - 2*x1``)."""
    coeff = -axis.a
    terms: list[str] = []
    if axis.b != 0 or coeff == 0:
        terms.append(_num(axis.b))
    if coeff != 0:
        mag = abs(coeff)
        body = var if mag == 1 else f"{_num(mag)}*{var}"
        if terms:
            terms.append(f"{'-' if coeff < 0 else '+'} {body}")
        else:
            terms.append(body if coeff > 0 else f"-{body}")
    return " ".join(terms)


def _fmt_bounds(rect: RectConstraint) -> str:
    return (
        f"x1 in [{_num(rect.x1_lo)}, {_num(rect.x1_hi)}], "
        f"x2 in [{_num(rect.x2_lo)}, {_num(rect.x2_hi)}]"
    )


def _fmt_jmap(var: str, alpha: float, beta: float) -> str:
    sign = "+" if beta >= 0 else "-"
    return f"{var}' = {_num(alpha)}*{var} {sign} {_num(abs(beta))}"


def serialize(automaton: HybridAutomaton) -> str:
    """Canonical text form; phases and transitions keep declaration order.

    The output re-parses to a structurally equal model.  Phase constraints
    equal to the global constraint and identity jumps are omitted, matching
    the conventions of the format.
    """
    report = validate(automaton)
    if report.errors:
        first = report.errors[0]
        raise ValueError(f"cannot serialize invalid model: {first.element}: {first.message}")

    lines: list[str] = [f"automaton {automaton.name}"]
    lines.append(f"global constraint {_fmt_bounds(automaton.global_constraint)}")
    lines.append("")
    for ph in automaton.phases:
        lines.append(f"phase {ph.id} {{")
        lines.append(
            f"  dynamics x1' = {_fmt_affine(ph.dynamics.axis1, 'x1')}; "
            f"x2' = {_fmt_affine(ph.dynamics.axis2, 'x2')}"
        )
        if ph.constraint != automaton.global_constraint:
            lines.append(f"  constraint {_fmt_bounds(ph.constraint)}")
        if ph.marked != MARK_NONE:
            lines.append(f"  marked {ph.marked}")
        lines.append("}")
    if automaton.transitions:
        lines.append("")
    for tr in automaton.transitions:
        head = f"transition {tr.source} -> {tr.target}"
        if tr.jump.is_identity:
            lines.append(head)
        else:
            j = tr.jump
            lines.append(
                f"{head} {{ jump {_fmt_jmap('x1', j.alpha1, j.beta1)}; "
                f"{_fmt_jmap('x2', j.alpha2, j.beta2)} }}"
            )
    return "\n".join(lines) + "\n"
