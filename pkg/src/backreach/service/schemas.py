"""Pydantic request/response models for the analysis service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class DiagnosticOut(BaseModel):
    line: int
    column: int
    length: int
    message: str
    severity: str


class ParseRequest(BaseModel):
    source: str


class ParseResponse(BaseModel):
    ok: bool
    name: str | None = None
    phases: list[str] = Field(default_factory=list)
    transitions: list[list[str]] = Field(default_factory=list)
    diagnostics: list[DiagnosticOut] = Field(default_factory=list)


class CheckRequest(BaseModel):
    source: str
    path: list[str]
    init: tuple[float, float] | None = None
    strategy: str = "asap"
    dt: float = Field(default=1e-3, gt=0)
    include_report: bool = True
    include_svg: bool = False


class CheckResponse(BaseModel):
    feasible: bool
    failing_index: int | None = None
    report: str | None = None  # canonical JSON document, verbatim
    svg: str | None = None
    schedule: str | None = None  # canonical schedule JSON, verbatim
    min_margin: float | None = None
    final_state: tuple[float, float] | None = None
    total_time: float | None = None


class SearchRequest(BaseModel):
    source: str
    src: str | None = None
    dst: str | None = None
    max_len: int = Field(default=8, ge=2)
    init: tuple[float, float] | None = None


class SearchResponse(BaseModel):
    src: str
    dst: str
    paths: list[list[str]]


class SynthRequest(BaseModel):
    source: str
    path: list[str]
    init: tuple[float, float]
    strategy: str = "asap"


class SynthResponse(BaseModel):
    feasible: bool
    schedule: str | None = None  # canonical schedule JSON, verbatim
    total_time: float | None = None
    final_state: tuple[float, float] | None = None


class SimulateRequest(BaseModel):
    source: str
    schedule: dict
    dt: float = Field(default=1e-3, gt=0)


class SimulateResponse(BaseModel):
    min_margin: float
    final_state: tuple[float, float]
    final_phase: str
    final_in_constraint: bool
    constraint_respected: bool
    samples: int


class PlotRequest(BaseModel):
    source: str
    path: list[str]
    init: tuple[float, float] | None = None


class PlotResponse(BaseModel):
    feasible: bool
    svg: str


class OracleRequest(BaseModel):
    source: str
    phase: str
    target_rect: tuple[float, float, float, float]  # x1_lo, x1_hi, x2_lo, x2_hi
    resolution: float = Field(default=0.01, gt=0)
    include_pgm: bool = False


class OracleResponse(BaseModel):
    agreement: float
    considered: int
    excluded: int
    disagreements: list[tuple[int, int]]
    nx: int
    ny: int
    metadata: dict
    pgm_base64: str | None = None


class ErrorResponse(BaseModel):
    detail: str
    diagnostics: list[DiagnosticOut] = Field(default_factory=list)
