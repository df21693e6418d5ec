"""Exact calculus of x1-monotone planar regions.

A region is bounded by a lower and an upper chain, each an ordered list of
typed curve segments that together form the graph of a (possibly jumping)
function of x1 over the region's x1-range.  Because every vertical line meets
such a region in at most one interval, membership, intersection and affine
preimage all reduce to one-dimensional sweeps over chain breakpoints.

Curve kinds are closed under per-axis affine preimages, so backward analysis
never leaves this segment vocabulary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AxisAffineJump, RectConstraint, StateVector

EPS_GEO = 1e-9       # coincidence / containment tolerance
TAU_ROOT = 1e-12     # bisection bracket width for curve crossings
ROOT_SCAN = 64       # sign-change scan intervals per span pair

_EXP_CLAMP = 700.0
_TINY = 1e-300

SIDE_LEFT = -1
SIDE_RIGHT = 1


def _safe_exp(z):
    return np.exp(np.clip(z, -_EXP_CLAMP, _EXP_CLAMP))


# ---------------------------------------------------------------------------
# curve kinds


@dataclass(frozen=True, slots=True)
class Horizontal:
    x2: float

    kind = "horizontal"

    def value(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.x2) if np.ndim(x) else self.x2

    def slope(self, x):
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0

    def preimage(self, jump: AxisAffineJump) -> "Horizontal":
        return Horizontal((self.x2 - jump.beta2) / jump.alpha2)

    def params(self) -> dict:
        return {"x2": self.x2}

    def close_to(self, other, tol: float = EPS_GEO) -> bool:
        return isinstance(other, Horizontal) and abs(self.x2 - other.x2) <= tol


@dataclass(frozen=True, slots=True)
class Affine:
    slope_: float
    intercept: float

    kind = "affine"

    def value(self, x):
        return self.slope_ * np.asarray(x, dtype=float) + self.intercept if np.ndim(x) \
            else self.slope_ * x + self.intercept

    def slope(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.slope_) if np.ndim(x) else self.slope_

    def preimage(self, jump: AxisAffineJump) -> "Affine":
        s = self.slope_ * jump.alpha1 / jump.alpha2
        c = (self.slope_ * jump.beta1 + self.intercept - jump.beta2) / jump.alpha2
        return Affine(s, c)

    def params(self) -> dict:
        return {"slope": self.slope_, "intercept": self.intercept}

    def close_to(self, other, tol: float = EPS_GEO) -> bool:
        return (
            isinstance(other, Affine)
            and abs(self.slope_ - other.slope_) <= tol
            and abs(self.intercept - other.intercept) <= tol
        )


@dataclass(frozen=True, slots=True)
class ExpCurve:
    """x2 = c + K * exp(m * x1); monotone for K, m != 0."""

    c: float
    K: float
    m: float

    kind = "exp"

    def value(self, x):
        return self.c + self.K * _safe_exp(self.m * np.asarray(x, dtype=float))

    def slope(self, x):
        return self.K * self.m * _safe_exp(self.m * np.asarray(x, dtype=float))

    def preimage(self, jump: AxisAffineJump) -> "ExpCurve":
        c = (self.c - jump.beta2) / jump.alpha2
        K = self.K * math.exp(self.m * jump.beta1) / jump.alpha2
        return ExpCurve(c, K, self.m * jump.alpha1)

    def params(self) -> dict:
        return {"c": self.c, "K": self.K, "m": self.m}

    def close_to(self, other, tol: float = EPS_GEO) -> bool:
        return (
            isinstance(other, ExpCurve)
            and abs(self.c - other.c) <= tol
            and abs(self.K - other.K) <= tol
            and abs(self.m - other.m) <= tol
        )


@dataclass(frozen=True, slots=True)
class PowCurve:
    """x2 = c2 + K * |x1 - c1|**gamma on one side of c1; gamma > 0."""

    c1: float
    c2: float
    K: float
    gamma: float
    side: int  # SIDE_LEFT or SIDE_RIGHT of c1

    kind = "pow"

    def _base(self, x):
        return np.maximum(self.side * (np.asarray(x, dtype=float) - self.c1), 0.0)

    def value(self, x):
        return self.c2 + self.K * self._base(x) ** self.gamma

    def slope(self, x):
        base = np.maximum(self._base(x), _TINY)
        return self.K * self.gamma * self.side * base ** (self.gamma - 1.0)

    def preimage(self, jump: AxisAffineJump) -> "PowCurve":
        c1 = (self.c1 - jump.beta1) / jump.alpha1
        c2 = (self.c2 - jump.beta2) / jump.alpha2
        K = self.K * jump.alpha1 ** self.gamma / jump.alpha2
        return PowCurve(c1, c2, K, self.gamma, self.side)

    def params(self) -> dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "K": self.K,
            "gamma": self.gamma,
            "side": "left" if self.side == SIDE_LEFT else "right",
        }

    def close_to(self, other, tol: float = EPS_GEO) -> bool:
        return (
            isinstance(other, PowCurve)
            and self.side == other.side
            and abs(self.c1 - other.c1) <= tol
            and abs(self.c2 - other.c2) <= tol
            and abs(self.K - other.K) <= tol
            and abs(self.gamma - other.gamma) <= tol
        )


@dataclass(frozen=True, slots=True)
class LogCurve:
    """x2 = c2 + K * ln|x1 - c1| on one side of c1.

    Inverse of an exponential relation in the other axis; arises for orbits
    whose x1 axis decays while x2 integrates.
    """

    c1: float
    c2: float
    K: float
    side: int

    kind = "log"

    def _base(self, x):
        return np.maximum(self.side * (np.asarray(x, dtype=float) - self.c1), _TINY)

    def value(self, x):
        return self.c2 + self.K * np.log(self._base(x))

    def slope(self, x):
        return self.K * self.side / self._base(x)

    def preimage(self, jump: AxisAffineJump) -> "LogCurve":
        c1 = (self.c1 - jump.beta1) / jump.alpha1
        c2 = (self.c2 + self.K * math.log(jump.alpha1) - jump.beta2) / jump.alpha2
        return LogCurve(c1, c2, self.K / jump.alpha2, self.side)

    def params(self) -> dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "K": self.K,
            "side": "left" if self.side == SIDE_LEFT else "right",
        }

    def close_to(self, other, tol: float = EPS_GEO) -> bool:
        return (
            isinstance(other, LogCurve)
            and self.side == other.side
            and abs(self.c1 - other.c1) <= tol
            and abs(self.c2 - other.c2) <= tol
            and abs(self.K - other.K) <= tol
        )


@dataclass(frozen=True, slots=True)
class Vertical:
    """Zero-width connector between two chain values at the same abscissa."""

    y_a: float
    y_b: float

    kind = "vertical"

    def params(self) -> dict:
        return {"x2_lo": min(self.y_a, self.y_b), "x2_hi": max(self.y_a, self.y_b)}

    def close_to(self, other, tol: float = EPS_GEO) -> bool:
        return (
            isinstance(other, Vertical)
            and abs(self.y_a - other.y_a) <= tol
            and abs(self.y_b - other.y_b) <= tol
        )


FuncCurve = Horizontal | Affine | ExpCurve | PowCurve | LogCurve
Curve = FuncCurve | Vertical

_KIND_TO_CLS = {
    "horizontal": Horizontal,
    "affine": Affine,
    "exp": ExpCurve,
    "pow": PowCurve,
    "log": LogCurve,
    "vertical": Vertical,
}


@dataclass(frozen=True, slots=True)
class CurveSegment:
    """A curve restricted to an x1 span [x1_a, x1_b] (zero width for verticals)."""

    curve: Curve
    x1_a: float
    x1_b: float

    @property
    def is_vertical(self) -> bool:
        return isinstance(self.curve, Vertical)

    @property
    def start(self) -> tuple[float, float]:
        if isinstance(self.curve, Vertical):
            return (self.x1_a, self.curve.y_a)
        return (self.x1_a, float(self.curve.value(self.x1_a)))

    @property
    def end(self) -> tuple[float, float]:
        if isinstance(self.curve, Vertical):
            return (self.x1_b, self.curve.y_b)
        return (self.x1_b, float(self.curve.value(self.x1_b)))

    def covers(self, x: float, tol: float = EPS_GEO) -> bool:
        return self.x1_a - tol <= x <= self.x1_b + tol

    def descriptor(self) -> dict:
        d = {"kind": self.curve.kind, "params": self.curve.params(), "span": [self.x1_a, self.x1_b]}
        if isinstance(self.curve, Vertical):
            d["params"]["x1"] = self.x1_a
        return d


def segment_from_descriptor(d: dict) -> CurveSegment:
    cls = _KIND_TO_CLS[d["kind"]]
    p = dict(d["params"])
    a, b = d["span"]
    if cls is Vertical:
        return CurveSegment(Vertical(p["x2_lo"], p["x2_hi"]), a, b)
    if cls is Horizontal:
        return CurveSegment(Horizontal(p["x2"]), a, b)
    if cls is Affine:
        return CurveSegment(Affine(p["slope"], p["intercept"]), a, b)
    if cls is ExpCurve:
        return CurveSegment(ExpCurve(p["c"], p["K"], p["m"]), a, b)
    side = SIDE_LEFT if p["side"] == "left" else SIDE_RIGHT
    if cls is PowCurve:
        return CurveSegment(PowCurve(p["c1"], p["c2"], p["K"], p["gamma"], side), a, b)
    return CurveSegment(LogCurve(p["c1"], p["c2"], p["K"], side), a, b)


Chain = tuple[CurveSegment, ...]


def _chain_value(chain: Chain, x, take_min: bool):
    """Envelope value of the chain's function pieces at abscissa x.

    At a jump abscissa both neighbours cover x; the min (for lower chains) or
    max (for upper chains) realizes the closed-region convention.  Vertical
    connectors never extend beyond their neighbours' endpoint values, so they
    are skipped.
    """
    xs = np.asarray(x, dtype=float)
    out = np.full(xs.shape, np.inf if take_min else -np.inf)
    for seg in chain:
        if seg.is_vertical:
            continue
        mask = (xs >= seg.x1_a - EPS_GEO) & (xs <= seg.x1_b + EPS_GEO)
        if not np.any(mask):
            continue
        vals = seg.curve.value(np.where(mask, xs, seg.x1_a))
        out = np.where(mask, np.fmin(out, vals) if take_min else np.fmax(out, vals), out)
    return out if np.ndim(x) else float(out)


# ---------------------------------------------------------------------------
# monotone regions


@dataclass(frozen=True)
class MonotoneRegion:
    x1_lo: float
    x1_hi: float
    lower: Chain
    upper: Chain
    empty: bool = False

    @classmethod
    def empty_region(cls) -> "MonotoneRegion":
        return cls(0.0, 0.0, (), (), empty=True)

    @property
    def x1_range(self) -> tuple[float, float]:
        return (self.x1_lo, self.x1_hi)

    def lower_at(self, x):
        return _chain_value(self.lower, x, take_min=True)

    def upper_at(self, x):
        return _chain_value(self.upper, x, take_min=False)

    def contains(self, p: StateVector, tol: float = EPS_GEO) -> bool:
        if self.empty:
            return False
        if not (self.x1_lo - tol <= p.x1 <= self.x1_hi + tol):
            return False
        x = min(max(p.x1, self.x1_lo), self.x1_hi)
        return self.lower_at(x) - tol <= p.x2 <= self.upper_at(x) + tol

    def contains_vec(self, x1s: np.ndarray, x2s: np.ndarray, tol: float = EPS_GEO) -> np.ndarray:
        if self.empty:
            return np.zeros(np.shape(x1s), dtype=bool)
        in_range = (x1s >= self.x1_lo - tol) & (x1s <= self.x1_hi + tol)
        xc = np.clip(x1s, self.x1_lo, self.x1_hi)
        lo = _chain_value(self.lower, xc, take_min=True)
        hi = _chain_value(self.upper, xc, take_min=False)
        return in_range & (x2s >= lo - tol) & (x2s <= hi + tol)

    def descriptor(self) -> dict:
        return {
            "x1_range": [self.x1_lo, self.x1_hi],
            "lower": [s.descriptor() for s in self.lower],
            "upper": [s.descriptor() for s in self.upper],
        }


def region_from_descriptor(d: dict) -> MonotoneRegion:
    u, v = d["x1_range"]
    return MonotoneRegion(
        u, v,
        tuple(segment_from_descriptor(s) for s in d["lower"]),
        tuple(segment_from_descriptor(s) for s in d["upper"]),
    )


def from_rect(r: RectConstraint) -> MonotoneRegion:
    """Rectangle as a region: horizontal chains over [x1_lo, x1_hi]."""
    lower = (CurveSegment(Horizontal(r.x2_lo), r.x1_lo, r.x1_hi),)
    upper = (CurveSegment(Horizontal(r.x2_hi), r.x1_lo, r.x1_hi),)
    return MonotoneRegion(r.x1_lo, r.x1_hi, lower, upper)


def is_empty(region: MonotoneRegion) -> bool:
    if region.empty or not region.lower or not region.upper:
        return True
    return region.x1_hi < region.x1_lo - EPS_GEO


def contains(region: MonotoneRegion, p: StateVector, tol: float = EPS_GEO) -> bool:
    return region.contains(p, tol)


def probe_monotone(region: MonotoneRegion, x1: float) -> tuple[float, float] | None:
    """Intersection of the vertical line at x1 with the region: one closed
    interval or nothing."""
    if is_empty(region) or not (region.x1_lo - EPS_GEO <= x1 <= region.x1_hi + EPS_GEO):
        return None
    x = min(max(x1, region.x1_lo), region.x1_hi)
    lo, hi = region.lower_at(x), region.upper_at(x)
    if lo > hi + EPS_GEO:
        return None
    if lo > hi:  # touching within tolerance: collapse to a point
        lo = hi = 0.5 * (lo + hi)
    return (lo, hi)


def region_ybounds(region: MonotoneRegion) -> tuple[float, float]:
    """Bounding y-interval; chain curves are monotone so endpoints suffice."""
    ys: list[float] = []
    for chain in (region.lower, region.upper):
        for seg in chain:
            ys.append(seg.start[1])
            ys.append(seg.end[1])
    return (min(ys), max(ys))


def extreme_points(region: MonotoneRegion) -> list[StateVector]:
    """Junctions between consecutive chain segments plus the chain endpoints."""
    if is_empty(region):
        raise ValueError("extreme points of an empty region")
    pts: list[tuple[float, float]] = []
    for chain in (region.lower, region.upper):
        if not chain:
            continue
        pts.append(chain[0].start)
        for seg in chain:
            pts.append(seg.end)
        for prev, nxt in zip(chain, chain[1:]):
            pts.append(nxt.start)
            pts.append(prev.end)
    out: list[StateVector] = []
    for x, y in pts:
        if not any(abs(x - q.x1) <= EPS_GEO and abs(y - q.x2) <= EPS_GEO for q in out):
            out.append(StateVector(x, y))
    return out


# ---------------------------------------------------------------------------
# curve crossings


def _analytic_roots(ca: FuncCurve, cb: FuncCurve) -> list[float] | None:
    """Closed-form crossing abscissae for the simple kind pairs, else None."""
    a, b = ca, cb
    if isinstance(a, Horizontal) and isinstance(b, Horizontal):
        return []
    if isinstance(a, (Horizontal, Affine)) and isinstance(b, (Horizontal, Affine)):
        sa = a.slope_ if isinstance(a, Affine) else 0.0
        ia = a.intercept if isinstance(a, Affine) else a.x2
        sb = b.slope_ if isinstance(b, Affine) else 0.0
        ib = b.intercept if isinstance(b, Affine) else b.x2
        if sa == sb:
            return []
        return [(ib - ia) / (sa - sb)]
    if isinstance(a, Horizontal) and isinstance(b, (ExpCurve, PowCurve, LogCurve)):
        a, b = b, a
    if isinstance(b, Horizontal):
        y = b.x2
        if isinstance(a, ExpCurve):
            if a.K == 0 or a.m == 0:
                return []
            ratio = (y - a.c) / a.K
            return [math.log(ratio) / a.m] if ratio > 0 else []
        if isinstance(a, PowCurve):
            if a.K == 0:
                return []
            ratio = (y - a.c2) / a.K
            if ratio < 0:
                return []
            return [a.c1 + a.side * ratio ** (1.0 / a.gamma)]
        if isinstance(a, LogCurve):
            if a.K == 0:
                return []
            return [a.c1 + a.side * math.exp((y - a.c2) / a.K)]
    return None


def _bisect_zero(f, lo: float, hi: float) -> float:
    flo = f(lo)
    for _ in range(200):
        if hi - lo <= TAU_ROOT:
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (flo < 0) == (fmid < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chain_root(seg_a: CurveSegment, seg_b: CurveSegment) -> list[float]:
    """All abscissae in the span overlap where the two curve functions cross."""
    if seg_a.is_vertical or seg_b.is_vertical:
        return []
    lo = max(seg_a.x1_a, seg_b.x1_a)
    hi = min(seg_a.x1_b, seg_b.x1_b)
    if hi < lo:
        return []
    roots = _analytic_roots(seg_a.curve, seg_b.curve)
    if roots is not None:
        return sorted(r for r in roots if lo - EPS_GEO <= r <= hi + EPS_GEO)
    if hi - lo <= TAU_ROOT:
        return []
    xs = np.linspace(lo, hi, ROOT_SCAN + 1)
    diff = np.asarray(seg_a.curve.value(xs) - seg_b.curve.value(xs), dtype=float)
    if np.max(np.abs(diff)) <= EPS_GEO:
        return []  # coincident within tolerance: no isolated crossings
    f = lambda x: float(seg_a.curve.value(x) - seg_b.curve.value(x))
    found: list[float] = []
    for i in range(ROOT_SCAN):
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0.0:
            found.append(float(xs[i]))
        elif (d0 < 0) != (d1 < 0):
            found.append(_bisect_zero(f, float(xs[i]), float(xs[i + 1])))
    if diff[-1] == 0.0:
        found.append(float(xs[-1]))
    out: list[float] = []
    for r in sorted(found):
        if not out or r - out[-1] > 10 * TAU_ROOT:
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# affine preimage


def preimage_jump(region: MonotoneRegion, jump: AxisAffineJump) -> MonotoneRegion:
    """Exact preimage of the region under the per-axis affine jump map."""
    if jump.alpha1 <= 0 or jump.alpha2 <= 0:
        raise ValueError("jump scale factors must be strictly positive")
    if is_empty(region):
        return MonotoneRegion.empty_region()
    if jump.is_identity:
        return region

    def map_x(x: float) -> float:
        return (x - jump.beta1) / jump.alpha1

    def map_y(y: float) -> float:
        return (y - jump.beta2) / jump.alpha2

    def map_chain(chain: Chain) -> Chain:
        segs = []
        for seg in chain:
            if isinstance(seg.curve, Vertical):
                curve: Curve = Vertical(map_y(seg.curve.y_a), map_y(seg.curve.y_b))
            else:
                curve = seg.curve.preimage(jump)
            segs.append(CurveSegment(curve, map_x(seg.x1_a), map_x(seg.x1_b)))
        return tuple(segs)

    return MonotoneRegion(
        map_x(region.x1_lo), map_x(region.x1_hi),
        map_chain(region.lower), map_chain(region.upper),
    )


# ---------------------------------------------------------------------------
# envelope sweep machinery (shared by intersect and the backward analysis)


@dataclass(frozen=True)
class Piece:
    """A function curve restricted to a span, used as sweep input."""

    curve: FuncCurve
    x1_a: float
    x1_b: float

    def covers(self, x: float) -> bool:
        return self.x1_a - EPS_GEO <= x <= self.x1_b + EPS_GEO

    def value(self, x):
        return self.curve.value(x)


def pieces_of_chain(chain: Chain, lo: float = -math.inf, hi: float = math.inf) -> list[Piece]:
    out = []
    for seg in chain:
        if seg.is_vertical:
            continue
        a, b = max(seg.x1_a, lo), min(seg.x1_b, hi)
        if b >= a - EPS_GEO:
            out.append(Piece(seg.curve, a, min(b, max(a, b))))
    return out


def sweep_breakpoints(pieces: list[Piece], lo: float, hi: float) -> list[float]:
    """Span endpoints plus pairwise crossing abscissae, deduplicated."""
    xs: list[float] = [lo, hi]
    for p in pieces:
        for x in (p.x1_a, p.x1_b):
            if lo - EPS_GEO <= x <= hi + EPS_GEO:
                xs.append(min(max(x, lo), hi))
    n = len(pieces)
    for i in range(n):
        for j in range(i + 1, n):
            sa = CurveSegment(pieces[i].curve, pieces[i].x1_a, pieces[i].x1_b)
            sb = CurveSegment(pieces[j].curve, pieces[j].x1_a, pieces[j].x1_b)
            for r in chain_root(sa, sb):
                if lo - EPS_GEO <= r <= hi + EPS_GEO:
                    xs.append(min(max(r, lo), hi))
    xs.sort()
    out = [xs[0]]
    for x in xs[1:]:
        if x - out[-1] > EPS_GEO:
            out.append(x)
    if len(out) >= 2 and hi - out[-1] <= EPS_GEO:
        out[-1] = hi
    return out


def assemble_chain(cells: list[tuple[FuncCurve, float, float]]) -> Chain:
    """Merge per-cell winners into segments, inserting vertical connectors."""
    segs: list[CurveSegment] = []
    for curve, a, b in cells:
        if segs and not segs[-1].is_vertical:
            prev = segs[-1]
            if prev.curve is curve or prev.curve.close_to(curve, 1e-12):
                segs[-1] = CurveSegment(prev.curve, prev.x1_a, b)
                continue
            y_prev = float(prev.curve.value(prev.x1_b))
            y_next = float(curve.value(a))
            if abs(y_prev - y_next) > EPS_GEO:
                segs.append(CurveSegment(Vertical(y_prev, y_next), prev.x1_b, prev.x1_b))
        segs.append(CurveSegment(curve, a, b))
    return tuple(segs)


def intersect(ra: MonotoneRegion, rb: MonotoneRegion) -> list[MonotoneRegion]:
    """Intersection as a list of x1-connected monotone components.

    Sweeps the union of both regions' breakpoints and chain-crossing
    abscissae; on each cell the result's lower chain is the pointwise max of
    the lower chains and its upper chain the pointwise min of the uppers.
    Cells where the lower exceeds the upper are dropped; the surviving cells
    are grouped into contiguous runs, one component each (an empty list means
    an empty intersection, more than one component means the true
    intersection is disconnected).
    """
    if is_empty(ra) or is_empty(rb):
        return []
    lo = max(ra.x1_lo, rb.x1_lo)
    hi = min(ra.x1_hi, rb.x1_hi)
    if hi < lo - EPS_GEO:
        return []
    if hi < lo:
        lo = hi = 0.5 * (lo + hi)

    lows = pieces_of_chain(ra.lower, lo, hi) + pieces_of_chain(rb.lower, lo, hi)
    ups = pieces_of_chain(ra.upper, lo, hi) + pieces_of_chain(rb.upper, lo, hi)

    if hi - lo <= EPS_GEO:
        x = 0.5 * (lo + hi)
        lo_v = max(float(p.value(x)) for p in lows if p.covers(x))
        hi_v = min(float(p.value(x)) for p in ups if p.covers(x))
        if lo_v > hi_v + EPS_GEO:
            return []
        return [MonotoneRegion(
            x, x,
            (CurveSegment(Horizontal(lo_v), x, x),),
            (CurveSegment(Horizontal(hi_v), x, x),),
        )]

    bps = sweep_breakpoints(lows + ups, lo, hi)
    runs: list[list[tuple[FuncCurve, FuncCurve, float, float]]] = []
    current: list[tuple[FuncCurve, FuncCurve, float, float]] = []
    for a, b in zip(bps, bps[1:]):
        m = 0.5 * (a + b)
        low_cands = [p for p in lows if p.covers(m)]
        up_cands = [p for p in ups if p.covers(m)]
        if not low_cands or not up_cands:
            alive = False
        else:
            best_lo = max(low_cands, key=lambda p: float(p.value(m)))
            best_up = min(up_cands, key=lambda p: float(p.value(m)))
            alive = float(best_lo.value(m)) <= float(best_up.value(m)) + EPS_GEO
        if alive:
            current.append((best_lo.curve, best_up.curve, a, b))
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)

    out: list[MonotoneRegion] = []
    for run in runs:
        u, v = run[0][2], run[-1][3]
        lower = assemble_chain([(c, a, b) for c, _, a, b in run])
        upper = assemble_chain([(c, a, b) for _, c, a, b in run])
        out.append(MonotoneRegion(u, v, lower, upper))
    return out


def intersect_rect(region: MonotoneRegion, rect: RectConstraint) -> list[MonotoneRegion]:
    return intersect(from_rect(rect), region)


def sample_interior(region: MonotoneRegion, n: int, rng: np.random.Generator,
                    margin: float = 0.0) -> list[StateVector]:
    """Random points inside the region, at least `margin` above/below the chains."""
    out: list[StateVector] = []
    if is_empty(region):
        return out
    attempts = 0
    while len(out) < n and attempts < 200 * n + 200:
        attempts += 1
        x = rng.uniform(region.x1_lo, region.x1_hi)
        sect = probe_monotone(region, x)
        if sect is None:
            continue
        lo, hi = sect
        if hi - lo <= 2 * margin:
            if margin == 0.0 and hi >= lo:
                out.append(StateVector(x, 0.5 * (lo + hi)))
            continue
        out.append(StateVector(x, rng.uniform(lo + margin, hi - margin)))
    return out
