"""Backward reachability: jump-sets, extended jump-sets, path feasibility.

The backward step for one transition intersects the phase constraint with the
affine preimage of the downstream target (the jump-set), then grows the
jump-set with everything the phase's own flow can steer into it (the extended
jump-set).  A path is feasible iff no jump-set along the backward recursion
is empty.

The extended jump-set is built geometrically: backward orbit traces through
the jump-set's extreme points and through tangency points on its curved
boundaries are candidate contour pieces, together with the jump-set's own
chains, the constraint box and a padded working frame.  A vertical-probe
arbitration against the orbit-hit predicate selects, cell by cell, which
candidates actually bound the swept tube; the result is then clipped to the
constraint rectangle.  Every construction is validated by a 500-point
self-check against the independent orbit predicate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flows import (
    Equilibrium,
    VerticalTrace,
    backward_x1_direction,
    classify,
    hits_region_batch,
    trajectory_curve,
)
from .model import (
    AxisAffineJump,
    HybridAutomaton,
    Phase,
    RectConstraint,
    StateVector,
)
from .regions import (
    EPS_GEO,
    CurveSegment,
    FuncCurve,
    Horizontal,
    MonotoneRegion,
    Piece,
    assemble_chain,
    chain_root,
    extreme_points,
    from_rect,
    intersect,
    is_empty,
    pieces_of_chain,
    preimage_jump,
    region_ybounds,
    sweep_breakpoints,
)

SELF_CHECK_POINTS = 500
TANGENCY_SCAN = 64
_VALUE_DEDUPE = 4 * EPS_GEO


class ConstructionError(RuntimeError):
    """The geometric construction disagrees with the orbit predicate."""

    def __init__(self, message: str, witness: tuple[float, float] | None = None):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------------------
# jump-set


def jump_set(phase: Phase, jump: AxisAffineJump,
             target: MonotoneRegion) -> list[MonotoneRegion]:
    """Constraint points whose jump image lands in the target region."""
    if is_empty(target):
        return []
    pre = preimage_jump(target, jump)
    return intersect(from_rect(phase.constraint), pre)


# ---------------------------------------------------------------------------
# extended jump-set


def _check_subset_of_rect(lam: MonotoneRegion, rect: RectConstraint) -> None:
    if lam.x1_lo < rect.x1_lo - EPS_GEO or lam.x1_hi > rect.x1_hi + EPS_GEO:
        raise ValueError("jump-set exceeds the phase constraint in x1")
    y_lo, y_hi = region_ybounds(lam)
    if y_lo < rect.x2_lo - EPS_GEO or y_hi > rect.x2_hi + EPS_GEO:
        raise ValueError("jump-set exceeds the phase constraint in x2")


def _equilibrium_strictly_inside(lam: MonotoneRegion, xe: StateVector) -> bool:
    if not (lam.x1_lo + EPS_GEO < xe.x1 < lam.x1_hi - EPS_GEO):
        return False
    lo, hi = lam.lower_at(xe.x1), lam.upper_at(xe.x1)
    return lo + EPS_GEO < xe.x2 < hi - EPS_GEO


@dataclass(frozen=True)
class _Candidate:
    piece: Piece
    rank: int  # tie-break priority: jump-set chains < orbits < continuations < frame


def _tangency_anchors(dyn, lam: MonotoneRegion) -> list[StateVector]:
    """Points on curved jump-set boundaries where an orbit runs tangent.

    Tangency is a root of g(x) = x2' - f'(x) * x1' evaluated along the
    boundary; the product form avoids dividing by a vanishing x1 drift.
    """
    a1, b1 = dyn.axis1.a, dyn.axis1.b
    a2, b2 = dyn.axis2.a, dyn.axis2.b
    anchors: list[StateVector] = []
    for chain in (lam.lower, lam.upper):
        for seg in chain:
            if seg.is_vertical or isinstance(seg.curve, Horizontal):
                continue
            lo, hi = seg.x1_a, seg.x1_b
            if hi - lo <= EPS_GEO:
                continue
            xs = np.linspace(lo, hi, TANGENCY_SCAN + 1)
            f = seg.curve.value(xs)
            fp = seg.curve.slope(xs)
            g = (-a2 * f + b2) - fp * (-a1 * xs + b1)
            g = np.asarray(g, dtype=float)

            def gf(x: float) -> float:
                y = float(seg.curve.value(x))
                return (-a2 * y + b2) - float(seg.curve.slope(x)) * (-a1 * x + b1)

            for i in range(TANGENCY_SCAN):
                if g[i] == 0.0:
                    anchors.append(StateVector(float(xs[i]), float(f[i])))
                elif (g[i] < 0) != (g[i + 1] < 0):
                    a, b = float(xs[i]), float(xs[i + 1])
                    for _ in range(80):
                        m = 0.5 * (a + b)
                        if (gf(a) < 0) == (gf(m) < 0):
                            a = m
                        else:
                            b = m
                        if b - a <= 1e-12:
                            break
                    x = 0.5 * (a + b)
                    anchors.append(StateVector(x, float(seg.curve.value(x))))
    return anchors


def _orbit_candidates(dyn, anchors: list[StateVector],
                      frame: RectConstraint) -> list[_Candidate]:
    """Backward orbit traces through the anchors, clipped to the frame."""
    out: list[_Candidate] = []
    for p in anchors:
        d = backward_x1_direction(dyn, p.x1)
        if d == 0:
            continue  # frozen abscissa: the trace is a zero-width vertical
        curve = trajectory_curve(dyn, p)
        if isinstance(curve, VerticalTrace):
            continue
        if d > 0:
            a, b = p.x1, frame.x1_hi
        else:
            a, b = frame.x1_lo, p.x1
        if b - a <= EPS_GEO:
            continue
        span_seg = CurveSegment(curve, a, b)
        exit_x: float | None = None
        exit_y: float | None = None
        for edge_y in (frame.x2_lo, frame.x2_hi):
            for r in chain_root(span_seg, CurveSegment(Horizontal(edge_y), a, b)):
                # nearest frame exit on the backward side of the anchor
                if d > 0 and r > p.x1 + EPS_GEO and (exit_x is None or r < exit_x):
                    exit_x, exit_y = r, edge_y
                if d < 0 and r < p.x1 - EPS_GEO and (exit_x is None or r > exit_x):
                    exit_x, exit_y = r, edge_y
        if exit_x is not None:
            if d > 0:
                out.append(_Candidate(Piece(curve, a, exit_x), 1))
                if exit_x < frame.x1_hi - EPS_GEO:
                    out.append(_Candidate(Piece(Horizontal(exit_y), exit_x, frame.x1_hi), 2))
            else:
                out.append(_Candidate(Piece(curve, exit_x, b), 1))
                if exit_x > frame.x1_lo + EPS_GEO:
                    out.append(_Candidate(Piece(Horizontal(exit_y), frame.x1_lo, exit_x), 2))
        else:
            out.append(_Candidate(Piece(curve, a, b), 1))
    return out


def _degenerate_tube(dyn, lam: MonotoneRegion, cands: list[_Candidate],
                     x: float) -> list[MonotoneRegion]:
    values: list[float] = []
    for c in cands:
        if c.piece.covers(x):
            values.append(float(c.piece.value(x)))
    values.extend([lam.lower_at(x), lam.upper_at(x)])
    values = sorted(set(values))
    probes_y: list[float] = []
    for i, v in enumerate(values):
        probes_y.append(v)
        if i + 1 < len(values):
            probes_y.append(0.5 * (v + values[i + 1]))
    ys = np.array(probes_y)
    flags = hits_region_batch(dyn, np.full(ys.shape, x), ys, lam)
    hits = [y for y, f in zip(probes_y, flags) if f]
    if not hits:
        return []
    lo, hi = min(hits), max(hits)
    return [MonotoneRegion(
        x, x,
        (CurveSegment(Horizontal(lo), x, x),),
        (CurveSegment(Horizontal(hi), x, x),),
    )]


def _self_check(dyn, lam: MonotoneRegion, comps: list[MonotoneRegion],
                rect: RectConstraint) -> None:
    rng = np.random.default_rng(0x5EED)
    xs = rng.uniform(rect.x1_lo, rect.x1_hi, SELF_CHECK_POINTS * 2)
    ys = rng.uniform(rect.x2_lo, rect.x2_hi, SELF_CHECK_POINTS * 2)

    margin = 2 * EPS_GEO
    keep = np.ones(xs.shape, dtype=bool)
    for comp in comps:
        dx = np.maximum(np.maximum(comp.x1_lo - xs, xs - comp.x1_hi), 0.0)
        xc = np.clip(xs, comp.x1_lo, comp.x1_hi)
        lo = comp.lower_at(xc)
        hi = comp.upper_at(xc)
        near_y = (np.abs(ys - lo) <= margin) | (np.abs(ys - hi) <= margin)
        near_x = (np.abs(xs - comp.x1_lo) <= margin) | (np.abs(xs - comp.x1_hi) <= margin)
        inside_band = (ys >= lo - margin) & (ys <= hi + margin)
        keep &= ~(near_y & (dx == 0.0)) & ~(near_x & inside_band)
    xs, ys = xs[keep][:SELF_CHECK_POINTS], ys[keep][:SELF_CHECK_POINTS]

    predicted = np.zeros(xs.shape, dtype=bool)
    for comp in comps:
        predicted |= comp.contains_vec(xs, ys)
    actual = hits_region_batch(dyn, xs, ys, lam)
    bad = predicted != actual
    if np.any(bad):
        # rule out sampler misses before declaring the construction wrong
        idx = np.nonzero(bad)[0]
        refined = hits_region_batch(dyn, xs[idx], ys[idx], lam, samples=8192)
        bad[idx] = predicted[idx] != refined
    if np.any(bad):
        i = int(np.nonzero(bad)[0][0])
        raise ConstructionError(
            f"extended jump-set self-check failed at ({xs[i]:.9g}, {ys[i]:.9g}): "
            f"region={bool(predicted[i])} orbit={bool(actual[i])}",
            witness=(float(xs[i]), float(ys[i])),
        )


def extended_jump_set(phase: Phase, lam: MonotoneRegion) -> list[MonotoneRegion]:
    """All constraint points from which the phase flow reaches the jump-set.

    Returns x1-connected monotone components (usually one).  Raises
    ConstructionError when the 500-point consistency check against the orbit
    predicate fails, which signals an unhandled geometric configuration.
    """
    if is_empty(lam):
        raise ValueError("extended jump-set of an empty jump-set")
    rect = phase.constraint
    _check_subset_of_rect(lam, rect)
    dyn = phase.dynamics

    fc = classify(dyn)
    if isinstance(fc, Equilibrium) and _equilibrium_strictly_inside(lam, fc.point):
        return [from_rect(rect)]  # the whole constraint drains into the jump-set
    if dyn.is_stationary:
        return [lam]

    pad = max(rect.x1_hi - rect.x1_lo, rect.x2_hi - rect.x2_lo, 1.0)
    frame = RectConstraint(
        rect.x1_lo - pad, rect.x1_hi + pad,
        rect.x2_lo - pad, rect.x2_hi + pad,
    )

    cands: list[_Candidate] = []
    for piece in pieces_of_chain(lam.lower) + pieces_of_chain(lam.upper):
        cands.append(_Candidate(piece, 0))
    anchors = extreme_points(lam) + _tangency_anchors(dyn, lam)
    cands.extend(_orbit_candidates(dyn, anchors, frame))

    extent_lo = min(c.piece.x1_a for c in cands)
    extent_hi = max(c.piece.x1_b for c in cands)
    if extent_hi - extent_lo <= EPS_GEO:
        comps = _degenerate_tube(dyn, lam, cands, 0.5 * (extent_lo + extent_hi))
        comps = [c for comp in comps for c in intersect(from_rect(rect), comp)]
        _self_check(dyn, lam, comps, rect)
        return comps

    cands.append(_Candidate(Piece(Horizontal(frame.x2_lo), extent_lo, extent_hi), 3))
    cands.append(_Candidate(Piece(Horizontal(frame.x2_hi), extent_lo, extent_hi), 3))

    pieces = [c.piece for c in cands]
    bps = sweep_breakpoints(pieces, extent_lo, extent_hi)

    # one batched membership query for all cell probes; probes that lie on a
    # jump-set chain or on a backward orbit trace are in the tube by
    # construction (their orbit passes through an anchor inside the set), so
    # only gap and frame probes are decided numerically — this keeps
    # tangentially grazing orbits, whose contact is a single instant, exact
    cells: list[tuple[float, float, float, list[tuple[float, Piece]], int, int]] = []
    probe_x: list[float] = []
    probe_y: list[float] = []
    forced: list[bool] = []
    for a, b in zip(bps, bps[1:]):
        if b - a <= EPS_GEO:
            continue
        m = 0.5 * (a + b)
        entries: list[tuple[float, Piece, int]] = []
        for c in sorted(cands, key=lambda c: c.rank):
            if c.piece.covers(m):
                v = float(c.piece.value(m))
                if not any(abs(v - ev) <= _VALUE_DEDUPE for ev, _, _ in entries):
                    entries.append((v, c.piece, c.rank))
        entries.sort(key=lambda t: t[0])
        start = len(probe_x)
        for i, (v, _, rank) in enumerate(entries):
            probe_x.append(m)
            probe_y.append(v)
            forced.append(rank <= 2)
            if i + 1 < len(entries):
                probe_x.append(m)
                probe_y.append(0.5 * (v + entries[i + 1][0]))
                forced.append(False)
        cells.append((a, b, m, entries, start, len(probe_x) - start))

    forced_arr = np.array(forced, dtype=bool)
    flags = hits_region_batch(dyn, np.array(probe_x), np.array(probe_y), lam)
    flags |= forced_arr

    runs: list[list[tuple[FuncCurve, FuncCurve, float, float]]] = []
    current: list[tuple[FuncCurve, FuncCurve, float, float]] = []
    for a, b, m, entries, start, count in cells:
        cell_flags = flags[start:start + count]
        true_idx = np.nonzero(cell_flags)[0]
        if true_idx.size:
            first, last = int(true_idx[0]), int(true_idx[-1])
            if not np.all(cell_flags[first:last + 1]):
                # a sparse window scan can miss brief traversals; escalate
                xs = np.full(count, m)
                ys = np.array(probe_y[start:start + count])
                force = forced_arr[start:start + count]
                for boost in (1024, 8192):
                    cell_flags = hits_region_batch(dyn, xs, ys, lam, samples=boost)
                    cell_flags |= force
                    true_idx = np.nonzero(cell_flags)[0]
                    first, last = int(true_idx[0]), int(true_idx[-1])
                    if np.all(cell_flags[first:last + 1]):
                        break
                else:
                    raise ConstructionError(
                        f"non-contiguous vertical section at x1={m:.9g}",
                        witness=(m, float(ys[int(true_idx[0])])))
        if true_idx.size == 0:
            if current:
                runs.append(current)
                current = []
            continue
        lo_entry = entries[(first + 1) // 2]
        hi_entry = entries[last // 2]
        current.append((lo_entry[1].curve, hi_entry[1].curve, a, b))
    if current:
        runs.append(current)

    comps: list[MonotoneRegion] = []
    for run in runs:
        u, v = run[0][2], run[-1][3]
        lower = assemble_chain([(c, a, b) for c, _, a, b in run])
        upper = assemble_chain([(c, a, b) for _, c, a, b in run])
        comps.append(MonotoneRegion(u, v, lower, upper))

    result = [r for comp in comps for r in intersect(from_rect(rect), comp)]
    if not result:
        raise ConstructionError("extended jump-set lost the jump-set itself")
    _self_check(dyn, lam, result, rect)
    return result


# ---------------------------------------------------------------------------
# path analysis


@dataclass(frozen=True)
class TransitionRecord:
    source: str
    target: str
    lam: tuple[MonotoneRegion, ...]
    lam_ext: tuple[MonotoneRegion, ...]


@dataclass(frozen=True)
class PathAnalysis:
    path: tuple[str, ...]
    records: tuple[TransitionRecord, ...]
    feasible: bool
    failing_index: int | None = None
    init: StateVector | None = None

    @property
    def first_lam_ext(self) -> tuple[MonotoneRegion, ...]:
        return self.records[0].lam_ext if self.records else ()


def _check_path(automaton: HybridAutomaton, path: tuple[str, ...]) -> None:
    if len(path) < 2:
        raise ValueError("a discrete path needs at least two phases")
    for pid in path:
        automaton.phase(pid)  # raises on unknown ids
    for a, b in zip(path, path[1:]):
        if not automaton.has_transition(a, b):
            raise ValueError(f"path violates the transition relation at {a}->{b}")


def analyze_path(automaton: HybridAutomaton, path: tuple[str, ...] | list[str],
                 init: StateVector | None = None) -> PathAnalysis:
    """Backward recursion over the path: last transition first.

    The target starts as the final phase's constraint and becomes the
    extended jump-set of the downstream transition at every step.  The path
    is infeasible as soon as a jump-set comes out empty.
    """
    path = tuple(path)
    _check_path(automaton, path)
    n = len(path) - 1
    records: list[TransitionRecord | None] = [None] * n
    target = [from_rect(automaton.phase(path[-1]).constraint)]
    failing: int | None = None

    for i in range(n - 1, -1, -1):
        ph = automaton.phase(path[i])
        tr = automaton.transition(path[i], path[i + 1])
        lam: list[MonotoneRegion] = []
        for comp in target:
            lam.extend(jump_set(ph, tr.jump, comp))
        if not lam:
            failing = i
            records[i] = TransitionRecord(path[i], path[i + 1], (), ())
            break
        lam_ext: list[MonotoneRegion] = []
        for comp in lam:
            lam_ext.extend(extended_jump_set(ph, comp))
        records[i] = TransitionRecord(path[i], path[i + 1], tuple(lam), tuple(lam_ext))
        target = lam_ext

    filled = tuple(
        r if r is not None else TransitionRecord(path[i], path[i + 1], (), ())
        for i, r in enumerate(records)
    )
    feasible = failing is None
    if feasible and init is not None:
        feasible = any(c.contains(init) for c in filled[0].lam_ext)
    return PathAnalysis(path, filled, feasible, failing, init)


def search_paths(automaton: HybridAutomaton, src: str, dst: str,
                 max_len: int = 8, init: StateVector | None = None,
                 ) -> list[PathAnalysis]:
    """Feasible discrete paths from src to dst, up to max_len phases.

    Depth-first enumeration over the transition relation; each transition may
    repeat at most max_len // 2 times so cycles stay bounded.  Results are
    ordered by length, then lexicographically.
    """
    if max_len < 2:
        raise ValueError("max_len must be at least 2")
    automaton.phase(src)
    automaton.phase(dst)
    if src == dst:
        return []

    edge_cap = max(1, max_len // 2)
    candidates: list[tuple[str, ...]] = []

    def dfs(path: list[str], used: dict[tuple[str, str], int]) -> None:
        last = path[-1]
        if last == dst and len(path) >= 2:
            candidates.append(tuple(path))
        if len(path) >= max_len:
            return
        for nxt in automaton.successors(last):
            edge = (last, nxt)
            if used.get(edge, 0) >= edge_cap:
                continue
            used[edge] = used.get(edge, 0) + 1
            path.append(nxt)
            dfs(path, used)
            path.pop()
            used[edge] -= 1

    dfs([src], {})
    candidates.sort(key=lambda p: (len(p), p))

    out: list[PathAnalysis] = []
    for cand in candidates:
        analysis = analyze_path(automaton, cand, init)
        if analysis.feasible:
            out.append(analysis)
    return out
