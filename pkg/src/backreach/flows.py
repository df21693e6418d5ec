"""Closed-form flows for decoupled linear dynamics and orbit-hit queries.

Each axis obeys x' = -a*x + b with a >= 0, so the flow is exact:
x(t) = b/a + (x0 - b/a) * exp(-a*t) for a > 0 and x(t) = x0 + b*t otherwise.
State-space orbit traces x2 = f(x1) fall into a small family of monotone
curves (lines, exponentials, powers, logarithms), which is what makes the
backward region analysis exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AxisDynamics, DecoupledDynamics, StateVector
from .regions import (
    EPS_GEO,
    Affine,
    ExpCurve,
    FuncCurve,
    Horizontal,
    LogCurve,
    MonotoneRegion,
    PowCurve,
    SIDE_LEFT,
    SIDE_RIGHT,
    is_empty,
    region_ybounds,
)

TAU_TIME = 1e-9     # bisection width for hit-time refinement
HIT_SAMPLES = 129   # scan density inside a time window
_SETTLE = 1e-12     # transient size considered fully decayed


class PointOrbitError(ValueError):
    """Raised when a trajectory curve is requested for stationary dynamics."""


# ---------------------------------------------------------------------------
# flow classification


@dataclass(frozen=True, slots=True)
class Stationary:
    pass


@dataclass(frozen=True, slots=True)
class BothIntegrators:
    pass


@dataclass(frozen=True, slots=True)
class OneAsymptote:
    axis: int          # 1 or 2: the decaying axis
    value: float       # its asymptote b/a


@dataclass(frozen=True, slots=True)
class Equilibrium:
    point: StateVector


FlowClass = Stationary | BothIntegrators | OneAsymptote | Equilibrium


def classify(dyn: DecoupledDynamics) -> FlowClass:
    a1, b1 = dyn.axis1.a, dyn.axis1.b
    a2, b2 = dyn.axis2.a, dyn.axis2.b
    if a1 > 0 and a2 > 0:
        return Equilibrium(StateVector(b1 / a1, b2 / a2))
    if a1 > 0:
        return OneAsymptote(1, b1 / a1)
    if a2 > 0:
        return OneAsymptote(2, b2 / a2)
    if b1 == 0 and b2 == 0:
        return Stationary()
    return BothIntegrators()


# ---------------------------------------------------------------------------
# closed-form evaluation


def axis_flow(axis: AxisDynamics, x0, t):
    """Axis solution at time(s) t; accepts scalars or arrays."""
    if axis.a > 0:
        xe = axis.b / axis.a
        return xe + (x0 - xe) * np.exp(-axis.a * np.asarray(t, dtype=float)) \
            if np.ndim(t) or np.ndim(x0) else xe + (x0 - xe) * math.exp(-axis.a * t)
    return x0 + axis.b * t


def flow_at(dyn: DecoupledDynamics, x0: StateVector, t: float) -> StateVector:
    if t < 0:
        raise ValueError("flow_at requires t >= 0")
    if t == 0:
        return x0
    return StateVector(
        float(axis_flow(dyn.axis1, x0.x1, t)),
        float(axis_flow(dyn.axis2, x0.x2, t)),
    )


def time_to_coord(axis: AxisDynamics, x0: float, target: float) -> float | None:
    """Least t >= 0 with the axis solution equal to target, if any."""
    if axis.a > 0:
        xe = axis.b / axis.a
        d0, dt = x0 - xe, target - xe
        if d0 == 0.0:
            return 0.0 if abs(dt) <= EPS_GEO else None
        if dt == 0.0:
            return None  # asymptote reached only in the limit
        ratio = d0 / dt
        if ratio < 1.0 - 1e-12:
            return None
        return max(0.0, math.log(max(ratio, 1.0)) / axis.a)
    if axis.b != 0.0:
        t = (target - x0) / axis.b
        return max(t, 0.0) if t >= -TAU_TIME else None
    return 0.0 if abs(target - x0) <= EPS_GEO else None


# ---------------------------------------------------------------------------
# state-space orbit traces


@dataclass(frozen=True, slots=True)
class VerticalTrace:
    """Orbit with frozen x1: the trace is the vertical line x1 = const."""

    x1: float


TrajectoryCurve = FuncCurve | VerticalTrace


def trajectory_curve(dyn: DecoupledDynamics, x0: StateVector) -> TrajectoryCurve:
    """The monotone curve traced in the (x1, x2) plane by the orbit through x0.

    Raises PointOrbitError for stationary dynamics (the orbit is a point).
    Orbits that stay on a nullcline degenerate to vertical or horizontal
    lines.
    """
    a1, b1 = dyn.axis1.a, dyn.axis1.b
    a2, b2 = dyn.axis2.a, dyn.axis2.b
    if dyn.is_stationary:
        raise PointOrbitError("stationary dynamics trace a point orbit")
    x1_frozen = a1 == 0 and b1 == 0
    x2_frozen = a2 == 0 and b2 == 0
    if x1_frozen:
        return VerticalTrace(x0.x1)
    if x2_frozen:
        return Horizontal(x0.x2)

    if a1 == 0 and a2 == 0:
        slope = b2 / b1
        return Affine(slope, x0.x2 - slope * x0.x1)

    if a1 == 0:  # x1 integrates, x2 decays: exponential in x1
        xe2 = b2 / a2
        if abs(x0.x2 - xe2) <= EPS_GEO:
            return Horizontal(xe2)
        m = -a2 / b1
        return ExpCurve(xe2, (x0.x2 - xe2) * math.exp(a2 * x0.x1 / b1), m)

    if a2 == 0:  # x1 decays, x2 integrates: logarithm in x1
        xe1 = b1 / a1
        if abs(x0.x1 - xe1) <= EPS_GEO:
            return VerticalTrace(xe1)
        side = SIDE_LEFT if x0.x1 < xe1 else SIDE_RIGHT
        k = -b2 / a1
        c2 = x0.x2 + (b2 / a1) * math.log(abs(x0.x1 - xe1))
        return LogCurve(xe1, c2, k, side)

    xe1, xe2 = b1 / a1, b2 / a2
    if abs(x0.x1 - xe1) <= EPS_GEO:
        return VerticalTrace(xe1)
    if abs(x0.x2 - xe2) <= EPS_GEO:
        return Horizontal(xe2)
    gamma = a2 / a1
    side = SIDE_LEFT if x0.x1 < xe1 else SIDE_RIGHT
    k = (x0.x2 - xe2) / abs(x0.x1 - xe1) ** gamma
    return PowCurve(xe1, xe2, k, gamma, side)


def backward_x1_direction(dyn: DecoupledDynamics, x1: float) -> int:
    """Sign of the backward-time x1 drift at abscissa x1 (0 when frozen)."""
    a1, b1 = dyn.axis1.a, dyn.axis1.b
    if a1 > 0:
        xe = b1 / a1
        if abs(x1 - xe) <= EPS_GEO:
            return 0
        return SIDE_RIGHT if x1 > xe else SIDE_LEFT
    if b1 == 0:
        return 0
    return SIDE_LEFT if b1 > 0 else SIDE_RIGHT


# ---------------------------------------------------------------------------
# orbit-hit queries


def _axis_window(axis: AxisDynamics, x0: np.ndarray, lo: float, hi: float):
    """Per-point time window [t_in, t_out] with the axis value in [lo, hi].

    Empty windows are encoded as t_in = +inf; windows may extend to +inf when
    the axis settles inside the band.
    """
    x0 = np.asarray(x0, dtype=float)
    inf = np.full_like(x0, np.inf)
    zero = np.zeros_like(x0)
    a, b = axis.a, axis.b

    if a == 0 and b == 0:
        inside = (x0 >= lo - EPS_GEO) & (x0 <= hi + EPS_GEO)
        return np.where(inside, zero, inf), inf

    if a == 0:
        t_lo = (lo - x0) / b
        t_hi = (hi - x0) / b
        t_first = np.minimum(t_lo, t_hi)
        t_last = np.maximum(t_lo, t_hi)
        t_in = np.maximum(t_first, 0.0)
        empty = t_last < -TAU_TIME
        return np.where(empty, inf, t_in), np.where(empty, inf, np.maximum(t_last, 0.0))

    xe = b / a
    d0 = x0 - xe

    def hit_time(w: float) -> np.ndarray:
        dw = w - xe
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dw != 0, d0 / dw, np.inf)
            t = np.where(ratio >= 1.0, np.log(np.maximum(ratio, 1.0)) / a, np.inf)
        if dw == 0:  # asymptote: reached only in the limit
            t = np.where(np.abs(d0) <= EPS_GEO, 0.0, np.inf)
        return t

    inside = (x0 >= lo - EPS_GEO) & (x0 <= hi + EPS_GEO)
    below = x0 < lo - EPS_GEO
    above = x0 > hi + EPS_GEO

    t_in = np.where(inside, 0.0, inf)
    t_in = np.where(below, hit_time(lo), t_in)
    t_in = np.where(above, hit_time(hi), t_in)

    # exit: only if the equilibrium lies outside the band on the far side
    if xe < lo:
        t_out = hit_time(lo)
    elif xe > hi:
        t_out = hit_time(hi)
    else:
        t_out = inf
    t_out = np.where(t_in == np.inf, inf, np.maximum(t_out, t_in))
    return t_in, t_out


def _settle_horizon(axis: AxisDynamics, x0: np.ndarray, y_far: float) -> np.ndarray:
    """Per-point time after which the axis either has converged or has moved
    past y_far for good."""
    x0 = np.asarray(x0, dtype=float)
    if axis.a > 0:
        d0 = np.abs(x0 - axis.b / axis.a)
        return np.log(np.maximum(d0, _SETTLE) / _SETTLE) / axis.a
    if axis.b != 0:
        return np.abs(y_far - x0) / abs(axis.b) + 1.0
    return np.zeros_like(x0)


def _scan_fracs(samples: int) -> np.ndarray:
    """Window fractions mixing a uniform grid with start- and end-crowded
    grids, so brief traversals near either window edge are not missed."""
    n_uni = max(2, samples // 2)
    n_edge = max(2, samples // 4)
    uni = np.linspace(0.0, 1.0, n_uni)
    lead = np.linspace(0.0, 1.0, n_edge) ** 3
    tail = 1.0 - np.linspace(0.0, 1.0, n_edge) ** 3
    return np.unique(np.concatenate([uni, lead, tail]))


def _joint_window(dyn: DecoupledDynamics, x1s: np.ndarray, x2s: np.ndarray,
                  target: MonotoneRegion):
    """Per-point time window during which the orbit can possibly be in the
    target: the intersection of the x1-range window with the y-bbox window,
    capped at a per-point settling horizon.

    Also returns the raw per-axis window edges: corner-grazing orbits touch
    the target exactly at one of those instants, so scans must sample them
    explicitly (a zero-width joint window is legitimate there).
    """
    t1_in, t1_out = _axis_window(dyn.axis1, x1s, target.x1_lo, target.x1_hi)
    y_lo, y_hi = region_ybounds(target)
    t2_in, t2_out = _axis_window(dyn.axis2, x2s, y_lo, y_hi)
    t_in = np.maximum(t1_in, t2_in)
    t_out = np.minimum(t1_out, t2_out)
    empty = ~np.isfinite(t_in) | (t_out < t_in - TAU_TIME)
    t_in = np.where(empty, np.inf, t_in)

    h1 = _settle_horizon(dyn.axis1, x1s, 0.0)
    y_far = y_lo if abs(y_lo) > abs(y_hi) else y_hi
    h2 = _settle_horizon(dyn.axis2, x2s, y_far)
    horizon = t_in + np.maximum(h1, h2) + 1.0
    t_end = np.minimum(np.where(np.isfinite(t_out), t_out, horizon), horizon)
    t_end = np.maximum(t_end, t_in)
    edges = []
    for e in (t1_in, t1_out, t2_in, t2_out):
        edges.append(np.where(np.isfinite(e), np.clip(e, t_in, t_end), t_in))
    return t_in, t_end, edges


def hits_region_batch(dyn: DecoupledDynamics, x1s: np.ndarray, x2s: np.ndarray,
                      target: MonotoneRegion, samples: int = 128,
                      tol: float = EPS_GEO) -> np.ndarray:
    """Vectorized Def-4 predicate: does the forward orbit from each point
    reach the target region?

    Monotone flows make the joint time window a single interval, so a dense
    scan of the window is reliable; the sample grid crowds the window edges
    where entry and exit crossings concentrate.
    """
    x1s = np.asarray(x1s, dtype=float)
    x2s = np.asarray(x2s, dtype=float)
    hit = np.zeros(x1s.shape, dtype=bool)
    if is_empty(target):
        return hit

    t_in, t_end, edges = _joint_window(dyn, x1s, x2s, target)
    fracs = _scan_fracs(samples)

    flat1 = x1s.reshape(-1)
    flat2 = x2s.reshape(-1)
    ti = t_in.reshape(-1)
    te = t_end.reshape(-1)
    edge_cols = [e.reshape(-1) for e in edges]
    hit_flat = hit.reshape(-1)
    cand_idx = np.nonzero(np.isfinite(ti))[0]

    chunk = max(1, 4_000_000 // max(fracs.size, 1))
    for s in range(0, cand_idx.size, chunk):
        ids = cand_idx[s:s + chunk]
        ts = ti[ids, None] + fracs[None, :] * (te[ids] - ti[ids])[:, None]
        ts = np.concatenate([ts] + [e[ids, None] for e in edge_cols], axis=1)
        xs = axis_flow(dyn.axis1, flat1[ids, None], ts)
        ys = axis_flow(dyn.axis2, flat2[ids, None], ts)
        inside = target.contains_vec(xs.reshape(-1), ys.reshape(-1), tol)
        hit_flat[ids] = inside.reshape(ts.shape).any(axis=1)
    return hit_flat.reshape(x1s.shape)


def orbit_hits_region(dyn: DecoupledDynamics, x0: StateVector,
                      target: MonotoneRegion) -> float | None:
    """Earliest t >= 0 with the flow from x0 inside the target, or None."""
    if is_empty(target):
        return None
    if target.contains(x0):
        return 0.0

    t_in, t_end_arr, edges = _joint_window(dyn, np.array([x0.x1]),
                                           np.array([x0.x2]), target)
    t0 = float(t_in[0])
    if not math.isfinite(t0):
        return None
    t_end = float(t_end_arr[0])

    def inside(t: float) -> bool:
        p = flow_at(dyn, x0, t)
        return target.contains(p)

    ts = t0 + _scan_fracs(HIT_SAMPLES) * (t_end - t0)
    ts = np.unique(np.concatenate([ts, [float(e[0]) for e in edges]]))
    flags = [inside(float(t)) for t in ts]
    try:
        k = flags.index(True)
    except ValueError:
        return None
    if k == 0:
        return t0
    lo, hi = float(ts[k - 1]), float(ts[k])
    while hi - lo > TAU_TIME:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi
