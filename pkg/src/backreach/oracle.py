"""Independent brute-force ground truth for the backward analysis.

Reachability is evaluated pointwise on a grid of cell centers with the
closed-form orbit predicate — no region construction involved — so the grid
can arbitrate whether an analytic extended jump-set is correct.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flows import hits_region_batch
from .model import Phase
from .regions import MonotoneRegion

DEFAULT_RESOLUTION = 0.01


@dataclass(frozen=True)
class GridIndicator:
    x1_origin: float
    x2_origin: float
    resolution: float
    cells: np.ndarray  # bool, shape (nx, ny); cells[i, j] is centered at
    #                    (x1_origin + (i + .5) res, x2_origin + (j + .5) res)
    phase_id: str
    target_descriptor: dict

    @property
    def nx(self) -> int:
        return self.cells.shape[0]

    @property
    def ny(self) -> int:
        return self.cells.shape[1]

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.x1_origin + (np.arange(self.nx) + 0.5) * self.resolution
        ys = self.x2_origin + (np.arange(self.ny) + 0.5) * self.resolution
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return gx, gy


def grid_reach(phase: Phase, target: MonotoneRegion,
               resolution: float = DEFAULT_RESOLUTION) -> GridIndicator:
    """Evaluate the orbit-hit predicate at every cell center in the phase
    constraint."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    rect = phase.constraint
    nx = max(1, int(round((rect.x1_hi - rect.x1_lo) / resolution)))
    ny = max(1, int(round((rect.x2_hi - rect.x2_lo) / resolution)))
    indicator = GridIndicator(rect.x1_lo, rect.x2_lo, resolution,
                              np.zeros((nx, ny), dtype=bool),
                              phase.id, target.descriptor())
    gx, gy = indicator.centers()
    inside_rect = (
        (gx >= rect.x1_lo) & (gx <= rect.x1_hi)
        & (gy >= rect.x2_lo) & (gy <= rect.x2_hi)
    )
    hits = hits_region_batch(phase.dynamics, gx.reshape(-1), gy.reshape(-1), target)
    indicator.cells[:] = hits.reshape(gx.shape) & inside_rect
    return indicator


@dataclass(frozen=True)
class AgreementReport:
    agree_fraction: float
    considered: int
    excluded: int
    disagreements: tuple[tuple[int, int], ...]  # cell indices, capped

    MAX_LISTED = 1000


def compare(indicator: GridIndicator, regions: list[MonotoneRegion],
            ) -> AgreementReport:
    """Off-boundary agreement between the grid and an analytic region list.

    Cells whose center lies within 2 * resolution of any region boundary are
    excluded; the rest are compared cell by cell.
    """
    gx, gy = indicator.centers()
    xs, ys = gx.reshape(-1), gy.reshape(-1)
    band = 2.0 * indicator.resolution

    near = np.zeros(xs.shape, dtype=bool)
    predicted = np.zeros(xs.shape, dtype=bool)
    for region in regions:
        predicted |= region.contains_vec(xs, ys)
        dx = np.maximum(np.maximum(region.x1_lo - xs, xs - region.x1_hi), 0.0)
        xc = np.clip(xs, region.x1_lo, region.x1_hi)
        lo = region.lower_at(xc)
        hi = region.upper_at(xc)
        inside_band = (ys >= lo - band) & (ys <= hi + band)
        near_y = ((np.abs(ys - lo) <= band) | (np.abs(ys - hi) <= band)) & (dx <= band)
        near_x = (
            (np.abs(xs - region.x1_lo) <= band) | (np.abs(xs - region.x1_hi) <= band)
        ) & inside_band
        near |= near_y | near_x

    actual = indicator.cells.reshape(-1)
    considered = ~near
    n = int(considered.sum())
    if n == 0:
        return AgreementReport(1.0, 0, int(near.sum()), ())
    agree = predicted[considered] == actual[considered]
    frac = float(agree.sum()) / n

    bad_flat = np.nonzero(considered & (predicted != actual))[0]
    cells = []
    for k in bad_flat[: AgreementReport.MAX_LISTED]:
        i, j = divmod(int(k), indicator.ny)
        cells.append((i, j))
    return AgreementReport(frac, n, int(near.sum()), tuple(cells))


def pgm_bytes(indicator: GridIndicator) -> bytes:
    """Binary PGM (P5) dump; white cells are reachable, top row is max x2."""
    img = np.where(indicator.cells, 255, 0).astype(np.uint8)
    # image rows scan top-to-bottom: transpose to (ny, nx) and flip vertically
    img = img.T[::-1, :]
    header = f"P5\n{indicator.nx} {indicator.ny}\n255\n".encode("ascii")
    return header + img.tobytes()


def metadata_dict(indicator: GridIndicator) -> dict:
    return {
        "phase": indicator.phase_id,
        "resolution": indicator.resolution,
        "origin": [indicator.x1_origin, indicator.x2_origin],
        "nx": indicator.nx,
        "ny": indicator.ny,
        "target": indicator.target_descriptor,
    }
