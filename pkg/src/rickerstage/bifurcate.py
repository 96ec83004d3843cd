"""Initial-value scans of the autonomous second-order equation.

``r_{-1}`` is held fixed and ``r_0`` sweeps a grid; each grid value selects
the invariant ``t0`` and therefore the one-dimensional map ``f_{t0}`` that
drives the orbit.  Rows record the last ``keep`` iterates and the detected
period, which is what a bifurcation plot over ``r_0`` shows.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from .core import DomainError, NumericOverflow
from .io import atomic_writer, fmt
from .semiconj import (
    CYCLE_TOL,
    MAX_PERIOD,
    MapConfig,
    compute_t0,
    detect_cycle,
    minimal_period,
    on_invariant_curve,
)
from .simulate import iterate_reduced

APERIODIC = "aperiodic"
OVERFLOW = -1

Period = Union[int, str]


@dataclass(frozen=True)
class ScanSpec:
    d: float
    r_m1: float
    r0_lo: float
    r0_hi: float
    grid_n: int = 400
    transient: int = 2000
    keep: int = 300
    max_period: int = MAX_PERIOD
    tol: float = CYCLE_TOL

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("d must be positive")
        if not (0 < self.r0_lo < self.r0_hi):
            raise DomainError("need 0 < r0_lo < r0_hi")
        if self.r_m1 <= 0:
            raise DomainError("r_m1 must be positive")
        if self.grid_n < 2 or self.keep < 1 or self.transient < 0:
            raise DomainError("need grid_n >= 2, keep >= 1, transient >= 0")

    def grid(self) -> np.ndarray:
        return np.linspace(self.r0_lo, self.r0_hi, self.grid_n)


@dataclass
class ScanRow:
    r0: float
    t0: float
    points: List[float]
    classified_period: Period
    cycle_period: Union[int, None] = None
    on_curve: bool = False


def classify_attractor(points, tol: float = CYCLE_TOL, max_period: int = MAX_PERIOD) -> Period:
    q = minimal_period(points, tol, max_period)
    return APERIODIC if q is None else q


def scan_row(spec: ScanSpec, r0: float) -> ScanRow:
    t0 = compute_t0(spec.r_m1, r0)
    curve = on_invariant_curve(spec.d, t0)
    try:
        orbit = iterate_reduced(spec.r_m1, r0, spec.d, spec.transient + spec.keep - 1)
    except NumericOverflow:
        return ScanRow(float(r0), t0, [], OVERFLOW, None, curve)
    points = orbit.values[-spec.keep:].tolist()
    if curve:
        # both curves coincide; odd periods are possible, classify the orbit itself
        return ScanRow(float(r0), t0, points,
                       classify_attractor(points, spec.tol, spec.max_period), None, True)
    cr = detect_cycle(MapConfig(spec.d, t0), spec.r_m1, spec.transient,
                      spec.max_period // 2, spec.tol)
    period = 2 * cr.period if cr.converged else APERIODIC
    return ScanRow(float(r0), t0, points, period, cr.period if cr.converged else None, False)


def _row_task(args):
    return scan_row(*args)


def _workers(workers):
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get("RICKER_THREADS", "1")))


def run_scan(spec: ScanSpec, workers=None) -> List[ScanRow]:
    """Rows in increasing ``r0``.  ``workers`` (or ``RICKER_THREADS``) > 1
    fans rows out over processes; results are identical either way."""
    grid = spec.grid()
    n = _workers(workers)
    if n == 1:
        return [scan_row(spec, float(r0)) for r0 in grid]
    with ProcessPoolExecutor(max_workers=n) as pool:
        chunk = max(1, len(grid) // (4 * n))
        return list(pool.map(_row_task, [(spec, float(r0)) for r0 in grid], chunksize=chunk))


CSV_HEADER = ("r0", "t0", "period", "point_index", "value")


def emit_csv(rows: List[ScanRow], path) -> None:
    """One line per kept point; overflow rows get a single ``nan`` line with
    period -1 and point_index -1."""
    try:
        with atomic_writer(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for row in rows:
                if not row.points:
                    w.writerow([fmt(row.r0), fmt(row.t0), row.classified_period, -1, "nan"])
                    continue
                for i, v in enumerate(row.points):
                    w.writerow([fmt(row.r0), fmt(row.t0), row.classified_period, i, fmt(v)])
    except OSError as exc:
        raise OSError(f"cannot write scan CSV to {path}: {exc}") from exc


def period_summary(rows: List[ScanRow]) -> dict:
    counts = {}
    for row in rows:
        key = str(row.classified_period)
        counts[key] = counts.get(key, 0) + 1
    return counts
