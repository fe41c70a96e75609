"""Consistency checking between the twins and divergence detection.

Two uncertain values are compared through their coverage intervals
``[mean - k*std, mean + k*std]`` (k = 2 covers ~95% for a Gaussian).  The
degree of consistency is the intersection-over-union of the two intervals:
1 when one contains the other, 0 when they are disjoint.  A sustained drop
of the degree below a small threshold marks a divergence between the twins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .uncertain import UncertainReal


@dataclass(frozen=True)
class ConsistencyConfig:
    k: float = 2.0             # coverage factor for the +/- k*std intervals
    c: float = 0.95            # per-point degree demanded by trace consistency
    r: float = 0.05            # inconsistency threshold on the degree
    window: int = 3            # consecutive inconsistent cycles to declare divergence
    coverage_ratio: float = 1.0  # fraction of points required for weak trace consistency

    def __post_init__(self) -> None:
        if self.k <= 0.0:
            raise ValueError(f"coverage factor k must be > 0, got {self.k}")
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"confidence c must be in (0,1), got {self.c}")
        if not 0.0 <= self.r < 1.0:
            raise ValueError(f"threshold r must be in [0,1), got {self.r}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if not 0.0 < self.coverage_ratio <= 1.0:
            raise ValueError(f"coverage_ratio must be in (0,1], got {self.coverage_ratio}")


@dataclass(frozen=True)
class ConsistencyReport:
    time: float
    degree: float
    consistent: bool
    diverged: bool = False

    def __post_init__(self) -> None:
        if self.diverged and self.consistent:
            raise ValueError("a diverged report cannot be consistent")


@dataclass(frozen=True)
class DivergenceEvent:
    time: float          # cycle at which the inconsistent window completed
    first_time: float    # first cycle of the inconsistent window
    degree: float


def degree(v_p: UncertainReal, v_d: UncertainReal, k: float = 2.0) -> float:
    """Intersection-over-union of the two +/- k*std intervals."""
    if k <= 0.0:
        raise ValueError(f"coverage factor k must be > 0, got {k}")
    lo_p, hi_p = v_p.mean - k * v_p.std, v_p.mean + k * v_p.std
    lo_d, hi_d = v_d.mean - k * v_d.std, v_d.mean + k * v_d.std
    if (lo_p <= lo_d and hi_d <= hi_p) or (lo_d <= lo_p and hi_p <= hi_d):
        return 1.0
    inter = min(hi_p, hi_d) - max(lo_p, lo_d)
    if inter <= 0.0:
        return 0.0
    return inter / (max(hi_p, hi_d) - min(lo_p, lo_d))


def consistent_values(v_p: UncertainReal, v_d: UncertainReal,
                      cfg: ConsistencyConfig) -> bool:
    """Strictly above the inconsistency threshold counts as consistent."""
    return degree(v_p, v_d, cfg.k) > cfg.r


def trace_consistent(x: "Iterable[tuple[float, UncertainReal]]",
                     y: "Iterable[tuple[float, UncertainReal]]",
                     cfg: ConsistencyConfig) -> tuple[bool, float]:
    """Pointwise trace comparison on a shared time grid.

    Returns (consistent, ratio) where ratio is the fraction of grid points
    whose degree reaches cfg.c; the traces are consistent when the ratio
    reaches cfg.coverage_ratio.
    """
    xs = list(x)
    ys = list(y)
    if len(xs) != len(ys) or any(abs(tx - ty) > 1e-9 for (tx, _), (ty, _) in zip(xs, ys)):
        raise ValueError("traces must share the same time grid")
    if not xs:
        raise ValueError("cannot compare empty traces")
    hits = sum(1 for (_, vx), (_, vy) in zip(xs, ys) if degree(vx, vy, cfg.k) >= cfg.c)
    ratio = hits / len(xs)
    return ratio >= cfg.coverage_ratio, ratio


class DivergenceDetector:
    """Debounced divergence detection over a report stream.

    Fires once, at the first cycle where the degree has been at or below the
    threshold for ``window`` consecutive reports.
    """

    def __init__(self, cfg: ConsistencyConfig):
        self.cfg = cfg
        self._streak_start: Optional[float] = None
        self._streak = 0
        self._fired = False

    @property
    def fired(self) -> bool:
        return self._fired

    def update(self, report: ConsistencyReport) -> Optional[DivergenceEvent]:
        if self._fired:
            return None
        if report.degree <= self.cfg.r:
            if self._streak == 0:
                self._streak_start = report.time
            self._streak += 1
            if self._streak >= self.cfg.window:
                self._fired = True
                return DivergenceEvent(time=report.time,
                                       first_time=self._streak_start,
                                       degree=report.degree)
        else:
            self._streak = 0
            self._streak_start = None
        return None


def detect_divergence(reports: Iterable[ConsistencyReport],
                      cfg: ConsistencyConfig) -> Optional[DivergenceEvent]:
    """Scan a time-ordered report stream; return the first divergence, if any."""
    detector = DivergenceDetector(cfg)
    for report in reports:
        event = detector.update(report)
        if event is not None:
            return event
    return None
