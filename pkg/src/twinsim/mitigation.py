"""Inverse-variance fusion of the two twins and the reset protocol.

The box temperatures coming from the physical side and the model side are
independent estimates of the same quantity, so their weighted average

    mean = (s_d^2 * m_p + s_p^2 * m_d) / (s_p^2 + s_d^2)
    var  = s_p^2 * s_d^2 / (s_p^2 + s_d^2)

always has less uncertainty than either input.  When the model's
uncertainty approaches its reliability limit, its box temperature is reset
to the fused value, pulling it back from the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .plant import PlantState, reset_state
from .uncertain import UncertainReal


@dataclass(frozen=True)
class FusionConfig:
    reliability_limit: float = 0.3   # degC std above which the model is not trusted
    reset_margin: float = 0.9        # reset when dt std >= margin * limit

    def __post_init__(self) -> None:
        if self.reliability_limit <= 0.0:
            raise ValueError(f"reliability_limit must be > 0, got {self.reliability_limit}")
        if not 0.0 < self.reset_margin <= 1.0:
            raise ValueError(f"reset_margin must be in (0,1], got {self.reset_margin}")

    @property
    def reset_threshold(self) -> float:
        return self.reset_margin * self.reliability_limit


@dataclass(frozen=True)
class FusionRecord:
    t_p: UncertainReal
    t_d: UncertainReal
    t_fused: UncertainReal
    reset_triggered: bool
    time: float


def fuse(t_p: UncertainReal, t_d: UncertainReal) -> UncertainReal:
    """Inverse-variance weighted average of two independent estimates."""
    if t_p.std == 0.0 and t_d.std == 0.0:
        if t_p.mean != t_d.mean:
            raise ValueError(
                f"cannot fuse contradictory certain values {t_p.mean} and {t_d.mean}"
            )
        return t_p
    if t_p.std == 0.0:
        return t_p
    if t_d.std == 0.0:
        return t_d
    vp = t_p.std * t_p.std
    vd = t_d.std * t_d.std
    total = vp + vd
    mean = (vd * t_p.mean + vp * t_d.mean) / total
    std = math.sqrt(vp * vd / total)
    return UncertainReal(mean, std)


def is_reliable(t_d: UncertainReal, cfg: FusionConfig) -> bool:
    """True while the model's uncertainty is strictly below the limit."""
    return t_d.std < cfg.reliability_limit


def mitigate_step(t_p: UncertainReal, t_d: UncertainReal, dt_state: PlantState,
                  cfg: FusionConfig, time: float = 0.0
                  ) -> tuple[UncertainReal, PlantState, FusionRecord]:
    """Fuse the twins and reset the model when it nears its reliability limit.

    The caller must have confirmed consistency of t_p and t_d beforehand;
    fusing inconsistent values can mask a real divergence.
    """
    fused = fuse(t_p, t_d)
    reset = t_d.std >= cfg.reset_threshold
    new_state = reset_state(dt_state, fused) if reset else dt_state
    record = FusionRecord(t_p=t_p, t_d=t_d, t_fused=fused,
                          reset_triggered=reset, time=time)
    return fused, new_state, record
