"""Bang-bang heater control, crisp and uncertainty-aware.

Both controllers keep the box temperature inside a hysteresis band.  The
classical variant thresholds a plain number; the uncertainty-aware variant
switches only when the probability of being past a threshold reaches the
configured confidence level.  Once safe mode latches, the heater stays off.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .uncertain import UncertainReal, decide, lt_prob

UA_SIDES = ("both", "off_only", "on_only")


@dataclass(frozen=True)
class ControlBand:
    t_low: float
    t_high: float
    confidence: float = 0.95
    ua_sides: str = "both"   # which decisions use the confidence test

    def __post_init__(self) -> None:
        if not self.t_low < self.t_high:
            raise ValueError(f"band requires t_low < t_high, got ({self.t_low}, {self.t_high})")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0,1), got {self.confidence}")
        if self.ua_sides not in UA_SIDES:
            raise ValueError(f"ua_sides must be one of {UA_SIDES}, got {self.ua_sides!r}")


@dataclass(frozen=True)
class ControllerState:
    heater_on: bool = False
    safe_mode: bool = False
    last_decision_time: float = 0.0

    def __post_init__(self) -> None:
        if self.safe_mode and self.heater_on:
            raise ValueError("safe mode implies heater off")


def classical_decide(temp: float, st: ControllerState, band: ControlBand,
                     now: float = 0.0) -> ControllerState:
    """Crisp hysteresis: off at/above t_high, on at/below t_low, else hold."""
    if st.safe_mode:
        return st
    heater_on = st.heater_on
    if temp >= band.t_high:
        heater_on = False
    elif temp <= band.t_low:
        heater_on = True
    return replace(st, heater_on=heater_on, last_decision_time=now)


def ua_decide(temp: UncertainReal, st: ControllerState, band: ControlBand,
              now: float = 0.0) -> ControllerState:
    """Stochastic hysteresis: switch when past-threshold confidence is reached.

    With a crisp input this reduces to classical_decide away from the exact
    thresholds: P(temp > t_high) is then 0 or 1.
    """
    if st.safe_mode:
        return st
    high = UncertainReal(band.t_high)
    low = UncertainReal(band.t_low)
    heater_on = st.heater_on
    use_off = band.ua_sides in ("both", "off_only")
    use_on = band.ua_sides in ("both", "on_only")
    above = decide(lt_prob(high, temp), band.confidence) if use_off else temp.mean >= band.t_high
    below = decide(lt_prob(temp, low), band.confidence) if use_on else temp.mean <= band.t_low
    if above:
        heater_on = False
    elif below:
        heater_on = True
    return replace(st, heater_on=heater_on, last_decision_time=now)


def enter_safe_mode(st: ControllerState) -> ControllerState:
    """Latch safe mode: heater off, irreversible for the rest of the run."""
    return replace(st, heater_on=False, safe_mode=True)
