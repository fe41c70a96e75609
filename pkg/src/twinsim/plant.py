"""Incubator thermal dynamics.

Two-state model by Newton's law of cooling: a heater element exchanging
heat with the box air, the box air leaking to the room:

    dT_heater/dt = (on * V * I - g_heater * (T_heater - T_box)) / c_heater
    dT_box/dt    = (g_heater * (T_heater - T_box) - g_box * (T_box - T_room)) / c_air

Two integrators share these equations.  The measurand ("ground truth")
integrator is deterministic and uses RK4.  The digital-twin integrator is
forward Euler on the means with a linearized covariance update, so its
output uncertainty grows over time:

    P' = A P A^T + h^2 * J_theta Sigma_theta J_theta^T + (k_num * h^2)^2 * I

with A = I + h * df/dx.  The last term models the solver's per-step
numerical uncertainty (local error proportional to h^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .uncertain import UncertainReal


class SimulationFault(RuntimeError):
    """Raised when an integrator produces a non-finite state."""


@dataclass(frozen=True)
class PlantParams:
    """Thermal parameters; nominal value plus parameter uncertainty each."""

    c_air: UncertainReal          # heat capacity of box air (J/degC)
    g_box: UncertainReal          # heat transfer box<->room (W/degC)
    c_heater: UncertainReal       # heat capacity of heater (J/degC)
    g_heater: UncertainReal       # heat transfer heater<->air (W/degC)
    v_heater: UncertainReal       # heater supply voltage (V)
    i_heater: UncertainReal       # heater supply current (A)
    t_room: float = 21.0          # room temperature (degC), constant

    def __post_init__(self) -> None:
        for name in ("c_air", "g_box", "c_heater", "g_heater", "v_heater", "i_heater"):
            u: UncertainReal = getattr(self, name)
            if u.mean <= 0.0:
                raise ValueError(f"plant parameter {name} must be > 0, got {u.mean}")

    def nominal(self) -> tuple[float, float, float, float, float, float, float]:
        return (self.c_air.mean, self.g_box.mean, self.c_heater.mean,
                self.g_heater.mean, self.v_heater.mean, self.i_heater.mean,
                self.t_room)

    def stability_bound(self) -> float:
        """Largest forward-Euler step for which the linear dynamics are stable."""
        c_a, g_b, c_h, g_h, _, _, _ = self.nominal()
        # eigenvalues of [[-gh/ch, gh/ch], [gh/ca, -(gh+gb)/ca]]
        a = g_h / c_h
        b = (g_h + g_b) / c_a
        disc = math.sqrt((a - b) ** 2 + 4.0 * (g_h / c_h) * (g_h / c_a))
        lam_max = (a + b + disc) / 2.0
        return 2.0 / lam_max


@dataclass(frozen=True)
class SolverConfig:
    """Digital-twin solver: step size, numerical-error coefficient, initial std."""

    h: float
    k_num: float
    sigma_init: float

    def __post_init__(self) -> None:
        if self.h <= 0.0:
            raise ValueError(f"solver step h must be > 0, got {self.h}")
        if self.k_num < 0.0:
            raise ValueError(f"k_num must be >= 0, got {self.k_num}")
        if self.sigma_init < 0.0:
            raise ValueError(f"sigma_init must be >= 0, got {self.sigma_init}")

    def validate_for(self, params: PlantParams) -> None:
        bound = params.stability_bound()
        if self.h >= bound:
            raise ValueError(
                f"solver step h={self.h} exceeds the forward-Euler stability "
                f"bound {bound:.6g} s for these plant parameters"
            )


@dataclass(frozen=True)
class PlantState:
    """Box and heater temperatures at a point in time.

    ``cov_hb`` carries the heater/box covariance the linearized update needs;
    it is zero for deterministic states.
    """

    t_box: UncertainReal
    t_heater: UncertainReal
    time: float = 0.0
    cov_hb: float = 0.0

    def is_deterministic(self) -> bool:
        return self.t_box.std == 0.0 and self.t_heater.std == 0.0 and self.cov_hb == 0.0


def make_state(t_box: float, t_heater: float, time: float = 0.0,
               sigma: float = 0.0) -> PlantState:
    return PlantState(UncertainReal(t_box, sigma), UncertainReal(t_heater, sigma),
                      time=time)


def derivatives(state: PlantState, heater_on: bool, params: PlantParams) -> tuple[float, float]:
    """(dT_box/dt, dT_heater/dt) at the state's nominal temperatures."""
    c_a, g_b, c_h, g_h, v, i, t_r = params.nominal()
    t_b = state.t_box.mean
    t_h = state.t_heater.mean
    power = v * i if heater_on else 0.0
    d_heater = (power - g_h * (t_h - t_b)) / c_h
    d_box = (g_h * (t_h - t_b) - g_b * (t_b - t_r)) / c_a
    return d_box, d_heater


def _rk4_steps(t_b: float, t_h: float, power: float, c_a: float, g_b: float,
               c_h: float, g_h: float, t_r: float, h: float, n: int) -> tuple[float, float]:
    for _ in range(n):
        k1h = (power - g_h * (t_h - t_b)) / c_h
        k1b = (g_h * (t_h - t_b) - g_b * (t_b - t_r)) / c_a
        th2 = t_h + 0.5 * h * k1h
        tb2 = t_b + 0.5 * h * k1b
        k2h = (power - g_h * (th2 - tb2)) / c_h
        k2b = (g_h * (th2 - tb2) - g_b * (tb2 - t_r)) / c_a
        th3 = t_h + 0.5 * h * k2h
        tb3 = t_b + 0.5 * h * k2b
        k3h = (power - g_h * (th3 - tb3)) / c_h
        k3b = (g_h * (th3 - tb3) - g_b * (tb3 - t_r)) / c_a
        th4 = t_h + h * k3h
        tb4 = t_b + h * k3b
        k4h = (power - g_h * (th4 - tb4)) / c_h
        k4b = (g_h * (th4 - tb4) - g_b * (tb4 - t_r)) / c_a
        t_h += h * (k1h + 2.0 * k2h + 2.0 * k3h + k4h) / 6.0
        t_b += h * (k1b + 2.0 * k2b + 2.0 * k3b + k4b) / 6.0
    return t_b, t_h


def step_gt(state: PlantState, heater_on: bool, params: PlantParams, h: float) -> PlantState:
    """Advance the deterministic measurand by one RK4 step."""
    return advance_gt(state, heater_on, params, h, 1)


def advance_gt(state: PlantState, heater_on: bool, params: PlantParams,
               h: float, n_steps: int) -> PlantState:
    """Advance the measurand by n RK4 steps with a constant heater input."""
    if not state.is_deterministic():
        raise ValueError("measurand state must be deterministic (std = 0)")
    c_a, g_b, c_h, g_h, v, i, t_r = params.nominal()
    power = v * i if heater_on else 0.0
    t_b, t_h = _rk4_steps(state.t_box.mean, state.t_heater.mean, power,
                          c_a, g_b, c_h, g_h, t_r, h, n_steps)
    if not (math.isfinite(t_b) and math.isfinite(t_h)):
        raise SimulationFault(f"measurand diverged at t={state.time + n_steps * h}")
    return PlantState(UncertainReal(t_b), UncertainReal(t_h),
                      time=state.time + n_steps * h)


def step_dt(state: PlantState, heater_on: bool, params: PlantParams,
            solver: SolverConfig) -> PlantState:
    """Advance the digital twin by one Euler step with variance propagation."""
    return advance_dt(state, heater_on, params, solver, 1)


def advance_dt(state: PlantState, heater_on: bool, params: PlantParams,
               solver: SolverConfig, n_steps: int) -> PlantState:
    """Advance the digital twin by n Euler steps with a constant heater input."""
    c_a, g_b, c_h, g_h, v, i, t_r = params.nominal()
    s_ca = params.c_air.std
    s_gb = params.g_box.std
    s_ch = params.c_heater.std
    s_gh = params.g_heater.std
    s_v = params.v_heater.std
    s_i = params.i_heater.std

    h = solver.h
    power = v * i if heater_on else 0.0
    on = 1.0 if heater_on else 0.0

    # A = I + h * df/dx, constant along the trajectory
    a11 = 1.0 - h * g_h / c_h           # heater row
    a12 = h * g_h / c_h
    a21 = h * g_h / c_a                 # box row
    a22 = 1.0 - h * (g_h + g_b) / c_a

    q_num = (solver.k_num * h * h) ** 2
    h2 = h * h

    t_h = state.t_heater.mean
    t_b = state.t_box.mean
    p_hh = state.t_heater.std ** 2
    p_bb = state.t_box.std ** 2
    p_hb = state.cov_hb

    for _ in range(n_steps):
        dth = t_h - t_b
        f_h = (power - g_h * dth) / c_h
        f_b = (g_h * dth - g_b * (t_b - t_r)) / c_a

        # parameter-uncertainty injection, first order: h^2 * J_th S J_th^T
        jh_gh = -dth / c_h
        jb_gh = dth / c_a
        q_hh = h2 * ((on * i * s_v / c_h) ** 2 + (on * v * s_i / c_h) ** 2
                     + (jh_gh * s_gh) ** 2 + (f_h * s_ch / c_h) ** 2) + q_num
        q_bb = h2 * ((jb_gh * s_gh) ** 2 + ((t_b - t_r) * s_gb / c_a) ** 2
                     + (f_b * s_ca / c_a) ** 2) + q_num
        q_hb = h2 * jh_gh * jb_gh * s_gh * s_gh   # g_heater appears in both rows

        t_h += h * f_h
        t_b += h * f_b

        n_hh = a11 * a11 * p_hh + 2.0 * a11 * a12 * p_hb + a12 * a12 * p_bb + q_hh
        n_bb = a21 * a21 * p_hh + 2.0 * a21 * a22 * p_hb + a22 * a22 * p_bb + q_bb
        n_hb = (a11 * a21 * p_hh + (a11 * a22 + a12 * a21) * p_hb
                + a12 * a22 * p_bb + q_hb)
        p_hh, p_bb, p_hb = n_hh, n_bb, n_hb

    if not (math.isfinite(t_b) and math.isfinite(t_h)
            and math.isfinite(p_bb) and math.isfinite(p_hh)):
        raise SimulationFault(f"digital twin diverged at t={state.time + n_steps * h}")

    return PlantState(UncertainReal(t_b, math.sqrt(p_bb)),
                      UncertainReal(t_h, math.sqrt(p_hh)),
                      time=state.time + n_steps * h,
                      cov_hb=p_hb)


def reset_state(state: PlantState, new_t_box: UncertainReal) -> PlantState:
    """Replace the box temperature with a more certain estimate.

    The heater temperature and time are retained.  The heater/box covariance
    is dropped: the replacement value is dominated by fresh measurement
    information, so the old correlation no longer applies.
    """
    if new_t_box.std > state.t_box.std:
        raise ValueError(
            f"reset must not increase uncertainty: new std {new_t_box.std} "
            f"> current {state.t_box.std}"
        )
    return replace(state, t_box=new_t_box, cov_hb=0.0)
