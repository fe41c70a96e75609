"""Scenario execution and experiment aggregation.

One run couples the measurand (the synthetic physical reality) with the
approach under study: the approach perceives the box temperature through
its own pipeline, its controller decides from the perceived value, and the
decisions actuate the measurand.  The gap between perceived and actual
temperature at heater-switch times is the figure of merit.

Approaches:
  GT    controller reads the measurand exactly (zero-error reference)
  PT    classical controller on the averaged raw sensor values
  UAPT  confidence-threshold controller on the averaged uncertain values
  UADT  confidence-threshold controller on the model's uncertain output
  MDTS  both twins fused by inverse variance, gated by consistency,
        with reliability-limit resets and divergence-triggered safe mode

Time runs on a discrete event loop at the measurand solver step; sensor and
control actions fire on their own coarser grids (exact multiples, validated).
The digital twin substeps between control cycles at its own step size.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import os
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import __version__
from .consistency import ConsistencyReport, DivergenceDetector, degree
from .control import ControllerState, classical_decide, enter_safe_mode, ua_decide
from .mitigation import fuse, mitigate_step
from .plant import PlantParams, advance_dt, advance_gt, make_state
from .scenario import ScenarioConfig, scenario_to_text
from .sensing import SensorModel, average, sample, to_uncertain
from .uncertain import UncertainReal

EVENTS = ("NONE", "SWITCH_ON", "SWITCH_OFF", "RESET", "DIVERGED", "SAFE_MODE")

TRACE_COLUMNS = ("time_s", "t_true", "t_perceived_mean", "t_perceived_std",
                 "u_pt", "u_dt", "u_mitigated", "heater_on", "event")
SWITCH_COLUMNS = ("run_id", "approach", "switch_time_s", "perceived_c",
                  "actual_c", "error_c")
UNCERTAINTY_COLUMNS = ("run_id", "approach", "time_s", "u_value", "u_kind")

BOX_SENSOR_ACCURACY = 0.5   # degC, DS18S20-class datasheet half-width


@dataclass(frozen=True)
class TraceRow:
    time: float
    t_true: float
    t_perceived_mean: float
    t_perceived_std: Optional[float]
    u_pt: Optional[float]
    u_dt: Optional[float]
    u_mitigated: Optional[float]
    heater_on: bool
    event: str


@dataclass(frozen=True)
class SwitchError:
    run_id: int
    approach: str
    switch_time: float
    perceived: float
    actual: float

    @property
    def error(self) -> float:
        return self.perceived - self.actual


@dataclass
class Trace:
    run_id: int
    approach: str
    rows: list[TraceRow]

    def switch_errors(self) -> list[SwitchError]:
        return [SwitchError(self.run_id, self.approach, r.time,
                            r.t_perceived_mean, r.t_true)
                for r in self.rows if r.event in ("SWITCH_ON", "SWITCH_OFF")]

    def uncertainty_rows(self) -> list[tuple[float, float, str]]:
        """(time, value, kind) rows for the uncertainty study."""
        out = []
        for r in self.rows:
            if r.u_dt is not None:
                out.append((r.time, r.u_dt, "U"))
            if r.u_pt is not None and self.approach in ("UAPT", "MDTS"):
                out.append((r.time, r.u_pt, "Uprime"))
            if r.u_mitigated is not None:
                out.append((r.time, r.u_mitigated, "mu"))
        return out

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in self.rows:
            writer.writerow((_fmt(r.time), _fmt(r.t_true),
                             _fmt(r.t_perceived_mean), _fmt(r.t_perceived_std),
                             _fmt(r.u_pt), _fmt(r.u_dt), _fmt(r.u_mitigated),
                             "1" if r.heater_on else "0", r.event))
        return buf.getvalue()


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else format(x, ".9g")


def _sensor_streams(seed: int, run_id: int) -> dict[str, np.random.Generator]:
    """Named, counter-based substreams so added draws never shift existing ones."""
    names = ("box_sensor_1", "box_sensor_2", "room_sensor", "plant_params")
    return {name: np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=seed + run_id, spawn_key=(idx,))))
        for idx, name in enumerate(names)}


def _draw_measurand_params(nominal: PlantParams,
                           rng: np.random.Generator) -> PlantParams:
    """Perturb each parameter by its stated uncertainty (calibration residual)."""
    def draw(u: UncertainReal) -> UncertainReal:
        return UncertainReal(u.mean + rng.normal(0.0, u.std) if u.std > 0.0 else u.mean,
                             u.std)
    return PlantParams(c_air=draw(nominal.c_air), g_box=draw(nominal.g_box),
                       c_heater=draw(nominal.c_heater), g_heater=draw(nominal.g_heater),
                       v_heater=draw(nominal.v_heater), i_heater=draw(nominal.i_heater),
                       t_room=nominal.t_room)


def run_scenario(cfg: ScenarioConfig, run_id: int = 0) -> Trace:
    """Execute one run; deterministic given (cfg, run_id)."""
    cfg.validate()
    base = cfg.base_step
    n_ticks = round(cfg.duration / base)
    sensor_every = round(cfg.sensor_period / base)
    control_every = round(cfg.control_period / base)
    n_dt_steps = round(cfg.control_period / cfg.solver.h)
    failure_tick = round(cfg.failure.time / base) if cfg.failure else None

    streams = _sensor_streams(cfg.seed, run_id)
    box_model = SensorModel(accuracy=BOX_SENSOR_ACCURACY, period=cfg.sensor_period)
    room_model = SensorModel(accuracy=BOX_SENSOR_ACCURACY, period=cfg.sensor_period)

    gt_params = (_draw_measurand_params(cfg.plant, streams["plant_params"])
                 if cfg.param_mismatch else cfg.plant)
    uses_sensors = cfg.approach in ("PT", "UAPT", "MDTS")
    uses_dt = cfg.approach in ("UADT", "MDTS")

    t_init = gt_params.t_room   # cold start: everything at ambient
    gt_state = make_state(t_init, t_init)

    dt_params = cfg.plant
    dt_state = None
    sample_room_each_tick = uses_dt and cfg.room_input_mode == "per_step"
    if uses_dt:
        if cfg.room_input_mode in ("init", "per_step"):
            room_reading = sample(gt_params.t_room, room_model,
                                  streams["room_sensor"], timestamp=0.0,
                                  sensor_id="room")
            dt_params = replace(cfg.plant, t_room=room_reading.raw)
        dt_state = make_state(t_init, t_init, sigma=cfg.solver.sigma_init)

    controller = ControllerState(heater_on=False)
    detector = DivergenceDetector(cfg.consistency)
    pending_reset = False
    safe_mode_logged = False
    latest_readings = None
    rows: list[TraceRow] = []

    for tick in range(n_ticks + 1):
        now = tick * base
        if tick > 0:
            gt_state = advance_gt(gt_state, controller.heater_on, gt_params, base, 1)
        if failure_tick is not None and tick == failure_tick:
            gt_params = replace(gt_params,
                                g_box=gt_params.g_box * cfg.failure.g_box_factor)

        if tick % sensor_every == 0:
            if uses_sensors:
                truth = gt_state.t_box.mean
                latest_readings = (
                    sample(truth, box_model, streams["box_sensor_1"], now, "box1"),
                    sample(truth, box_model, streams["box_sensor_2"], now, "box2"))
            if sample_room_each_tick and tick > 0:
                reading = sample(gt_params.t_room, room_model,
                                 streams["room_sensor"], now, "room")
                dt_params = replace(dt_params, t_room=reading.raw)

        if tick % control_every != 0:
            continue

        # -- control cycle --
        if uses_dt and now > 0.0:
            dt_state = advance_dt(dt_state, controller.heater_on, dt_params,
                                  cfg.solver, n_dt_steps)

        t_sensed = None
        if uses_sensors:
            t_sensed = average([to_uncertain(r, box_model) for r in latest_readings])

        event = "NONE"
        u_mitigated = None
        perceived: UncertainReal

        if cfg.approach == "GT":
            perceived = UncertainReal(gt_state.t_box.mean, 0.0)
        elif cfg.approach == "PT":
            perceived = UncertainReal(t_sensed.mean, 0.0)  # std discarded
        elif cfg.approach == "UAPT":
            perceived = t_sensed
        elif cfg.approach == "UADT":
            perceived = dt_state.t_box
        else:  # MDTS
            t_d = dt_state.t_box
            deg = degree(t_sensed, t_d, cfg.consistency.k)
            consistent = deg > cfg.consistency.r
            if consistent and not controller.safe_mode:
                if pending_reset:
                    fused, dt_state, record = mitigate_step(
                        t_sensed, t_d, dt_state, cfg.fusion, time=now)
                    pending_reset = False
                    if record.reset_triggered:
                        event = "RESET"
                else:
                    fused = fuse(t_sensed, t_d)
                perceived = fused
                u_mitigated = fused.std
                # publish-then-react: a limit crossing observed in this
                # cycle's record triggers the reset at the next cycle
                if dt_state.t_box.std >= cfg.fusion.reset_threshold:
                    pending_reset = True
            else:
                perceived = t_sensed
            divergence = detector.update(ConsistencyReport(
                time=now, degree=deg, consistent=consistent))
            if divergence is not None:
                controller = enter_safe_mode(controller)
                event = "DIVERGED"

        was_on = controller.heater_on
        if cfg.approach in ("GT", "PT"):
            controller = classical_decide(perceived.mean, controller, cfg.band, now)
        else:
            controller = ua_decide(perceived, controller, cfg.band, now)

        if event == "NONE":
            if controller.safe_mode and not safe_mode_logged:
                event = "SAFE_MODE"   # first full cycle after the DIVERGED row
                safe_mode_logged = True
            elif controller.heater_on != was_on:
                event = "SWITCH_ON" if controller.heater_on else "SWITCH_OFF"

        rows.append(TraceRow(
            time=now,
            t_true=gt_state.t_box.mean,
            t_perceived_mean=perceived.mean,
            t_perceived_std=None if cfg.approach == "PT" else perceived.std,
            u_pt=t_sensed.std if uses_sensors else None,
            u_dt=dt_state.t_box.std if uses_dt else None,
            u_mitigated=u_mitigated,
            heater_on=controller.heater_on,
            event=event,
        ))

    return Trace(run_id=run_id, approach=cfg.approach, rows=rows)


# ---------------------------------------------------------------------------
# Experiments


def _run_for_experiment(args: tuple[ScenarioConfig, int]) -> Trace:
    cfg, run_id = args
    return run_scenario(cfg, run_id)


def run_experiment(cfg: ScenarioConfig, out_dir: str, runs: Optional[int] = None,
                   workers: int = 1) -> dict[str, str]:
    """Run the configured number of scenarios and write the experiment CSVs.

    Per-run randomness derives from seed + run_id, so results do not depend
    on how runs are scheduled across workers.  Returns the written paths.
    """
    n_runs = cfg.runs if runs is None else runs
    if n_runs < 1:
        raise ValueError(f"runs must be >= 1, got {n_runs}")
    os.makedirs(out_dir, exist_ok=True)
    traces_dir = os.path.join(out_dir, "traces")
    os.makedirs(traces_dir, exist_ok=True)

    jobs = [(cfg, run_id) for run_id in range(n_runs)]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_for_experiment, jobs))
    else:
        traces = [_run_for_experiment(job) for job in jobs]
    traces.sort(key=lambda tr: tr.run_id)

    paths = {
        "switch_errors": os.path.join(out_dir, "switch_errors.csv"),
        "uncertainties": os.path.join(out_dir, "uncertainties.csv"),
        "manifest": os.path.join(out_dir, "manifest.txt"),
    }

    with open(paths["switch_errors"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWITCH_COLUMNS)
        for trace in traces:
            for sw in trace.switch_errors():
                writer.writerow((sw.run_id, sw.approach, _fmt(sw.switch_time),
                                 _fmt(sw.perceived), _fmt(sw.actual), _fmt(sw.error)))

    with open(paths["uncertainties"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(UNCERTAINTY_COLUMNS)
        for trace in traces:
            for time, value, kind in trace.uncertainty_rows():
                writer.writerow((trace.run_id, trace.approach, _fmt(time),
                                 _fmt(value), kind))

    for trace in traces:
        path = os.path.join(traces_dir, f"run_{trace.run_id:04d}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(trace.to_csv_text())

    with open(paths["manifest"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"twinsim {__version__}\n")
        fh.write(f"runs = {n_runs}\n")
        fh.write(scenario_to_text(cfg))

    return paths


# ---------------------------------------------------------------------------
# Summary statistics


@dataclass(frozen=True)
class ApproachSummary:
    approach: str
    count: int
    mean_abs: float
    median_abs: float
    std_abs: float
    q05: float
    q25: float
    q75: float
    q95: float


def read_switch_errors(path: str) -> list[SwitchError]:
    out: list[SwitchError] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(SWITCH_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing switch-error columns {sorted(missing)}")
        for row in reader:
            out.append(SwitchError(run_id=int(row["run_id"]),
                                   approach=row["approach"],
                                   switch_time=float(row["switch_time_s"]),
                                   perceived=float(row["perceived_c"]),
                                   actual=float(row["actual_c"])))
    return out


def summarize(errors: list[SwitchError]) -> dict[str, ApproachSummary]:
    """Per-approach statistics of the absolute switch error."""
    if not errors:
        raise ValueError("no switch errors to summarize")
    by_approach: dict[str, list[float]] = {}
    for err in errors:
        by_approach.setdefault(err.approach, []).append(abs(err.error))
    out: dict[str, ApproachSummary] = {}
    for approach, values in sorted(by_approach.items()):
        arr = np.asarray(values)
        q05, q25, q75, q95 = np.quantile(arr, (0.05, 0.25, 0.75, 0.95))
        out[approach] = ApproachSummary(
            approach=approach, count=arr.size, mean_abs=float(arr.mean()),
            median_abs=float(np.median(arr)), std_abs=float(arr.std(ddof=0)),
            q05=float(q05), q25=float(q25), q75=float(q75), q95=float(q95))
    return out


def summary_table(summaries: dict[str, ApproachSummary]) -> str:
    header = (f"{'approach':<9} {'count':>6} {'mean':>10} {'median':>10} "
              f"{'std':>10} {'q05':>10} {'q25':>10} {'q75':>10} {'q95':>10}")
    lines = [header, "-" * len(header)]
    for s in summaries.values():
        lines.append(f"{s.approach:<9} {s.count:>6d} {s.mean_abs:>10.6f} "
                     f"{s.median_abs:>10.6f} {s.std_abs:>10.6f} {s.q05:>10.6f} "
                     f"{s.q25:>10.6f} {s.q75:>10.6f} {s.q95:>10.6f}")
    pairs = [("MDTS", "UAPT"), ("MDTS", "UADT")]
    comparisons = [(a, b) for a, b in pairs if a in summaries and b in summaries]
    if comparisons:
        lines.append("")
        lines.append("median |error| ratios:")
        for a, b in comparisons:
            ratio = summaries[a].median_abs / summaries[b].median_abs
            lines.append(f"  {a} / {b} = {ratio:.4f}")
    return "\n".join(lines) + "\n"
