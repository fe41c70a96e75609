"""Readers for the twinsim CSV schemas.

The three schemas are re-declared here on purpose: this package talks to
the simulator only through its published files, and a schema drift must
fail loudly rather than silently track internal changes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

TRACE_COLUMNS = ("time_s", "t_true", "t_perceived_mean", "t_perceived_std",
                 "u_pt", "u_dt", "u_mitigated", "heater_on", "event")
SWITCH_COLUMNS = ("run_id", "approach", "switch_time_s", "perceived_c",
                  "actual_c", "error_c")
UNCERTAINTY_COLUMNS = ("run_id", "approach", "time_s", "u_value", "u_kind")

EVENT_MARKS = ("RESET", "DIVERGED", "SAFE_MODE")


class SchemaError(ValueError):
    """The input file does not conform to the expected twinsim schema."""


@dataclass
class TraceData:
    time: list[float]
    t_true: list[float]
    mean: list[float]
    std: list[Optional[float]]
    heater_on: list[bool]
    events: list[tuple[float, str]]   # only the marked events


@dataclass
class SwitchData:
    approaches: dict[str, list[float]]   # approach -> signed errors, file order


@dataclass
class UncertaintyData:
    kinds: dict[str, list[float]]        # u_kind -> values, file order


def _check_header(path: str, fieldnames, expected) -> None:
    if tuple(fieldnames or ()) != expected:
        raise SchemaError(
            f"{path}: expected columns {','.join(expected)}, "
            f"got {','.join(fieldnames or ('<none>',))}")


def _opt_float(cell: str) -> Optional[float]:
    return None if cell == "" else float(cell)


def read_trace(path: str) -> TraceData:
    data = TraceData([], [], [], [], [], [])
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(path, reader.fieldnames, TRACE_COLUMNS)
        for row in reader:
            try:
                t = float(row["time_s"])
                data.time.append(t)
                data.t_true.append(float(row["t_true"]))
                data.mean.append(float(row["t_perceived_mean"]))
                data.std.append(_opt_float(row["t_perceived_std"]))
                data.heater_on.append(row["heater_on"] == "1")
                if row["event"] in EVENT_MARKS:
                    data.events.append((t, row["event"]))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: bad trace row {row}: {exc}") from exc
    if not data.time:
        raise SchemaError(f"{path}: trace has no rows")
    return data


def read_switch_errors(path: str) -> SwitchData:
    data = SwitchData({})
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(path, reader.fieldnames, SWITCH_COLUMNS)
        for row in reader:
            try:
                data.approaches.setdefault(row["approach"], []).append(
                    float(row["error_c"]))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: bad switch row {row}: {exc}") from exc
    return data


def read_uncertainties(path: str) -> UncertaintyData:
    data = UncertaintyData({})
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(path, reader.fieldnames, UNCERTAINTY_COLUMNS)
        for row in reader:
            try:
                data.kinds.setdefault(row["u_kind"], []).append(float(row["u_value"]))
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: bad uncertainty row {row}: {exc}") from exc
    return data


def sniff_violin_kind(path: str) -> str:
    """Decide violin mode from the file header: switch errors or uncertainties."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = tuple(next(csv.reader(fh), ()))
    if header == SWITCH_COLUMNS:
        return "violin_error"
    if header == UNCERTAINTY_COLUMNS:
        return "violin_uncertainty"
    raise SchemaError(f"{path}: header matches neither switch-error nor "
                      f"uncertainty schema")
