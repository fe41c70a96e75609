"""Figure rendering: flow-pipe time series and violin plots.

Every renderer returns the numbers it drew (band widths, annotated
medians) so tests can verify the figure against the source data without
parsing the image.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .schema import (  # noqa: E402
    SchemaError,
    read_switch_errors,
    read_trace,
    read_uncertainties,
    sniff_violin_kind,
)

PLOT_KINDS = ("timeseries", "violin_error", "violin_uncertainty")

_EVENT_STYLE = {"RESET": ("tab:purple", "v"), "DIVERGED": ("tab:red", "x"),
                "SAFE_MODE": ("tab:orange", "^")}


@dataclass(frozen=True)
class PlotSpec:
    input_path: str
    kind: str                      # timeseries | violin_error | violin_uncertainty
    output_path: str
    approaches: Optional[tuple[str, ...]] = None   # filter for violin_error
    k: float = 2.0                 # band half-width in stds

    def __post_init__(self) -> None:
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"plot kind must be one of {PLOT_KINDS}, got {self.kind!r}")
        if self.k <= 0.0:
            raise ValueError(f"band factor k must be > 0, got {self.k}")
        if not os.path.exists(self.input_path):
            raise FileNotFoundError(self.input_path)


@dataclass
class RenderResult:
    output_path: str
    annotations: dict[str, float] = field(default_factory=dict)  # label -> median
    band_halfwidth_start: float = 0.0
    band_halfwidth_max: float = 0.0
    band_halfwidth_end: float = 0.0
    events: tuple[tuple[float, str], ...] = ()
    groups: tuple[str, ...] = ()


def render(spec: PlotSpec) -> RenderResult:
    if spec.kind == "timeseries":
        return render_timeseries(spec)
    return render_violin(spec)


def render_timeseries(spec: PlotSpec) -> RenderResult:
    """Mean line with a +/- k*std band, heater state below, event markers."""
    if spec.approaches:
        raise ValueError("--approach applies to violin inputs; traces carry "
                         "a single approach")
    trace = read_trace(spec.input_path)
    t = np.asarray(trace.time)
    mean = np.asarray(trace.mean)
    half = spec.k * np.asarray([s if s is not None else 0.0 for s in trace.std])

    fig, (ax, ax_heat) = plt.subplots(
        2, 1, sharex=True, figsize=(9, 5),
        gridspec_kw={"height_ratios": (4, 1)}, constrained_layout=True)
    ax.fill_between(t, mean - half, mean + half, alpha=0.3, color="tab:blue",
                    linewidth=0, label=f"mean +/- {spec.k:g} std")
    ax.plot(t, mean, color="tab:blue", linewidth=1.2, label="perceived mean")
    ax.plot(t, trace.t_true, color="tab:red", linewidth=0.8, alpha=0.8,
            label="measurand")
    for name, (color, marker) in _EVENT_STYLE.items():
        times = [tt for tt, ev in trace.events if ev == name]
        if times:
            y = np.interp(times, t, mean)
            ax.scatter(times, y, color=color, marker=marker, zorder=5,
                       label=name, s=45)
    ax.set_ylabel("box temperature (degC)")
    ax.legend(loc="lower right", fontsize=8)
    ax_heat.step(t, [1 if on else 0 for on in trace.heater_on], where="post",
                 color="tab:green")
    ax_heat.set_ylim(-0.15, 1.15)
    ax_heat.set_yticks((0, 1), labels=("off", "on"))
    ax_heat.set_ylabel("heater")
    ax_heat.set_xlabel("time (s)")

    fig.savefig(spec.output_path)
    plt.close(fig)
    return RenderResult(output_path=spec.output_path,
                        band_halfwidth_start=float(half[0]),
                        band_halfwidth_max=float(half.max()),
                        band_halfwidth_end=float(half[-1]),
                        events=tuple(trace.events))


def _violin_axes(groups: dict[str, list[float]], ylabel: str, out: str,
                 annotate_abs_median: bool) -> RenderResult:
    kept = {name: np.asarray(vals) for name, vals in groups.items() if len(vals)}
    for name in set(groups) - set(kept):
        warnings.warn(f"group {name!r} is empty and was omitted from the plot")
    if not kept:
        raise SchemaError("no non-empty groups to plot")

    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(kept), 4.2),
                           constrained_layout=True)
    names = list(kept)
    data = [kept[name] for name in names]
    parts = ax.violinplot(data, showmedians=True,
                          quantiles=[[0.25, 0.75]] * len(names))
    parts["cmedians"].set_color("black")
    annotations: dict[str, float] = {}
    for pos, name in enumerate(names, start=1):
        values = kept[name]
        med = float(np.median(np.abs(values) if annotate_abs_median else values))
        annotations[name] = med
        label = "median |err|" if annotate_abs_median else "median"
        ax.annotate(f"{label}\n{med:.6f}", xy=(pos, float(np.median(values))),
                    xytext=(pos + 0.06, float(np.median(values))),
                    fontsize=7, va="center")
    ax.set_xticks(range(1, len(names) + 1), labels=names)
    ax.set_ylabel(ylabel)
    fig.savefig(out)
    plt.close(fig)
    return RenderResult(output_path=out, annotations=annotations,
                        groups=tuple(names))


def render_violin(spec: PlotSpec) -> RenderResult:
    """One violin per approach (switch errors) or per u_kind (uncertainties).

    Switch-error violins show the signed error distribution and annotate the
    median absolute error, the same statistic `twinsim summarize` reports.
    """
    kind = spec.kind
    if kind not in ("violin_error", "violin_uncertainty"):
        kind = sniff_violin_kind(spec.input_path)
    if kind == "violin_error":
        data = read_switch_errors(spec.input_path)
        groups = data.approaches
        if spec.approaches:
            unknown = set(spec.approaches) - set(groups)
            if unknown:
                raise ValueError(f"approaches {sorted(unknown)} not present in "
                                 f"{spec.input_path} (has {sorted(groups)})")
            groups = {name: groups[name] for name in spec.approaches}
        return _violin_axes(groups, "switch error (degC)", spec.output_path,
                            annotate_abs_median=True)
    data = read_uncertainties(spec.input_path)
    order = [k for k in ("U", "Uprime", "mu") if k in data.kinds]
    groups = {name: data.kinds[name] for name in order}
    return _violin_axes(groups, "box-temperature std (degC)", spec.output_path,
                        annotate_abs_median=False)
