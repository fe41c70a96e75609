"""Offline figures for twinsim CSV output: flow-pipe time series and violins."""

__version__ = "0.1.0"

from .render import PlotSpec, RenderResult, render, render_timeseries, render_violin  # noqa: F401
from .schema import SchemaError  # noqa: F401
