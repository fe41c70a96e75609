"""Uncertainty-aware digital-twin co-simulation of a thermal incubator."""

__version__ = "0.1.0"

from .uncertain import (  # noqa: F401
    UncertainBool,
    UncertainReal,
    add,
    decide,
    div,
    eq_in_distribution,
    lt_prob,
    mul,
    norm_cdf,
    scale,
    sub,
)
