"""Highest density region estimation in the plane."""

from ._hdrest import (
    Estimate,
    FormatError,
    InvalidArgument,
    bandwidth,
    hausdorff,
    hybrid,
    plugin,
    sample,
)

__all__ = [
    "Estimate",
    "FormatError",
    "InvalidArgument",
    "bandwidth",
    "hausdorff",
    "hybrid",
    "plugin",
    "sample",
]
