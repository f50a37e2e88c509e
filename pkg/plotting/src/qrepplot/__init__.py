"""Figure rendering for simulator sweep CSVs, consumed by contract only."""

from .figures import KINDS, build_figure, channel_overlay_points, render
from .reader import HEADER, SweepRow, parse_rows, read_rows

__all__ = [
    "HEADER",
    "KINDS",
    "SweepRow",
    "build_figure",
    "channel_overlay_points",
    "parse_rows",
    "read_rows",
    "render",
]
