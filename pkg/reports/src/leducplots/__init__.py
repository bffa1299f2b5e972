"""Figures and summaries recomputed from leduclab match logs."""

from .charts import plot_positions, plot_windows
from .frames import LogFormatError, LogFrame, load_frame, position_rows, window_rows
from .summary import summary_rows, to_csv, to_text

__all__ = [
    "plot_positions",
    "plot_windows",
    "LogFormatError",
    "LogFrame",
    "load_frame",
    "position_rows",
    "window_rows",
    "summary_rows",
    "to_csv",
    "to_text",
]

__version__ = "0.1.0"
