from .array_response import ResponseSurface, array_response, find_peaks, focusing_phases, make_grid
from .config import ConfigError, ExperimentConfig, load_config
from .sweep import ResultRow, run_sweep
from .timing import TimingRow, time_scheme, timing_compare

__all__ = [
    "ConfigError", "ExperimentConfig", "ResponseSurface", "ResultRow", "TimingRow", "array_response",
    "find_peaks", "focusing_phases", "load_config", "make_grid", "run_sweep", "time_scheme", "timing_compare",
]
