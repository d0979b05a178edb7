"""Configuration, sweeps, figure recipes and the command-line interface."""
from .config import RunConfig, SweepAxis, TimeSpec, OutputSpec, load_config
from .figures import FIGURES, figure_config, run_figure
from .io import RunManifest
from .sweeps import baseline_reservoir, sweep_systematic, sweep_thermal

__all__ = ["RunConfig", "SweepAxis", "TimeSpec", "OutputSpec", "load_config", "FIGURES",
           "figure_config", "run_figure", "RunManifest", "baseline_reservoir", "sweep_systematic",
           "sweep_thermal"]
