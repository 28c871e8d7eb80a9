"""Configuration-driven scenario runs, sweeps and file output."""

from .config import ScenarioConfig, config_schema, load_config, validate_config
from .runner import compare, run_scenario, scan, simulate, sweep
from .svgplot import emit_plot, render_svg
from .tables import Trajectory, read_trajectory, write_trajectory
