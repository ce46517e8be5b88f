"""Streaming frequency estimation for biased sinusoids.

Two estimators over a shared simulation core: a fixed-time scheme (hybrid
differentiator + sliding-window regressors + two-branch adaptive law) whose
settling time does not grow with the initial error, and a finite-time
Volterra-kernel baseline whose settling time does. A scenario CLI reproduces
the benchmark experiments.
"""

__version__ = "0.1.0"

from .adaptive import EstimatorConfig, EstimatorState, adapt_field, residual, settling_bound, step_output
from .baseline import BaselineConfig, BaselineState, baseline_field, baseline_output, kernels
from .differentiator import (
    DifferentiatorConfig,
    DifferentiatorState,
    derivative_field,
    exactness_time,
    kappa_from_bound,
    spow,
    theta,
)
from .engine import Scenario, ScenarioResult, SimConfig, run, settling_time, sweep
from .errors import (
    ConfigInvalid,
    EmptyTrace,
    FreqestError,
    NonFiniteInput,
    NonFiniteSample,
    NonFiniteState,
    NonPositiveWindow,
    UnknownAxis,
)
from .scenario import PRESETS, build_scenario, load_scenario_file, preset_scenario, scenario_to_dict
from .signal import DerivativeBound, NoiseSpec, NoiseStream, SignalSpec, measure
from .windows import WindowIntegral, pe_lower_bound

__all__ = [
    "__version__",
    "SignalSpec", "NoiseSpec", "NoiseStream", "DerivativeBound", "measure",
    "DifferentiatorConfig", "DifferentiatorState", "derivative_field",
    "exactness_time", "kappa_from_bound", "spow", "theta",
    "WindowIntegral", "pe_lower_bound",
    "EstimatorConfig", "EstimatorState", "adapt_field", "residual",
    "settling_bound", "step_output",
    "BaselineConfig", "BaselineState", "baseline_field", "baseline_output", "kernels",
    "Scenario", "ScenarioResult", "SimConfig", "run", "settling_time", "sweep",
    "PRESETS", "build_scenario", "load_scenario_file", "preset_scenario", "scenario_to_dict",
    "FreqestError", "ConfigInvalid", "NonFiniteState", "NonFiniteSample",
    "NonFiniteInput", "EmptyTrace", "NonPositiveWindow", "UnknownAxis",
]
