from .emit import IoFailure, emit_samples
from .report import FAIL, INDETERMINATE, PASS, Check, ScenarioParams, ScenarioReport
from .scenarios import SCENARIO_IDS, UnknownScenario, default_params, random_dichotomy_instance, run_scenario

__all__ = [
    "FAIL",
    "INDETERMINATE",
    "PASS",
    "SCENARIO_IDS",
    "Check",
    "IoFailure",
    "ScenarioParams",
    "ScenarioReport",
    "UnknownScenario",
    "default_params",
    "emit_samples",
    "random_dichotomy_instance",
    "run_scenario",
]
