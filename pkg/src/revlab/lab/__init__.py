"""Scenario catalog, reversal pipelines and the command-line interface."""

from revlab.lab.config import ScenarioConfig, load_config, lookup, resolve, scenario_catalog
from revlab.lab.experiment import (BracketError, ExperimentRecord, ThresholdResult, run_reversal_experiment,
                                   sweep_zf, threshold_bisect)

__all__ = ["BracketError", "ExperimentRecord", "ScenarioConfig", "ThresholdResult", "load_config", "lookup",
           "resolve", "run_reversal_experiment", "scenario_catalog", "sweep_zf", "threshold_bisect"]
