"""Policy-aware intentional agents: action descriptions, authorization and obligation policies,
behavior modes, planning and an observe-interpret-act loop."""

from .compliance import ModeConfig, compile_policy_dynamics
from .dsl import parse_domain, parse_policy, parse_scenario
from .errors import ApiaError, DiagnosisFailure, DslError, PolicyInconsistency
from .loop import Simulation, interpret, select_intended
from .planner import Futile, Plan, plan

__all__ = [
    "ApiaError", "DiagnosisFailure", "DslError", "Futile", "ModeConfig", "Plan", "PolicyInconsistency",
    "Simulation", "compile_policy_dynamics", "interpret", "parse_domain", "parse_policy",
    "parse_scenario", "plan", "select_intended",
]

__version__ = "0.1.0"
