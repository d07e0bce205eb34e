"""Seedable vehicular fog computing simulator with joint resource allocation
and task offloading (convex RSU allocation, contract-based FV incentives,
deferred-acceptance matching) and comparison policies."""
from ._kernels import BACKEND
from .config import DEFAULT_CONFIG, ConfigError, ScenarioConfig, load_config
from .engine import SlotContext, SlotOutcome, check_constraints, run
from .metrics import RunMetrics, jain_fairness
from .policies import POLICIES, get_policy
from .scenario import generate_scenario

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DEFAULT_CONFIG", "ConfigError", "ScenarioConfig", "load_config", "SlotContext", "SlotOutcome",
    "check_constraints", "run", "RunMetrics", "jain_fairness", "POLICIES", "get_policy",
    "generate_scenario",
]
