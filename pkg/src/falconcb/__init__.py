"""Contextual bandits reduced to offline least-squares regression (FALCON, FALCON+)."""

from ._kernels import BACKEND
from .algo import ActionDistribution, Learner, action_distribution, falcon_learning_rate, falcon_plus_learning_rate
from .core import ConfigError, FiniteFunctionClass, InteractionLog, TablePredictor, induced_policy, policy_reward
from .env import FiniteRealizableEnv, LinearRealizableEnv, make_planted_instance
from .oracle import erm_least_squares, linear_least_squares, xi_finite_class, xi_linear_class
from .schedule import geometric_schedule, known_horizon_schedule
from .sim import RunResult, regret_bound, replicate, run

__all__ = [
    "BACKEND",
    "ActionDistribution",
    "ConfigError",
    "FiniteFunctionClass",
    "FiniteRealizableEnv",
    "InteractionLog",
    "Learner",
    "LinearRealizableEnv",
    "RunResult",
    "TablePredictor",
    "action_distribution",
    "erm_least_squares",
    "falcon_learning_rate",
    "falcon_plus_learning_rate",
    "geometric_schedule",
    "induced_policy",
    "known_horizon_schedule",
    "linear_least_squares",
    "make_planted_instance",
    "policy_reward",
    "regret_bound",
    "replicate",
    "run",
    "xi_finite_class",
    "xi_linear_class",
]
