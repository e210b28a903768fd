"""Autonomous open-ended learning of interrelated sphere-activation tasks.

A planar-arm world where touching a sphere activates it if its precondition
rules hold, plus three goal-selection systems driven by competence-based
intrinsic rewards: a stateless bandit (``grail``), a per-context bandit
(``c_grail``), and tabular Q-learning over sphere statuses (``m_grail``)
that propagates the value of hard goals back to their preconditions.
"""

from .arm import ArmConfig, check_touch, forward_kinematics, home_joints, step_toward
from .errors import ConfigError, NumericsError
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    Simulation,
    TrialRecord,
    count_wasted,
    load_config,
    run_experiment,
)
from .motivation import AchievementPredictor
from .selection import (
    BanditValues,
    ContextualValues,
    QValues,
    SelectionStrategy,
    softmax_probabilities,
)
from .skills import ActorCriticConfig, ActorCriticExpert, ExpertSelector, IdealizedExpert
from .world import (
    DependencyRule,
    Goal,
    ScenarioSpec,
    WorldState,
    builtin_scenario,
    load_scenario,
    state_key,
)

__version__ = "0.1.0"

__all__ = [
    "ArmConfig",
    "AchievementPredictor",
    "ActorCriticConfig",
    "ActorCriticExpert",
    "BanditValues",
    "ConfigError",
    "ContextualValues",
    "DependencyRule",
    "ExperimentConfig",
    "ExperimentResult",
    "ExpertSelector",
    "Goal",
    "IdealizedExpert",
    "NumericsError",
    "QValues",
    "ScenarioSpec",
    "SelectionStrategy",
    "Simulation",
    "TrialRecord",
    "WorldState",
    "builtin_scenario",
    "check_touch",
    "count_wasted",
    "forward_kinematics",
    "home_joints",
    "load_config",
    "load_scenario",
    "run_experiment",
    "softmax_probabilities",
    "state_key",
    "step_toward",
    "__version__",
]
