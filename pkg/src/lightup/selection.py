"""Goal-selection strategies sharing one softmax rule.

Three value stores, one per system flavour:

* ``BanditValues``     - one EMA per goal (smoothing 0.01), state-blind.
* ``ContextualValues`` - one EMA per goal per context key (smoothing 0.1).
* ``QValues``          - tabular Q-learning over context keys
                         (learning rate 0.1, discount 0.3), so the value of
                         practicing a goal includes the discounted rewards
                         that downstream goals can later provide.

Every strategy samples goals from a softmax over the current values at a
shared temperature. Value tables start at zero: no reward, no preference.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .world import WorldState, state_key

BANDIT_SMOOTHING = 0.01
CONTEXTUAL_SMOOTHING = 0.1
Q_LEARNING_RATE = 0.1
Q_DISCOUNT = 0.3


def softmax_probabilities(values: np.ndarray, temperature: float) -> np.ndarray:
    """Softmax distribution over values at the given temperature.

    Numerically stable for any finite values; sums to 1 within 1e-12. The
    strictly largest value always gets the largest probability, and the
    distribution flattens to uniform as temperature grows.
    """
    if temperature <= 0:
        raise ValueError(f"softmax temperature must be positive, got {temperature}")
    z = np.asarray(values, dtype=float) / temperature
    z = z - z.max()
    p = np.exp(z)
    return p / p.sum()


def sample_index(values: np.ndarray, temperature: float, rng: np.random.Generator) -> int:
    probs = softmax_probabilities(values, temperature)
    return int(rng.choice(len(probs), p=probs))


@dataclass
class BanditValues:
    """Per-goal reward EMA, ignoring state."""

    n_goals: int
    smoothing: float = BANDIT_SMOOTHING
    values: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.values = np.zeros(self.n_goals)

    def goal_values(self, key: tuple = ()) -> np.ndarray:
        return self.values

    def update(self, key: tuple, goal: int, reward: float, next_key: tuple = (), terminal: bool = True) -> None:
        """EMA update on the selected goal's cell only."""
        self.values[goal] += self.smoothing * (reward - self.values[goal])


@dataclass
class ContextualValues:
    """Per-(context key, goal) reward EMAs; keys are isolated from each other."""

    n_goals: int
    smoothing: float = CONTEXTUAL_SMOOTHING
    table: dict = field(default_factory=dict)

    def goal_values(self, key: tuple) -> np.ndarray:
        if key not in self.table:
            self.table[key] = np.zeros(self.n_goals)
        return self.table[key]

    def update(self, key: tuple, goal: int, reward: float, next_key: tuple = (), terminal: bool = True) -> None:
        values = self.goal_values(key)
        values[goal] += self.smoothing * (reward - values[goal])


@dataclass
class QValues:
    """Tabular Q-learning over context keys.

    The one-step target bootstraps on the best value of the post-trial key,
    except on terminal trials (epoch boundaries), where the target is the
    reward alone: the post-reset state is independent of the last choice, so
    bootstrapping across it would inject spurious value.
    """

    n_goals: int
    learning_rate: float = Q_LEARNING_RATE
    discount: float = Q_DISCOUNT
    table: dict = field(default_factory=dict)

    def goal_values(self, key: tuple) -> np.ndarray:
        if key not in self.table:
            self.table[key] = np.zeros(self.n_goals)
        return self.table[key]

    def update(self, key: tuple, goal: int, reward: float, next_key: tuple, terminal: bool) -> None:
        values = self.goal_values(key)
        target = reward
        if not terminal:
            target += self.discount * float(self.goal_values(next_key).max())
        values[goal] += self.learning_rate * (target - values[goal])


STRATEGY_KINDS = ("bandit", "contextual", "q")


class SelectionStrategy:
    """A value store plus softmax sampling plus state keying.

    ``context_mode`` controls what part of the world state the strategy can
    condition on; the bandit flavour always collapses to a single key.
    """

    def __init__(self, kind: str, n_goals: int, temperature: float, context_mode: str = "none"):
        if kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {kind!r}; expected one of {STRATEGY_KINDS}")
        self.kind = kind
        self.temperature = temperature
        self.context_mode = "none" if kind == "bandit" else context_mode
        if kind == "bandit":
            self.store = BanditValues(n_goals)
        elif kind == "contextual":
            self.store = ContextualValues(n_goals)
        else:
            self.store = QValues(n_goals)

    def state_key(self, state: WorldState) -> tuple:
        return state_key(state, self.context_mode)

    def goal_values(self, key: tuple) -> np.ndarray:
        return self.store.goal_values(key)

    def select(self, state: WorldState, rng: np.random.Generator) -> tuple[int, tuple]:
        """Sample a goal for the current state; returns (goal index, key used)."""
        key = self.state_key(state)
        goal = sample_index(self.goal_values(key), self.temperature, rng)
        return goal, key

    def update(self, key: tuple, goal: int, reward: float, next_key: tuple, terminal: bool) -> None:
        self.store.update(key, goal, reward, next_key, terminal)

    def dump_rows(self):
        """(state_key, goal, value) triples for every stored cell, sorted."""
        if isinstance(self.store, BanditValues):
            items = [((), self.store.values)]
        else:
            items = sorted(self.store.table.items())
        for key, values in items:
            key_text = "|".join(str(k) for k in key)
            for goal, value in enumerate(values):
                yield key_text, goal, float(value)

    def dump_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["state_key", "goal", "value"])
            for key_text, goal, value in self.dump_rows():
                writer.writerow([key_text, goal, repr(value)])
