"""Sphere-activation world: goals, dependency rules, context feature, resets.

A scenario places a handful of spheres in the arm workspace. Touching a
sphere activates it ("lights it up") only if its dependency rule is
satisfied by the current world state: every sphere in ``requires_on`` must
already be active, no sphere in ``blocked_by`` may be active, and an
optional binary context feature must hold the required value. Activated
spheres stay on until the next reset; resets happen per trial or per epoch
depending on the scenario schedule.

World state is an immutable value: touching returns a new state, which keeps
trial bookkeeping and table keying trivially safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np
import yaml

from .errors import ConfigError

Point = tuple[float, float]

RESET_POLICIES = ("per_trial", "per_epoch")
CONTEXT_MODES = ("none", "context_feature", "full_state")


@dataclass(frozen=True)
class Goal:
    """One sphere the agent can learn to activate."""

    index: int
    label: str
    position: Point


@dataclass(frozen=True)
class DependencyRule:
    """Activation conditions for one goal, evaluated on current state only.

    ``requires_on`` spheres must all be active, no ``blocked_by`` sphere may
    be active, and ``requires_context`` (if not None) must equal the context
    feature. Mutual exclusion between two chains is encoded as the chain
    starts blocking each other; the rest of the exclusion follows through
    ``requires_on`` transitivity.
    """

    goal: int
    requires_on: frozenset[int] = frozenset()
    blocked_by: frozenset[int] = frozenset()
    requires_context: float | None = None


@dataclass(frozen=True)
class WorldState:
    """Sphere on/off statuses plus the binary context feature."""

    sphere_on: tuple[bool, ...]
    context_feature: float

    def with_sphere_on(self, index: int) -> "WorldState":
        on = list(self.sphere_on)
        on[index] = True
        return replace(self, sphere_on=tuple(on))

    def key_string(self) -> str:
        """Compact text form, e.g. ``010010/1`` (bits in goal-index order)."""
        bits = "".join("1" if b else "0" for b in self.sphere_on)
        return f"{bits}/{int(self.context_feature)}"


def state_key(state: WorldState, mode: str) -> tuple:
    """Hashable table key for a state under the given context mode.

    ``none`` collapses every state to one key, ``context_feature`` keys on
    the binary context alone, ``full_state`` keys on sphere statuses plus
    context (at most 2^n_spheres * 2 distinct keys).
    """
    if mode == "none":
        return ()
    if mode == "context_feature":
        return (int(state.context_feature),)
    if mode == "full_state":
        return tuple(int(b) for b in state.sphere_on) + (int(state.context_feature),)
    raise ConfigError(f"unknown context mode {mode!r}; expected one of {CONTEXT_MODES}")


def default_positions(n: int, radius: float = 0.6) -> tuple[Point, ...]:
    """Evenly spaced points on an arc in front of the arm base.

    The radius sits inside the default arm's reachable annulus, and spacing
    keeps neighbouring spheres more than two touch radii apart.
    """
    angles = np.linspace(math.pi / 6.0, 5.0 * math.pi / 6.0, n)
    return tuple((radius * math.cos(a), radius * math.sin(a)) for a in angles)


@dataclass(frozen=True)
class ScenarioSpec:
    """Static description of one experimental scenario.

    Exactly one DependencyRule per goal, index-aligned with ``goals``.
    ``context_mode`` declares what contextual input state-aware goal
    selectors and predictors receive in this scenario.
    """

    name: str
    goals: tuple[Goal, ...]
    rules: tuple[DependencyRule, ...]
    context_prob_on: float
    trials_per_epoch: int
    total_trials: int
    reset_policy: str
    context_mode: str = "full_state"

    # -- lookups ---------------------------------------------------------

    @property
    def n_goals(self) -> int:
        return len(self.goals)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.goals)

    def goal_index(self, goal: "int | str | Goal") -> int:
        """Normalize an index, label, or Goal to the goal index."""
        if isinstance(goal, Goal):
            goal = goal.index
        if isinstance(goal, str):
            try:
                return self.labels.index(goal)
            except ValueError:
                raise ConfigError(f"unknown goal label {goal!r}; have {self.labels}") from None
        index = int(goal)
        if not 0 <= index < self.n_goals:
            raise ConfigError(f"goal index {index} out of range [0, {self.n_goals})")
        return index

    # -- core dynamics ---------------------------------------------------

    def is_achievable(self, goal: "int | str | Goal", state: WorldState) -> bool:
        """Whether touching the goal's sphere right now would activate it.

        A sphere that is already on is not achievable again within the
        epoch: re-touching it has no effect and earns no reward.
        """
        index = self.goal_index(goal)
        if state.sphere_on[index]:
            return False
        rule = self.rules[index]
        if any(not state.sphere_on[r] for r in rule.requires_on):
            return False
        if any(state.sphere_on[b] for b in rule.blocked_by):
            return False
        if rule.requires_context is not None and rule.requires_context != state.context_feature:
            return False
        return True

    def apply_touch(self, goal: "int | str | Goal", state: WorldState) -> tuple[WorldState, bool]:
        """Touch a sphere: activate it iff achievable. No other sphere changes."""
        index = self.goal_index(goal)
        if self.is_achievable(index, state):
            return state.with_sphere_on(index), True
        return state, False

    def reset(self, rng: np.random.Generator) -> WorldState:
        """All spheres off; context feature redrawn (1.0 w.p. context_prob_on)."""
        cf = 1.0 if rng.random() < self.context_prob_on else 0.0
        return WorldState(sphere_on=(False,) * self.n_goals, context_feature=cf)

    # -- validation ------------------------------------------------------

    def validate(self) -> None:
        """Raise ConfigError on any structural violation."""
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate goal labels in {labels}")
        if len(self.rules) != self.n_goals:
            raise ConfigError(
                f"expected exactly one rule per goal ({self.n_goals}), got {len(self.rules)}"
            )
        for i, rule in enumerate(self.rules):
            if rule.goal != i:
                raise ConfigError(f"rule {i} is for goal {rule.goal}; rules must be index-aligned")
            if i in rule.requires_on:
                raise ConfigError(f"goal {labels[i]!r} requires itself")
            if rule.requires_on & rule.blocked_by:
                both = sorted(labels[j] for j in rule.requires_on & rule.blocked_by)
                raise ConfigError(f"goal {labels[i]!r} both requires and is blocked by {both}")
            for j in rule.requires_on | rule.blocked_by:
                if not 0 <= j < self.n_goals:
                    raise ConfigError(f"rule for {labels[i]!r} references goal index {j}")
            if rule.requires_context is not None and rule.requires_context not in (0.0, 1.0):
                raise ConfigError(
                    f"goal {labels[i]!r} requires_context {rule.requires_context}; must be 0.0 or 1.0"
                )
        cycle = self._find_requires_cycle()
        if cycle:
            pretty = " -> ".join(labels[i] for i in cycle)
            raise ConfigError(f"cyclic requires_on chain: {pretty}")
        if not 0.0 <= self.context_prob_on <= 1.0:
            raise ConfigError(f"context_prob_on {self.context_prob_on} outside [0, 1]")
        if self.reset_policy not in RESET_POLICIES:
            raise ConfigError(f"reset_policy {self.reset_policy!r}; expected one of {RESET_POLICIES}")
        if self.context_mode not in CONTEXT_MODES:
            raise ConfigError(f"context_mode {self.context_mode!r}; expected one of {CONTEXT_MODES}")
        if self.trials_per_epoch < 1 or self.total_trials < 1:
            raise ConfigError("trials_per_epoch and total_trials must be positive")
        if self.total_trials % self.trials_per_epoch != 0:
            raise ConfigError(
                f"total_trials {self.total_trials} not divisible by trials_per_epoch {self.trials_per_epoch}"
            )

    def _find_requires_cycle(self) -> list[int] | None:
        # DFS over requires_on edges; returns one cycle as an index path.
        WHITE, GREY, BLACK = 0, 1, 2
        color = [WHITE] * self.n_goals
        stack: list[int] = []

        def visit(i: int) -> list[int] | None:
            color[i] = GREY
            stack.append(i)
            for j in sorted(self.rules[i].requires_on):
                if color[j] == GREY:
                    return stack[stack.index(j):] + [j]
                if color[j] == WHITE:
                    found = visit(j)
                    if found:
                        return found
            stack.pop()
            color[i] = BLACK
            return None

        for i in range(self.n_goals):
            if color[i] == WHITE:
                found = visit(i)
                if found:
                    return found
        return None

    def describe_dependencies(self) -> str:
        """Human-readable dependency graph, one arc per line."""
        lines = []
        for rule in self.rules:
            label = self.labels[rule.goal]
            for r in sorted(rule.requires_on):
                lines.append(f"{self.labels[r]} -> {label}  (precondition)")
            for b in sorted(rule.blocked_by):
                lines.append(f"{self.labels[b]} -| {label}  (blocks)")
            if rule.requires_context is not None:
                lines.append(f"cf={rule.requires_context:g} -> {label}  (context)")
        return "\n".join(lines) if lines else "(no dependencies)"


# -- built-in scenarios ---------------------------------------------------

_LABELS = ("a", "b", "c", "d", "e", "f")


def _goals(labels: Sequence[str] = _LABELS, positions: Sequence[Point] | None = None) -> tuple[Goal, ...]:
    pos = tuple(positions) if positions is not None else default_positions(len(labels))
    return tuple(Goal(i, lab, pos[i]) for i, lab in enumerate(labels))


def _empty_rules(n: int) -> list[DependencyRule]:
    return [DependencyRule(goal=i) for i in range(n)]


def builtin_scenario(scenario_id: int) -> ScenarioSpec:
    """The three stock setups.

    1. Six unconditioned goals, 3000 trials, reset every trial.
    2. Six goals gated by the context feature (a/c/e need cf=1, b/d/f need
       cf=0, cf drawn 50/50 per trial), 4000 trials, reset every trial.
    3. Two precondition chains d->c->e and b->f->a with the chain starts d
       and b mutually exclusive; 2000 epochs of 3 trials (6000 trials),
       reset at epoch boundaries only.
    """
    goals = _goals()
    idx = {lab: i for i, lab in enumerate(_LABELS)}
    if scenario_id == 1:
        spec = ScenarioSpec(
            name="independent",
            goals=goals,
            rules=tuple(_empty_rules(6)),
            context_prob_on=0.0,
            trials_per_epoch=1,
            total_trials=3000,
            reset_policy="per_trial",
            context_mode="context_feature",
        )
    elif scenario_id == 2:
        rules = _empty_rules(6)
        for lab in ("a", "c", "e"):
            rules[idx[lab]] = DependencyRule(goal=idx[lab], requires_context=1.0)
        for lab in ("b", "d", "f"):
            rules[idx[lab]] = DependencyRule(goal=idx[lab], requires_context=0.0)
        spec = ScenarioSpec(
            name="context_gated",
            goals=goals,
            rules=tuple(rules),
            context_prob_on=0.5,
            trials_per_epoch=1,
            total_trials=4000,
            reset_policy="per_trial",
            context_mode="context_feature",
        )
    elif scenario_id == 3:
        rules = _empty_rules(6)
        for pre, post in (("d", "c"), ("c", "e"), ("b", "f"), ("f", "a")):
            rules[idx[post]] = DependencyRule(goal=idx[post], requires_on=frozenset({idx[pre]}))
        rules[idx["d"]] = DependencyRule(goal=idx["d"], blocked_by=frozenset({idx["b"]}))
        rules[idx["b"]] = DependencyRule(goal=idx["b"], blocked_by=frozenset({idx["d"]}))
        spec = ScenarioSpec(
            name="interrelated_chains",
            goals=goals,
            rules=tuple(rules),
            context_prob_on=0.0,
            trials_per_epoch=3,
            total_trials=6000,
            reset_policy="per_epoch",
            context_mode="full_state",
        )
    else:
        raise ConfigError(f"unknown builtin scenario {scenario_id!r}; valid ids are 1, 2, 3")
    spec.validate()
    return spec


# -- scenario files --------------------------------------------------------

def scenario_from_dict(data: Mapping) -> ScenarioSpec:
    """Build and validate a ScenarioSpec from a parsed mapping.

    Expected keys mirror the ScenarioSpec fields; ``rules`` is a list of
    mappings naming goals by label, and goals without an entry get an empty
    rule. Positions default to the standard arc.
    """
    if not isinstance(data, Mapping):
        raise ConfigError(f"scenario section must be a mapping, got {type(data).__name__}")
    try:
        labels = [str(lab) for lab in data["goals"]]
    except KeyError:
        raise ConfigError("scenario is missing the 'goals' list") from None
    positions = None
    if "positions" in data and data["positions"] is not None:
        pos_map = data["positions"]
        missing = [lab for lab in labels if lab not in pos_map]
        if missing:
            raise ConfigError(f"positions missing for goals {missing}")
        positions = [tuple(float(v) for v in pos_map[lab]) for lab in labels]
    goals = _goals(labels, positions)
    idx = {lab: i for i, lab in enumerate(labels)}

    def to_index(lab) -> int:
        if lab not in idx:
            raise ConfigError(f"rule references unknown goal {lab!r}; goals are {labels}")
        return idx[lab]

    rules = _empty_rules(len(labels))
    seen: set[int] = set()
    for entry in data.get("rules") or []:
        if "goal" not in entry:
            raise ConfigError(f"rule entry missing 'goal': {entry}")
        i = to_index(entry["goal"])
        if i in seen:
            raise ConfigError(f"multiple rules for goal {labels[i]!r}")
        seen.add(i)
        ctx = entry.get("requires_context")
        rules[i] = DependencyRule(
            goal=i,
            requires_on=frozenset(to_index(x) for x in entry.get("requires_on") or []),
            blocked_by=frozenset(to_index(x) for x in entry.get("blocked_by") or []),
            requires_context=None if ctx is None else float(ctx),
        )
    spec = ScenarioSpec(
        name=str(data.get("name", "custom")),
        goals=goals,
        rules=tuple(rules),
        context_prob_on=float(data.get("context_prob_on", 0.0)),
        trials_per_epoch=int(data.get("trials_per_epoch", 1)),
        total_trials=int(data.get("total_trials", 3000)),
        reset_policy=str(data.get("reset_policy", "per_trial")),
        context_mode=str(data.get("context_mode", "full_state")),
    )
    spec.validate()
    return spec


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    """Inverse of scenario_from_dict (positions always written out)."""
    rules = []
    for rule in spec.rules:
        if not (rule.requires_on or rule.blocked_by or rule.requires_context is not None):
            continue
        entry: dict = {"goal": spec.labels[rule.goal]}
        if rule.requires_on:
            entry["requires_on"] = sorted(spec.labels[i] for i in rule.requires_on)
        if rule.blocked_by:
            entry["blocked_by"] = sorted(spec.labels[i] for i in rule.blocked_by)
        if rule.requires_context is not None:
            entry["requires_context"] = rule.requires_context
        rules.append(entry)
    return {
        "name": spec.name,
        "goals": list(spec.labels),
        "positions": {g.label: [g.position[0], g.position[1]] for g in spec.goals},
        "rules": rules,
        "context_prob_on": spec.context_prob_on,
        "trials_per_epoch": spec.trials_per_epoch,
        "total_trials": spec.total_trials,
        "reset_policy": spec.reset_policy,
        "context_mode": spec.context_mode,
    }


def load_scenario(path: str) -> ScenarioSpec:
    """Load a scenario from a YAML file (top-level or under a 'scenario' key)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse scenario file {path}: {exc}") from exc
    if isinstance(data, Mapping) and "scenario" in data:
        data = data["scenario"]
    if data is None:
        raise ConfigError(f"scenario file {path} is empty")
    return scenario_from_dict(data)
