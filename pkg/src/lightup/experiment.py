"""Trial/epoch loop, replications, metrics, and CSV output.

One ``Simulation`` owns everything a single replication needs: the world
state, a goal-selection strategy, the achievement predictor, and two experts
plus an expert selector per goal. ``run_experiment`` runs seeded
replications (optionally in parallel processes), collects per-goal
competence curves and wasted-trial counts, and aggregates them as mean with
a 95% confidence band.

A trial is: select a goal from the current state, pick an arm's expert,
attempt the goal (an idealized Bernoulli draw, or a full arm rollout that
ends on the first touch of any sphere or on timeout), update the world on
touch, compute the intrinsic reward from the achievement predictor, apply
the learning gate to the expert update, and feed the reward back to the
goal selector.
"""

from __future__ import annotations

import concurrent.futures
import csv
import math
import os
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import yaml

from .arm import ArmConfig, check_touch, forward_kinematics, home_joints, step_toward
from .errors import ConfigError, NumericsError
from .motivation import AchievementPredictor
from .selection import SelectionStrategy
from .skills import (
    ActorCriticConfig,
    ActorCriticExpert,
    ExpertSelector,
    IdealizedExpert,
)
from .world import ScenarioSpec, WorldState, builtin_scenario, load_scenario

SYSTEMS = {"grail": "bandit", "c_grail": "contextual", "m_grail": "q"}
BACKENDS = ("idealized", "actor_critic")

# Goal-selection softmax temperatures, per system. Intrinsic rewards live on
# the scale of the predictor step (~0.1); the Q system additionally discounts
# twice before a chain-start value shows up at the initial state, so it needs
# a colder softmax to act on differences of a few 1e-3.
SYSTEM_TEMPERATURES = {"grail": 0.01, "c_grail": 0.01, "m_grail": 0.001}

ARMS = ("left", "right")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: "int | str | ScenarioSpec" = 1
    system: str = "grail"
    backend: str = "idealized"
    replications: int = 10
    seed: int = 0
    timeout_steps: int = 800
    eval_interval: int = 50
    eval_trials: int = 10
    temperature: float | None = None  # None: per-system default
    expert_temperature: float = 0.1
    expert_smoothing: float = 0.1
    predictor_eta: float = 0.1
    gate_epsilon: float = 0.05
    clip_reward: bool = True
    idealized_init_competence: float = 0.02
    idealized_learning_rate: float = 0.05
    idealized_disruption: float = 0.03
    idealized_exploration_floor: float = 0.22
    idealized_noise_scale: float = 0.0
    arm: ArmConfig = field(default_factory=ArmConfig)
    actor_critic: ActorCriticConfig = field(default_factory=ActorCriticConfig)
    out_dir: str | None = None
    jobs: int = 1
    dump_values: bool = False

    def validate(self) -> None:
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}; valid systems: {sorted(SYSTEMS)}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; valid backends: {sorted(BACKENDS)}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.timeout_steps < 1:
            raise ConfigError("timeout_steps must be >= 1")
        if self.eval_interval < 1:
            raise ConfigError("eval_interval must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.temperature is not None and self.temperature <= 0:
            raise ConfigError("temperature must be positive")

    def resolved_temperature(self) -> float:
        if self.temperature is not None:
            return self.temperature
        return SYSTEM_TEMPERATURES[self.system]


def resolve_scenario(cfg: ExperimentConfig) -> ScenarioSpec:
    """Instantiate the configured scenario (builtin id, file path, or spec)."""
    sc = cfg.scenario
    if isinstance(sc, ScenarioSpec):
        return sc
    if isinstance(sc, int):
        return builtin_scenario(sc)
    if isinstance(sc, str):
        if sc.isdigit():
            return builtin_scenario(int(sc))
        return load_scenario(sc)
    raise ConfigError(f"cannot interpret scenario reference {sc!r}")


@dataclass
class TrialRecord:
    replication: int
    trial: int
    epoch: int
    state_key: str
    goal: str
    achievable: bool
    achieved: bool
    reward: float
    steps: int


@dataclass
class ReplicationSeries:
    """Everything recorded for one replication."""

    replication: int
    records: list[TrialRecord]
    competence: list[tuple[int, str, float]]  # (trial_index, goal label, value)
    wasted: list[tuple[int, int]]             # (interval_end, cumulative count)
    value_rows: list[tuple[int, str, int, float]] = field(default_factory=list)

    def competence_at(self, trial_index: int) -> dict[str, float]:
        return {label: v for t, label, v in self.competence if t == trial_index}

    def final_competence(self) -> dict[str, float]:
        last = max(t for t, _, _ in self.competence)
        return self.competence_at(last)

    def cumulative_wasted_at(self, trial_index: int) -> int:
        for end, count in self.wasted:
            if end == trial_index:
                return count
        raise KeyError(f"no wasted-count row at trial {trial_index}")


def count_wasted(records: Sequence[TrialRecord], interval: tuple[int, int]) -> int:
    """Trials in (start, end] whose selected goal was not achievable."""
    start, end = interval
    return sum(1 for r in records if start < r.trial <= end and not r.achievable)


class Simulation:
    """One replication of one system on one scenario."""

    def __init__(self, spec: ScenarioSpec, cfg: ExperimentConfig, seed: int, replication: int = 0):
        cfg.validate()
        spec.validate()
        self.spec = spec
        self.cfg = cfg
        self.replication = replication
        self.rng = np.random.default_rng(seed)
        n = spec.n_goals

        context_mode = "none" if cfg.system == "grail" else spec.context_mode
        self.strategy = SelectionStrategy(
            SYSTEMS[cfg.system], n, cfg.resolved_temperature(), context_mode=context_mode
        )
        self.predictor = AchievementPredictor(
            n, eta=cfg.predictor_eta, context_mode=context_mode,
            clip_negative_reward=cfg.clip_reward,
        )
        self.use_gate = cfg.system != "grail"

        right_arm = cfg.arm if not cfg.arm.mirrored else cfg.arm.mirror()
        self.arm_cfgs = {"right": right_arm, "left": right_arm.mirror()}
        self.selectors = [
            ExpertSelector(smoothing=cfg.expert_smoothing, temperature=cfg.expert_temperature)
            for _ in range(n)
        ]
        self.experts = [[self._make_expert(side) for side in ARMS] for _ in range(n)]

        self.sphere_positions = np.array([g.position for g in spec.goals])
        self.state: WorldState = spec.reset(self.rng)
        self.trial = 0  # trials completed

    def _make_expert(self, side: str):
        cfg = self.cfg
        if cfg.backend == "idealized":
            return IdealizedExpert(
                competence=cfg.idealized_init_competence,
                learning_rate=cfg.idealized_learning_rate,
                disruption=cfg.idealized_disruption,
                exploration_floor=cfg.idealized_exploration_floor,
                noise_scale=cfg.idealized_noise_scale,
            )
        return ActorCriticExpert(self.arm_cfgs[side], cfg.actor_critic, self.rng)

    # -- trial loop --------------------------------------------------------

    def _epoch_of(self, trial: int) -> int:
        return (trial - 1) // self.spec.trials_per_epoch

    def _is_epoch_start(self, trial: int) -> bool:
        return (trial - 1) % self.spec.trials_per_epoch == 0

    def _is_epoch_end(self, trial: int) -> bool:
        return trial % self.spec.trials_per_epoch == 0

    def run_trial(self) -> TrialRecord:
        """Advance the simulation by one trial and return its record."""
        spec, cfg = self.spec, self.cfg
        trial = self.trial + 1
        if spec.reset_policy == "per_trial" or self._is_epoch_start(trial):
            self.state = spec.reset(self.rng)
        state = self.state

        goal, key = self.strategy.select(state, self.rng)
        achievable = spec.is_achievable(goal, state)
        arm_index = self.selectors[goal].select(self.rng)
        expert = self.experts[goal][arm_index]

        if cfg.backend == "idealized":
            achieved = expert.attempt(achievable, self.rng)
            new_state = spec.apply_touch(goal, state)[0] if achieved else state
            steps = 0
            trajectory = None
        else:
            new_state, achieved, steps, trajectory = self._rollout(goal, arm_index, state)

        gate = True if not self.use_gate else self.predictor.learning_gate(
            goal, state, achieved, epsilon=cfg.gate_epsilon
        )
        reward = self.predictor.update_and_reward(goal, state, achieved)
        if cfg.backend == "idealized":
            expert.learn(achieved=achieved, achievable=achievable, gate=gate)
        else:
            expert.learn(trajectory, gate=gate)
        if gate:
            # The gate protects the whole skill-learning side, arm choice
            # included: a trial the predictor flagged as hopeless says
            # nothing about which arm is better.
            self.selectors[goal].update(arm_index, achieved)

        next_key = self.strategy.state_key(new_state)
        terminal = spec.reset_policy == "per_trial" or self._is_epoch_end(trial)
        self.strategy.update(key, goal, reward, next_key, terminal)

        self.state = new_state
        self.trial = trial
        record = TrialRecord(
            replication=self.replication,
            trial=trial,
            epoch=self._epoch_of(trial),
            state_key=state.key_string(),
            goal=spec.labels[goal],
            achievable=achievable,
            achieved=achieved,
            reward=reward,
            steps=steps,
        )
        if achieved and not achievable:
            raise NumericsError(f"trial {trial}: achieved a goal that was not achievable")
        return record

    def _rollout(self, goal: int, arm_index: int, state: WorldState):
        """Arm rollout: ends at the first touch of any sphere or on timeout."""
        spec, cfg = self.spec, self.cfg
        arm_cfg = self.arm_cfgs[ARMS[arm_index]]
        expert = self.experts[goal][arm_index]
        joints = home_joints(arm_cfg)
        expert.begin_trial(self.rng)
        trajectory = []
        achieved = False
        steps = 0
        for step in range(1, cfg.timeout_steps + 1):
            action = expert.act(joints, self.rng, explore=True)
            next_joints = step_toward(joints, action, arm_cfg)
            effector = forward_kinematics(next_joints, arm_cfg)
            touched = None
            for i in range(spec.n_goals):
                if check_touch(effector, self.sphere_positions[i], arm_cfg):
                    touched = i
                    break
            reward = 0.0
            done = touched is not None or step == cfg.timeout_steps
            if touched is not None:
                state, activated = spec.apply_touch(touched, state)
                if touched == goal and activated:
                    reward = 1.0
                    achieved = True
            trajectory.append((joints, action, reward, next_joints, done))
            joints = next_joints
            steps = step
            if done:
                break
        return state, achieved, steps, trajectory

    # -- evaluation ----------------------------------------------------------

    def measure_competence(self, goal: "int | str") -> float:
        """Current skill level for a goal; never updates any learner.

        Idealized backend: the competence of the arm the expert selector
        would pick greedily. Actor-critic: frozen-policy success rate over
        ``eval_trials`` rollouts from a state with the goal's preconditions
        force-satisfied and exploration off.
        """
        goal = self.spec.goal_index(goal)
        arm_index = self.selectors[goal].greedy()
        expert = self.experts[goal][arm_index]
        if self.cfg.backend == "idealized":
            return float(expert.competence)
        eval_state = self._forced_precondition_state(goal)
        arm_cfg = self.arm_cfgs[ARMS[arm_index]]
        successes = 0
        for _ in range(self.cfg.eval_trials):
            joints = home_joints(arm_cfg)
            state = eval_state
            for _ in range(self.cfg.timeout_steps):
                action = expert.act(joints, rng=None, explore=False)
                joints = step_toward(joints, action, arm_cfg)
                effector = forward_kinematics(joints, arm_cfg)
                touched = None
                for i in range(self.spec.n_goals):
                    if check_touch(effector, self.sphere_positions[i], arm_cfg):
                        touched = i
                        break
                if touched is not None:
                    state, activated = self.spec.apply_touch(touched, state)
                    if touched == goal and activated:
                        successes += 1
                    break
        return successes / self.cfg.eval_trials

    def _forced_precondition_state(self, goal: int) -> WorldState:
        rule = self.spec.rules[goal]
        on = [False] * self.spec.n_goals
        for i in rule.requires_on:
            on[i] = True
        cf = rule.requires_context if rule.requires_context is not None else 0.0
        return WorldState(sphere_on=tuple(on), context_feature=cf)

    # -- full replication ----------------------------------------------------

    def run(self) -> ReplicationSeries:
        spec, cfg = self.spec, self.cfg
        records: list[TrialRecord] = []
        competence: list[tuple[int, str, float]] = []
        wasted: list[tuple[int, int]] = []
        value_rows: list[tuple[int, str, int, float]] = []

        def record_competence(trial_index: int) -> None:
            for label in spec.labels:
                competence.append((trial_index, label, self.measure_competence(label)))

        record_competence(0)
        cumulative_wasted = 0
        for t in range(1, spec.total_trials + 1):
            rec = self.run_trial()
            records.append(rec)
            if not rec.achievable:
                cumulative_wasted += 1
            if t % cfg.eval_interval == 0:
                record_competence(t)
                wasted.append((t, cumulative_wasted))
                if cfg.dump_values:
                    for key_text, g, v in self.strategy.dump_rows():
                        value_rows.append((t, key_text, g, v))
        if spec.total_trials % cfg.eval_interval != 0:
            record_competence(spec.total_trials)
            wasted.append((spec.total_trials, cumulative_wasted))
        return ReplicationSeries(self.replication, records, competence, wasted, value_rows)


# -- experiment-level runs --------------------------------------------------


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    scenario: ScenarioSpec
    replications: list[ReplicationSeries]
    competence_agg: list[tuple[int, str, float, float, float]]  # trial, goal, mean, lo, hi
    wasted_agg: list[tuple[int, float, float, float]]           # interval_end, mean, lo, hi


def _mean_ci(values: np.ndarray) -> tuple[float, float, float]:
    """Mean with a 95% normal confidence band (mean +- 1.96 SE)."""
    mean = float(values.mean())
    if len(values) < 2:
        return mean, mean, mean
    se = float(values.std(ddof=1)) / math.sqrt(len(values))
    return mean, mean - 1.96 * se, mean + 1.96 * se


def _replication_worker(args) -> ReplicationSeries:
    spec, cfg, seed, rep = args
    return Simulation(spec, cfg, seed=seed, replication=rep).run()


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all replications, aggregate, and (if configured) write CSV output."""
    cfg.validate()
    spec = resolve_scenario(cfg)
    jobs = [(spec, cfg, cfg.seed + rep, rep) for rep in range(cfg.replications)]
    if cfg.jobs > 1 and cfg.replications > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            series = list(pool.map(_replication_worker, jobs))
    else:
        series = [_replication_worker(job) for job in jobs]

    eval_points = [t for t, label, _ in series[0].competence if label == spec.labels[0]]
    competence_agg = []
    for t in eval_points:
        for label in spec.labels:
            values = np.array([s.competence_at(t)[label] for s in series])
            competence_agg.append((t, label) + _mean_ci(values))
    wasted_agg = []
    for i, (end, _) in enumerate(series[0].wasted):
        values = np.array([float(s.wasted[i][1]) for s in series])
        wasted_agg.append((end,) + _mean_ci(values))

    result = ExperimentResult(cfg, spec, series, competence_agg, wasted_agg)
    if cfg.out_dir:
        write_outputs(result, cfg.out_dir)
    return result


# -- CSV output ----------------------------------------------------------------


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_outputs(result: ExperimentResult, out_dir: str) -> None:
    """Write the full CSV set; byte-identical for identical config and seed."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config

    with open(os.path.join(out_dir, "trials.csv"), "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["replication", "trial", "epoch", "state_key", "goal",
                    "achievable", "achieved", "reward", "steps"])
        for s in result.replications:
            for r in s.records:
                w.writerow([r.replication, r.trial, r.epoch, r.state_key, r.goal,
                            int(r.achievable), int(r.achieved), repr(float(r.reward)), r.steps])

    with open(os.path.join(out_dir, "competence.csv"), "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["replication", "trial_index", "goal", "competence"])
        for s in result.replications:
            for t, label, v in s.competence:
                w.writerow([s.replication, t, label, repr(float(v))])

    with open(os.path.join(out_dir, "wasted.csv"), "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["replication", "interval_end", "cumulative_wasted"])
        for s in result.replications:
            for end, count in s.wasted:
                w.writerow([s.replication, end, count])

    with open(os.path.join(out_dir, "competence_agg.csv"), "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["trial_index", "goal", "mean", "ci_low", "ci_high"])
        for t, label, mean, lo, hi in result.competence_agg:
            w.writerow([t, label, repr(mean), repr(lo), repr(hi)])

    with open(os.path.join(out_dir, "wasted_agg.csv"), "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["interval_end", "mean", "ci_low", "ci_high"])
        for end, mean, lo, hi in result.wasted_agg:
            w.writerow([end, repr(mean), repr(lo), repr(hi)])

    if cfg.dump_values:
        with open(os.path.join(out_dir, "values.csv"), "w", encoding="utf-8", newline="") as fh:
            w = _writer(fh)
            w.writerow(["replication", "trial", "state_key", "goal", "value"])
            for s in result.replications:
                for t, key_text, g, v in s.value_rows:
                    w.writerow([s.replication, t, key_text, result.scenario.labels[g], repr(v)])

    meta = config_to_dict(cfg)
    # Where the run was written and how it was parallelized do not affect the
    # results; leave them out so identical configs yield identical metadata.
    meta.pop("out_dir", None)
    meta.pop("jobs", None)
    with open(os.path.join(out_dir, "run.yaml"), "w", encoding="utf-8") as fh:
        yaml.safe_dump(meta, fh, sort_keys=True)


# -- config files ----------------------------------------------------------------


_SCALAR_FIELDS = {
    "system": str, "backend": str, "replications": int, "seed": int,
    "timeout_steps": int, "eval_interval": int, "eval_trials": int,
    "temperature": float, "expert_temperature": float, "expert_smoothing": float,
    "predictor_eta": float, "gate_epsilon": float, "clip_reward": bool,
    "idealized_init_competence": float, "idealized_learning_rate": float,
    "idealized_disruption": float, "idealized_exploration_floor": float,
    "idealized_noise_scale": float,
    "out_dir": str, "jobs": int, "dump_values": bool,
}


def config_from_dict(data: Mapping) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed mapping, rejecting unknown keys."""
    from .world import scenario_from_dict  # local import to avoid cycle at module load

    if not isinstance(data, Mapping):
        raise ConfigError(f"config must be a mapping, got {type(data).__name__}")
    kwargs: dict = {}
    for key, value in data.items():
        if key == "scenario":
            if isinstance(value, Mapping):
                kwargs["scenario"] = scenario_from_dict(value)
            else:
                kwargs["scenario"] = value
        elif key == "arm":
            kwargs["arm"] = ArmConfig(**{k: tuple(v) if isinstance(v, list) else v
                                         for k, v in dict(value).items()})
        elif key == "actor_critic":
            kwargs["actor_critic"] = ActorCriticConfig(**dict(value))
        elif key in _SCALAR_FIELDS:
            caster = _SCALAR_FIELDS[key]
            kwargs[key] = value if value is None else caster(value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    cfg = ExperimentConfig(**kwargs)
    cfg.validate()
    return cfg


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def config_to_dict(cfg: ExperimentConfig) -> dict:
    from dataclasses import asdict

    from .world import scenario_to_dict

    data: dict = {}
    if isinstance(cfg.scenario, ScenarioSpec):
        data["scenario"] = scenario_to_dict(cfg.scenario)
    else:
        data["scenario"] = cfg.scenario
    for key in _SCALAR_FIELDS:
        data[key] = getattr(cfg, key)
    data["arm"] = {k: _plain(v) for k, v in asdict(cfg.arm).items()}
    data["actor_critic"] = {k: _plain(v) for k, v in asdict(cfg.actor_critic).items()}
    return data


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if data is None:
        raise ConfigError(f"config file {path} is empty")
    return config_from_dict(data)


def apply_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Replace selected fields, re-validating; None values are ignored."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    new = replace(cfg, **clean)
    new.validate()
    return new
