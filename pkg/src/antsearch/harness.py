"""Experiment driver: presets, configs, seed sweeps, scores and CSV output."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .bandit import BanditTrial, CHECKPOINTS, run_trials, write_trial_logs
from .entropy import EntropyKind, max_entropy
from .envs import make_env, optimal_return, random_policy_return
from .estimators import OptimalEstimator, RewardEstimator, ZeroEstimator
from .learning import LinearQEstimator, LoopConfig, run_loop, write_curve
from .planner import (
    MaxEntPlanner,
    PlannerConfig,
    TemperatureController,
    per_adaptation_alpha,
)
from .puct import PuctConfig, PuctPlanner

__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "EPISODE_COLUMNS",
    "ExperimentConfig",
    "ROBUSTNESS_TAU_SET",
    "PRESETS",
    "TRACE_COLUMNS",
    "build_planner",
    "entropy_grid",
    "linear_grid",
    "load_config",
    "log_grid",
    "normalized_score",
    "reference_returns",
    "robustness_metric",
    "run_bandit",
    "run_episodes",
    "run_experiment",
    "run_learning",
    "sweep",
]

EPISODE_COLUMNS = ("seed", "episode", "return", "steps", "mean_tau")
TRACE_COLUMNS = ("seed", "episode", "step", "tau")
SCORE_COLUMNS = ("fixture", "value", "mean_return", "score")

# Temperatures of the robustness study, roughly equidistant in log space.
ROBUSTNESS_TAU_SET = (0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0)

_SEARCH = dict(n_passes=30, depth_limit=20, gamma=0.9)

PRESETS: dict[str, dict] = {
    "ants_s": dict(_SEARCH, family="maxent", kind="shannon", adapt=True, shaping=True,
                   leaf_init="raw", e3w=True, epsilon=0.01, tau_sel=0.5,
                   h_avg=0.2, tau_min=0.01, tau0=10.0, alpha=0.9, adaptation_frequency=50),
    "ants_t": dict(_SEARCH, family="maxent", kind="tsallis2", adapt=True, shaping=True,
                   leaf_init="raw", e3w=True, epsilon=0.01, tau_sel=0.5,
                   h_avg=0.2, tau_min=0.001, tau0=100.0, alpha=0.5, adaptation_frequency=20),
    "ments": dict(_SEARCH, family="maxent", kind="shannon", adapt=False, shaping=False,
                  leaf_init="ments", e3w=True, epsilon=0.001, tau_init=0.01, tau_sel=0.5,
                  tau=1.0),
    "tents": dict(_SEARCH, family="maxent", kind="tsallis2", adapt=False, shaping=False,
                  leaf_init="ments", e3w=True, epsilon=0.001, tau_init=0.1, tau_sel=0.5,
                  tau=3.0),
    "puct": dict(_SEARCH, family="puct", c=1.0, tau_init=1.0, tau_sel=0.2),
}
ALGORITHMS = tuple(PRESETS)

_CONTROLLER_KEYS = {"h_avg", "tau_min", "tau0", "alpha", "adaptation_frequency", "bracket_hi"}
_PLANNER_KEYS = {f.name for f in fields(PlannerConfig)} | _CONTROLLER_KEYS | {"tau", "family"}
_PUCT_KEYS = {f.name for f in fields(PuctConfig)} | {"family"}


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


def preset(algorithm: str, overrides: dict | None = None) -> dict:
    try:
        params = dict(PRESETS[algorithm])
    except KeyError:
        raise ConfigError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}") from None
    overrides = dict(overrides or {})
    allowed = _PUCT_KEYS if params["family"] == "puct" else _PLANNER_KEYS
    unknown = set(overrides) - allowed
    if unknown:
        raise ConfigError(f"unknown planner parameters for {algorithm}: {sorted(unknown)}")
    params.update(overrides)
    return params


def build_planner(algorithm: str, env, estimator, seed: int, overrides: dict | None = None,
                  mode: str = "train"):
    """Planner for ``algorithm`` with the preset hyperparameters plus ``overrides``.

    A fixed-temperature run sets ``adapt=False`` and ``tau``.  The smoothing
    factor is rescaled per adaptation so that ``alpha`` is the total decay over
    one planning call.
    """
    params = preset(algorithm, overrides)
    family = params.pop("family")
    try:
        if family == "puct":
            return PuctPlanner(env, estimator, PuctConfig.from_dict({**params, "seed": seed}),
                               mode=mode)
        ctl_params = {k: params.pop(k) for k in list(params) if k in _CONTROLLER_KEYS}
        tau = params.pop("tau", None)
        cfg = PlannerConfig.from_dict({**params, "seed": seed})
        if cfg.adapt:
            ctl_params["alpha"] = per_adaptation_alpha(
                ctl_params.get("alpha", 0.9), ctl_params.get("adaptation_frequency", 50),
                cfg.n_passes)
            ctl = TemperatureController(**ctl_params)
        else:
            if tau is None:
                raise ConfigError("a fixed-temperature planner needs 'tau'")
            ctl = TemperatureController(tau0=tau, tau_min=min(tau, 0.01))
        return MaxEntPlanner(env, estimator, cfg, ctl)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def make_estimator(name: str, env, gamma: float):
    if name == "zero":
        return ZeroEstimator(env.n_actions)
    if name == "reward":
        return RewardEstimator(env)
    if name == "oracle":
        return OptimalEstimator(env, gamma)
    if name == "linear":
        return LinearQEstimator.for_env(env)
    raise ConfigError(f"unknown estimator {name!r}")


@dataclass
class ExperimentConfig:
    algorithm: str = "ants_s"
    env: str = "chain"
    env_params: dict = field(default_factory=dict)
    seeds: list = field(default_factory=lambda: [0])
    episodes: int = 3
    max_steps: int = 30
    estimator: str = "reward"
    action_mode: str = "eval"
    planner: dict = field(default_factory=dict)
    loop: dict = field(default_factory=dict)
    bandit: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    out: str = "results"
    trace_temperature: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in PRESETS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if not self.seeds or any(not isinstance(s, int) or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be a non-empty list of non-negative integers")
        if self.episodes < 0 or self.max_steps < 1 or self.workers < 1:
            raise ConfigError("episodes >= 0, max_steps >= 1 and workers >= 1 required")
        if self.action_mode not in ("eval", "train"):
            raise ConfigError("action_mode must be 'eval' or 'train'")
        self.seeds = sorted(set(self.seeds))
        preset(self.algorithm, self.planner)
        self.make_env()

    def make_env(self):
        try:
            return make_env(self.env, **self.env_params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad environment: {exc}") from exc

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config (optional) and apply flag overrides that are not None."""
    data: dict = {}
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data)


def _map(fn, items: list, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---- plan ---------------------------------------------------------------

def run_episodes(cfg: ExperimentConfig, seed: int, planner_overrides: dict | None = None,
                 env=None):
    """Play ``cfg.episodes`` episodes with one planner; returns (rows, trace)."""
    env = env if env is not None else cfg.make_env()
    overrides = {**cfg.planner, **(planner_overrides or {})}
    gamma = preset(cfg.algorithm, overrides)["gamma"]
    estimator = make_estimator(cfg.estimator, env, gamma)
    planner = build_planner(cfg.algorithm, env, estimator, seed, overrides)
    evaluation = cfg.action_mode == "eval"
    rows, trace = [], []
    for episode in range(cfg.episodes):
        planner.reset()
        state, total, taus = env.initial_state, 0.0, []
        for step in range(cfg.max_steps):
            root = planner.search(state)
            taus.append(planner.tau)
            trace.append((seed, episode, step, planner.tau))
            action = planner.select_action(root, evaluation=evaluation)
            planner.advance(action)
            state, reward, done = env.step(state, action)
            total += reward
            if done:
                break
        rows.append((seed, episode, total, len(taus), float(np.mean(taus))))
    return rows, trace


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in sorted(rows, key=lambda r: tuple(r[:3])):
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def _plan_cell(args):
    cfg, seed = args
    return run_episodes(cfg, seed)


def run_plan(cfg: ExperimentConfig) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = _map(_plan_cell, [(cfg, s) for s in cfg.seeds], cfg.workers)
    rows = [r for res in results for r in res[0]]
    paths = [out / "episodes.csv"]
    _write_rows(paths[0], EPISODE_COLUMNS, rows)
    if cfg.trace_temperature:
        paths.append(out / "temperature.csv")
        _write_rows(paths[1], TRACE_COLUMNS, [t for res in results for t in res[1]])
    return paths


# ---- loop ---------------------------------------------------------------

def run_learning(cfg: ExperimentConfig, seed: int, env=None) -> list[dict]:
    env = env if env is not None else cfg.make_env()
    try:
        loop_cfg = LoopConfig(**{**cfg.loop, "seed": seed, "max_steps": cfg.max_steps})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad loop config: {exc}") from exc

    def factory(estimator, planner_seed):
        return build_planner(cfg.algorithm, env, estimator, planner_seed, cfg.planner)

    return run_loop(env, factory, loop_cfg)


def _loop_cell(args):
    cfg, seed = args
    return seed, run_learning(cfg, seed)


def run_loop_experiment(cfg: ExperimentConfig) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for seed, curve in sorted(_map(_loop_cell, [(cfg, s) for s in cfg.seeds], cfg.workers),
                              key=lambda x: x[0]):
        path = out / f"learning_curve_seed{seed}.csv"
        write_curve(curve, path)
        paths.append(path)
    return paths


# ---- bandit -------------------------------------------------------------

def run_bandit(cfg: ExperimentConfig) -> list[Path]:
    params = dict(cfg.bandit)
    checkpoints = tuple(params.pop("checkpoints", CHECKPOINTS))
    params.setdefault("means", list(np.linspace(0, 1, 5)))
    try:
        trials = [BanditTrial(seed=s, **params) for s in cfg.seeds]
        for tr in trials:
            tr.tau_at(1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad bandit config: {exc}") from exc
    logs = run_trials(trials, checkpoints)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bandit.csv"
    write_trial_logs(logs, path)
    return [path]


# ---- robustness ---------------------------------------------------------

def log_grid(lo: float, hi: float, n: int) -> list[float]:
    """``n`` points equidistant in log space from ``lo`` to ``hi``."""
    if n < 1 or lo <= 0 or hi <= 0:
        raise ValueError("log grid needs n >= 1 and positive endpoints")
    if n == 1:
        return [float(lo)]
    return [float(x) for x in np.geomspace(lo, hi, n)]


def linear_grid(lo: float, hi: float, n: int) -> list[float]:
    """``n`` equidistant points from ``lo`` to ``hi``, rounded to 12 decimals."""
    if n < 1:
        raise ValueError("grid needs n >= 1")
    if n == 1:
        return [float(lo)]
    return [round(lo + (hi - lo) * i / (n - 1), 12) for i in range(n)]


def entropy_grid(kind: EntropyKind | str, n_actions: int, n: int = 9) -> list[float]:
    """``n`` entropies evenly spaced inside ``(0, H_max)``: ``H_max * i / (n + 1)``."""
    hmax = max_entropy(kind, n_actions)
    return [hmax * i / (n + 1) for i in range(1, n + 1)]


def normalized_score(raw: float, reference_random: float, reference_oracle: float) -> float:
    """0 at the random-policy return, 1 at the oracle return."""
    if not reference_oracle > reference_random:
        raise ValueError("oracle reference must exceed the random reference")
    return (raw - reference_random) / (reference_oracle - reference_random)


def robustness_metric(scores) -> float:
    """Mean over games of the population variance across hyperparameter values.

    ``scores`` maps game to a sequence (or mapping) of scores, or is a 2-D
    array with one row per game.
    """
    if isinstance(scores, dict):
        rows = [list(v.values()) if isinstance(v, dict) else list(v) for v in scores.values()]
    else:
        rows = [list(r) for r in scores]
    if not rows or any(len(r) == 0 for r in rows):
        raise ValueError("score table is empty")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("score table is incomplete")
    table = np.array(rows, dtype=float)
    if not np.all(np.isfinite(table)):
        raise ValueError("score table has missing cells")
    return float(table.var(axis=1).mean())


def reference_returns(env, gamma: float, max_steps: int, episodes: int = 1000) -> tuple[float, float]:
    """(random-policy mean return, return of the exact optimal policy)."""
    return (random_policy_return(env, max_steps, episodes, seed=0),
            optimal_return(env, gamma, max_steps))


def _grid_values(options: dict, cfg: ExperimentConfig) -> tuple[str, list[float]]:
    param = options.get("parameter", "h_avg")
    if "values" in options:
        values = [float(v) for v in options["values"]]
    elif options.get("scale") == "log":
        values = log_grid(options["lo"], options["hi"], options.get("n", 9))
    elif options.get("scale") == "linear":
        values = linear_grid(options["lo"], options["hi"], options.get("n", 9))
    elif options.get("scale") == "entropy":
        kind = preset(cfg.algorithm)["kind"]
        values = entropy_grid(kind, cfg.make_env().n_actions, options.get("n", 9))
    else:
        raise ConfigError("sweep needs 'values' or a scale of log, linear or entropy")
    if not values:
        raise ConfigError("empty hyperparameter grid")
    return param, values


def _cell_overrides(param: str, value: float) -> dict:
    if param == "tau":
        return {"adapt": False, "tau": value}
    return {param: value}


def _sweep_cell(args):
    cfg, fixture, param, value = args
    env = make_env(fixture["env"], **fixture.get("params", {}))
    overrides = _cell_overrides(param, value)
    returns = [r[2] for s in cfg.seeds for r in run_episodes(cfg, s, overrides, env)[0]]
    return fixture["name"], value, float(np.mean(returns))


def sweep(cfg: ExperimentConfig, grid: dict | None = None) -> dict:
    """Score every (fixture, value) cell; returns ``{fixture: {value: score}}``.

    Scores are normalized between the random-policy and optimal returns of
    each fixture.  Also returns raw means under the ``"_returns"`` key.
    """
    options = dict(cfg.sweep)
    options.update(grid or {})
    param, values = _grid_values(options, cfg)
    fixtures = options.get("fixtures") or [{"name": cfg.env, "env": cfg.env,
                                         "params": cfg.env_params}]
    for i, fx in enumerate(fixtures):
        fx.setdefault("name", f"{fx['env']}{i}")
    gamma = preset(cfg.algorithm, cfg.planner)["gamma"]
    cells = [(cfg, fx, param, v) for fx in fixtures for v in values]
    results = _map(_sweep_cell, cells, cfg.workers)
    raw: dict = {}
    for name, value, mean_return in results:
        raw.setdefault(name, {})[value] = mean_return
    scores: dict = {}
    for fx in fixtures:
        env = make_env(fx["env"], **fx.get("params", {}))
        ref_random, ref_oracle = reference_returns(env, gamma, cfg.max_steps)
        scores[fx["name"]] = {v: normalized_score(raw[fx["name"]][v], ref_random, ref_oracle)
                              for v in values}
    return {"parameter": param, "scores": scores, "returns": raw}


def run_sweep(cfg: ExperimentConfig) -> list[Path]:
    result = sweep(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [(name, v, result["returns"][name][v], s)
            for name, cells in result["scores"].items() for v, s in cells.items()]
    path = out / "scores.csv"
    _write_rows(path, SCORE_COLUMNS, rows)
    rob = out / "robustness.csv"
    with open(rob, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("parameter", "rho"))
        writer.writerow((result["parameter"], repr(robustness_metric(result["scores"]))))
    return [path, rob]


# ---- report -------------------------------------------------------------

REPORT_COLUMNS = ("seed", "episodes", "mean_return", "mean_steps", "mean_tau")


def run_report(cfg: ExperimentConfig) -> list[Path]:
    """Per-seed summary of ``episodes.csv`` found in the output directory."""
    out = Path(cfg.out)
    source = out / "episodes.csv"
    if not source.exists():
        raise ConfigError(f"no episodes.csv in {out}")
    per_seed: dict = {}
    with open(source, newline="") as fh:
        for row in csv.DictReader(fh):
            per_seed.setdefault(int(row["seed"]), []).append(row)
    rows = []
    for seed, items in per_seed.items():
        rows.append((seed, len(items),
                     float(np.mean([float(r["return"]) for r in items])),
                     float(np.mean([float(r["steps"]) for r in items])),
                     float(np.mean([float(r["mean_tau"]) for r in items]))))
    path = out / "report.csv"
    _write_rows(path, REPORT_COLUMNS, rows)
    return [path]


COMMANDS = {
    "plan": run_plan,
    "loop": run_loop_experiment,
    "bandit": run_bandit,
    "sweep": run_sweep,
    "report": run_report,
}


def run_experiment(command: str, cfg: ExperimentConfig) -> list[Path]:
    try:
        fn = COMMANDS[command]
    except KeyError:
        raise ConfigError(f"unknown command {command!r}") from None
    return fn(cfg)
