"""Planning-learning loop at desk scale.

A planner collects episodes; at every decision the root's child Q-values
become regression targets for a linear Q-estimator, which in turn initializes
the planner's leaves.  The estimator sees the current temperature through an
extra ``ln tau`` input so that it can track targets produced at different
temperatures.
"""

from __future__ import annotations

import copy
import csv
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .tree import TreeNode

logger = logging.getLogger(__name__)

__all__ = [
    "CURVE_COLUMNS",
    "LinearQEstimator",
    "LoopConfig",
    "LoopState",
    "ReplayBuffer",
    "collect_epoch",
    "evaluate",
    "puct_policy_target",
    "run_loop",
    "train_epoch",
    "write_curve",
]

CURVE_COLUMNS = ("epoch", "episodes_collected", "mean_return", "mean_loss", "mean_tau")


class ReplayBuffer:
    """FIFO store of ``(features, targets, tau)`` triples."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.entries: deque = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, features, targets, tau: float) -> None:
        self.entries.append((np.asarray(features, dtype=float),
                             np.asarray(targets, dtype=float), float(tau)))

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform minibatch without replacement: stacked features, targets, taus."""
        idx = rng.choice(len(self.entries), size=batch_size, replace=False)
        batch = [self.entries[i] for i in idx]
        return (np.stack([b[0] for b in batch]), np.stack([b[1] for b in batch]),
                np.array([b[2] for b in batch]))


def _log_tau(tau: float) -> float:
    # PUCT has no temperature; it reports nan and gets a constant feature.
    return math.log(tau) if tau > 0 and math.isfinite(tau) else 0.0


class LinearQEstimator:
    """``Q(s, .) = W x`` with ``x = onehot(s) + [1] + [ln tau]``.

    Training is SGD on the mean squared error with a normalized step size
    ``lr / mean ||x||^2``, which keeps updates stable whatever the scale of
    the temperature feature.
    """

    def __init__(self, n_states: int, n_actions: int, state_index: Callable,
                 lr: float = 0.5):
        if not 0 < lr < 1:
            raise ValueError("lr must lie in (0, 1)")
        self.n_states = n_states
        self.n_actions = n_actions
        self.state_index = state_index
        self.lr = lr
        self.weights = np.zeros((n_actions, n_states + 2))

    @classmethod
    def for_env(cls, env, lr: float = 0.5) -> "LinearQEstimator":
        return cls(env.n_states, env.n_actions, env.state_index, lr)

    def features(self, state, tau: float) -> np.ndarray:
        x = np.zeros(self.n_states + 2)
        x[self.state_index(state)] = 1.0
        x[-2] = 1.0
        x[-1] = _log_tau(tau)
        return x

    def predict(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T

    def q_values(self, state, tau: float) -> np.ndarray:
        return self.weights @ self.features(state, tau)

    def loss(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean((self.predict(x) - y) ** 2))

    def sgd_step(self, x: np.ndarray, y: np.ndarray) -> float:
        """One step on a minibatch; returns the loss before the step."""
        err = self.predict(x) - y
        grad = 2.0 * err.T @ x / err.size
        scale = float(np.mean(np.einsum("ij,ij->i", x, x)))
        self.weights -= (self.lr / scale) * grad
        return float(np.mean(err**2))


@dataclass
class LoopConfig:
    episodes_per_epoch: int = 8
    updates_per_epoch: int = 200
    batch_size: int = 32
    epochs: int = 10
    eval_episodes: int = 1
    max_steps: int = 30
    buffer_capacity: int = 30_000
    lr: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("updates_per_epoch", "batch_size", "eval_episodes", "max_steps",
                     "buffer_capacity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.episodes_per_epoch < 0 or self.epochs < 0:
            raise ValueError("episodes_per_epoch and epochs must be non-negative")


@dataclass
class LoopState:
    buffer: ReplayBuffer
    estimator: object
    rng: np.random.Generator
    episodes_collected: int = 0
    taus: list = field(default_factory=list)


def _features(estimator, state, tau):
    if hasattr(estimator, "features"):
        return estimator.features(state, tau)
    return np.array([_log_tau(tau)])


def collect_epoch(loop: LoopState, env, planner, episodes: int, max_steps: int) -> list[float]:
    """Play ``episodes`` episodes in training mode and store the root targets.

    Returns the undiscounted episode returns.
    """
    returns = []
    for _ in range(episodes):
        planner.reset()
        state, total = env.initial_state, 0.0
        for _ in range(max_steps):
            root = planner.search(state)
            tau = planner.tau
            loop.buffer.add(_features(loop.estimator, state, tau), planner.root_qvalues(), tau)
            loop.taus.append(tau)
            action = planner.select_action(root)
            planner.advance(action)
            state, reward, done = env.step(state, action)
            total += reward
            if done:
                break
        returns.append(total)
        loop.episodes_collected += 1
    return returns


def train_epoch(loop: LoopState, updates: int, batch_size: int) -> float:
    """Run ``updates`` SGD steps; returns the mean pre-step loss (nan if skipped)."""
    if not hasattr(loop.estimator, "sgd_step"):
        return math.nan
    if len(loop.buffer) < batch_size:
        logger.warning("buffer holds %d < %d entries; skipping training",
                       len(loop.buffer), batch_size)
        return math.nan
    losses = []
    for _ in range(updates):
        x, y, _ = loop.buffer.sample(batch_size, loop.rng)
        losses.append(loop.estimator.sgd_step(x, y))
    return float(np.mean(losses))


def evaluate(env, planner, episodes: int, max_steps: int) -> float:
    """Mean undiscounted return with greedy action selection."""
    total = 0.0
    for _ in range(episodes):
        planner.reset()
        state = env.initial_state
        for _ in range(max_steps):
            root = planner.search(state)
            action = planner.select_action(root, evaluation=True)
            planner.advance(action)
            state, reward, done = env.step(state, action)
            total += reward
            if done:
                break
    return total / episodes


def puct_policy_target(root: TreeNode) -> np.ndarray:
    """Normalized child visit counts; uniform when nothing was visited."""
    counts = root.child_counts()
    if counts.sum() == 0:
        return np.full(counts.size, 1.0 / counts.size)
    return counts / counts.sum()


def _seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def run_loop(env, make_planner: Callable, cfg: LoopConfig, estimator=None) -> list[dict]:
    """Alternate collection, training and greedy evaluation.

    ``make_planner(estimator, seed)`` builds a planner around the estimator.
    Epoch 0 only fills the buffer with the untrained estimator; every later
    epoch collects, trains and evaluates.  Each curve row reports the
    evaluation return after that epoch, the episodes collected so far, the
    mean training loss and the mean temperature seen during collection.
    """
    if estimator is None:
        estimator = LinearQEstimator.for_env(env, cfg.lr)
    loop = LoopState(ReplayBuffer(cfg.buffer_capacity), estimator,
                     np.random.default_rng(_seed(cfg.seed, 1)))
    collector = make_planner(estimator, _seed(cfg.seed, 0))
    curve = []
    for epoch in range(cfg.epochs):
        loop.taus = []
        collect_epoch(loop, env, collector, cfg.episodes_per_epoch, cfg.max_steps)
        loss = math.nan if epoch == 0 else train_epoch(loop, cfg.updates_per_epoch,
                                                       cfg.batch_size)
        judge = make_planner(estimator, _seed(cfg.seed, 2, epoch))
        if hasattr(collector, "controller"):
            judge.controller = copy.deepcopy(collector.controller)
        mean_return = evaluate(env, judge, cfg.eval_episodes, cfg.max_steps)
        curve.append({
            "epoch": epoch,
            "episodes_collected": loop.episodes_collected,
            "mean_return": mean_return,
            "mean_loss": loss,
            "mean_tau": float(np.mean(loop.taus)) if loop.taus else math.nan,
        })
    return curve


def write_curve(curve: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for row in curve:
            writer.writerow([row["epoch"], row["episodes_collected"]]
                            + [repr(float(row[k])) for k in CURVE_COLUMNS[2:]])
