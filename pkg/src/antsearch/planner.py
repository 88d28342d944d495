"""Maximum-entropy tree search with adaptive temperature (ANTS).

MENTS and TENTS are the same machinery with a fixed temperature, the
advantage-style leaf initialization and no pseudoreward shaping.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.optimize import brentq

from .entropy import (
    EntropyKind,
    entropy_rows,
    max_entropy,
    soft_policy,
    soft_policy_list,
    soft_policy_rows,
    soft_value,
    soft_value_list,
)
from .tree import (
    QEstimator,
    TreeNode,
    expand,
    internal_nodes,
    post_order,
    sample_index,
)

logger = logging.getLogger(__name__)

__all__ = [
    "MaxEntPlanner",
    "PlannerConfig",
    "TemperatureController",
    "adapt_temperature",
    "backpropagate",
    "backup_value",
    "e3w_policy",
    "exploration_weight",
    "final_action",
    "greedy_action",
    "per_adaptation_alpha",
    "recalculate_qvalues",
    "select",
    "simulate",
    "smooth_temperature",
]

# Below this selection temperature the final action is the argmax.
EVAL_TAU_SEL = 1e-3
BRACKET_CEILING = 1e9


@dataclass
class PlannerConfig:
    kind: EntropyKind = EntropyKind.SHANNON
    n_passes: int = 30
    depth_limit: int = 20
    epsilon: float = 0.01
    tau_sel: float = 0.5
    gamma: float = 0.99
    leaf_init: str = "raw"  # "raw" uses Q-hat directly, "ments" the advantage form
    tau_init: float = 0.01
    shaping: bool = True
    e3w: bool = True
    adapt: bool = True
    reuse_tree: bool = True
    seed: int = 0

    def __post_init__(self):
        self.kind = EntropyKind.parse(self.kind)
        if self.n_passes < 1 or self.depth_limit < 1:
            raise ValueError("n_passes and depth_limit must be >= 1")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0 < self.tau_sel <= 1:
            raise ValueError("tau_sel must lie in (0, 1]")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.leaf_init not in ("raw", "ments"):
            raise ValueError(f"unknown leaf_init {self.leaf_init!r}")
        if self.tau_init <= 0:
            raise ValueError("tau_init must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "PlannerConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class TemperatureController:
    """Current smoothed temperature plus the adaptation hyperparameters.

    With adaptation disabled ``tau`` simply stays at ``tau0``.
    """

    tau0: float = 10.0
    tau_min: float = 0.01
    h_avg: float = 0.2
    alpha: float = 0.9
    adaptation_frequency: int = 50
    bracket_hi: float = 1e6
    tau: float = field(default=None)

    def __post_init__(self):
        if self.tau is None:
            self.tau = self.tau0
        if not self.tau_min > 0:
            raise ValueError("tau_min must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.adaptation_frequency < 1:
            raise ValueError("adaptation_frequency must be >= 1")
        if self.h_avg <= 0:
            raise ValueError("h_avg must be positive")
        self.tau = max(self.tau, self.tau_min)

    def validate_for(self, kind: EntropyKind, n_actions: int) -> None:
        hmax = max_entropy(kind, n_actions)
        if not self.h_avg < hmax:
            raise ValueError(
                f"h_avg={self.h_avg} must be below the maximum entropy {hmax:.4g} "
                f"for {n_actions} actions"
            )


def per_adaptation_alpha(alpha: float, adaptation_frequency: int, n_passes: int) -> float:
    """Smoothing factor per adaptation so that one planning call decays by ``alpha``."""
    return alpha ** (adaptation_frequency / n_passes)


def exploration_weight(count: int, n_actions: int, epsilon: float) -> float:
    """Uniform-mixing weight ``min(1, eps*K / ln(N+1))``; 1 at N=0 when eps > 0."""
    if epsilon == 0:
        return 0.0
    if count <= 0:
        return 1.0
    return min(1.0, epsilon * n_actions / math.log(count + 1))


def e3w_policy(node: TreeNode, tau: float, epsilon: float,
               kind: EntropyKind | str) -> np.ndarray:
    q = node.child_qvalues()
    pi = soft_policy(q, kind, tau)
    lam = exploration_weight(node.count, q.size, epsilon)
    if lam == 0.0:
        return pi
    return (1.0 - lam) * pi + lam / q.size


def _e3w_list(node: TreeNode, tau: float, epsilon: float, kind: EntropyKind) -> list[float]:
    pi = soft_policy_list([c.qvalue for c in node.children], kind, tau)
    lam = exploration_weight(node.count, len(pi), epsilon)
    if lam == 0.0:
        return pi
    return [(1.0 - lam) * p + lam / len(pi) for p in pi]


def backup_value(node: TreeNode, tau: float, cfg: PlannerConfig) -> float:
    """Q of the edge into ``node`` from its children's Q-values."""
    if node.terminal:
        return node.edge_reward
    if not node.children:
        return node.qvalue
    v = soft_value_list([c.qvalue for c in node.children], cfg.kind, tau)
    if cfg.shaping:
        v -= tau * max_entropy(cfg.kind, len(node.children))
    return node.edge_reward + cfg.gamma * v


def select(root: TreeNode, tau: float, cfg: PlannerConfig,
           rng: np.random.Generator) -> tuple[TreeNode, list[float]]:
    """Walk from ``root`` sampling the exploration policy until a leaf.

    Stops early at ``cfg.depth_limit`` edges.  Draws one uniform per internal
    node visited, root first.  Transitions are read from the expanded
    children, which were produced by the (deterministic) model.
    """
    node = root
    rewards: list[float] = []
    eps = cfg.epsilon if cfg.e3w else 0.0
    while node.children and len(rewards) < cfg.depth_limit:
        a = sample_index(_e3w_list(node, tau, eps, cfg.kind), rng)
        node = node.children[a]
        rewards.append(node.edge_reward)
    return node, rewards


def simulate(leaf: TreeNode, estimator: QEstimator, tau: float, cfg: PlannerConfig) -> None:
    """Initialize the Q-values of freshly expanded children from the estimator."""
    q_hat = np.asarray(estimator.q_values(leaf.state, tau), dtype=float).copy()
    for a, child in enumerate(leaf.children):
        if child.terminal:
            q_hat[a] = child.edge_reward
    if cfg.leaf_init == "ments":
        q_hat = (q_hat - soft_value(q_hat, cfg.kind, cfg.tau_init)) / cfg.tau_init
    for child, q in zip(leaf.children, q_hat):
        child.qvalue = float(q)


def backpropagate(leaf: TreeNode, rewards: list[float], tau: float,
                  cfg: PlannerConfig) -> None:
    """Update counts and Q-values from ``leaf`` up to and including the root."""
    node = leaf
    for reward in reversed(rewards):
        node.edge_reward = reward
        node.count += 1
        node.qvalue = backup_value(node, tau, cfg)
        node = node.parent
    node.count += 1
    node.qvalue = backup_value(node, tau, cfg)


def mean_entropy(q_rows: np.ndarray, tau: float, kind: EntropyKind) -> float:
    return float(entropy_rows(soft_policy_rows(q_rows, kind, tau), kind).mean())


def _internal_q_rows(root: TreeNode) -> np.ndarray | None:
    nodes = internal_nodes(root)
    if not nodes:
        return None
    return np.array([n.child_qvalues() for n in nodes])


def adapt_temperature(root: TreeNode, ctl: TemperatureController,
                      kind: EntropyKind | str) -> float:
    """Temperature at which the mean internal-node entropy equals ``ctl.h_avg``.

    Brent's method on ``[tau_min, bracket_hi]``; the upper end grows tenfold up
    to 1e9 while no sign change is found.  Without a sign change the endpoint
    with the smaller excess entropy is returned (lower end on ties).
    """
    kind = EntropyKind.parse(kind)
    rows = _internal_q_rows(root)
    if rows is None:
        logger.info("no internal nodes; keeping tau=%g", ctl.tau)
        return ctl.tau

    def excess(tau: float) -> float:
        return mean_entropy(rows, tau, kind) - ctl.h_avg

    lo, hi = ctl.tau_min, ctl.bracket_hi
    f_lo, f_hi = excess(lo), excess(hi)
    while f_lo < 0 and f_hi < 0 and hi < BRACKET_CEILING:
        hi = min(hi * 10.0, BRACKET_CEILING)
        f_hi = excess(hi)
    if f_lo * f_hi > 0:
        tau = lo if abs(f_lo) <= abs(f_hi) else hi
    elif f_lo == 0:
        tau = lo
    elif f_hi == 0:
        tau = hi
    else:
        tau = brentq(excess, lo, hi, xtol=1e-14, rtol=1e-12, maxiter=500)
    return max(ctl.tau_min, tau)


def smooth_temperature(ctl: TemperatureController, tau_new: float) -> float:
    """Exponential moving average of the temperature in log space."""
    ctl.tau = math.exp(ctl.alpha * math.log(ctl.tau) + (1.0 - ctl.alpha) * math.log(tau_new))
    ctl.tau = max(ctl.tau, ctl.tau_min)
    return ctl.tau


def recalculate_qvalues(root: TreeNode, tau: float, cfg: PlannerConfig) -> None:
    """Recompute every internal node bottom-up at temperature ``tau``.

    Leaf values come from the estimator and are left as they are.
    """
    for node in post_order(root):
        if node.children:
            node.qvalue = backup_value(node, tau, cfg)


def greedy_action(root: TreeNode, rng: np.random.Generator) -> int:
    """Argmax over child Q-values, ties broken uniformly at random."""
    q = root.child_qvalues()
    best = np.flatnonzero(q == q.max())
    return int(best[0]) if best.size == 1 else int(rng.choice(best))


def final_action(root: TreeNode, tau: float, cfg: PlannerConfig,
                 rng: np.random.Generator) -> int:
    """Sample the sharpened exploration policy; argmax when ``tau_sel`` is tiny."""
    if cfg.tau_sel <= EVAL_TAU_SEL:
        return greedy_action(root, rng)
    eps = cfg.epsilon if cfg.e3w else 0.0
    return sample_index(e3w_policy(root, tau * cfg.tau_sel, eps, cfg.kind), rng)


class MaxEntPlanner:
    """Stateful planner: keeps the temperature and (optionally) the tree across steps.

    ``plan(state)`` returns an action.  The pass counter used for the
    adaptation schedule runs across calls, so adaptation still happens when
    ``n_passes`` is smaller than ``adaptation_frequency``.
    """

    def __init__(self, model, estimator: QEstimator, cfg: PlannerConfig,
                 controller: TemperatureController | None = None):
        self.model = model
        self.estimator = estimator
        self.cfg = cfg
        self.controller = controller or TemperatureController()
        if cfg.adapt:
            self.controller.validate_for(cfg.kind, model.n_actions)
        self.rng = np.random.default_rng(cfg.seed)
        self.root: TreeNode | None = None
        self.total_passes = 0
        self.adaptations: list[tuple[int, float, float]] = []

    @property
    def tau(self) -> float:
        return self.controller.tau

    def reset(self) -> None:
        """Drop the retained tree (e.g. at an episode boundary); keep the temperature."""
        self.root = None

    def run_pass(self, root: TreeNode) -> None:
        cfg, tau = self.cfg, self.controller.tau
        leaf, rewards = select(root, tau, cfg, self.rng)
        if not leaf.terminal and not leaf.children and len(rewards) < cfg.depth_limit:
            expand(leaf, self.model)
            simulate(leaf, self.estimator, tau, cfg)
        backpropagate(leaf, rewards, tau, cfg)
        self.total_passes += 1
        if cfg.adapt and self.total_passes % self.controller.adaptation_frequency == 0:
            tau_new = adapt_temperature(root, self.controller, cfg.kind)
            smooth_temperature(self.controller, tau_new)
            recalculate_qvalues(root, self.controller.tau, cfg)
            self.adaptations.append((self.total_passes, tau_new, self.controller.tau))

    def search(self, state) -> TreeNode:
        if not (self.cfg.reuse_tree and self.root is not None and self.root.state == state):
            self.root = TreeNode(state)
        for _ in range(self.cfg.n_passes):
            self.run_pass(self.root)
        return self.root

    def root_qvalues(self) -> np.ndarray:
        return self.root.child_qvalues()

    def advance(self, action: int) -> None:
        """Move the retained root to the child reached by ``action``."""
        if not self.cfg.reuse_tree or self.root is None or not self.root.children:
            self.root = None
            return
        child = self.root.children[action]
        child.parent = None
        self.root = None if child.terminal else child

    def select_action(self, root: TreeNode, evaluation: bool = False) -> int:
        if evaluation:
            return greedy_action(root, self.rng)
        return final_action(root, self.controller.tau, self.cfg, self.rng)

    def plan(self, state) -> int:
        root = self.search(state)
        action = self.select_action(root)
        self.advance(action)
        return action
