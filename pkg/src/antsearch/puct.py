"""AlphaZero-style PUCT planner used as a baseline.

The prior comes from the Q-estimator, ``softmax(Q-hat / tau_init)``, and
children start at ``Q-hat``.  Q-values are running means of sampled
discounted returns, bootstrapped at the leaf with ``max_a Q-hat``.  The
backup rule is not fixed by the algorithm's description; this one is the
usual mean-return update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .tree import QEstimator, TreeNode, expand, sample_index

__all__ = [
    "PuctConfig",
    "PuctPlanner",
    "puct_action",
    "puct_backup",
    "puct_prior",
    "puct_score",
]


@dataclass
class PuctConfig:
    c: float = 1.0
    tau_init: float = 1.0
    tau_sel: float = 0.2
    gamma: float = 0.99
    n_passes: int = 30
    depth_limit: int = 20
    reuse_tree: bool = True
    seed: int = 0
    backup: str = "mean_return"
    leaf_bootstrap: str = "max_q_hat"

    def __post_init__(self):
        if self.c <= 0 or self.tau_init <= 0:
            raise ValueError("c and tau_init must be positive")
        if not 0 < self.tau_sel <= 1:
            raise ValueError("tau_sel must lie in (0, 1]")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.n_passes < 1 or self.depth_limit < 1:
            raise ValueError("n_passes and depth_limit must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "PuctConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def puct_prior(q_hat, tau_init: float) -> np.ndarray:
    if tau_init <= 0:
        raise ValueError("tau_init must be positive")
    z = np.asarray(q_hat, dtype=float) / tau_init
    e = np.exp(z - z.max())
    return e / e.sum()


def puct_score(node: TreeNode, action: int, c: float) -> float:
    child = node.children[action]
    return child.qvalue + c * node.prior[action] * math.sqrt(node.count) / (child.count + 1)


def _scores(node: TreeNode, c: float) -> np.ndarray:
    return node.child_qvalues() + c * node.prior * math.sqrt(node.count) / (node.child_counts() + 1)


def puct_backup(path: list[TreeNode], rewards: list[float], leaf_value: float,
                gamma: float) -> None:
    """Fold one sampled discounted return into every node on ``path``.

    ``path`` runs root to leaf and ``rewards[i]`` is the reward on the edge into
    ``path[i + 1]``.  Each non-root node keeps the running mean of the return
    from its incoming edge; the first sample replaces the Q-hat initialization.
    """
    g = leaf_value
    for node, reward in zip(reversed(path[1:]), reversed(rewards)):
        g = reward + gamma * g
        node.count += 1
        node.qvalue += (g - node.qvalue) / node.count
    path[0].count += 1


def puct_action(root: TreeNode, tau_sel: float, mode: str,
                rng: np.random.Generator | None = None) -> int:
    """``eval``: most visited child (first index on ties).  ``train``: sample
    proportional to ``N(s,a) ** (1/tau_sel)``."""
    counts = root.child_counts()
    if mode == "eval":
        return int(np.argmax(counts))
    if mode != "train":
        raise ValueError(f"unknown mode {mode!r}")
    if counts.sum() == 0:
        probs = np.full(counts.size, 1.0 / counts.size)
    else:
        probs = (counts / counts.max()) ** (1.0 / tau_sel)
        probs /= probs.sum()
    return sample_index(probs, rng)


class PuctPlanner:
    """Same driving interface as :class:`antsearch.planner.MaxEntPlanner`."""

    tau = float("nan")

    def __init__(self, model, estimator: QEstimator, cfg: PuctConfig, mode: str = "train"):
        self.model = model
        self.estimator = estimator
        self.cfg = cfg
        self.mode = mode
        self.rng = np.random.default_rng(cfg.seed)
        self.root: TreeNode | None = None

    def reset(self) -> None:
        self.root = None

    def _expand(self, leaf: TreeNode) -> np.ndarray:
        expand(leaf, self.model)
        q_hat = np.asarray(self.estimator.q_values(leaf.state, 1.0), dtype=float).copy()
        for a, child in enumerate(leaf.children):
            if child.terminal:
                q_hat[a] = child.edge_reward
            child.qvalue = float(q_hat[a])
        leaf.prior = puct_prior(q_hat, self.cfg.tau_init)
        return q_hat

    def run_pass(self, root: TreeNode) -> None:
        cfg = self.cfg
        node, path, rewards = root, [root], []
        while node.children and len(rewards) < cfg.depth_limit:
            a = int(np.argmax(_scores(node, cfg.c)))
            node = node.children[a]
            path.append(node)
            rewards.append(node.edge_reward)
        if node.terminal:
            value = 0.0
        elif not node.children and len(rewards) < cfg.depth_limit:
            value = float(self._expand(node).max())
        else:
            value = float(np.max(self.estimator.q_values(node.state, 1.0)))
        puct_backup(path, rewards, value, cfg.gamma)

    def search(self, state) -> TreeNode:
        if not (self.cfg.reuse_tree and self.root is not None and self.root.state == state):
            self.root = TreeNode(state)
        for _ in range(self.cfg.n_passes):
            self.run_pass(self.root)
        return self.root

    def root_qvalues(self) -> np.ndarray:
        return self.root.child_qvalues()

    def select_action(self, root: TreeNode, evaluation: bool = False) -> int:
        mode = "eval" if evaluation else self.mode
        return puct_action(root, self.cfg.tau_sel, mode, self.rng)

    def advance(self, action: int) -> None:
        if not self.cfg.reuse_tree or self.root is None or not self.root.children:
            self.root = None
            return
        child = self.root.children[action]
        child.parent = None
        self.root = None if child.terminal else child

    def plan(self, state) -> int:
        root = self.search(state)
        action = self.select_action(root)
        self.advance(action)
        return action
