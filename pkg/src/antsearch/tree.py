"""Search-tree node and the pieces of MCTS shared by every planner."""

from __future__ import annotations

import bisect
import itertools
from typing import Hashable, Iterator, Protocol

import numpy as np


class QEstimator(Protocol):
    """Leaf evaluator: Q-vector over actions for ``state`` at temperature ``tau``.

    Must be deterministic given its arguments.
    """

    def q_values(self, state: Hashable, tau: float) -> np.ndarray: ...


class TreeNode:
    """One node of the planning tree.

    ``edge_reward`` and ``qvalue`` belong to the edge leading into the node.
    ``count`` is the number of passes that went through it.  A leaf has an
    empty ``children`` list; an expanded node has one child per action.
    """

    __slots__ = ("state", "edge_reward", "count", "qvalue", "children", "terminal",
                 "parent", "prior")

    def __init__(self, state, edge_reward: float = 0.0, terminal: bool = False,
                 parent: "TreeNode | None" = None):
        self.state = state
        self.edge_reward = edge_reward
        self.terminal = terminal
        self.parent = parent
        self.count = 0
        self.qvalue = edge_reward if terminal else 0.0
        self.children: list[TreeNode] = []
        self.prior: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def child_qvalues(self) -> np.ndarray:
        return np.fromiter((c.qvalue for c in self.children), float, len(self.children))

    def child_counts(self) -> np.ndarray:
        return np.fromiter((c.count for c in self.children), float, len(self.children))

    def depth(self) -> int:
        d, node = 0, self
        while node.parent is not None:
            d, node = d + 1, node.parent
        return d

    def __repr__(self):
        return (f"TreeNode(state={self.state!r}, q={self.qvalue:.4g}, n={self.count}, "
                f"children={len(self.children)})")


def expand(leaf: TreeNode, model) -> None:
    """Add one child per action, each filled in by a single model step."""
    if leaf.terminal:
        raise RuntimeError("cannot expand a terminal node")
    if leaf.children:
        raise RuntimeError("node is already expanded")
    for a in range(model.n_actions):
        state, reward, terminal = model.step(leaf.state, a)
        leaf.children.append(TreeNode(state, float(reward), bool(terminal), parent=leaf))


def iter_nodes(root: TreeNode) -> Iterator[TreeNode]:
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def internal_nodes(root: TreeNode) -> list[TreeNode]:
    return [n for n in iter_nodes(root) if n.children]


def post_order(root: TreeNode) -> list[TreeNode]:
    """Nodes ordered children-before-parent."""
    order = list(iter_nodes(root))
    order.reverse()
    return order


def sample_index(probs, rng: np.random.Generator) -> int:
    """Inverse-CDF draw using exactly one uniform from ``rng``.

    Returns the first index whose cumulative mass exceeds ``u * total``.
    """
    cdf = list(itertools.accumulate(float(p) for p in probs))
    u = rng.random() * cdf[-1]
    return min(bisect.bisect_right(cdf, u), len(cdf) - 1)
