"""Simple leaf evaluators for planners and tests."""

from __future__ import annotations

import numpy as np

from .entropy import EntropyKind
from .envs import exact_soft_values, optimal_q_values


class ZeroEstimator:
    def __init__(self, n_actions: int):
        self.n_actions = n_actions

    def q_values(self, state, tau):
        return np.zeros(self.n_actions)


class RewardEstimator:
    """Q-hat(s, a) = immediate reward, looked up through the model."""

    def __init__(self, model):
        self.model = model

    def q_values(self, state, tau):
        return np.array([self.model.step(state, a)[1] for a in range(self.model.n_actions)])


class TableEstimator:
    """Fixed lookup table ``state -> Q-vector``; unknown states get ``default``."""

    def __init__(self, table: dict, n_actions: int, default: float = 0.0):
        self.table = {s: np.asarray(v, dtype=float) for s, v in table.items()}
        self.default = np.full(n_actions, float(default))

    def q_values(self, state, tau):
        return self.table.get(state, self.default)


class OracleEstimator:
    """Exact Q-values from the backward-induction oracle.

    ``hard=True`` uses standard value iteration, giving the true optimal Q;
    otherwise soft values at ``tau``.  Q-vectors are taken with ``horizon``
    decisions to go regardless of the planner's depth.
    """

    def __init__(self, env, gamma: float, horizon: int, tau: float = 1.0,
                 kind: EntropyKind | str = EntropyKind.SHANNON, hard: bool = True):
        self.env = env
        self.table = exact_soft_values(env, gamma, tau, kind, horizon, hard=hard)
        self.horizon = horizon

    def q_values(self, state, tau):
        return self.table.q[(self.horizon, state)]


class OptimalEstimator:
    """Infinite-horizon discounted optimal Q from value iteration."""

    def __init__(self, env, gamma: float):
        self.table = optimal_q_values(env, gamma)

    def q_values(self, state, tau):
        return self.table[state]
