"""Small deterministic environments with a perfect model, plus exact oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Protocol

import numpy as np

from .entropy import EntropyKind, max_entropy, soft_value

__all__ = [
    "ChainEnv",
    "EnvironmentModel",
    "GridEnv",
    "SoftValueTable",
    "Trajectory",
    "exact_soft_values",
    "make_env",
    "optimal_q_values",
    "optimal_return",
    "random_policy_return",
    "reachable_states",
    "run_episode",
]

MAX_ORACLE_ENTRIES = 10_000


class EnvironmentModel(Protocol):
    """Deterministic model: ``step`` must be a pure function of its inputs."""

    n_actions: int
    initial_state: Hashable
    n_states: int

    def step(self, state, action: int) -> tuple[Hashable, float, bool]: ...

    def state_index(self, state) -> int: ...


@dataclass(frozen=True)
class ChainEnv:
    """A corridor of ``length`` cells with a goal at the far end.

    Action 0 advances one cell for a small penalty; reaching the last cell
    pays ``goal_reward`` and ends the episode.  Action 1 returns to the start
    and pays ``distractor_reward``, a myopically attractive trap.  All rewards
    are multiplied by ``reward_scale``.

    Advancing everywhere is optimal when the discounted distractor stream
    ``distractor_reward / (1 - gamma)`` is worth less than walking to the goal.
    With the defaults and gamma=0.9 that is 0.1 against about 0.426.
    """

    length: int = 8
    step_penalty: float = 0.01
    goal_reward: float = 1.0
    distractor_reward: float = 0.01
    reward_scale: float = 1.0
    n_actions: int = 2
    initial_state: int = 0

    @property
    def n_states(self) -> int:
        return self.length + 1

    def state_index(self, state: int) -> int:
        return int(state)

    def step(self, state: int, action: int) -> tuple[int, float, bool]:
        if not 0 <= state < self.length:
            raise ValueError(f"state {state} is terminal or out of range")
        if action == 0:
            nxt = state + 1
            if nxt == self.length:
                return nxt, self.goal_reward * self.reward_scale, True
            return nxt, -self.step_penalty * self.reward_scale, False
        if action == 1:
            return 0, self.distractor_reward * self.reward_scale, False
        raise ValueError(f"invalid action {action}")


_MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))  # up, right, down, left


@dataclass(frozen=True)
class GridEnv:
    """Four-action gridworld.  Bumping into a wall or the border is a no-op."""

    width: int = 5
    height: int = 5
    walls: frozenset = field(default_factory=frozenset)
    start: tuple[int, int] = (0, 0)
    goal: tuple[int, int] = (4, 4)
    step_penalty: float = 0.01
    goal_reward: float = 1.0
    reward_scale: float = 1.0
    n_actions: int = 4

    def __post_init__(self):
        object.__setattr__(self, "walls", frozenset(tuple(w) for w in self.walls))
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "goal", tuple(self.goal))

    @property
    def initial_state(self) -> tuple[int, int]:
        return self.start

    @property
    def n_states(self) -> int:
        return self.width * self.height

    def state_index(self, state) -> int:
        x, y = state
        return y * self.width + x

    def step(self, state, action: int):
        if tuple(state) == self.goal:
            raise ValueError("goal state is terminal")
        dx, dy = _MOVES[action]
        x, y = state[0] + dx, state[1] + dy
        if not (0 <= x < self.width and 0 <= y < self.height) or (x, y) in self.walls:
            x, y = state
        if (x, y) == self.goal:
            return (x, y), self.goal_reward * self.reward_scale, True
        return (x, y), -self.step_penalty * self.reward_scale, False


ENVIRONMENTS = {"chain": ChainEnv, "grid": GridEnv}


def make_env(name: str, **params):
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}") from None
    return cls(**params)


@dataclass
class SoftValueTable:
    """Finite-horizon soft values keyed by ``(steps_to_go, state)``."""

    v: dict
    q: dict
    horizon: int

    def root_q(self, state) -> np.ndarray:
        return self.q[(self.horizon, state)]


def exact_soft_values(env, gamma: float, tau: float, kind: EntropyKind | str,
                      horizon: int, *, leaf_q: Callable | None = None,
                      shaping: bool = False, hard: bool = False) -> SoftValueTable:
    """Backward induction of the entropy-regularized Bellman backup.

    ``q[(h, s)]`` is the Q-vector at ``s`` with ``h`` decisions to go; a
    terminal transition contributes its reward only.  With one decision to go
    the vector is ``leaf_q(s)`` when given, otherwise the immediate rewards.
    ``hard=True`` replaces the soft value by the max (standard value iteration).
    """
    kind = EntropyKind.parse(kind)
    if horizon == 0:
        return SoftValueTable({}, {}, 0)
    # Shallowest depth at which each state is reachable; (h, s) is needed
    # only for h <= horizon - depth(s).
    depth = {env.initial_state: 0}
    frontier = [env.initial_state]
    for d in range(1, horizon):
        nxt = []
        for s in frontier:
            for a in range(env.n_actions):
                s2, _, term = env.step(s, a)
                if not term and s2 not in depth:
                    depth[s2] = d
                    nxt.append(s2)
        frontier = nxt
    if sum(horizon - d for d in depth.values()) > MAX_ORACLE_ENTRIES:
        raise ValueError("state space too large for the exact oracle")
    offset = tau * max_entropy(kind, env.n_actions) if shaping else 0.0
    v: dict = {}
    q: dict = {}
    for h in range(1, horizon + 1):
        for s, d in depth.items():
            if h > horizon - d:
                continue
            row = np.empty(env.n_actions)
            for a in range(env.n_actions):
                s2, r, term = env.step(s, a)
                if term:
                    row[a] = r
                elif h == 1:
                    row[a] = leaf_q(s)[a] if leaf_q is not None else r
                else:
                    row[a] = r + gamma * v[(h - 1, s2)]
            q[(h, s)] = row
            v[(h, s)] = float(row.max()) if hard else soft_value(row, kind, tau) - offset
    return SoftValueTable(v, q, horizon)


@dataclass
class Trajectory:
    states: list
    actions: list
    rewards: list
    terminal: bool

    @property
    def total_return(self) -> float:
        return float(sum(self.rewards))

    def discounted_return(self, gamma: float) -> float:
        return float(sum(r * gamma**i for i, r in enumerate(self.rewards)))

    def __len__(self):
        return len(self.actions)


def run_episode(env, policy: Callable, max_steps: int) -> Trajectory:
    """Roll out ``policy(state, step_index) -> action`` for at most ``max_steps``."""
    state = env.initial_state
    states, actions, rewards = [state], [], []
    terminal = False
    for i in range(max_steps):
        a = int(policy(state, i))
        state, r, terminal = env.step(state, a)
        actions.append(a)
        rewards.append(r)
        states.append(state)
        if terminal:
            break
    return Trajectory(states, actions, rewards, terminal)


def reachable_states(env) -> list:
    """All non-terminal states reachable from the initial state, in BFS order."""
    seen = {env.initial_state: None}
    frontier = [env.initial_state]
    while frontier:
        nxt = []
        for s in frontier:
            for a in range(env.n_actions):
                s2, _, term = env.step(s, a)
                if not term and s2 not in seen:
                    if len(seen) >= MAX_ORACLE_ENTRIES:
                        raise ValueError("state space too large to enumerate")
                    seen[s2] = None
                    nxt.append(s2)
        frontier = nxt
    return list(seen)


def optimal_q_values(env, gamma: float, tol: float = 1e-12) -> dict:
    """Infinite-horizon discounted optimal Q by value iteration."""
    states = reachable_states(env)
    trans = {s: [env.step(s, a) for a in range(env.n_actions)] for s in states}
    v = dict.fromkeys(states, 0.0)
    while True:
        q = {s: np.array([r if term else r + gamma * v[s2] for s2, r, term in trans[s]])
             for s in states}
        new = {s: float(row.max()) for s, row in q.items()}
        delta = max(abs(new[s] - v[s]) for s in states)
        v = new
        if delta < tol:
            return q


def optimal_return(env, gamma: float, max_steps: int) -> float:
    """Undiscounted return of the stationary optimal policy over ``max_steps``.

    The policy is greedy in the infinite-horizon discounted Q, so it cannot
    exploit the episode cutoff, just like a planner that does not see time.
    """
    q = optimal_q_values(env, gamma)
    return run_episode(env, lambda s, i: int(np.argmax(q[s])), max_steps).total_return


def random_policy_return(env, max_steps: int, episodes: int = 1000, seed: int = 0) -> float:
    """Mean undiscounted return of the uniform random policy."""
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(episodes):
        total += run_episode(
            env, lambda s, i: rng.integers(env.n_actions), max_steps
        ).total_return
    return total / episodes
