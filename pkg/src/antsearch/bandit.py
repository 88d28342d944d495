"""Softmax bandit simulator for E2W sampling under a drifting temperature.

Each trial owns a random stream consumed in fixed-size chunks of uniforms
(arm choice) and standard normals (reward noise), one of each per step.  The
batched runner draws the same chunks per seed, so a trial produces the same
arm sequence whether it is stepped alone or as part of a seed sweep.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BanditTrial",
    "CHECKPOINTS",
    "TrialLog",
    "e2w_distribution",
    "e2w_step",
    "exploration_rate",
    "run_trial",
    "run_trials",
    "tau_schedule",
    "write_trial_logs",
]

CHECKPOINTS = (100, 1_000, 10_000, 100_000)
CHUNK = 4096
MIN_SCHEDULE_TAU = 1e-3
LOG_COLUMNS = ("seed", "t", "gap", "greedy_correct", "tau_t")


def tau_schedule(kind: str, tau: float, c: float, t: float) -> float:
    """``constant``: ``tau``.  ``log_decay``: ``tau + c / ln(t + 1)``."""
    if t < 1:
        raise ValueError("t starts at 1")
    if kind == "constant":
        out = tau
    elif kind == "log_decay":
        out = tau + c / math.log(t + 1)
    else:
        raise ValueError(f"unknown schedule {kind!r}")
    if out < MIN_SCHEDULE_TAU:
        raise ValueError(f"scheduled temperature {out} fell below {MIN_SCHEDULE_TAU}")
    return out


def exploration_rate(t: int, n_arms: int) -> float:
    """``min(1, K / ln(t + 1))``; exceeds 1 for small t without the clamp."""
    return min(1.0, n_arms / math.log(t + 1))


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def e2w_distribution(estimates, tau_t: float, t: int) -> np.ndarray:
    estimates = np.asarray(estimates, dtype=float)
    lam = exploration_rate(t, estimates.size)
    return (1 - lam) * _softmax_rows(estimates / tau_t) + lam / estimates.size


@dataclass
class BanditTrial:
    means: np.ndarray
    sigma: float = 0.1
    tau: float = 0.1
    schedule: str = "constant"
    schedule_c: float = 1.0
    horizon: int = 100_000
    seed: int = 0
    counts: np.ndarray = field(init=False)
    estimates: np.ndarray = field(init=False)
    t: int = field(init=False, default=0)

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        if self.means.ndim != 1 or self.means.size < 1:
            raise ValueError("need at least one arm")
        self.counts = np.zeros(self.means.size, dtype=np.int64)
        self.estimates = np.zeros(self.means.size)
        self._rng = np.random.default_rng(self.seed)
        self._buf_u = self._buf_z = None

    @property
    def n_arms(self) -> int:
        return self.means.size

    def tau_at(self, t: int) -> float:
        return tau_schedule(self.schedule, self.tau, self.schedule_c, t)

    def optimal_policy(self) -> np.ndarray:
        """Soft indmax of the true means at the limit temperature."""
        return _softmax_rows(self.means / self.tau)

    def _draws(self, t: int) -> tuple[float, float]:
        i = (t - 1) % CHUNK
        if i == 0:
            self._buf_u = self._rng.random(CHUNK)
            self._buf_z = self._rng.standard_normal(CHUNK)
        return self._buf_u[i], self._buf_z[i]


def e2w_step(trial: BanditTrial, t: int) -> int:
    """Draw an arm from the E2W mixture at step ``t`` and update the estimates."""
    if t != trial.t + 1:
        raise ValueError(f"expected step {trial.t + 1}, got {t}")
    u, z = trial._draws(t)
    probs = e2w_distribution(trial.estimates, trial.tau_at(t), t)
    cdf = np.cumsum(probs)
    arm = min(int(np.searchsorted(cdf, u * cdf[-1], side="right")), trial.n_arms - 1)
    reward = trial.means[arm] + trial.sigma * z
    trial.counts[arm] += 1
    trial.estimates[arm] += (reward - trial.estimates[arm]) / trial.counts[arm]
    trial.t = t
    return arm


@dataclass
class TrialLog:
    seed: int
    rows: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    estimates: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])

    def normalized_gaps(self) -> np.ndarray:
        """Occupation gap divided by ``t / ln t`` at each checkpoint."""
        t = self.column("t").astype(float)
        return self.column("gap") / (t / np.log(t))


def run_trials(trials: list[BanditTrial], checkpoints=CHECKPOINTS) -> list[TrialLog]:
    """Run fresh trials to their common horizon, vectorized across trials."""
    if not trials:
        return []
    horizon = trials[0].horizon
    n_arms = trials[0].n_arms
    if any(tr.horizon != horizon or tr.n_arms != n_arms or tr.t != 0 for tr in trials):
        raise ValueError("batched trials need equal horizon, arm count and a fresh state")
    checkpoints = sorted(c for c in checkpoints if c <= horizon)
    s = len(trials)
    means = np.stack([tr.means for tr in trials])
    sigma = np.array([tr.sigma for tr in trials])
    tau = np.array([tr.tau for tr in trials])
    c = np.array([tr.schedule_c if tr.schedule == "log_decay" else 0.0 for tr in trials])
    for tr in trials:
        tr.tau_at(1)  # validates the schedule name
    target = _softmax_rows(means / tau[:, None])
    best = means.argmax(axis=1)
    counts = np.zeros((s, n_arms), dtype=np.int64)
    est = np.zeros((s, n_arms))
    rows_idx = np.arange(s)
    logs = [TrialLog(tr.seed) for tr in trials]
    next_cp = 0
    u = z = None
    for t in range(1, horizon + 1):
        i = (t - 1) % CHUNK
        if i == 0:
            blocks = [(tr._rng.random(CHUNK), tr._rng.standard_normal(CHUNK)) for tr in trials]
            u = np.stack([b[0] for b in blocks])
            z = np.stack([b[1] for b in blocks])
        tau_t = tau + c / math.log(t + 1)
        lam = min(1.0, n_arms / math.log(t + 1))
        probs = (1 - lam) * _softmax_rows(est / tau_t[:, None]) + lam / n_arms
        cdf = np.cumsum(probs, axis=1)
        arms = (cdf <= (u[:, i] * cdf[:, -1])[:, None]).sum(axis=1)
        np.minimum(arms, n_arms - 1, out=arms)
        reward = means[rows_idx, arms] + sigma * z[:, i]
        counts[rows_idx, arms] += 1
        est[rows_idx, arms] += (reward - est[rows_idx, arms]) / counts[rows_idx, arms]
        if next_cp < len(checkpoints) and t == checkpoints[next_cp]:
            gaps = np.abs(counts - t * target).max(axis=1)
            correct = est.argmax(axis=1) == best
            for k, log in enumerate(logs):
                log.rows.append({"seed": log.seed, "t": t, "gap": float(gaps[k]),
                                 "greedy_correct": int(correct[k]),
                                 "tau_t": float(tau_t[k])})
                log.counts[t] = counts[k].copy()
                log.estimates[t] = est[k].copy()
            next_cp += 1
    for k, tr in enumerate(trials):
        tr.counts, tr.estimates, tr.t = counts[k], est[k], horizon
    return logs


def run_trial(trial: BanditTrial, checkpoints=CHECKPOINTS) -> TrialLog:
    return run_trials([trial], checkpoints)[0]


def write_trial_logs(logs: list[TrialLog], path) -> None:
    rows = sorted((r for log in logs for r in log.rows), key=lambda r: (r["seed"], r["t"]))
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LOG_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({**r, "gap": repr(r["gap"]), "tau_t": repr(r["tau_t"])})
