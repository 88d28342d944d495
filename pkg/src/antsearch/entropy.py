"""Closed-form regularized values and policies for Shannon and Tsallis-2 entropy.

For a regularizer ``Omega_tau(pi) = -tau * H(pi)`` over the probability simplex
the conjugate ``Omega*_tau(q) = max_pi pi.q + tau*H(pi)`` is the soft value of a
vector of action scores and its maximizer is the soft policy.  Shannon entropy
gives log-sum-exp and softmax; Tsallis entropy of degree 2,
``H(pi) = (1 - sum pi^2) / 2``, gives the sparsemax projection.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "EntropyKind",
    "MIN_TEMPERATURE",
    "entropy",
    "max_entropy",
    "entropy_rows",
    "soft_policy",
    "soft_policy_rows",
    "soft_value",
    "soft_value_list",
    "soft_policy_list",
    "sparsemax",
]

# Temperatures below this are rejected; planners clamp far above it.
MIN_TEMPERATURE = 1e-12


class EntropyKind(str, enum.Enum):
    SHANNON = "shannon"
    TSALLIS2 = "tsallis2"

    @classmethod
    def parse(cls, value: "EntropyKind | str") -> "EntropyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown entropy kind {value!r}") from None


def _check(q, tau) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValueError("action vector must be one-dimensional and non-empty")
    if not np.all(np.isfinite(q)):
        raise ValueError("action vector must be finite")
    if not tau >= MIN_TEMPERATURE:
        raise ValueError(f"temperature must be >= {MIN_TEMPERATURE}, got {tau!r}")
    return q


def sparsemax(z) -> np.ndarray:
    """Euclidean projection of ``z`` onto the probability simplex.

    Sort-and-threshold: with ``z`` sorted descending, the support size is the
    largest ``k`` with ``1 + k*z_(k) > sum_{i<=k} z_(i)``.
    """
    z = np.asarray(z, dtype=float)
    z_sorted = np.sort(z)[::-1]
    cumsum = np.cumsum(z_sorted)
    ks = np.arange(1, z.size + 1)
    support = 1.0 + ks * z_sorted > cumsum
    k = ks[support][-1]
    threshold = (cumsum[k - 1] - 1.0) / k
    return np.maximum(z - threshold, 0.0)


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def soft_policy(q, kind: EntropyKind | str, tau: float) -> np.ndarray:
    """Maximizer of ``pi.q + tau*H(pi)``: softmax(q/tau) or sparsemax(q/tau)."""
    q = _check(q, tau)
    kind = EntropyKind.parse(kind)
    # Shifting by the max keeps q/tau bounded and makes shift invariance exact.
    z = (q - q.max()) / tau
    if kind is EntropyKind.SHANNON:
        return _softmax(z)
    return sparsemax(z)


def soft_value(q, kind: EntropyKind | str, tau: float) -> float:
    """Regularized value ``max_pi pi.q + tau*H(pi)``."""
    q = _check(q, tau)
    kind = EntropyKind.parse(kind)
    m = q.max()
    if kind is EntropyKind.SHANNON:
        return float(m + tau * math.log(np.exp((q - m) / tau).sum()))
    pi = sparsemax((q - m) / tau)
    shifted = q - m
    return float(m + pi @ shifted + tau * 0.5 * (1.0 - pi @ pi))


# Pure-Python variants for the planner's inner loop, where action vectors are
# short and numpy call overhead dominates.  No input validation.

def _sparsemax_list(z: list[float]) -> list[float]:
    zs = sorted(z, reverse=True)
    total, k, k_total = 0.0, 0, 0.0
    for i, zi in enumerate(zs, 1):
        total += zi
        if 1.0 + i * zi > total:
            k, k_total = i, total
    threshold = (k_total - 1.0) / k
    return [max(zi - threshold, 0.0) for zi in z]


def soft_policy_list(q: list[float], kind: EntropyKind, tau: float) -> list[float]:
    m = max(q)
    if kind is EntropyKind.SHANNON:
        e = [math.exp((x - m) / tau) for x in q]
        s = sum(e)
        return [x / s for x in e]
    return _sparsemax_list([(x - m) / tau for x in q])


def soft_value_list(q: list[float], kind: EntropyKind, tau: float) -> float:
    m = max(q)
    if kind is EntropyKind.SHANNON:
        return m + tau * math.log(sum(math.exp((x - m) / tau) for x in q))
    shifted = [x - m for x in q]
    pi = _sparsemax_list([x / tau for x in shifted])
    return (m + sum(p * x for p, x in zip(pi, shifted))
            + tau * 0.5 * (1.0 - sum(p * p for p in pi)))


def entropy(pi, kind: EntropyKind | str) -> float:
    pi = np.asarray(pi, dtype=float)
    kind = EntropyKind.parse(kind)
    if kind is EntropyKind.SHANNON:
        nz = pi[pi > 0]
        return float(-(nz * np.log(nz)).sum())
    return float(0.5 * (1.0 - pi @ pi))


def max_entropy(kind: EntropyKind | str, n_actions: int) -> float:
    """Entropy of the uniform distribution over ``n_actions`` actions."""
    kind = EntropyKind.parse(kind)
    if n_actions < 1:
        raise ValueError("need at least one action")
    if kind is EntropyKind.SHANNON:
        return math.log(n_actions)
    return 0.5 * (1.0 - 1.0 / n_actions)


def _sparsemax_rows(z: np.ndarray) -> np.ndarray:
    z_sorted = -np.sort(-z, axis=1)
    cumsum = np.cumsum(z_sorted, axis=1)
    ks = np.arange(1, z.shape[1] + 1)
    support = 1.0 + ks * z_sorted > cumsum
    k = support.shape[1] - np.argmax(support[:, ::-1], axis=1)
    threshold = (cumsum[np.arange(z.shape[0]), k - 1] - 1.0) / k
    return np.maximum(z - threshold[:, None], 0.0)


def soft_policy_rows(q, kind: EntropyKind | str, tau: float) -> np.ndarray:
    """Row-wise :func:`soft_policy` for a 2-D array of action vectors."""
    q = np.asarray(q, dtype=float)
    if not tau >= MIN_TEMPERATURE:
        raise ValueError(f"temperature must be >= {MIN_TEMPERATURE}, got {tau!r}")
    z = (q - q.max(axis=1, keepdims=True)) / tau
    if EntropyKind.parse(kind) is EntropyKind.SHANNON:
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)
    return _sparsemax_rows(z)


def entropy_rows(p, kind: EntropyKind | str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if EntropyKind.parse(kind) is EntropyKind.SHANNON:
        logs = np.log(np.where(p > 0, p, 1.0))
        return -(p * logs).sum(axis=1)
    return 0.5 * (1.0 - (p * p).sum(axis=1))
