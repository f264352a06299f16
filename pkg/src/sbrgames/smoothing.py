"""Entropy and the entropy-regularized (softmax) best response."""

from __future__ import annotations

import numpy as np

from .game import JointStrategy, ZeroSumGame, local_payoff

MIN_TAU = 1e-8


def check_tau(tau) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau < MIN_TAU:
        raise ValueError(f"temperature must be >= {MIN_TAU}, got {tau!r}")
    return tau


def _finite(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size == 0 or not np.all(np.isfinite(q)):
        raise ValueError("payoff vector must be a finite non-empty vector")
    return q


def shannon_entropy(p) -> float:
    """-sum p log p with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def softmax(q, tau) -> np.ndarray:
    q = _finite(q)
    tau = check_tau(tau)
    z = np.exp((q - q.max()) / tau)
    return z / z.sum()


def logsumexp_value(q, tau) -> float:
    """tau * log sum exp(q/tau), the entropy-regularized best-response value.

    Equals max over the simplex of <p, q> + tau H(p).
    """
    q = _finite(q)
    tau = check_tau(tau)
    m = q.max()
    return float(m + tau * np.log(np.sum(np.exp((q - m) / tau))))


regularized_best_response_value = logsumexp_value


def kl_divergence(p, q) -> float:
    """KL(p || q) with 0 log 0 = 0; ``q`` must be positive where ``p`` is."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def smoothed_responses(game: ZeroSumGame, joint: JointStrategy, tau) -> tuple[np.ndarray, np.ndarray]:
    return (softmax(local_payoff(game, 1, joint.p2), tau),
            softmax(local_payoff(game, 2, joint.p1), tau))


def regularized_ne_residual(game: ZeroSumGame, joint: JointStrategy, tau) -> float:
    """Max-norm distance of each strategy from the softmax of its local payoff."""
    s1, s2 = smoothed_responses(game, joint, tau)
    return float(max(np.max(np.abs(joint.p1 - s1)), np.max(np.abs(joint.p2 - s2))))
