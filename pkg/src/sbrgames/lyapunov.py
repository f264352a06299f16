"""Lyapunov functions for smoothed best-response dynamics and their certificates.

All certificates are evaluated numerically with an absolute slack of
``CERT_SLACK``; they return the two sides of the inequality so callers can
report the worst margin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import GameError, JointStrategy, ZeroSumGame, best_response_value, local_payoff, nash_gap
from .smoothing import check_tau, logsumexp_value, shannon_entropy, softmax

CERT_SLACK = 1e-10


@dataclass(frozen=True)
class LyapunovReport:
    v: float
    v_h: float
    v_alt: float
    v_kl: float
    w: float
    t: float
    ng: float


@dataclass(frozen=True)
class Certificate:
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.rhs + CERT_SLACK

    def __iter__(self):
        yield self.lhs
        yield self.rhs
        yield self.satisfied


def lyap_v(game: ZeroSumGame, joint: JointStrategy, tau) -> float:
    """Sum over players of max <p, R^i pi^{-i}> + tau H(p), via log-sum-exp."""
    return (logsumexp_value(local_payoff(game, 1, joint.p2), tau)
            + logsumexp_value(local_payoff(game, 2, joint.p1), tau))


def lyap_v_harris(game: ZeroSumGame, joint: JointStrategy) -> float:
    return (best_response_value(game, 1, joint.p2)[0]
            + best_response_value(game, 2, joint.p1)[0])


def lyap_v_alt(game: ZeroSumGame, joint: JointStrategy, tau) -> float:
    tau = check_tau(tau)
    return lyap_v(game, joint, tau) - tau * (shannon_entropy(joint.p1) + shannon_entropy(joint.p2))


def _log_softmax(q, tau):
    z = q / tau
    m = z.max()
    return z - m - np.log(np.sum(np.exp(z - m)))


def _kl_terms(p, logs):
    """Per-action p log(p/s) - p + s; each term is >= 0, so the sum has no cancellation."""
    s = np.exp(logs)
    out = s.copy()
    pos = p > 0
    lr = np.log(p[pos]) - logs[pos]
    terms = p[pos] * lr - p[pos] + s[pos]
    near = np.abs(lr) < 1e-3
    # s (lr e^lr - e^lr + 1), written to stay accurate when p is close to s.
    x = np.expm1(lr[near])
    terms[near] = s[pos][near] * ((lr[near] - x) + x * lr[near])
    out[pos] = terms
    return out


def lyap_v_kl(game: ZeroSumGame, joint: JointStrategy, tau) -> float:
    """Sum of KL(pi^i || softmax(R^i pi^{-i})), computed from log-probabilities."""
    tau = check_tau(tau)
    total = 0.0
    for i in (1, 2):
        logs = _log_softmax(local_payoff(game, i, joint.opponent(i)), tau)
        total += float(np.sum(_kl_terms(joint.strategy(i), logs)))
    return total


def lyap_w(game: ZeroSumGame, joint: JointStrategy, q1, q2) -> float:
    """Squared error of the q-estimates against the true local payoffs."""
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if q1.shape != (game.n1,) or q2.shape != (game.n2,):
        raise GameError("q-vector lengths do not match the game")
    e1 = q1 - local_payoff(game, 1, joint.p2)
    e2 = q2 - local_payoff(game, 2, joint.p1)
    return float(e1 @ e1 + e2 @ e2)


def lyapunov_report(game, joint, tau, q1=None, q2=None) -> LyapunovReport:
    v = lyap_v(game, joint, tau)
    w = 0.0 if q1 is None else lyap_w(game, joint, q1, q2)
    return LyapunovReport(
        v=v,
        v_h=lyap_v_harris(game, joint),
        v_alt=lyap_v_alt(game, joint, tau),
        v_kl=lyap_v_kl(game, joint, tau),
        w=w,
        t=v + w,
        ng=nash_gap(game, joint),
    )


def grad_v(game: ZeroSumGame, joint: JointStrategy, tau, player: int) -> np.ndarray:
    """Gradient of V with respect to ``player``'s strategy."""
    other = game.payoff_matrix(2 if player == 1 else 1)
    return other.T @ softmax(other @ joint.strategy(player), tau)


def hessian_block(game: ZeroSumGame, joint: JointStrategy, tau, player: int) -> np.ndarray:
    """(1/tau) R^{-i}^T (diag(s) - s s^T) R^{-i} with s = softmax(R^{-i} pi^i)."""
    tau = check_tau(tau)
    other = game.payoff_matrix(2 if player == 1 else 1)
    s = softmax(other @ joint.strategy(player), tau)
    cov = np.diag(s) - np.outer(s, s)
    return other.T @ cov @ other / tau


def hessian_block_fd(game, joint, tau, player, h=1e-6) -> np.ndarray:
    """Hessian block by central differences of :func:`grad_v`."""
    p = joint.strategy(player).astype(float)
    n = p.size
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        plus = _with_strategy(joint, player, p + e)
        minus = _with_strategy(joint, player, p - e)
        cols.append((grad_v(game, plus, tau, player) - grad_v(game, minus, tau, player)) / (2 * h))
    return np.column_stack(cols)


def _with_strategy(joint, player, p):
    # Unvalidated: finite-difference probes step off the simplex.
    return JointStrategy(p, joint.p2) if player == 1 else JointStrategy(joint.p1, p)


def power_iteration(mat, iters=50, tol=1e-8, seed=0) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    mat = np.asarray(mat, dtype=float)
    x = np.random.default_rng(seed).standard_normal(mat.shape[0])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iters):
        y = mat @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        new = float(x @ y)
        x = y / norm
        if abs(new - estimate) <= tol * max(1.0, abs(new)):
            estimate = new
            break
        estimate = new
    return estimate


def hessian_norm_estimate(game: ZeroSumGame, joint: JointStrategy, tau) -> float:
    """Operator-norm estimate of the (block-diagonal) Hessian of V."""
    return max(power_iteration(hessian_block(game, joint, tau, i)) for i in (1, 2))


def hessian_bound(game: ZeroSumGame, tau) -> float:
    return game.a_max ** 2 / tau


def smoothness_constant(game: ZeroSumGame, tau) -> float:
    return 2 * game.a_max ** 2 / tau


def drift_certificate_full(game: ZeroSumGame, joint: JointStrategy, tau) -> Certificate:
    """<grad V, softmax response - pi> summed over players vs -V + 2 tau log A."""
    tau = check_tau(tau)
    lhs = 0.0
    for i in (1, 2):
        target = softmax(local_payoff(game, i, joint.opponent(i)), tau)
        lhs += float(grad_v(game, joint, tau, i) @ (target - joint.strategy(i)))
    rhs = -lyap_v(game, joint, tau) + 2 * tau * np.log(game.a_max)
    return Certificate(lhs, float(rhs))


def lower_bound_certificate(game: ZeroSumGame, joint: JointStrategy, tau) -> Certificate:
    """(tau/2) sum ||softmax response - pi||^2 <= V, written as lhs <= rhs."""
    tau = check_tau(tau)
    dist = 0.0
    for i in (1, 2):
        d = softmax(local_payoff(game, i, joint.opponent(i)), tau) - joint.strategy(i)
        dist += float(d @ d)
    return Certificate(0.5 * tau * dist, lyap_v(game, joint, tau))


def lyap_lower_bound_check(game, joint, tau) -> bool:
    return lower_bound_certificate(game, joint, tau).satisfied


def directional_derivative_fd(game, joint, tau, d1, d2, h=1e-6) -> float:
    """Central difference of V along the joint direction (d1, d2)."""
    plus = JointStrategy(joint.p1 + h * d1, joint.p2 + h * d2)
    minus = JointStrategy(joint.p1 - h * d1, joint.p2 - h * d2)
    return (lyap_v(game, plus, tau) - lyap_v(game, minus, tau)) / (2 * h)
