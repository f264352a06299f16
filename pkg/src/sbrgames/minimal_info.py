"""Minimal-information two-timescale dynamics.

Each player samples an action, moves its strategy toward the softmax of its
q-estimate, and corrects the q-entry of the played action toward the
realised payoff with an importance-weighted stepsize alpha_k / pi_k(a).

The oracles at the bottom evaluate conditional expectations exactly by
enumerating all action pairs; they never sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .full_info import check_stepsize, mix_toward
from .game import JointStrategy, ZeroSumGame, nash_gap, uniform_joint
from .lyapunov import Certificate, lyap_v, lyap_w
from .schedules import StepsizeSchedule
from .smoothing import check_tau, softmax


class ParameterError(ValueError):
    """alpha_k > 1 or another step-size contract violation."""


class UniformStream:
    """Buffered uniforms from a counter-based (Philox) generator.

    Yields exactly the sequence of successive ``Generator.random()`` calls
    on the same seed.
    """

    def __init__(self, seed: int, block: int = 8192):
        self._gen = np.random.Generator(np.random.Philox(seed))
        self._block = block
        self._buf = np.empty(0)
        self._pos = 0

    def random(self) -> float:
        if self._pos == self._buf.size:
            self._buf = self._gen.random(self._block)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)


def make_stream(seed: int) -> UniformStream:
    return UniformStream(seed)


@dataclass(frozen=True)
class MinimalInfoState:
    joint: JointStrategy
    q1: np.ndarray
    q2: np.ndarray
    k: int = 1
    min_mass: tuple[float, float] = (1.0, 1.0)
    ratio_violations: int = 0

    def q(self, player: int) -> np.ndarray:
        return self.q1 if player == 1 else self.q2

    @property
    def delta(self) -> float:
        """Smallest probability any player currently puts on an action."""
        return float(min(self.joint.p1.min(), self.joint.p2.min()))


def initial_state(game: ZeroSumGame) -> MinimalInfoState:
    """Uniform strategies and zero q-estimates."""
    joint = uniform_joint(game)
    return MinimalInfoState(joint, np.zeros(game.n1), np.zeros(game.n2), 1,
                            (float(joint.p1.min()), float(joint.p2.min())))


def state_from(game, p1, p2, q1, q2, k=1) -> MinimalInfoState:
    joint = JointStrategy(np.asarray(p1, float), np.asarray(p2, float))
    return MinimalInfoState(joint, np.asarray(q1, float), np.asarray(q2, float), k,
                            (float(joint.p1.min()), float(joint.p2.min())))


def inverse_cdf(p, u: float) -> int:
    """First action whose cumulative probability exceeds ``u``."""
    acc = 0.0
    last = 0
    for a, mass in enumerate(p):
        if mass > 0:
            last = a
        acc += mass
        if u < acc:
            return a
    return last


def sample_actions(state: MinimalInfoState, rng) -> tuple[int, int]:
    """Two successive uniforms from ``rng``: player 1 first, then player 2."""
    return inverse_cdf(state.joint.p1, rng.random()), inverse_cdf(state.joint.p2, rng.random())


def _check_alpha(alpha_k) -> float:
    alpha_k = float(alpha_k)
    if not 0 <= alpha_k <= 1:
        raise ParameterError(f"alpha_k must lie in [0,1], got {alpha_k}")
    return alpha_k


# Scalar kernels on Python lists: for a handful of actions they are several
# times faster than numpy and give the same bits wherever they are used.

def _softmax_list(q, tau):
    m = max(q)
    z = [math.exp((x - m) / tau) for x in q]
    total = sum(z)
    return [x / total for x in z]


def _mix_list(p, target, beta):
    keep = 1.0 - beta
    return [keep * x + beta * t for x, t in zip(p, target)]


def _td_list(q, p, action, payoff, alpha):
    mass = p[action]
    if mass <= 0:
        raise ParameterError(f"sampled action {action} has zero probability")
    ratio = alpha / mass
    out = list(q)
    out[action] = q[action] + ratio * (payoff - q[action])
    return out, ratio > 1


def td_update(q, p, action: int, payoff: float, alpha: float):
    """Importance-weighted TD correction of the played entry.

    Returns the new q-vector and whether alpha / p[action] exceeded one.
    """
    out, bad = _td_list(list(map(float, q)), list(map(float, p)), action, payoff, alpha)
    return np.array(out), bad


def _advance(r1, r2, p1, p2, q1, q2, tau, beta, alpha, a1, a2):
    """One step on lists; r1/r2 are nested lists of payoffs."""
    new_p1 = _mix_list(p1, _softmax_list(q1, tau), beta)
    new_p2 = _mix_list(p2, _softmax_list(q2, tau), beta)
    pay1 = r1[a1][a2]
    pay2 = r2[a2][a1]
    q1, bad1 = _td_list(q1, p1, a1, pay1, alpha)
    q2, bad2 = _td_list(q2, p2, a2, pay2, alpha)
    return new_p1, new_p2, q1, q2, pay1, pay2, int(bad1) + int(bad2)


def transition(game: ZeroSumGame, state: MinimalInfoState, tau, beta_k, alpha_k, a1, a2):
    """Deterministic successor of ``state`` given the sampled actions."""
    p1, p2, q1, q2, pay1, pay2, bad = _advance(
        game.r1.tolist(), game.r2.tolist(), state.joint.p1.tolist(), state.joint.p2.tolist(),
        state.q1.tolist(), state.q2.tolist(), tau, beta_k, alpha_k, a1, a2)
    p1, p2 = np.array(p1), np.array(p2)
    nxt = MinimalInfoState(
        JointStrategy(p1, p2), np.array(q1), np.array(q2), state.k + 1,
        (min(state.min_mass[0], float(p1.min())), min(state.min_mass[1], float(p2.min()))),
        state.ratio_violations + bad,
    )
    return nxt, (pay1, pay2)


def step_minimal(game: ZeroSumGame, state: MinimalInfoState, tau, beta_k, alpha_k, rng):
    """Sample with pi_k, update strategies from q_k, then update q from pi_k."""
    beta_k = check_stepsize(beta_k)
    alpha_k = _check_alpha(alpha_k)
    tau = check_tau(tau)
    a1, a2 = sample_actions(state, rng)
    return transition(game, state, tau, beta_k, alpha_k, a1, a2)


# --- runs -------------------------------------------------------------------

@dataclass(frozen=True)
class MinimalTraceRecord:
    k: int
    beta_k: float
    alpha_k: float
    ng: float
    v: float
    w: float
    t: float
    min_mass_p1: float
    min_mass_p2: float
    delta_good: int


@dataclass
class MinimalRunResult:
    records: list[MinimalTraceRecord]
    final: MinimalInfoState
    seed: int
    envelope_violations: int = 0
    q_bound_violations: int = 0
    ratio_violations: int = 0
    first_envelope_violation: int | None = None
    drift_checked: int = 0
    drift_failed: int = 0
    drift_worst_slack: float = math.inf

    columns = tuple(MinimalTraceRecord.__dataclass_fields__)


def _record(game, state, tau, beta_k, alpha_k, delta, good) -> MinimalTraceRecord:
    v = lyap_v(game, state.joint, tau)
    w = lyap_w(game, state.joint, state.q1, state.q2)
    return MinimalTraceRecord(
        k=state.k, beta_k=beta_k, alpha_k=alpha_k, ng=nash_gap(game, state.joint), v=v, w=w,
        t=v + w, min_mass_p1=float(state.joint.p1.min()), min_mass_p2=float(state.joint.p2.min()),
        delta_good=int(good))


def run_minimal(game: ZeroSumGame, tau, c_sep, schedule: StepsizeSchedule, K: int, seed: int,
                record_every: int = 1, delta: float = 0.0, certify_r: float | None = None
                ) -> MinimalRunResult:
    """Run K steps from uniform strategies and zero q-estimates.

    alpha_k = beta_k / c_sep. Records k = 1, multiples of record_every, and K + 1.
    ``delta_good`` is 1 while every strategy entry seen so far is >= delta.
    The elementwise envelope (1/A_max) prod_{j<k} (1 - beta_j) is checked
    at every step, recorded or not. Same bits as repeated step_minimal.
    With ``certify_r`` set, both coupled drift certificates are evaluated
    exactly at every recorded state.
    """
    if K < 1 or record_every < 1:
        raise ValueError("K and record_every must be >= 1")
    tau = check_tau(tau)
    if not c_sep > 0:
        raise ParameterError("timescale separation constant must be positive")
    rng = make_stream(seed)
    start = initial_state(game)
    r1, r2 = game.r1.tolist(), game.r2.tolist()
    p1, p2 = start.joint.p1.tolist(), start.joint.p2.tolist()
    q1, q2 = start.q1.tolist(), start.q2.tolist()
    m1, m2 = min(p1), min(p2)
    envelope = 1.0 / game.a_max
    result = MinimalRunResult([], start, seed)
    good = True
    bad = 0
    for k in range(1, K + 2):
        beta_k = schedule.beta_at(k)
        alpha_k = beta_k / c_sep
        if alpha_k > 1:
            raise ParameterError(f"alpha_k = {alpha_k!r} > 1 at k={k}")
        low1, low2 = min(p1), min(p2)
        good = good and low1 >= delta and low2 >= delta
        if low1 < envelope or low2 < envelope:
            result.envelope_violations += 1
            if result.first_envelope_violation is None:
                result.first_envelope_violation = k
        if max(map(abs, q1)) > 1 or max(map(abs, q2)) > 1:
            result.q_bound_violations += 1
        if k == 1 or k % record_every == 0 or k == K + 1:
            state = state_from(game, p1, p2, q1, q2, k)
            result.records.append(_record(game, state, tau, beta_k, alpha_k, delta, good))
            if certify_r is not None and k <= K:
                for cert in (conditional_w_drift_oracle(game, state, tau, beta_k, alpha_k, certify_r),
                             conditional_v_drift_certificate(game, state, tau, beta_k, certify_r)):
                    result.drift_checked += 1
                    result.drift_failed += int(not cert.satisfied)
                    result.drift_worst_slack = min(result.drift_worst_slack, cert.slack)
        if k <= K:
            a1 = inverse_cdf(p1, rng.random())
            a2 = inverse_cdf(p2, rng.random())
            p1, p2, q1, q2, _, _, nbad = _advance(r1, r2, p1, p2, q1, q2, tau, beta_k, alpha_k, a1, a2)
            bad += nbad
            m1, m2 = min(m1, min(p1)), min(m2, min(p2))
            envelope = envelope * (1.0 - beta_k)
    result.final = MinimalInfoState(JointStrategy(np.array(p1), np.array(p2)), np.array(q1),
                                    np.array(q2), K + 1, (m1, m2), bad)
    result.ratio_violations = bad
    return result


# --- exact conditional-expectation oracles ----------------------------------

def _outcomes(game, state, tau, beta_k, alpha_k):
    p1, p2 = state.joint.p1, state.joint.p2
    for a1 in range(game.n1):
        for a2 in range(game.n2):
            prob = p1[a1] * p2[a2]
            if prob > 0:
                nxt, _ = transition(game, state, tau, beta_k, alpha_k, a1, a2)
                yield prob, nxt


def expected_q_increment(game, state, tau, beta_k, alpha_k) -> tuple[np.ndarray, np.ndarray]:
    """E[q_{k+1} - q_k | state] by enumeration of all action pairs."""
    d1 = np.zeros(game.n1)
    d2 = np.zeros(game.n2)
    for prob, nxt in _outcomes(game, state, tau, beta_k, alpha_k):
        d1 += prob * (nxt.q1 - state.q1)
        d2 += prob * (nxt.q2 - state.q2)
    return d1, d2


def td_second_moment(game: ZeroSumGame, state: MinimalInfoState, player: int, opp_action: int) -> float:
    """E[||F^i||^2 | state, opponent action] where F^i is the importance-weighted TD vector."""
    p = state.joint.strategy(player)
    q = state.q(player)
    payoffs = game.payoff_matrix(player)[:, opp_action]
    mask = p > 0
    return float(np.sum((payoffs[mask] - q[mask]) ** 2 / p[mask]))


def conditional_w_drift_oracle(game, state, tau, beta_k, alpha_k, r) -> Certificate:
    """Exact E[W_{k+1} | state] against the coupled q-drift bound."""
    tau = check_tau(tau)
    a = game.a_max
    lhs = sum(prob * lyap_w(game, nxt.joint, nxt.q1, nxt.q2)
              for prob, nxt in _outcomes(game, state, tau, beta_k, alpha_k))
    w_k = lyap_w(game, state.joint, state.q1, state.q2)
    v_k = lyap_v(game, state.joint, tau)
    delta = state.delta
    rhs = (((1 - alpha_k) ** 2 + 3 * a ** 2 * (1 - alpha_k) * beta_k / (r * tau ** 3)) * w_k
           + 4 * a * alpha_k ** 2 / delta + 4 * a ** 2 * beta_k ** 2
           + r * (1 - alpha_k) * beta_k * v_k)
    return Certificate(float(lhs), float(rhs))


def conditional_v_drift_certificate(game, state, tau, beta_k, r) -> Certificate:
    """V after the (deterministic) strategy update against the coupled V-drift bound."""
    tau = check_tau(tau)
    a = game.a_max
    p1 = mix_toward(state.joint.p1, softmax(state.q1, tau), beta_k)
    p2 = mix_toward(state.joint.p2, softmax(state.q2, tau), beta_k)
    lhs = lyap_v(game, JointStrategy(p1, p2), tau)
    v_k = lyap_v(game, state.joint, tau)
    w_k = lyap_w(game, state.joint, state.q1, state.q2)
    rhs = ((1 - beta_k * (1 - r)) * v_k + 2 * a ** 2 * beta_k ** 2 / tau
           + 2 * a / (r * tau ** 3) * w_k + 4 * beta_k * tau * math.log(a))
    return Certificate(float(lhs), float(rhs))


def conditional_v_drift_check(game, state, tau, beta_k, r) -> bool:
    return conditional_v_drift_certificate(game, state, tau, beta_k, r).satisfied
