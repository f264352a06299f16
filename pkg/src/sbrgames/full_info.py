"""Full-information doubly-smoothed best-response dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .game import JointStrategy, ZeroSumGame, nash_gap
from .lyapunov import CERT_SLACK, lyap_v, lyap_v_harris
from .schedules import StepsizeSchedule
from .smoothing import check_tau, smoothed_responses


class DriftViolation(AssertionError):
    """The per-step Lyapunov drift inequality failed; indicates a bug."""


@dataclass(frozen=True)
class FullInfoState:
    joint: JointStrategy
    k: int = 1


@dataclass(frozen=True)
class FullTraceRecord:
    k: int
    beta_k: float
    ng: float
    v: float
    v_h: float
    drift_slack: float | None


@dataclass
class FullRunResult:
    records: list[FullTraceRecord]
    final: FullInfoState
    min_drift_slack: float = math.inf
    v_history: list[float] = field(default_factory=list)

    columns = tuple(FullTraceRecord.__dataclass_fields__)


def check_stepsize(beta_k) -> float:
    beta_k = float(beta_k)
    if not 0 < beta_k < 1:
        raise ValueError(f"stepsize must lie in (0,1), got {beta_k}")
    return beta_k


def mix_toward(p: np.ndarray, target: np.ndarray, beta: float) -> np.ndarray:
    """(1 - beta) p + beta target; elementwise >= (1 - beta) p in floating point."""
    return (1.0 - beta) * p + beta * target


def _renormalize(p: np.ndarray) -> np.ndarray:
    p = np.where((p < 0) & (p > -1e-15), 0.0, p)
    return p / p.sum()


def step_full(game: ZeroSumGame, state: FullInfoState, tau, beta_k) -> FullInfoState:
    """One simultaneous update of both players from the same pre-step joint."""
    beta_k = check_stepsize(beta_k)
    s1, s2 = smoothed_responses(game, state.joint, tau)
    p1 = _renormalize(mix_toward(state.joint.p1, s1, beta_k))
    p2 = _renormalize(mix_toward(state.joint.p2, s2, beta_k))
    return FullInfoState(JointStrategy(p1, p2), state.k + 1)


def drift_rhs(v_k: float, beta_k: float, tau: float, a_max: int) -> float:
    return ((1 - beta_k) * v_k + 2 * a_max ** 2 * beta_k ** 2 / tau
            + 2 * beta_k * tau * math.log(a_max))


def run_full(game: ZeroSumGame, init: JointStrategy, tau, schedule: StepsizeSchedule, K: int,
             check_drift: bool = True, record_every: int = 1) -> FullRunResult:
    """Run K steps; records k = 1, multiples of ``record_every`` and K + 1.

    A record's ``drift_slack`` belongs to the step taken from that record's
    k; it is None on the final record.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    tau = check_tau(tau)
    state = FullInfoState(init, 1)
    v = lyap_v(game, init, tau)
    result = FullRunResult([], state, v_history=[v])
    for k in range(1, K + 2):
        beta_k = schedule.beta_at(k)
        slack = None
        if k <= K:
            nxt = step_full(game, state, tau, beta_k)
            v_next = lyap_v(game, nxt.joint, tau)
            slack = drift_rhs(v, beta_k, tau, game.a_max) - v_next
            result.min_drift_slack = min(result.min_drift_slack, slack)
            if check_drift and slack < -CERT_SLACK:
                raise DriftViolation(f"drift inequality violated at k={k}: slack {slack!r}")
        if k == 1 or k % record_every == 0 or k == K + 1:
            result.records.append(FullTraceRecord(
                k=k, beta_k=beta_k, ng=nash_gap(game, state.joint), v=v,
                v_h=lyap_v_harris(game, state.joint), drift_slack=slack))
        if k <= K:
            state, v = nxt, v_next
            result.v_history.append(v)
    result.final = state
    return result


def first_k_below(game, init, tau, schedule, epsilon, k_max) -> int | None:
    """Smallest k <= k_max + 1 with NG(pi_k) <= epsilon, or None."""
    state = FullInfoState(init, 1)
    for k in range(1, k_max + 2):
        if nash_gap(game, state.joint) <= epsilon:
            return k
        if k <= k_max:
            state = step_full(game, state, tau, schedule.beta_at(k))
    return None
