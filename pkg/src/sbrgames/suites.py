"""Randomized certificate suites behind ``sbrgames verify``.

Every trial draws its own generator from (seed, suite, trial index), so a
trial can be replayed on its own and results do not depend on how trials
are split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .full_info import FullInfoState, drift_rhs, step_full
from .game import JointStrategy, ZeroSumGame, local_payoff, random_game
from .lyapunov import (CERT_SLACK, drift_certificate_full, grad_v, hessian_bound,
                       hessian_norm_estimate, lower_bound_certificate, lyap_v, lyap_v_alt,
                       lyap_v_kl, directional_derivative_fd, smoothness_constant)
from .minimal_info import (conditional_v_drift_certificate, conditional_w_drift_oracle,
                           expected_q_increment, state_from, td_second_moment)

SUITES = ("lyapunov", "drift_full", "drift_minimal", "prop1", "gradient")
DEFAULT_TRIALS = {"lyapunov": 1000, "drift_full": 1000, "drift_minimal": 200,
                  "prop1": 1000, "gradient": 200, "td": 500}
PROP1_RTOL = 1e-9
GRADIENT_RTOL = 1e-5
TD_TOL = 1e-12
HESSIAN_TOL = 1e-8
DRIFT_R = 0.25


@dataclass
class Check:
    """One inequality lhs <= rhs (+ tolerance) evaluated inside a trial."""
    name: str
    lhs: float
    rhs: float
    tol: float = CERT_SLACK

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + self.tol


@dataclass
class SuiteResult:
    suite: str
    trials: int
    passed: int = 0
    worst_slack: float = math.inf
    worst_check: str = ""
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.trials

    def to_dict(self) -> dict:
        return {"suite": self.suite, "trials": self.trials, "passed": self.passed,
                "worst_slack": self.worst_slack, "worst_check": self.worst_check,
                "failures": self.failures}


def trial_rng(seed: int, suite: str, trial: int) -> np.random.Generator:
    key = [int(seed) & (2 ** 64 - 1), sum(map(ord, suite)), trial]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _interior(rng, n, floor=0.02):
    """Dirichlet(1) point mixed with the uniform point, so every entry is positive."""
    return (1 - floor) * rng.dirichlet(np.ones(n)) + floor / n


def _game(rng, max1, max2, min_n=1):
    n1 = int(rng.integers(min_n, max1 + 1))
    n2 = int(rng.integers(min_n, max2 + 1))
    return random_game(n1, n2, int(rng.integers(2 ** 62)))


def _log_uniform(rng, lo, hi):
    return float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))


def _direction(rng, p):
    """p' - p for a random simplex point p': feasible and sums to zero."""
    return rng.dirichlet(np.ones(p.size)) - p


# --- trials: each returns (replay payload, list of checks) -------------------

def prop1_trial(rng):
    game = _game(rng, 6, 5)
    tau = _log_uniform(rng, 1e-3, 10)
    joint = JointStrategy(_interior(rng, game.n1), _interior(rng, game.n2))
    alt = lyap_v_alt(game, joint, tau)
    kl = tau * lyap_v_kl(game, joint, tau)
    tol = PROP1_RTOL * max(1.0, abs(alt))
    return ({"r1": game.r1, "p1": joint.p1, "p2": joint.p2, "tau": tau},
            [Check("prop1", abs(alt - kl), tol, 0.0)])


def gradient_trial(rng):
    game = _game(rng, 6, 5)
    tau = _log_uniform(rng, 1e-2, 10)
    joint = JointStrategy(_interior(rng, game.n1), _interior(rng, game.n2))
    d1 = _direction(rng, joint.p1)
    d2 = _direction(rng, joint.p2)
    exact = float(grad_v(game, joint, tau, 1) @ d1 + grad_v(game, joint, tau, 2) @ d2)
    fd = directional_derivative_fd(game, joint, tau, d1, d2)
    tol = GRADIENT_RTOL * max(1.0, abs(fd))
    return ({"r1": game.r1, "p1": joint.p1, "p2": joint.p2, "tau": tau, "d1": d1, "d2": d2},
            [Check("gradient", abs(exact - fd), tol, 0.0)])


def lyapunov_trial(rng):
    game = _game(rng, 6, 5)
    tau = _log_uniform(rng, 1e-3, 10)
    joint = JointStrategy(_interior(rng, game.n1, 0.0), _interior(rng, game.n2, 0.0))
    other = JointStrategy(_interior(rng, game.n1, 0.0), _interior(rng, game.n2, 0.0))
    drift = drift_certificate_full(game, joint, tau)
    lower = lower_bound_certificate(game, joint, tau)
    grad_gap = np.concatenate([grad_v(game, joint, tau, i) - grad_v(game, other, tau, i)
                               for i in (1, 2)])
    dist = np.linalg.norm(joint.flat() - other.flat())
    return ({"r1": game.r1, "p1": joint.p1, "p2": joint.p2, "tau": tau}, [
        Check("drift", drift.lhs, drift.rhs),
        Check("hessian", hessian_norm_estimate(game, joint, tau), hessian_bound(game, tau),
              HESSIAN_TOL),
        Check("lower_bound", lower.lhs, lower.rhs),
        Check("smoothness", float(np.linalg.norm(grad_gap)), smoothness_constant(game, tau) * dist),
    ])


def drift_full_trial(rng):
    game = _game(rng, 6, 5)
    tau = _log_uniform(rng, 1e-3, 10)
    beta = float(rng.uniform(1e-6, 1 - 1e-6))
    joint = JointStrategy(_interior(rng, game.n1, 0.0), _interior(rng, game.n2, 0.0))
    v = lyap_v(game, joint, tau)
    nxt = step_full(game, FullInfoState(joint), tau, beta)
    return ({"r1": game.r1, "p1": joint.p1, "p2": joint.p2, "tau": tau, "beta": beta},
            [Check("drift_step", lyap_v(game, nxt.joint, tau), drift_rhs(v, beta, tau, game.a_max))])


def _minimal_state(rng):
    n = int(rng.choice([2, 3]))
    game = random_game(n, n, int(rng.integers(2 ** 62)))
    p1, p2 = _interior(rng, n, 0.05), _interior(rng, n, 0.05)
    q1, q2 = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    tau = _log_uniform(rng, 0.05, 2)
    beta = _log_uniform(rng, 1e-4, 0.5)
    alpha = float(rng.uniform(0, 1))
    return game, state_from(game, p1, p2, q1, q2), tau, beta, alpha


def drift_minimal_trial(rng):
    game, state, tau, beta, alpha = _minimal_state(rng)
    w = conditional_w_drift_oracle(game, state, tau, beta, alpha, DRIFT_R)
    v = conditional_v_drift_certificate(game, state, tau, beta, DRIFT_R)
    return (_minimal_payload(game, state, tau, beta, alpha),
            [Check("w_drift", w.lhs, w.rhs), Check("v_drift", v.lhs, v.rhs)])


def td_trial(rng):
    game, state, tau, beta, alpha = _minimal_state(rng)
    d1, d2 = expected_q_increment(game, state, tau, beta, alpha)
    err = 0.0
    for i, d in ((1, d1), (2, d2)):
        target = alpha * (local_payoff(game, i, state.joint.opponent(i)) - state.q(i))
        err = max(err, float(np.max(np.abs(d - target))))
    checks = [Check("td_unbiased", err, TD_TOL, 0.0)]
    bound = 4 * game.a_max / state.delta
    for i in (1, 2):
        n_opp = game.n2 if i == 1 else game.n1
        moment = max(td_second_moment(game, state, i, b) for b in range(n_opp))
        checks.append(Check(f"td_moment_p{i}", moment, bound))
    return _minimal_payload(game, state, tau, beta, alpha), checks


def _minimal_payload(game, state, tau, beta, alpha):
    return {"r1": game.r1, "p1": state.joint.p1, "p2": state.joint.p2, "q1": state.q1,
            "q2": state.q2, "tau": tau, "beta": beta, "alpha": alpha, "r": DRIFT_R}


TRIALS = {"prop1": prop1_trial, "gradient": gradient_trial, "lyapunov": lyapunov_trial,
          "drift_full": drift_full_trial, "drift_minimal": drift_minimal_trial, "td": td_trial}


def _jsonable(payload):
    return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in payload.items()}


def run_trials(suite: str, seed: int, indices) -> list[tuple[int, dict, list[Check]]]:
    trial = TRIALS[suite]
    out = []
    for t in indices:
        payload, checks = trial(trial_rng(seed, suite, t))
        out.append((t, payload, checks))
    return out


def summarize(suite: str, trials: int, results) -> SuiteResult:
    res = SuiteResult(suite, trials)
    for t, payload, checks in sorted(results, key=lambda item: item[0]):
        bad = [c for c in checks if not c.ok]
        for c in checks:
            if c.slack < res.worst_slack:
                res.worst_slack, res.worst_check = c.slack, c.name
        if bad:
            res.failures.append({"trial": t, "checks": [c.name for c in bad], **_jsonable(payload)})
        else:
            res.passed += 1
    return res


def run_suite(suite: str, trials: int | None = None, seed: int = 0) -> SuiteResult:
    if suite not in TRIALS:
        raise ValueError(f"unknown suite {suite!r}")
    trials = DEFAULT_TRIALS[suite] if trials is None else trials
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return summarize(suite, trials, run_trials(suite, seed, range(trials)))
