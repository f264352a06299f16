"""Reference solvers: exact Nash equilibrium by linear programming and the
entropy-regularized equilibrium by damped fixed-point iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import GameError, JointStrategy, ZeroSumGame, expected_payoff, nash_gap
from .smoothing import check_tau, regularized_ne_residual

MAX_ACTIONS = 100
PIVOT_BUDGET = 10 ** 6
PIVOT_TOL = 1e-12


class SolverError(RuntimeError):
    """Pivot budget or iteration limit exhausted."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class Equilibrium:
    joint: JointStrategy
    value: float
    residual: float
    iterations: int = 0
    method: str = ""

    def to_dict(self) -> dict:
        return {"p1": self.joint.p1.tolist(), "p2": self.joint.p2.tolist(), "value": self.value,
                "residual": self.residual, "method": self.method}


def simplex_max(a: np.ndarray, b: np.ndarray, c: np.ndarray, budget: int = PIVOT_BUDGET):
    """Maximize c.x subject to a x <= b, x >= 0, with b >= 0.

    Dense tableau, slack basis as the starting point, Bland's rule for both
    the entering and the leaving variable. Returns (x, dual, objective,
    pivots), where ``dual`` are the shadow prices of the rows.
    """
    m, n = a.shape
    if np.any(b < 0):
        raise ValueError("right-hand side must be non-negative")
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = -c
    basis = list(range(n, n + m))
    pivots = 0
    while True:
        entering = next((j for j in range(n + m) if tab[m, j] < -PIVOT_TOL), None)
        if entering is None:
            break
        if pivots >= budget:
            raise SolverError(f"simplex pivot budget of {budget} exhausted")
        col = tab[:m, entering]
        best = None
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = tab[i, -1] / col[i]
                if (best is None or ratio < best[0] - PIVOT_TOL
                        or (abs(ratio - best[0]) <= PIVOT_TOL and basis[i] < basis[best[1]])):
                    best = (ratio, i)
        if best is None:
            raise SolverError("linear program is unbounded")
        row = best[1]
        tab[row] /= tab[row, entering]
        for i in range(m + 1):
            if i != row and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[row]
        basis[row] = entering
        pivots += 1
    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = tab[i, -1]
    return x[:n], tab[m, n:n + m].copy(), float(tab[m, -1]), pivots


def _clean(w: np.ndarray) -> np.ndarray:
    w = np.where(w < 0, 0.0, w)
    return w / w.sum()


def _minimizer_strategy(payoff: np.ndarray, budget: int):
    """Strategy of the column player minimizing max_i (payoff y)_i, and that value."""
    shift = 2.0
    m = payoff + shift
    w, _, total, pivots = simplex_max(m, np.ones(m.shape[0]), np.ones(m.shape[1]), budget)
    return _clean(w), 1.0 / total - shift, pivots


def exact_nash(game: ZeroSumGame, tol: float = 1e-9, budget: int = PIVOT_BUDGET) -> Equilibrium:
    """Nash equilibrium and value by one linear program per player."""
    if tol < 1e-10:
        raise ValueError("tol must be >= 1e-10")
    if game.n1 > MAX_ACTIONS or game.n2 > MAX_ACTIONS:
        raise GameError(f"games are limited to {MAX_ACTIONS} actions per player")
    # Player 2 minimizes player 1's best payoff; player 1 minimizes player 2's.
    p2, value1, piv1 = _minimizer_strategy(game.r1, budget)
    p1, value2, piv2 = _minimizer_strategy(game.r2, budget)
    if abs(value1 + value2) > 1e-9:
        raise SolverError(f"player values disagree: {value1} vs {-value2}")
    joint = JointStrategy(p1, p2)
    gap = nash_gap(game, joint)
    if gap > tol:
        raise SolverError(f"solution has Nash gap {gap} > {tol}", gap)
    return Equilibrium(joint, float(value1), gap, piv1 + piv2, "simplex")


def closed_form_2x2(game: ZeroSumGame) -> Equilibrium:
    """Saddle point if one exists, otherwise the indifference solution."""
    if (game.n1, game.n2) != (2, 2):
        raise GameError("closed form needs a 2x2 game")
    r = game.r1
    for i in range(2):
        for j in range(2):
            if r[i, j] <= r[i].min() and r[i, j] >= r[:, j].max():
                p1 = np.eye(2)[i]
                p2 = np.eye(2)[j]
                joint = JointStrategy(p1, p2)
                return Equilibrium(joint, float(r[i, j]), nash_gap(game, joint), 0, "closed_form")
    (a, b), (c, d) = r
    denom = a - b - c + d
    x = (d - c) / denom
    y = (d - b) / denom
    joint = JointStrategy(np.array([x, 1 - x]), np.array([y, 1 - y]))
    return Equilibrium(joint, float((a * d - b * c) / denom), nash_gap(game, joint), 0, "closed_form")


def damping(game: ZeroSumGame, tau: float) -> float:
    return min(0.5, tau / (2 * game.a_max ** 2))


def regularized_nash(game: ZeroSumGame, tau, tol: float = 1e-10, max_iter: int = 10 ** 7,
                     init: JointStrategy | None = None) -> Equilibrium:
    """Unique fixed point of pi^i = softmax(R^i pi^{-i} / tau), by damped iteration."""
    tau = check_tau(tau)
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    beta = damping(game, tau)
    n1, n2 = game.n1, game.n2
    # Both players in one vector: p = (p1, p2), local payoffs = block @ p.
    block = np.zeros((n1 + n2, n1 + n2))
    block[:n1, n1:] = game.r1
    block[n1:, :n1] = game.r2
    starts = np.array([0, n1])
    sizes = [n1, n2]
    if init is None:
        p = np.concatenate([np.full(n1, 1.0 / n1), np.full(n2, 1.0 / n2)])
    else:
        p = np.concatenate([init.p1, init.p2]).astype(float)
    residual = np.inf
    for it in range(max_iter + 1):
        v = block @ p
        z = np.exp((v - np.repeat(np.maximum.reduceat(v, starts), sizes)) / tau)
        d = z / np.repeat(np.add.reduceat(z, starts), sizes) - p
        residual = np.abs(d).max()
        if residual <= tol:
            joint = JointStrategy(p[:n1].copy(), p[n1:].copy())
            return Equilibrium(joint, expected_payoff(game, joint, 1),
                               regularized_ne_residual(game, joint, tau), it, "damped_fixed_point")
        if it < max_iter:
            p = p + beta * d
    raise SolverError(f"no convergence in {max_iter} iterations; residual {residual}", residual)
