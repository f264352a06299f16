"""Two-player zero-sum matrix games and exact game-theoretic quantities."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ZERO_SUM_TOL = 1e-12
SIMPLEX_TOL = 1e-12


class GameError(ValueError):
    """Raised for malformed games or strategies."""


@dataclass(frozen=True)
class ActionCount:
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise GameError(f"action counts must be positive, got {self.n1}, {self.n2}")

    @property
    def a_max(self) -> int:
        return max(self.n1, self.n2)


@dataclass(frozen=True, eq=False)
class ZeroSumGame:
    """Payoff matrices ``r1`` (n1 x n2) and ``r2`` (n2 x n1) with r1 + r2.T == 0.

    Construct through :func:`validate_zero_sum` or :meth:`from_r1`; both
    check the invariants. Arrays are made read-only.
    """

    r1: np.ndarray
    r2: np.ndarray

    @classmethod
    def from_r1(cls, r1) -> "ZeroSumGame":
        r1 = np.asarray(r1, dtype=float)
        return validate_zero_sum(r1, -r1.T)

    @property
    def shape(self) -> ActionCount:
        return ActionCount(*self.r1.shape)

    @property
    def n1(self) -> int:
        return self.r1.shape[0]

    @property
    def n2(self) -> int:
        return self.r1.shape[1]

    @property
    def a_max(self) -> int:
        return max(self.r1.shape)

    def payoff_matrix(self, player: int) -> np.ndarray:
        _check_player(player)
        return self.r1 if player == 1 else self.r2

    def n_actions(self, player: int) -> int:
        _check_player(player)
        return self.n1 if player == 1 else self.n2

    def to_json(self) -> str:
        return json.dumps({"r1": self.r1.tolist()})

    def __eq__(self, other):
        if not isinstance(other, ZeroSumGame):
            return NotImplemented
        return np.array_equal(self.r1, other.r1) and np.array_equal(self.r2, other.r2)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class JointStrategy:
    p1: np.ndarray
    p2: np.ndarray

    def __iter__(self):
        yield self.p1
        yield self.p2

    def strategy(self, player: int) -> np.ndarray:
        _check_player(player)
        return self.p1 if player == 1 else self.p2

    def opponent(self, player: int) -> np.ndarray:
        _check_player(player)
        return self.p2 if player == 1 else self.p1

    def flat(self) -> np.ndarray:
        return np.concatenate([self.p1, self.p2])


def _check_player(player):
    if player not in (1, 2):
        raise GameError(f"player must be 1 or 2, got {player!r}")


def validate_zero_sum(r1, r2) -> ZeroSumGame:
    r1 = np.array(r1, dtype=float)
    r2 = np.array(r2, dtype=float)
    if r1.ndim != 2 or r2.ndim != 2:
        raise GameError("payoff matrices must be two-dimensional")
    if r1.shape[0] < 1 or r1.shape[1] < 1:
        raise GameError("payoff matrices must be non-empty")
    if r2.shape != r1.shape[::-1]:
        raise GameError(f"dimension mismatch: r1 is {r1.shape}, r2 is {r2.shape}")
    if not (np.all(np.isfinite(r1)) and np.all(np.isfinite(r2))):
        raise GameError("payoffs must be finite")
    if np.any(np.abs(r1) > 1) or np.any(np.abs(r2) > 1):
        raise GameError("payoff entries must lie in [-1, 1]")
    if np.max(np.abs(r1 + r2.T)) > ZERO_SUM_TOL:
        raise GameError("zero-sum violation: r1 + r2.T != 0")
    r1.setflags(write=False)
    r2.setflags(write=False)
    return ZeroSumGame(r1, r2)


def mixed_strategy(probs, n: int | None = None) -> np.ndarray:
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise GameError("mixed strategy must be a non-empty vector")
    if n is not None and p.size != n:
        raise GameError(f"strategy has {p.size} entries, expected {n}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise GameError("mixed strategy has negative or non-finite entries")
    if abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise GameError(f"mixed strategy sums to {p.sum()!r}, not 1")
    return p


def joint_strategy(game: ZeroSumGame, p1, p2) -> JointStrategy:
    return JointStrategy(mixed_strategy(p1, game.n1), mixed_strategy(p2, game.n2))


def uniform_joint(game: ZeroSumGame) -> JointStrategy:
    return JointStrategy(np.full(game.n1, 1.0 / game.n1), np.full(game.n2, 1.0 / game.n2))


def local_payoff(game: ZeroSumGame, player: int, opp_strategy) -> np.ndarray:
    """Expected payoff of each of ``player``'s actions, R^i pi^{-i}."""
    mat = game.payoff_matrix(player)
    opp = np.asarray(opp_strategy, dtype=float)
    if opp.shape != (mat.shape[1],):
        raise GameError(f"opponent strategy has shape {opp.shape}, expected ({mat.shape[1]},)")
    return mat @ opp


def expected_payoff(game: ZeroSumGame, joint: JointStrategy, player: int) -> float:
    own = joint.strategy(player)
    if own.shape != (game.n_actions(player),):
        raise GameError("strategy length does not match the game")
    return float(own @ local_payoff(game, player, joint.opponent(player)))


def best_response_value(game: ZeroSumGame, player: int, opp_strategy) -> tuple[float, int]:
    """Max local payoff and the lowest-index action attaining it (0-based)."""
    q = local_payoff(game, player, opp_strategy)
    a = int(np.argmax(q))
    return float(q[a]), a


def nash_gap(game: ZeroSumGame, joint: JointStrategy) -> float:
    """Sum over players of the best unilateral improvement."""
    gap = 0.0
    for i in (1, 2):
        value, _ = best_response_value(game, i, joint.opponent(i))
        gap += value - expected_payoff(game, joint, i)
    return gap


def nash_gap_vertices(game: ZeroSumGame, joint: JointStrategy) -> float:
    """Nash gap by explicit enumeration of pure deviations.

    Independent of :func:`nash_gap`: every deviation payoff is formed from
    individual matrix entries rather than a matrix-vector product.
    """
    p1, p2 = joint
    n1, n2 = game.n1, game.n2
    current1 = sum(p1[a] * p2[b] * game.r1[a, b] for a in range(n1) for b in range(n2))
    current2 = sum(p2[b] * p1[a] * game.r2[b, a] for a in range(n1) for b in range(n2))
    dev1 = max(sum(p2[b] * game.r1[a, b] for b in range(n2)) for a in range(n1))
    dev2 = max(sum(p1[a] * game.r2[b, a] for a in range(n1)) for b in range(n2))
    return float((dev1 - current1) + (dev2 - current2))


MATCHING_PENNIES = ((1.0, -1.0), (-1.0, 1.0))
ROCK_PAPER_SCISSORS = ((0.0, -1.0, 1.0), (1.0, 0.0, -1.0), (-1.0, 1.0, 0.0))


def matching_pennies() -> ZeroSumGame:
    return ZeroSumGame.from_r1(MATCHING_PENNIES)


def rock_paper_scissors() -> ZeroSumGame:
    return ZeroSumGame.from_r1(ROCK_PAPER_SCISSORS)


def random_game(n1: int, n2: int, seed: int) -> ZeroSumGame:
    """r1 entries i.i.d. uniform on [-1, 1]; deterministic in ``seed``."""
    if n1 < 1 or n2 < 1:
        raise GameError(f"invalid dimensions {n1}x{n2}")
    rng = np.random.Generator(np.random.Philox(seed))
    return ZeroSumGame.from_r1(rng.uniform(-1.0, 1.0, size=(n1, n2)))


def generate_game(kind: str, n1: int | None = None, n2: int | None = None,
                  seed: int = 0) -> ZeroSumGame:
    if kind == "matching_pennies":
        return matching_pennies()
    if kind == "rock_paper_scissors":
        return rock_paper_scissors()
    if kind == "random":
        if n1 is None or n2 is None:
            raise GameError("random games need n1 and n2")
        return random_game(n1, n2, seed)
    raise GameError(f"unknown game kind {kind!r}")


def load_game(path) -> ZeroSumGame:
    """Read a ``{"r1": [[...], ...]}`` JSON file; r2 is derived."""
    data = json.loads(Path(path).read_text())
    return game_from_dict(data)


def game_from_dict(data) -> ZeroSumGame:
    if not isinstance(data, dict) or "r1" not in data:
        raise GameError("game file must be an object with an 'r1' field")
    extra = set(data) - {"r1"}
    if extra:
        raise GameError(f"unknown fields in game file: {sorted(extra)}")
    rows = data["r1"]
    if (not isinstance(rows, list) or not rows
            or not all(isinstance(row, list) for row in rows)):
        raise GameError("r1 must be a non-empty list of rows")
    width = len(rows[0])
    if width == 0 or any(len(row) != width for row in rows):
        raise GameError("r1 is not rectangular")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool)
               for row in rows for x in row):
        raise GameError("r1 entries must be numbers")
    return ZeroSumGame.from_r1(rows)
