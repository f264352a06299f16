"""Experiment configuration files (JSON, unknown fields rejected)."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .game import GameError, ZeroSumGame, generate_game, load_game
from .schedules import ScheduleError, StepsizeSchedule

DEFAULT_BUDGET = 10 ** 9
MAX_SEED = 2 ** 64 - 1
FIELDS = ("game", "mode", "tau", "schedule", "K", "epsilon", "nu", "replicas", "seed",
          "record_every", "output_dir", "c_sep", "init", "delta")
REQUIRED = ("game", "mode", "tau")
NAMED_GAMES = ("matching_pennies", "rock_paper_scissors")


class ConfigError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    game: str
    mode: str
    tau: float | str
    schedule: StepsizeSchedule | None = None
    K: int | None = None
    epsilon: float | None = None
    nu: float | None = None
    replicas: int = 20
    seed: int = 0
    record_every: int = 1
    output_dir: str = "results"
    c_sep: float | None = None
    init: str = "uniform"
    delta: float | None = None
    extra: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("extra")
        out["schedule"] = None if self.schedule is None else self.schedule.to_dict()
        return out


def _number(data, key, lo=None, hi=None, integer=False):
    value = data.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if integer and (not isinstance(value, int) and not float(value).is_integer()):
        raise ConfigError(f"{key} must be an integer")
    value = int(value) if integer else float(value)
    if lo is not None and value < lo or hi is not None and value > hi:
        raise ConfigError(f"{key}={value} out of range")
    return value


def parse_config(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(FIELDS))
    if unknown:
        raise ConfigError(f"unknown config fields: {unknown}")
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise ConfigError(f"missing config fields: {missing}")
    if not isinstance(data["game"], str):
        raise ConfigError("game must be a generator name or a file path")
    mode = data["mode"]
    if mode not in ("full", "minimal"):
        raise ConfigError(f"mode must be 'full' or 'minimal', got {mode!r}")
    tau = data["tau"]
    if tau != "from_epsilon":
        tau = _number(data, "tau", lo=1e-8)
    schedule = None
    if data.get("schedule") is not None:
        try:
            schedule = StepsizeSchedule.from_dict(data["schedule"])
        except (ScheduleError, TypeError, KeyError) as exc:
            raise ConfigError(f"invalid schedule: {exc}") from exc
    cfg = ExperimentConfig(
        game=data["game"], mode=mode, tau=tau, schedule=schedule,
        K=_number(data, "K", lo=1, integer=True),
        epsilon=_number(data, "epsilon", lo=0, hi=1),
        nu=_number(data, "nu", lo=0),
        replicas=_number(data, "replicas", lo=1, integer=True) or 20,
        seed=_number(data, "seed", lo=0, hi=MAX_SEED, integer=True) or 0,
        record_every=_number(data, "record_every", lo=1, integer=True) or 1,
        output_dir=str(data.get("output_dir", "results")),
        c_sep=_number(data, "c_sep"),
        init=data.get("init", "uniform"),
        delta=_number(data, "delta", lo=0, hi=1),
    )
    if cfg.init not in ("uniform", "corner"):
        raise ConfigError("init must be 'uniform' or 'corner'")
    if cfg.tau == "from_epsilon":
        if cfg.epsilon is None or not 0 < cfg.epsilon < 1:
            raise ConfigError("tau='from_epsilon' needs epsilon in (0,1)")
        if mode == "minimal" and cfg.nu is None:
            raise ConfigError("minimal mode with tau='from_epsilon' needs nu")
    else:
        if schedule is None or cfg.K is None:
            raise ConfigError("explicit tau needs a schedule and K")
        if mode == "minimal" and (cfg.c_sep is None or cfg.c_sep <= 0):
            raise ConfigError("minimal mode with explicit tau needs a positive c_sep")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def resolve_game(source: str) -> ZeroSumGame:
    """A generator name, ``random:N1xN2[:SEED]``, or a JSON file with an r1 matrix."""
    try:
        if source in NAMED_GAMES:
            return generate_game(source)
        m = re.fullmatch(r"random:(\d+)x(\d+)(?::(\d+))?", source)
        if m:
            return generate_game("random", int(m[1]), int(m[2]), int(m[3] or 0))
        return load_game(source)
    except (GameError, OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load game {source!r}: {exc}") from exc


def check_budget(steps: int, budget: int = DEFAULT_BUDGET):
    if steps > budget:
        raise BudgetExceeded(f"{steps} steps exceed the budget of {budget}")
