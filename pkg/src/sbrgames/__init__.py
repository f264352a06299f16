"""Smoothed best-response learning dynamics for two-player zero-sum matrix games."""

from .game import (ZeroSumGame, JointStrategy, GameError, nash_gap, matching_pennies,
                   rock_paper_scissors, random_game, load_game)
from .smoothing import softmax, logsumexp_value
from .lyapunov import lyap_v, lyap_w, lyapunov_report
from .schedules import StepsizeSchedule
from .full_info import run_full, step_full
from .minimal_info import run_minimal, step_minimal
from .equilibrium import exact_nash, regularized_nash

__version__ = "0.1.0"
