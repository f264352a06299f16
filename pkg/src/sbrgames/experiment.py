"""Run orchestration: full and minimal-information experiments and sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import (DEFAULT_BUDGET, BudgetExceeded, ConfigError, ExperimentConfig, check_budget,
                     resolve_game)
from .full_info import first_k_below, run_full
from .game import JointStrategy, ZeroSumGame, uniform_joint
from .lyapunov import CERT_SLACK, lyap_v, lyap_w
from .minimal_info import MinimalTraceRecord, run_minimal
from .report import svg_plot, write_csv, write_json
from .schedules import (IterationOverflow, full_info_params,
                        k_good_lower_bound, k_good_value, k_required_minimal,
                        k_required_value, minimal_info_params)

EXIT_OK, EXIT_CERT, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3, 4
DRIFT_R = 0.25
FULL_COLUMNS = ("k", "beta_k", "ng", "v", "v_h", "drift_slack")
MINIMAL_COLUMNS = tuple(MinimalTraceRecord.__dataclass_fields__)


def default_jobs() -> int:
    return os.cpu_count() or 1


def corner_joint(game: ZeroSumGame) -> JointStrategy:
    """Both players on their first action."""
    return JointStrategy(np.eye(game.n1)[0], np.eye(game.n2)[0])


def initial_joint(game, init: str) -> JointStrategy:
    return corner_joint(game) if init == "corner" else uniform_joint(game)


def constant_regime_params(game: ZeroSumGame, init: JointStrategy, epsilon: float):
    """Constant-regime parameters with V1 evaluated at the start point; returns (params, v1)."""
    tau = full_info_params(epsilon, game.a_max, "constant", v1=1.0).tau
    v1 = lyap_v(game, init, tau)
    return full_info_params(epsilon, game.a_max, "constant", v1=v1), v1


def derived_minimal_params(game: ZeroSumGame, epsilon: float, nu: float, kind="constant", eta=None):
    """Prescribed minimal-information parameters and the initial Lyapunov value used.

    The initial value T1 depends on tau, which depends on T1 through the
    boundary distance; T1 is taken at the largest admissible tau, an upper
    bound because V grows with tau and W does not depend on it.
    """
    joint = uniform_joint(game)
    tau_max = epsilon / (12 * math.log(game.a_max))
    t1 = lyap_v(game, joint, tau_max) + lyap_w(game, joint, np.zeros(game.n1), np.zeros(game.n2))
    return minimal_info_params(epsilon, nu, game.a_max, t1, kind, eta), t1


# --- run ---------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig, out_dir, jobs=1, budget=DEFAULT_BUDGET, plot=False):
    """Execute ``cfg``, write artifacts into ``out_dir`` and return (summary, exit code)."""
    game = resolve_game(cfg.game)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "full":
        return _run_full(cfg, game, out, budget, plot)
    return _run_minimal(cfg, game, out, jobs, budget, plot)


def _run_full(cfg, game, out, budget, plot):
    init = initial_joint(game, cfg.init)
    summary = {"mode": "full", "game": cfg.game, "init": cfg.init}
    if cfg.tau == "from_epsilon":
        params, v1 = constant_regime_params(game, init, cfg.epsilon)
        tau, schedule = params.tau, cfg.schedule or params.schedule
        K = cfg.K or max(1, params.k_predicted)
        summary["predicted_k"] = params.k_predicted
    else:
        tau, schedule, K = cfg.tau, cfg.schedule, cfg.K
    check_budget(K, budget)
    res = run_full(game, init, tau, schedule, K, check_drift=False, record_every=cfg.record_every)
    write_csv(out / "trace.csv", FULL_COLUMNS, res.records)
    drift_ok = res.min_drift_slack >= -CERT_SLACK
    summary.update({
        "tau": tau, "schedule": schedule.to_dict(), "K": K, "v1": res.v_history[0],
        "final_k": res.records[-1].k, "final_ng": res.records[-1].ng,
        "certificates": {"drift_steps": K, "drift_ok": drift_ok,
                         "min_drift_slack": res.min_drift_slack},
    })
    if cfg.epsilon is not None:
        hit = next((r.k for r in res.records if r.ng <= cfg.epsilon), None)
        summary["first_recorded_k_below_epsilon"] = hit
    write_json(out / "summary.json", summary)
    if plot:
        ks = [r.k for r in res.records]
        svg_plot(out / "plot.svg", ks, {"NG": [r.ng for r in res.records],
                                        "V": [r.v for r in res.records]}, "full information")
    return summary, EXIT_OK if drift_ok else EXIT_CERT


def _replica(args):
    j, game, tau, c_sep, schedule, K, seed, record_every, delta = args
    return j, run_minimal(game, tau, c_sep, schedule, K, seed, record_every, delta, certify_r=DRIFT_R)


def run_replicas(game, tau, c_sep, schedule, K, base_seed, replicas, record_every=1, delta=0.0,
                 jobs=1):
    """Replica j uses seed base_seed + j; results come back sorted by j."""
    tasks = [(j, game, tau, c_sep, schedule, K, base_seed + j, record_every, delta)
             for j in range(replicas)]
    if jobs <= 1 or replicas == 1:
        results = [_replica(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, replicas)) as pool:
            results = list(pool.map(_replica, tasks))
    return [res for _, res in sorted(results, key=lambda item: item[0])]


def aggregate(runs) -> dict:
    """Per-k mean and standard error of NG (and mean T) over replicas."""
    ks = [r.k for r in runs[0].records]
    ng = np.array([[r.ng for r in run.records] for run in runs])
    t = np.array([[r.t for r in run.records] for run in runs])
    n = len(runs)
    se = ng.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(len(ks))
    return {"k": ks, "ng_mean": ng.mean(axis=0).tolist(), "ng_se": se.tolist(),
            "t_mean": t.mean(axis=0).tolist()}


def _run_minimal(cfg, game, out, jobs, budget, plot):
    summary = {"mode": "minimal", "game": cfg.game}
    if cfg.tau == "from_epsilon":
        params, t1 = derived_minimal_params(game, cfg.epsilon, cfg.nu)
        tau, c_sep, schedule = params.tau, params.c_sep, cfg.schedule or params.schedule()
        delta = params.delta if cfg.delta is None else cfg.delta
        try:
            K = cfg.K or max(1, k_required_minimal(params, t1))
        except IterationOverflow as exc:
            raise BudgetExceeded(f"required iterations overflow: {exc}") from exc
        summary["derived_params"] = params.to_dict()
    else:
        tau, c_sep, schedule, K = cfg.tau, cfg.c_sep, cfg.schedule, cfg.K
        delta = cfg.delta or 0.0
    check_budget(K * cfg.replicas, budget)
    if schedule.beta_at(1) / c_sep > 1:
        raise ConfigError("alpha_1 = beta_1 / c_sep exceeds 1")
    runs = run_replicas(game, tau, c_sep, schedule, K, cfg.seed, cfg.replicas,
                        cfg.record_every, delta, jobs)
    for j, run in enumerate(runs):
        write_csv(out / f"trace_r{j}.csv", MINIMAL_COLUMNS, run.records)
    finals = [run.records[-1].ng for run in runs]
    agg = aggregate(runs)
    certs = {
        "envelope_violations": sum(r.envelope_violations for r in runs),
        "drift_checked": sum(r.drift_checked for r in runs),
        "drift_failed": sum(r.drift_failed for r in runs),
        "drift_worst_slack": min(r.drift_worst_slack for r in runs),
        "q_bound_violations": sum(r.q_bound_violations for r in runs),
        "ratio_violations": sum(r.ratio_violations for r in runs),
    }
    summary.update({
        "tau": tau, "c_sep": c_sep, "schedule": schedule.to_dict(), "K": K, "delta": delta,
        "replicas": cfg.replicas, "seeds": [cfg.seed + j for j in range(cfg.replicas)],
        "final_k": runs[0].records[-1].k, "final_ng": finals,
        "final_ng_mean": agg["ng_mean"][-1], "final_ng_se": agg["ng_se"][-1],
        "aggregate": agg, "certificates": certs,
    })
    write_json(out / "summary.json", summary)
    if plot:
        svg_plot(out / "plot.svg", agg["k"], {"NG mean": agg["ng_mean"], "T mean": agg["t_mean"]},
                 "minimal information")
    failed = certs["envelope_violations"] > 0 or certs["drift_failed"] > 0
    return summary, EXIT_CERT if failed else EXIT_OK


# --- sweep -------------------------------------------------------------------

FULL_SWEEP_COLUMNS = ("epsilon", "tau", "beta", "v1", "predicted_k", "actual_first_k_below")
MINIMAL_SWEEP_COLUMNS = ("epsilon", "nu", "r", "delta", "tau", "c_sep", "beta", "k_required",
                         "k_good", "over_budget", "ran", "final_ng")


def sweep_full(game, epsilons, init="corner", budget=DEFAULT_BUDGET):
    """Predicted vs observed first k with NG <= epsilon; raises BudgetExceeded."""
    start = initial_joint(game, init)
    rows = []
    for eps in epsilons:
        params, v1 = constant_regime_params(game, start, eps)
        k_pred = max(1, params.k_predicted)
        check_budget(k_pred, budget)
        rows.append({"epsilon": eps, "tau": params.tau, "beta": params.schedule.beta, "v1": v1,
                     "predicted_k": params.k_predicted,
                     "actual_first_k_below": first_k_below(game, start, params.tau,
                                                           params.schedule, eps, k_pred)})
    return rows


def sweep_minimal(game, epsilons, nu, budget=DEFAULT_BUDGET, seed=0):
    """Required and delta-good horizons side by side; runs only when within budget."""
    rows = []
    for eps in epsilons:
        params, t1 = derived_minimal_params(game, eps, nu)
        try:
            k_req = k_required_minimal(params, t1)
        except IterationOverflow:
            k_req = k_required_value(params, t1)
        try:
            k_good = k_good_lower_bound(params.schedule(), params.delta, game.a_max)
        except IterationOverflow:
            k_good = k_good_value(params.schedule(), params.delta, game.a_max)
        over = k_req > budget
        row = {"epsilon": eps, "nu": nu, "r": params.r, "delta": params.delta, "tau": params.tau,
               "c_sep": params.c_sep, "beta": params.beta, "k_required": k_req,
               "k_good": k_good, "over_budget": over, "ran": False, "final_ng": None}
        if not over:
            run = run_minimal(game, params.tau, params.c_sep, params.schedule(), max(1, k_req),
                              seed, record_every=max(1, k_req))
            row.update(ran=True, final_ng=run.records[-1].ng)
        rows.append(row)
    return rows


def write_sweep(out_dir, mode, rows, extra=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    columns = FULL_SWEEP_COLUMNS if mode == "full" else MINIMAL_SWEEP_COLUMNS
    write_csv(out / "sweep.csv", columns, rows)
    data = {"mode": mode, "rows": rows}
    if mode == "minimal":
        data["note"] = ("prescribed constants give iteration counts beyond the step budget; "
                        "rows flagged over_budget were reported, not run")
    data.update(extra or {})
    write_json(out / "sweep.json", data)
