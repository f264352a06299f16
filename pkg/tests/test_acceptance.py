"""Acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities and wall time, then asserts.
"""

import json
import math
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from sbrgames.cli import main
from sbrgames.config import load_config, resolve_game
from sbrgames.equilibrium import closed_form_2x2, exact_nash, regularized_nash
from sbrgames.experiment import constant_regime_params, corner_joint, run_replicas
from sbrgames.full_info import first_k_below, run_full
from sbrgames.game import JointStrategy, ZeroSumGame, matching_pennies, nash_gap, random_game
from sbrgames.lyapunov import lyap_v
from sbrgames.minimal_info import run_minimal
from sbrgames.schedules import (StepsizeSchedule, envelope_k_good, full_info_bound,
                                k_good_lower_bound)
from sbrgames.suites import run_suite

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(number, ok, detail):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\ncriterion {number}: {status}  {detail}  [{time.perf_counter() - start:.1f} s]")
        return ok
    return emit


def _suite_detail(res):
    return f"{res.passed}/{res.trials} worst slack {res.worst_slack:.3e} ({res.worst_check})"


def test_criterion_01_dual_path_equivalence(report):
    res = run_suite("prop1", 1000, seed=1)
    assert report(1, res.ok, _suite_detail(res)), res.failures[:1]


def test_criterion_02_gradient_finite_differences(report):
    res = run_suite("gradient", 200, seed=2)
    assert report(2, res.ok, _suite_detail(res)), res.failures[:1]


def test_criterion_03_drift_and_hessian(report):
    res = run_suite("lyapunov", 1000, seed=3)
    assert report(3, res.ok, _suite_detail(res)), res.failures[:1]


def _worst_corner(game, tau):
    corners = [JointStrategy(np.eye(game.n1)[i], np.eye(game.n2)[j])
               for i in range(game.n1) for j in range(game.n2)]
    return max(corners, key=lambda joint: lyap_v(game, joint, tau))


def _trajectory_margin(game, sched, tau, K):
    init = _worst_corner(game, tau)
    res = run_full(game, init, tau, sched, K, check_drift=False)
    bound = full_info_bound(sched, K, res.v_history[0], tau, game.a_max)
    final_ng = nash_gap(game, res.final.joint)
    return bound - final_ng, res.min_drift_slack


def test_criterion_04_trajectory_bounds(report):
    rng = np.random.default_rng(4)
    margins, drifts = {}, {}
    plans = [("constant", 100, lambda: StepsizeSchedule.constant(0.1)),
             ("inverse_linear", 20, lambda: StepsizeSchedule.inverse_linear(float(rng.uniform(1.05, 2.0)))),
             ("inverse_polynomial", 20,
              lambda: StepsizeSchedule.inverse_polynomial(float(rng.uniform(0.1, 0.9)),
                                                          float(rng.uniform(0.2, 0.8))))]
    for kind, count, make in plans:
        margins[kind], drifts[kind] = [], []
        for _ in range(count):
            n1, n2 = (int(x) for x in rng.integers(2, 6, size=2))
            game = random_game(n1, n2, int(rng.integers(2 ** 31)))
            margin, drift = _trajectory_margin(game, make(), 0.1, 500)
            margins[kind].append(margin)
            drifts[kind].append(drift)
    worst_margin = min(min(v) for v in margins.values())
    worst_drift = min(min(v) for v in drifts.values())
    ok = worst_margin >= -1e-10 and worst_drift >= -1e-10
    detail = (f"games {sum(len(v) for v in margins.values())}, worst bound slack {worst_margin:.3e}, "
              f"worst per-step drift slack {worst_drift:.3e}")
    assert report(4, ok, detail)


def test_criterion_05_derived_parameters_end_to_end(report):
    game = matching_pennies()
    init = corner_joint(game)
    params, v1 = constant_regime_params(game, init, 0.5)
    hit = first_k_below(game, init, params.tau, params.schedule, 0.5, params.k_predicted)
    ok = (hit is not None and hit <= params.k_predicted
          and abs(params.schedule.beta - 0.25 / 128) < 1e-15 and abs(params.tau - 0.0625) < 1e-12)
    detail = (f"beta {params.schedule.beta:.7f} tau {params.tau:.4f} V1 {v1:.4f} "
              f"predicted K {params.k_predicted} first k with NG<=0.5: {hit}")
    assert report(5, ok, detail)


def test_criterion_06_coupled_drift_enumeration(report):
    res = run_suite("drift_minimal", 200, seed=6)
    assert report(6, res.ok and res.worst_slack >= -1e-10, _suite_detail(res)), res.failures[:1]


def test_criterion_07_td_unbiased(report):
    res = run_suite("td", 500, seed=7)
    assert report(7, res.ok, _suite_detail(res)), res.failures[:1]


def test_criterion_08_boundary_envelope(report):
    runs = [
        (matching_pennies(), StepsizeSchedule.constant(0.05), 0.5),
        (resolve_game("rock_paper_scissors"), StepsizeSchedule.inverse_polynomial(0.2, 0.6, 10, strict=False), 0.1),
        (random_game(3, 4, 8), StepsizeSchedule.inverse_linear(1.3), 1.0),
        (random_game(5, 5, 9), StepsizeSchedule.constant(0.01), 0.05),
    ]
    violations = 0
    records = 0
    for idx, (game, sched, c_sep) in enumerate(runs):
        res = run_minimal(game, 0.1, c_sep, sched, 5000, seed=80 + idx, record_every=50)
        violations += res.envelope_violations
        env = 1.0 / game.a_max
        k = 1
        for rec in res.records:
            while k < rec.k:
                env *= 1 - sched.beta_at(k)
                k += 1
            records += 1
            violations += int(min(rec.min_mass_p1, rec.min_mass_p2) < env)
    mismatches = 0
    cases = 0
    for beta in (0.5, 0.2, 0.05, 0.01, 0.001):
        for a_max in (2, 3, 5):
            for delta in (1 / a_max, 0.1 / a_max, 1e-3, 1e-6):
                sched = StepsizeSchedule.constant(beta)
                cases += 1
                mismatches += int(k_good_lower_bound(sched, delta, a_max)
                                  != envelope_k_good(sched, delta, a_max))
    ok = violations == 0 and mismatches == 0
    detail = (f"{records} recorded states, envelope violations {violations}; "
              f"k_good vs envelope mismatches {mismatches}/{cases}")
    assert report(8, ok, detail)


def _ng_at(run, k):
    return next(r.ng for r in run.records if r.k == k)


def test_criterion_09_minimal_convergence(report):
    crit = json.loads((CONFIGS / "acceptance.json").read_text())["minimal_convergence"]
    lines, ok = [], True
    for name in crit["configs"]:
        cfg = load_config(CONFIGS / name)
        game = resolve_game(cfg.game)
        runs = run_replicas(game, cfg.tau, cfg.c_sep, cfg.schedule, cfg.K, cfg.seed, cfg.replicas,
                            cfg.record_every, 0.0, jobs=4)
        early = statistics.median(_ng_at(run, crit["reference_k"]) for run in runs)
        finals = [run.records[-1].ng for run in runs]
        late = statistics.median(finals)
        upper = statistics.mean(finals) + 2 * statistics.stdev(finals) / math.sqrt(len(finals))
        good = late < early
        if cfg.game == crit["band_game"]:
            good = good and upper < crit["band_threshold"]
        ok = ok and good
        lines.append(f"{cfg.game}: median NG k={crit['reference_k']} {early:.4f}, "
                     f"k={runs[0].records[-1].k} {late:.4f}, mean+2SE {upper:.4f}")
    detail = "; ".join(lines) + f"; band threshold {crit['band_threshold']}"
    assert report(9, ok, detail)


def test_criterion_10_equilibrium_oracle(report):
    small = ZeroSumGame.from_r1([[1, -1], [-0.5, 0.5]])
    eq = exact_nash(small)
    cf = closed_form_2x2(small)
    err_2x2 = max(np.abs(eq.joint.p1 - [1 / 3, 2 / 3]).max(), np.abs(eq.joint.p2 - 0.5).max(),
                  abs(eq.value), np.abs(eq.joint.flat() - cf.joint.flat()).max())
    rng = np.random.default_rng(10)
    worst_pair = 0.0
    for g in range(20):
        game = random_game(int(rng.integers(2, 6)), int(rng.integers(2, 6)), 1000 + g)
        tau = float(rng.uniform(0.05, 1.0))
        points = []
        for _ in range(5):
            start = JointStrategy(rng.dirichlet(np.ones(game.n1)), rng.dirichlet(np.ones(game.n2)))
            points.append(regularized_nash(game, tau, tol=1e-11, init=start).joint.flat())
        for a in points:
            for b in points:
                worst_pair = max(worst_pair, float(np.abs(a - b).max()))
    worst_ratio = 0.0
    for g in range(50):
        game = random_game(int(rng.integers(2, 6)), int(rng.integers(2, 6)), 2000 + g)
        for eps in (0.1, 0.5):
            tau = eps / (2 * math.log(game.a_max))
            gap = nash_gap(game, regularized_nash(game, tau).joint)
            worst_ratio = max(worst_ratio, gap / eps)
    ok = err_2x2 <= 1e-9 and worst_pair <= 1e-9 and worst_ratio <= 1
    detail = (f"2x2 error {err_2x2:.2e}, max pairwise distance {worst_pair:.2e}, "
              f"max NG/eps {worst_ratio:.3f}")
    assert report(10, ok, detail)


def _tree(path):
    return {p.name: p.read_bytes() for p in sorted(Path(path).iterdir())}


def test_criterion_11_reproducibility(report, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "game": "rock_paper_scissors", "mode": "minimal", "tau": 0.1, "c_sep": 0.1,
        "schedule": {"kind": "inverse_polynomial", "beta": 0.2, "eta": 0.6, "k0": 10, "strict": False},
        "K": 2000, "replicas": 3, "seed": 7, "record_every": 100}))
    full = tmp_path / "full.json"
    full.write_text((CONFIGS / "full_mp_derived.json").read_text())
    same = []
    for args, name in ((["run", "--config", str(cfg)], "run minimal"),
                       (["run", "--config", str(full)], "run full"),
                       (["verify", "--suite", "all", "--trials", "20", "--seed", "3"], "verify")):
        trees = []
        for attempt, jobs in enumerate(("1", "2")):
            out = tmp_path / f"{name.replace(' ', '_')}_{attempt}"
            main(args + ["--output", str(out), "--jobs", jobs])
            trees.append(_tree(out))
        same.append((name, trees[0] == trees[1] and len(trees[0]) > 0))
    capsys.readouterr()
    ok = all(flag for _, flag in same)
    detail = ", ".join(f"{name}: {'identical' if flag else 'DIFFERENT'}" for name, flag in same)
    assert report(11, ok, detail)
