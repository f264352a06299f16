import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sbrgames.equilibrium import exact_nash
from sbrgames.game import JointStrategy, matching_pennies, nash_gap, random_game, rock_paper_scissors, uniform_joint
from sbrgames.lyapunov import (Certificate, directional_derivative_fd, drift_certificate_full,
                               grad_v, hessian_block, hessian_block_fd, hessian_bound,
                               hessian_norm_estimate, lower_bound_certificate, lyap_lower_bound_check,
                               lyap_v, lyap_v_alt, lyap_v_harris, lyap_v_kl, lyap_w,
                               lyapunov_report, power_iteration, smoothness_constant)
from sbrgames.smoothing import softmax

from conftest import random_tuple

MP = matching_pennies()
UNIFORM = uniform_joint(MP)
CORNER = JointStrategy(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
LSE = math.log(math.e + math.exp(-1))          # log(e + 1/e)


def test_v_examples():
    assert lyap_v(MP, UNIFORM, 0.5) == pytest.approx(math.log(2), abs=1e-12)
    assert lyap_v(MP, CORNER, 1.0) == pytest.approx(2 * LSE, abs=1e-12)
    assert 2 * LSE == pytest.approx(2.2538560, abs=1e-7)


def test_v_tends_to_harris_at_equilibrium():
    game = random_game(4, 3, 21)
    ne = exact_nash(game).joint
    assert lyap_v_harris(game, ne) == pytest.approx(0, abs=1e-12)
    assert abs(lyap_v(game, ne, 1e-6)) <= 1e-5 * math.log(game.a_max)


def test_harris_examples():
    assert lyap_v_harris(MP, UNIFORM) == 0
    assert lyap_v_harris(MP, CORNER) == 2
    assert lyap_v_harris(rock_paper_scissors(), uniform_joint(rock_paper_scissors())) == 0


def test_v_alt_and_kl_examples():
    assert lyap_v_alt(MP, UNIFORM, 1.0) == pytest.approx(0, abs=1e-15)
    assert lyap_v_alt(MP, CORNER, 1.0) == pytest.approx(2 * LSE, abs=1e-12)
    assert lyap_v_kl(MP, UNIFORM, 0.3) == pytest.approx(0, abs=1e-15)
    s = 1 / (1 + math.exp(-2))
    hand = math.log(1 / s) + math.log(1 / (1 - s))
    assert lyap_v_kl(MP, CORNER, 1.0) == pytest.approx(hand, abs=1e-12)
    assert hand == pytest.approx(2.2538560, abs=1e-7)


def test_w_examples():
    assert lyap_w(MP, UNIFORM, [0.1, 0], [0, 0]) == pytest.approx(0.01)
    assert lyap_w(MP, CORNER, [1, -1], [-1, 1]) == 0
    with pytest.raises(ValueError):
        lyap_w(MP, UNIFORM, [0, 0, 0], [0, 0])


def test_report_fields():
    rep = lyapunov_report(MP, CORNER, 1.0, [0.1, 0], [0, 0])
    assert rep.t == rep.v + rep.w
    assert rep.v >= rep.v_h >= 0
    assert rep.ng == 2


def test_grad_examples():
    np.testing.assert_allclose(grad_v(MP, UNIFORM, 1.0, 1), [0, 0], atol=1e-15)
    s = 1 / (1 + math.exp(-2))
    expected = MP.r2.T @ np.array([1 - s, s])
    np.testing.assert_allclose(grad_v(MP, CORNER, 1.0, 1), expected, atol=1e-15)
    np.testing.assert_allclose(expected, [0.7616, -0.7616], atol=1e-4)


def test_drift_certificate_examples():
    cert = drift_certificate_full(MP, UNIFORM, 1.0)
    assert cert.lhs == pytest.approx(0, abs=1e-15)
    assert cert.rhs == pytest.approx(0, abs=1e-15)
    assert cert.satisfied
    assert drift_certificate_full(MP, CORNER, 1.0).satisfied


def test_certificate_unpacks():
    lhs, rhs, ok = Certificate(1.0, 1.0 - 5e-11)
    assert ok and lhs == 1.0
    assert not Certificate(1.0, 1.0 - 1e-9).satisfied


def test_hessian_examples():
    assert hessian_norm_estimate(MP, UNIFORM, 1.0) <= 4
    game = random_game(5, 4, 3)
    joint = uniform_joint(game)
    assert hessian_norm_estimate(game, joint, 0.1) <= game.a_max ** 2 * 10


def test_hessian_closed_form_matches_differencing(rng):
    for _ in range(20):
        game, joint, tau = random_tuple(rng, 4, 4)
        tau = max(tau, 0.1)
        for player in (1, 2):
            np.testing.assert_allclose(hessian_block(game, joint, tau, player),
                                       hessian_block_fd(game, joint, tau, player), atol=1e-5)


def test_power_iteration_matches_eigvalsh(rng):
    for _ in range(20):
        m = rng.normal(size=(5, 5))
        psd = m @ m.T
        top = np.linalg.eigvalsh(psd)[-1]
        assert power_iteration(psd, iters=2000, tol=1e-14) == pytest.approx(top, rel=1e-6)


def test_lower_bound_examples():
    assert lyap_lower_bound_check(MP, UNIFORM, 1.0)
    assert lower_bound_certificate(MP, UNIFORM, 1.0).lhs == 0
    assert lyap_lower_bound_check(MP, CORNER, 1.0)


def test_gradient_lipschitz_pairs(rng):
    for _ in range(200):
        game, joint, tau = random_tuple(rng)
        _, other, _ = random_tuple(np.random.default_rng(int(rng.integers(2 ** 31))), game.n1, game.n2)
        if other.p1.size != game.n1 or other.p2.size != game.n2:
            continue
        gap = np.concatenate([grad_v(game, joint, tau, i) - grad_v(game, other, tau, i) for i in (1, 2)])
        dist = np.linalg.norm(joint.flat() - other.flat())
        assert np.linalg.norm(gap) <= smoothness_constant(game, tau) * dist + 1e-10


@given(st.integers(0, 2 ** 31))
def test_lyapunov_invariants(seed):
    rng = np.random.default_rng(seed)
    game, joint, tau = random_tuple(rng, interior=False)
    v = lyap_v(game, joint, tau)
    vh = lyap_v_harris(game, joint)
    assert nash_gap(game, joint) <= v + 1e-12
    assert vh <= v + 1e-12
    assert v - vh <= 2 * tau * math.log(game.a_max) + 1e-12
    assert lyap_v_kl(game, joint, tau) >= -1e-15
    assert drift_certificate_full(game, joint, tau).satisfied
    assert lower_bound_certificate(game, joint, tau).satisfied
    assert hessian_norm_estimate(game, joint, tau) <= hessian_bound(game, tau) + 1e-8


@given(st.integers(0, 2 ** 31))
def test_prop1_equivalence(seed):
    rng = np.random.default_rng(seed)
    game, joint, tau = random_tuple(rng, interior=False)
    alt = lyap_v_alt(game, joint, tau)
    assert abs(alt - tau * lyap_v_kl(game, joint, tau)) <= 1e-9 * max(1, abs(alt))


def test_kl_independent_path(rng):
    # Plain-sum KL against the stabilized evaluation.
    for _ in range(200):
        game, joint, tau = random_tuple(rng)
        plain = 0.0
        for i in (1, 2):
            p = joint.strategy(i)
            s = softmax(game.payoff_matrix(i) @ joint.opponent(i), tau)
            mask = p > 0
            plain += float(np.sum(p[mask] * np.log(p[mask] / s[mask])))
        assert lyap_v_kl(game, joint, tau) == pytest.approx(plain, rel=1e-9, abs=1e-12)


def test_directional_derivative(rng):
    for _ in range(50):
        game, joint, tau = random_tuple(rng)
        d1 = rng.dirichlet(np.ones(game.n1)) - joint.p1
        d2 = rng.dirichlet(np.ones(game.n2)) - joint.p2
        exact = grad_v(game, joint, tau, 1) @ d1 + grad_v(game, joint, tau, 2) @ d2
        fd = directional_derivative_fd(game, joint, tau, d1, d2)
        assert abs(exact - fd) <= 1e-5 * max(1, abs(fd))
