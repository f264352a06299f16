import math

import pytest
from hypothesis import given, strategies as st

from sbrgames.schedules import (BETA_CAP, IterationOverflow, MinimalInfoParams, ScheduleError,
                                StepsizeSchedule, boundary_delta, envelope_k_good, full_info_bound,
                                full_info_params, k_good_lower_bound, k_required_minimal,
                                min_offset, minimal_info_params, timescale_params, xi_min)


def test_beta_at_examples():
    assert StepsizeSchedule.constant(0.1).beta_at(57) == 0.1
    assert StepsizeSchedule.inverse_linear(1.5).beta_at(3) == 0.5
    sched = StepsizeSchedule.inverse_polynomial(0.5, 0.5, 4)
    assert sched.beta_at(5) == pytest.approx(0.5 / 3)


def test_inverse_linear_first_step_capped():
    sched = StepsizeSchedule.inverse_linear(2.0)
    assert sched.beta_at(1) == BETA_CAP < 1
    assert sched.beta_at(2) == 1.0 or sched.beta_at(2) == BETA_CAP


@pytest.mark.parametrize("kwargs", [
    dict(kind="constant", beta=1.5),
    dict(kind="constant", beta=0.0),
    dict(kind="inverse_linear", beta=1.0),
    dict(kind="inverse_linear", beta=2.5),
    dict(kind="inverse_polynomial", beta=0.5, eta=1.0, k0=10),
    dict(kind="inverse_polynomial", beta=0.5, eta=0.5, k0=3),
    dict(kind="geometric", beta=0.5),
])
def test_invalid_schedules(kwargs):
    with pytest.raises(ScheduleError):
        StepsizeSchedule(**kwargs)


def test_non_strict_offset():
    sched = StepsizeSchedule.inverse_polynomial(0.2, 0.6, 10, strict=False)
    assert sched.beta_at(1) == pytest.approx(0.2 / 11 ** 0.6)
    assert StepsizeSchedule.from_dict(sched.to_dict()) == sched


def test_schedule_dict_roundtrip():
    for sched in (StepsizeSchedule.constant(0.3), StepsizeSchedule.inverse_linear(1.2),
                  StepsizeSchedule.inverse_polynomial(0.4, 0.3)):
        assert StepsizeSchedule.from_dict(sched.to_dict()) == sched
    with pytest.raises(ScheduleError):
        StepsizeSchedule.from_dict({"kind": "constant", "beta": 0.1, "betta": 1})


def test_default_offset_is_minimal():
    sched = StepsizeSchedule.inverse_polynomial(0.3, 0.4)
    assert sched.k0 == math.ceil((2 * 0.4 / 0.3) ** (1 / 0.6))
    assert sched.k0 >= min_offset(0.3, 0.4)


@given(st.floats(0.01, 0.99), st.floats(0.05, 0.95), st.integers(1, 10 ** 6))
def test_polynomial_schedule_monotone(beta, eta, k):
    sched = StepsizeSchedule.inverse_polynomial(beta, eta)
    assert sched.k0 >= (2 * eta / beta) ** (1 / (1 - eta))
    assert 0 < sched.beta_at(k + 1) <= sched.beta_at(k) <= 1


@given(st.floats(1.0001, 2.0), st.integers(1, 10 ** 6))
def test_inverse_linear_monotone(beta, k):
    sched = StepsizeSchedule.inverse_linear(beta)
    assert sched.beta_at(k + 1) <= sched.beta_at(k) < 1


def test_full_info_params_examples():
    params = full_info_params(0.5, 2, v1=2.0)
    assert params.schedule.beta == pytest.approx(0.25 / 128)
    assert params.tau == pytest.approx(0.0625)
    assert params.k_predicted == math.ceil(512 * math.log(4)) == 710
    assert full_info_params(0.5, 2, v1=0.4).k_predicted == 0
    with pytest.raises(ScheduleError):
        full_info_params(1.5, 2, v1=1)


def test_full_info_params_scaling():
    a = full_info_params(0.5, 2, v1=2.0).k_predicted
    b = full_info_params(0.25, 2, v1=2.0).k_predicted
    assert 4 <= b / a <= 6.5   # eps^-2 times a growing log factor


def test_full_info_bound_constant():
    sched = StepsizeSchedule.constant(0.1)
    got = full_info_bound(sched, 500, 2.0, 0.1, 2)
    assert got == pytest.approx(0.9 ** 500 * 2 + 2 * 4 * 0.1 / 0.1 + 2 * 0.1 * math.log(2))


def test_minimal_params_fixed_r_examples():
    tau, c_sep, _ = timescale_params(0.6, 0.25, 0.01, 2)
    assert tau == pytest.approx(0.5 * 0.6 / (12 * math.log(2)))
    assert tau == pytest.approx(0.0360674, abs=1e-7)
    assert c_sep == pytest.approx(0.25 * tau ** 3 / 24)
    assert c_sep == pytest.approx(4.888e-7, rel=1e-3)
    params = minimal_info_params(0.6, 1.0, 2, 1.0, r=0.25)
    assert params.tau == pytest.approx(tau)
    assert params.beta == pytest.approx((0.5) * c_sep ** 2 * params.delta * 0.6 / (30 * 4))


def test_minimal_params_search():
    for kind, eta in (("constant", None), ("inverse_polynomial", 0.5)):
        params = minimal_info_params(0.2, 0.5, 3, 2.0, kind=kind, eta=eta)
        assert 0 < params.r < 0.5
        assert params.beta / params.c_sep <= 1
        assert params.schedule().beta_at(1) / params.c_sep <= 1
        assert params.delta == pytest.approx(boundary_delta(0.2, 0.5, 3, 2.0, kind))
        assert MinimalInfoParams.from_dict(params.to_dict()) == params


def test_minimal_params_constant_feasibility_boundary():
    params = minimal_info_params(0.2, 0.5, 2, 2.0)
    b, r = params.beta, params.r
    ratio = math.log1p(-b) / math.log1p(-b * (1 - 2 * r))
    assert ratio <= 1.5 / math.sqrt(1.5) + 1e-12


def test_boundary_delta_capped():
    assert boundary_delta(0.5, 0.5, 2, 0.01) == 0.5


def test_minimal_params_errors():
    with pytest.raises(ScheduleError):
        minimal_info_params(0.2, 0.0, 2, 1.0)
    with pytest.raises(ScheduleError):
        minimal_info_params(0.2, 0.5, 2, 1.0, r=0.6)
    with pytest.raises(ScheduleError):
        minimal_info_params(0.2, 0.5, 2, 1.0, kind="inverse_polynomial", eta=1.0)
    with pytest.raises(ScheduleError):
        minimal_info_params(0.2, 0.5, 1, 1.0)


def _params(eps, r, beta, kind="constant", eta=None, k0=None):
    return MinimalInfoParams(eps, 0.5, r, 0.01, 0.1, 0.1, beta, 1.0, kind, eta, k0)


def test_k_required_examples():
    eps = 0.3
    params = _params(eps, 0.25, 0.002)                 # beta (1 - 2r) = 0.001
    assert k_required_minimal(params, 1.0) == 2302     # eps / (3 T1) = 0.1
    assert k_required_minimal(params, eps / 3) == 0


def test_k_required_polynomial_by_hand():
    eta, b, r, k0, eps, t1 = 0.5, 0.01, 0.25, 400, 0.3, 1.0
    params = _params(eps, r, b, "inverse_polynomial", eta, k0)
    inner = 0.5 / (0.5 * 0.01) * math.log(10) + math.sqrt(401)
    assert k_required_minimal(params, t1) == math.ceil(inner ** 2 - 401)


def test_k_good_examples():
    assert k_good_lower_bound(StepsizeSchedule.constant(0.3), 0.5, 2) == 0
    assert k_good_lower_bound(StepsizeSchedule.constant(0.01), 0.05, 2) == 229
    with pytest.raises(ScheduleError):
        k_good_lower_bound(StepsizeSchedule.constant(0.01), 0.6, 2)


@pytest.mark.parametrize("beta, delta, a_max", [
    (0.01, 0.05, 2), (0.001, 0.01, 3), (0.2, 0.001, 5), (0.05, 0.2, 4), (0.5, 1e-6, 2),
])
def test_k_good_matches_envelope(beta, delta, a_max):
    sched = StepsizeSchedule.constant(beta)
    assert k_good_lower_bound(sched, delta, a_max) == envelope_k_good(sched, delta, a_max)


def test_k_good_polynomial_by_hand():
    sched = StepsizeSchedule.inverse_polynomial(0.05, 0.5)
    xi = xi_min(sched.beta_at(1))
    rhs = 0.5 / (xi * 0.05) * math.log(math.e / 0.03) + math.sqrt(1 + sched.k0)
    bound = k_good_lower_bound(sched, 0.01, 3)
    assert bound == math.floor(rhs ** 2 - sched.k0)
    # largest K with (K + k0)^(1 - eta) under the right-hand side
    assert math.sqrt(bound + sched.k0) <= rhs < math.sqrt(bound + 1 + sched.k0)


def test_xi_min():
    b = 0.2
    xi = xi_min(b)
    assert xi > 1
    assert math.log(1 - b) == pytest.approx(-xi * b, abs=1e-12)


def test_overflow_reported():
    params = _params(0.1, 0.25, 1e-30)
    with pytest.raises(IterationOverflow):
        k_required_minimal(params, 10.0)
