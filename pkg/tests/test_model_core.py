import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shockfit.model_core import (
    DomainError, DoubleShockParams, LogPeriodicParams, Mode, ShockFitParams, Side, TwoModeParams,
    eval_double_shock, eval_log_periodic, eval_single_shock, eval_two_mode, evaluate,
    log_periodic_time_map, params_from_dict,
)

IBOV = ShockFitParams(0.9355, 6.2195, 0.6788, 0.1948, 0.2308, 2.8555, 1.2748)
DOW_TABLE = ShockFitParams(0.97, 0.59, 0.70, 0.16, 0.18, 1.31, 3.04)
DOW08_DOUBLE = DoubleShockParams(
    ShockFitParams(0.49, 0.70, 0.02, -0.10, 0.03, 1.12, 3.01), D=0.32, zeta=1.15, Eamp=0.03, eta=3.95, t0=13.55
)
DOW08_TWO = TwoModeParams(-7.82, 9.02, 0.00, (Mode(0.06, 0.02, 0.36, 4.32), Mode(0.02, 0.00, 1.52, 9.08)))

finite = st.floats(-5, 5, allow_nan=False)
rate = st.floats(0.0, 2.0, allow_nan=False)
freq = st.floats(0.01, 4.0, allow_nan=False)
times = st.lists(st.floats(0, 60, allow_nan=False), min_size=1, max_size=20)


@st.composite
def shock_params(draw):
    return ShockFitParams(draw(finite), draw(finite), draw(rate), draw(finite), draw(rate), draw(freq), draw(finite))


# ---------------------------------------------------------------- examples


def test_constant_case():
    p = ShockFitParams(1, 0, 0.3, 0, 0.2, 1.0, 0.5)
    assert np.all(eval_single_shock(p, np.linspace(0, 50, 11)) == 1.0)


def test_ibovespa_asymptote():
    assert eval_single_shock(IBOV, 200.0) == pytest.approx(0.9355, abs=1e-12)


def test_dow_table_value_at_day_one():
    # frozen from an independent evaluation of the formula
    assert float(eval_single_shock(DOW_TABLE, 1.0)) == pytest.approx(1.2417986000059666, rel=1e-12)


def test_double_shock_without_second_shock():
    base = IBOV
    p = DoubleShockParams(base, 0.0, 1.0, 0.0, 0.3, 5.0)
    t = np.linspace(0, 30, 61)
    assert np.array_equal(eval_double_shock(p, t), eval_single_shock(base, t))


def test_double_shock_inactive_before_onset():
    assert eval_double_shock(DOW08_DOUBLE, 10.0) == eval_single_shock(DOW08_DOUBLE.base, 10.0)


def test_double_shock_value_after_onset():
    # frozen from an independent evaluation
    assert float(eval_double_shock(DOW08_DOUBLE, 20.0)) == pytest.approx(0.8878510230621561, rel=1e-12)


def test_double_shock_onset_included():
    p = DOW08_DOUBLE
    jump = p.D + p.Eamp * math.cos(-p.eta)
    right = float(eval_double_shock(p, p.t0))
    left = float(eval_double_shock(p, p.t0 - 1e-9))
    assert right - left == pytest.approx(jump, abs=1e-8)


def test_double_shock_no_overflow_far_before_onset():
    p = DoubleShockParams(IBOV, 1.0, 5.0, 0.0, 0.0, 500.0)
    with np.errstate(over="raise"):
        assert np.isfinite(eval_double_shock(p, np.array([0.0, 1.0]))).all()


def test_two_mode_degenerate_second_mode():
    p = TwoModeParams(1.0, 0.5, 0.3, (Mode(0.1, 0.2, 1.1, 0.4), Mode(0.0, 0.5, 2.0, 1.0)))
    t = np.linspace(0, 20, 41)
    single = ShockFitParams(1.0, 0.5, 0.3, 0.1, 0.2, 1.1, 0.4)
    np.testing.assert_allclose(eval_two_mode(p, t), eval_single_shock(single, t), rtol=0, atol=1e-15)


def test_two_mode_both_modes_off():
    p = TwoModeParams(1.0, 0.5, 0.3, (Mode(0, 0.2, 1.1, 0.4), Mode(0, 0.5, 2.0, 1.0)))
    t = np.linspace(0, 20, 41)
    np.testing.assert_allclose(eval_two_mode(p, t), 1.0 + 0.5 * np.exp(-0.3 * t), atol=1e-15)


def test_two_mode_value_at_day_one():
    # frozen from an independent evaluation
    assert float(eval_two_mode(DOW08_TWO, 1.0)) == pytest.approx(1.165604133824946, rel=1e-12)


def test_two_mode_needs_two_modes():
    with pytest.raises(ValueError):
        TwoModeParams(1, 0, 0, (Mode(0, 0, 1, 0),))


def test_log_periodic_time_map():
    assert log_periodic_time_map(10, 9) == 0.0
    assert log_periodic_time_map(10, 10 - math.e) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        log_periodic_time_map(10, 10)


def test_log_periodic_flat_when_no_power_terms():
    p = LogPeriodicParams(A=1.3, B=0, C=0, beta=0.5, w=6, phi=0.2, tc=10, side=Side.PRE_CRASH)
    assert np.all(eval_log_periodic(p, np.array([1.0, 5.0, 9.5])) == 1.3)


def test_log_periodic_post_crash_unit_distance():
    p = LogPeriodicParams(A=1, B=0.5, C=0.1, beta=0.5, w=6, phi=0, tc=10, side=Side.POST_CRASH)
    assert float(eval_log_periodic(p, 11.0)) == pytest.approx(1.6, abs=1e-15)


def test_log_periodic_approaches_level_near_tc():
    p = LogPeriodicParams(A=2.0, B=0.5, C=0.1, beta=0.5, w=6, phi=0.3, tc=10, side=Side.PRE_CRASH)
    assert abs(float(eval_log_periodic(p, 10 - 1e-10)) - 2.0) < 1e-4


def test_log_periodic_wrong_side_is_domain_error():
    p = LogPeriodicParams(A=2.0, B=0.5, C=0.1, beta=0.5, w=6, phi=0.3, tc=10, side=Side.PRE_CRASH)
    with pytest.raises(DomainError):
        eval_log_periodic(p, np.array([9.0, 10.5]))


def test_params_dict_round_trip():
    for p in (IBOV, DOW08_DOUBLE, DOW08_TWO):
        q = params_from_dict(p.to_dict())
        t = np.linspace(0, 30, 31)
        np.testing.assert_array_equal(evaluate(p, t), evaluate(q, t))


# ---------------------------------------------------------------- properties


@given(shock_params(), times)
def test_phase_periodicity(p, ts):
    t = np.array(ts)
    a = eval_single_shock(p, t)
    b = eval_single_shock(p.with_(phi=p.phi + 2 * math.pi), t)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9 * (abs(p.C) + 1))


@given(shock_params(), times)
def test_sign_phase_symmetry(p, ts):
    t = np.array(ts)
    a = eval_single_shock(p, t)
    b = eval_single_shock(p.with_(C=-p.C, phi=p.phi + math.pi), t)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9 * (abs(p.C) + 1))


@given(shock_params(), times)
def test_asymptote_envelope(p, ts):
    p = p.with_(alpha=abs(p.alpha) + 1e-3, beta=abs(p.beta) + 1e-3)
    t = np.array(ts)
    dev = np.abs(eval_single_shock(p, t) - p.A)
    bound = abs(p.B) * np.exp(-p.alpha * t) + abs(p.C) * np.exp(-p.beta * t)
    assert np.all(dev <= bound + 1e-12)


@given(st.tuples(finite, finite, rate), st.tuples(finite, rate, freq, finite), st.tuples(finite, rate, freq, finite), times)
def test_two_mode_swap(head, m1, m2, ts):
    t = np.array(ts)
    a = eval_two_mode(TwoModeParams(*head, (Mode(*m1), Mode(*m2))), t)
    b = eval_two_mode(TwoModeParams(*head, (Mode(*m2), Mode(*m1))), t)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
