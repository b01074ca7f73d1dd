import math

import pytest
import torch

from ..bounds import (
    finite_time_settling_bound,
    initial_estimator_lyapunov,
    real_error_bounds,
    round_up_odd_ratio,
    theoretical_bounds,
    tune_alpha1,
    z_settling_bound,
)
from ...errors import GainTooSmall, Infeasible
from ...scenario import Gains, OddRatio, SpacingPattern, reference_scenario

BETA = math.sqrt(5) / 2


def _gains(k_e=6.0, alpha1=OddRatio(7, 3), eta=1e-6):
    return Gains(
        k_e=k_e, alpha1=alpha1, k_z=2.0, alpha2=OddRatio(3, 1),
        k_delta=2.0, alpha3=OddRatio(3, 1), eta=eta,
    )


def test_initial_estimator_lyapunov():
    assert initial_estimator_lyapunov(reference_scenario()) == pytest.approx(24.0)


def test_reference_accuracy():
    bounds = theoretical_bounds(BETA, _gains(), 4, 24.0)
    assert bounds.epsilon == pytest.approx(0.0999, abs=1e-4)
    assert bounds.f_value == pytest.approx(bounds.epsilon ** 2)
    assert bounds.t1_bound == pytest.approx(2 * (math.sqrt(24.0) - bounds.epsilon) / 1e-6)


def test_t1_clamped_at_zero():
    bounds = theoretical_bounds(BETA, _gains(), 4, 0.0)
    assert bounds.t1_bound == 0.0


def test_gain_too_small():
    with pytest.raises(GainTooSmall) as info:
        theoretical_bounds(BETA, _gains(k_e=1.0, eta=1.0), 4, 24.0)
    assert info.value.lhs == pytest.approx(4.0)
    assert info.value.rhs == pytest.approx(1.0 + 8 * BETA)


def test_doubling_k_e_scales_epsilon():
    coarse = theoretical_bounds(BETA, _gains(k_e=6.0), 4, 24.0)
    fine = theoretical_bounds(BETA, _gains(k_e=12.0), 4, 24.0)
    assert coarse.epsilon / fine.epsilon == pytest.approx(2 ** (7 / 3), rel=1e-12)


def test_real_error_bounds():
    pattern = reference_scenario().pattern
    epsilon = theoretical_bounds(BETA, _gains(), 4, 24.0).epsilon
    epsilon_rho, epsilon_delta = real_error_bounds(epsilon, pattern)
    assert epsilon_rho == epsilon
    assert epsilon_delta == pytest.approx(2 * math.atan(epsilon / 8) / (2 * math.pi / 5))
    assert epsilon_delta == pytest.approx(0.0199, abs=1e-4)

    values = [real_error_bounds(e, pattern)[1] for e in (0.01, 0.1, 1.0, 10.0)]
    assert all(b > a for a, b in zip(values, values[1:]))

    narrow = SpacingPattern(rho_d=8.0, w_d=0.0, a=(math.pi / 2,) * 4)
    assert real_error_bounds(epsilon, narrow)[1] < epsilon_delta


def test_tune_alpha1_reference():
    alpha1 = tune_alpha1(0.1, 0.5, BETA, 6.0, 4, 1e-6, 24.0)
    assert alpha1 == pytest.approx(2.333, abs=1e-3)
    assert round_up_odd_ratio(alpha1) == (7, 3)


def test_tune_alpha1_trivial_accuracy():
    assert tune_alpha1(1.0, 0.5, BETA, 6.0, 4, 1e-6, 24.0) == pytest.approx(0.0, abs=1e-12)


def test_tune_alpha1_infeasible():
    with pytest.raises(Infeasible):
        tune_alpha1(0.1, 0.5, BETA, 6.0, 4, 1e-6, 1.0)
    with pytest.raises(GainTooSmall):
        tune_alpha1(0.1, 0.5, BETA, 1.0, 4, 1e-6, 24.0)


@pytest.mark.parametrize(
    "value, expected",
    [(2.333, (7, 3)), (3.0, (3, 1)), (1.0, (11, 9)), (4.5, (41, 9))],
)
def test_round_up_odd_ratio(value, expected):
    p, q = round_up_odd_ratio(value)
    assert (p, q) == expected
    assert p % 2 == 1 and q % 2 == 1 and p > q
    assert p / q >= value


def test_finite_time_settling_bound():
    assert finite_time_settling_bound(4.0, 1.0, 0.5) == pytest.approx(4.0)
    assert finite_time_settling_bound(4.0, 1.0, 0.5, gamma=1.0) == pytest.approx(2.0)
    assert finite_time_settling_bound(4.0, 1.0, 0.5, gamma=5.0) == 0.0
    with pytest.raises(ValueError):
        finite_time_settling_bound(4.0, 1.0, 1.0)


def test_z_settling_bound():
    bound = z_settling_bound(torch.tensor([2.0, 0.0, 0.0, 0.0]), _gains())
    assert float(bound) == pytest.approx(1.5 * 4 ** (1 / 3))
    batched = z_settling_bound(torch.tensor([[2.0, 0.0], [0.0, 0.0]]), _gains())
    assert batched.shape == (2,)
    assert float(batched[1]) == 0.0
