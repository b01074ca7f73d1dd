import dataclasses
import math

import pytest
import torch

from ..engine import Simulator, leader_velocity, run
from ..sweep import run_sweep
from ...analysis.metrics import mean_estimate_drift, settling_time
from ...errors import DegenerateRadius, NumericalBlowup
from ...estimators.bounds import initial_estimator_lyapunov, theoretical_bounds
from ...scenario import reference_scenario
from ...tests.test_utils import resting_pair_scenario, shortened_reference_scenario


@pytest.fixture(scope="module")
def reference_log():
    """Reference scenario over 40 s, coarse step."""
    scenario = shortened_reference_scenario(duration=40.0, dt=2e-3, sample_stride=25)
    return scenario, run(scenario)


@pytest.mark.parametrize("integrator", ["euler", "rk4"])
def test_equilibrium_is_preserved(integrator):
    scenario = resting_pair_scenario(duration=0.05, integrator=integrator)
    log = run(scenario)
    initial = scenario.follower_positions()
    for k in range(log.n_samples):
        torch.testing.assert_close(log.follower_positions[k], initial, atol=1e-12, rtol=0)
    torch.testing.assert_close(log.controls, torch.zeros_like(log.controls), atol=1e-12, rtol=0)


def test_one_step_moves_constant_leader():
    simulator = Simulator(scenario=shortened_reference_scenario())
    state = simulator.step(simulator.initial_state())
    assert state.step == 1
    assert state.t == pytest.approx(1e-3)
    torch.testing.assert_close(
        state.leader_positions[0], torch.tensor([0.001, 0.0], dtype=torch.float64), atol=1e-15, rtol=0
    )
    for value in (state.follower_positions, state.estimator.phi):
        assert bool(torch.isfinite(value).all())
    displacement = state.follower_positions - simulator.initial_state().follower_positions
    assert torch.linalg.norm(displacement, dim=-1).max().item() < 0.1


def test_initial_ring_order():
    simulator = Simulator(scenario=shortened_reference_scenario())
    assert simulator.order.successor == (1, 2, 3, 0)


def test_zero_duration_gives_one_sample():
    log = run(shortened_reference_scenario(duration=0.0))
    assert log.n_samples == 1
    assert log.times.tolist() == [0.0]


@pytest.mark.parametrize("stride, expected", [(10, 101), (7, 144), (1000, 2)])
def test_sample_count(stride, expected):
    log = run(shortened_reference_scenario(duration=1.0), sample_stride=stride)
    assert log.n_samples == expected
    assert log.times[-1].item() == pytest.approx(1.0)
    assert bool((log.times[1:] > log.times[:-1]).all())


def test_runs_are_deterministic():
    scenario = shortened_reference_scenario(duration=0.2)
    first, second = run(scenario), run(scenario)
    for key in ("follower_positions", "estimates", "controls"):
        assert torch.equal(getattr(first, key), getattr(second, key))


def test_leader_average_follows_profiles():
    scenario = shortened_reference_scenario(duration=1.0)
    log = run(scenario)
    expected = []
    for t in log.times.tolist():
        points = [
            (x0 + dx, y0 + dy)
            for (x0, y0), (dx, dy) in zip(
                scenario.initial_leader_positions,
                (profile.displacement(t) for profile in scenario.leader_profiles),
            )
        ]
        expected.append([sum(p[0] for p in points) / 2, sum(p[1] for p in points) / 2])
    torch.testing.assert_close(log.lap, torch.tensor(expected, dtype=torch.float64), atol=1e-9, rtol=0)


@pytest.mark.parametrize("estimator", ["continuous", "signum"])
def test_estimate_mean_tracks_leader_average(estimator):
    log = run(shortened_reference_scenario(duration=1.0, estimator=estimator))
    assert mean_estimate_drift(log).max().item() < 1e-6


def test_oracle_feedforward_stays_close_to_finite_difference():
    finite = run(shortened_reference_scenario(duration=1.0))
    oracle = run(shortened_reference_scenario(duration=1.0, feedforward_mode="oracle_velocity"))
    assert bool(torch.isfinite(oracle.controls).all())
    difference = torch.linalg.norm(finite.follower_positions - oracle.follower_positions, dim=-1)
    assert difference.max().item() < 0.05


def test_euler_run_is_finite():
    log = run(shortened_reference_scenario(duration=0.5, integrator="euler"))
    assert bool(torch.isfinite(log.follower_positions).all())


def test_blowup_is_reported():
    positions = ((2e9, 0.0),) + reference_scenario().initial_follower_positions[1:]
    scenario = shortened_reference_scenario(initial_follower_positions=positions)
    with pytest.raises(NumericalBlowup) as info:
        run(scenario)
    assert info.value.time == pytest.approx(1e-3)


def test_follower_on_its_estimate_is_rejected():
    positions = ((0.0, 0.0),) + reference_scenario().initial_follower_positions[1:]
    with pytest.raises(DegenerateRadius):
        Simulator(scenario=shortened_reference_scenario(initial_follower_positions=positions))


def test_run_sweep():
    scenarios = {
        "k_e=6": shortened_reference_scenario(duration=0.1),
        "k_e=12": dataclasses.replace(
            shortened_reference_scenario(duration=0.1),
            gains=dataclasses.replace(reference_scenario().gains, k_e=12.0),
        ),
    }
    logs = run_sweep(scenarios, max_workers=2)
    assert list(logs) == ["k_e=6", "k_e=12"]
    for key, scenario in scenarios.items():
        assert torch.equal(logs[key].follower_positions, run(scenario).follower_positions)
    assert run_sweep({}) == {}


def test_estimator_settles_below_accuracy(reference_log):
    scenario, log = reference_log
    bounds = theoretical_bounds(scenario.beta, scenario.gains, scenario.n, initial_estimator_lyapunov(scenario))
    settled = settling_time(log.times, log.estimator_error, bounds.epsilon)
    assert settled is not None and settled <= 20.0

    entered = settling_time(log.times, log.V1, bounds.f_value)
    assert entered is not None and entered <= min(20.0, bounds.t1_bound)
    after = log.times >= entered
    assert log.estimator_error[after].max().item() <= bounds.epsilon


def test_real_and_estimated_radii_agree(reference_log):
    _, log = reference_log
    # | ||p - lap|| - ||p - r|| | <= ||r - lap||
    assert bool(((log.e_rho - log.z).abs() <= log.estimator_error + 1e-9).all())


def test_weighted_angle_errors_sum_to_zero(reference_log):
    scenario, log = reference_log
    a = scenario.pattern.a_tensor()
    assert (log.delta * a).sum(dim=-1).abs().max().item() < 1e-9
    assert (log.e_delta * a).sum(dim=-1).abs().max().item() < 1e-9


def test_enclosing_errors_decrease(reference_log):
    _, log = reference_log
    assert log.V2[-1].item() < log.V2[0].item()
    assert log.z[-1].abs().max().item() < log.z[0].abs().max().item()
    assert mean_estimate_drift(log).max().item() < 1e-6
    assert bool(torch.isfinite(log.controls).all())


def test_followers_rotate_about_leaders(reference_log):
    _, log = reference_log
    offset = log.follower_positions[-1] - log.lap[-1]
    radius = torch.linalg.norm(offset, dim=-1)
    assert radius.sub(8.0).abs().max().item() < 0.5
    assert math.isfinite(log.gamma.abs().max().item())


def test_leader_velocity():
    constant, sinusoid = reference_scenario().leader_profiles
    torch.testing.assert_close(leader_velocity(constant, 3.0), torch.tensor([1.0, 0.0], dtype=torch.float64))
    torch.testing.assert_close(
        leader_velocity(sinusoid, 0.0), torch.tensor([1.0, 0.5 * math.sqrt(0.5)], dtype=torch.float64)
    )
    peak = (math.pi / 2 - math.pi / 4) / 0.1
    torch.testing.assert_close(leader_velocity(sinusoid, peak), torch.tensor([1.0, 0.5], dtype=torch.float64))


def test_simulator_leader_velocities_follow_profiles():
    simulator = Simulator(scenario=shortened_reference_scenario())
    for t in (0.0, 0.0005, 0.37, 0.37):
        expected = torch.stack([leader_velocity(p, t) for p in simulator.scenario.leader_profiles])
        torch.testing.assert_close(simulator.leader_velocities(t), expected)


def test_constant_leaders_share_one_velocity_tensor():
    scenario = resting_pair_scenario()
    simulator = Simulator(scenario=scenario)
    assert simulator.leader_velocities(0.0) is simulator.leader_velocities(1.0)
    torch.testing.assert_close(simulator.leader_velocities(1.0), torch.zeros(1, 2, dtype=torch.float64))
