"""
run_log.py holds the sampled history of a closed-loop run.

The engine records the raw state at every logged sample (leaders,
followers, estimates, controls); every derived quantity, estimated and
real enclosing errors, estimator errors, angle gaps and Lyapunov values,
is computed here in one batched pass.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Tuple, Union

import torch

from ..control.enclosing import _errors, delta_lyapunov, relative_state, wrap_angle
from ..estimators.estimator import estimator_lyapunov
from ..scenario.scenario import Scenario

SERIES = (
    "times",
    "leader_positions",
    "follower_positions",
    "estimates",
    "controls",
    "z",
    "delta",
    "lap",
    "e_rho",
    "e_delta",
    "estimator_error",
    "gamma",
    "V1",
    "V2",
)


@dataclass(frozen=True)
class RunLog:
    """Sampled closed-loop history, S samples, n followers and m leaders

    Attributes
    ----------
    times : (S,) sample times (s), strictly increasing
    leader_positions : (S, m, 2)
    follower_positions : (S, n, 2)
    estimates : (S, n, 2)
        LAP estimates r_i
    controls : (S, n, 2)
        control inputs u_i evaluated at the sample state
    z, delta : (S, n)
        estimated radial and included-angle errors
    lap : (S, 2)
        true leaders' average position
    e_rho, e_delta : (S, n)
        real radial and included-angle errors, measured from the true LAP
    estimator_error : (S, n)
        ||r_i - lap||
    gamma : (S, n)
        real minus estimated angle, wrapped into (-pi, pi]
    V1, V2 : (S,)
        estimator and included-angle Lyapunov values
    successor : tuple of int
        frozen ring order
    scenario : dict
        JSON representation of the scenario that produced the log
    """

    times: torch.Tensor
    leader_positions: torch.Tensor
    follower_positions: torch.Tensor
    estimates: torch.Tensor
    controls: torch.Tensor
    z: torch.Tensor
    delta: torch.Tensor
    lap: torch.Tensor
    e_rho: torch.Tensor
    e_delta: torch.Tensor
    estimator_error: torch.Tensor
    gamma: torch.Tensor
    V1: torch.Tensor
    V2: torch.Tensor
    successor: Tuple[int, ...]
    scenario: dict

    @property
    def n_samples(self):
        return self.times.shape[0]

    @property
    def n(self):
        return self.follower_positions.shape[1]

    @property
    def m(self):
        return self.leader_positions.shape[1]

    def window(self, t_start, t_end=None):
        """Samples with t_start <= t (<= t_end)."""
        keep = self.times >= t_start
        if t_end is not None:
            keep = keep & (self.times <= t_end)
        return replace(self, **{key: getattr(self, key)[keep] for key in SERIES})

    def state_dict(self):
        state = {f.name: getattr(self, f.name) for f in fields(self)}
        state["successor"] = list(self.successor)
        return state

    def save(self, path: Union[str, Path]):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(self.state_dict(), path)

    @classmethod
    def load(cls, path: Union[str, Path], map_location="cpu"):
        state = torch.load(Path(path), map_location=map_location)
        state["successor"] = tuple(state["successor"])
        return cls(**state)


def build_run_log(scenario, order, times, leader_positions, follower_positions, estimates, controls):
    """Computes every derived series from the raw samples

    Parameters
    ----------
    scenario : Scenario
    order : RingOrder
        ring order frozen at t=0
    times : torch.Tensor of shape (S,)
    leader_positions : torch.Tensor of shape (S, m, 2)
    follower_positions, estimates, controls : torch.Tensor of shape (S, n, 2)
    """
    pattern = scenario.pattern
    lap = leader_positions.mean(dim=-2)

    estimated = relative_state(follower_positions, estimates, strict=False)
    estimated_errors = _errors(estimated, order, pattern)
    real = relative_state(follower_positions, lap[:, None, :], strict=False)
    real_errors = _errors(real, order, pattern)

    return RunLog(
        times=times,
        leader_positions=leader_positions,
        follower_positions=follower_positions,
        estimates=estimates,
        controls=controls,
        z=estimated_errors.z,
        delta=estimated_errors.delta,
        lap=lap,
        e_rho=real_errors.z,
        e_delta=real_errors.delta,
        estimator_error=torch.linalg.norm(estimates - lap[:, None, :], dim=-1),
        gamma=wrap_angle(real.theta - estimated.theta),
        V1=estimator_lyapunov(estimates),
        V2=delta_lyapunov(estimated_errors.delta, scenario.gains.alpha3),
        successor=order.successor,
        scenario=scenario.to_dict(),
    )


def log_scenario(log):
    """Scenario a log was produced from."""
    return Scenario.from_dict(log.scenario, validate=False)
