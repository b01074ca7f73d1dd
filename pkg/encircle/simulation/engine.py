import sys
from dataclasses import dataclass
from timeit import default_timer

import torch

# Only import wandb and use if installed
wandb_available = False
try:
    import wandb
    wandb_available = True
except ModuleNotFoundError:
    wandb_available = False

from ..analysis.run_log import build_run_log
from ..control.enclosing import (
    DEGENERATE_RADIUS,
    EnclosingController,
    _errors,
    delta_lyapunov,
    relative_state,
    ring_order,
)
from ..errors import NumericalBlowup
from ..estimators.estimator import EstimatorState, estimator_from_scenario, estimator_lyapunov
from ..scenario.profiles import leader_velocities
from .integrators import get_integrator

BLOWUP_LIMIT = 1e9


@dataclass(frozen=True)
class SwarmState:
    """Snapshot of the closed loop at step ``step`` (t = step * dt)

    Attributes
    ----------
    t : float
    step : int
    leader_positions : torch.Tensor of shape (m, 2)
    follower_positions : torch.Tensor of shape (n, 2)
    estimator : EstimatorState
    """

    t: float
    step: int
    leader_positions: torch.Tensor
    follower_positions: torch.Tensor
    estimator: EstimatorState

    @property
    def estimates(self):
        return self.estimator.r


def leader_velocity(profile, t, dtype=torch.float64, device="cpu"):
    """Velocity of one leader at time t as a (2,) tensor."""
    return torch.tensor(profile.velocity_at(t), dtype=dtype, device=device)


class Simulator:
    """
    Fixed-step integrator of the coupled leader / estimator / follower system.

    The state integrated is (leader positions, follower positions, Phi).
    The local observations p~ are recomputed from the leader positions at
    every stage; in ``'finite_difference'`` mode the p~ rate entering the
    feedforward term is the backward difference between the last two step
    boundaries and stays fixed over the step.

    Every tensor that only depends on the scenario (observation map,
    coupling weights, successor index, angles a) is built once; a stage only
    launches elementwise kernels on the (n, 2) and (m, 2) blocks.
    """

    def __init__(
        self,
        *,
        scenario,
        device="cpu",
        sample_stride=None,
        wandb_log: bool = False,
        log_interval: float = 10.0,
        verbose: bool = False,
    ):
        """
        Parameters
        ----------
        scenario : Scenario
            validated scenario
        device : torch.device, or str 'cpu' or 'cuda'
        sample_stride : int, optional
            log every sample_stride-th step, defaults to the scenario's value
        wandb_log : bool, default is False
            whether to log sample summaries to wandb
        log_interval : float, default is 10.0
            simulated seconds between progress prints when verbose
        verbose : bool, default is False
        """
        self.scenario = scenario
        self.device = device
        self.dtype = torch.float64
        self.sample_stride = scenario.sample_stride if sample_stride is None else sample_stride
        # only log to wandb if a run is active
        self.wandb_log = False
        if wandb_available:
            self.wandb_log = wandb_log and wandb.run is not None
        self.log_interval = log_interval
        self.verbose = verbose

        self.dt = scenario.dt
        self.n_steps = int(round(scenario.duration / scenario.dt))
        self.integrator = get_integrator(scenario.integrator)
        self.estimator = estimator_from_scenario(scenario)
        self.graph = scenario.follower_graph
        self.observation = scenario.observation_graph
        self.pattern = scenario.pattern
        self.gains = scenario.gains

        # p~ = observation_map @ leader positions
        n, m = scenario.n, scenario.m
        self.observation_map = ((n / m) * self.observation.weights().T).to(device=device, dtype=self.dtype)
        self._warned = set()

        state = self.initial_state()
        initial = relative_state(state.follower_positions, state.estimates)
        self.order = ring_order(initial.theta.tolist())
        self.controller = EnclosingController(
            self.gains, self.pattern, self.order, wd_literal=scenario.wd_literal,
            dtype=self.dtype, device=device,
        )

        # constant leaders keep one velocity tensor; others are rebuilt once per distinct stage time
        profiles = scenario.leader_profiles
        self._constant_velocities = None
        if all(p.kind == "constant" for p in profiles):
            self._constant_velocities = leader_velocities(profiles, 0.0, self.dtype, device)
        self._velocity_cache = (None, None)

    def leader_velocities(self, t):
        """(m, 2) leader velocities at time t."""
        if self._constant_velocities is not None:
            return self._constant_velocities
        cached_t, cached = self._velocity_cache
        if cached_t != t:
            cached = leader_velocities(self.scenario.leader_profiles, t, self.dtype, self.device)
            self._velocity_cache = (t, cached)
        return cached

    def initial_state(self):
        """Scenario positions with Phi(0) = 0."""
        leaders = self.scenario.leader_positions(self.dtype, self.device)
        p_tilde = self.observation_map @ leaders
        estimator = EstimatorState(phi=torch.zeros_like(p_tilde), p_tilde=p_tilde, p_tilde_prev=p_tilde)
        return SwarmState(
            t=0.0,
            step=0,
            leader_positions=leaders,
            follower_positions=self.scenario.follower_positions(self.dtype, self.device),
            estimator=estimator,
        )

    def _p_tilde_rate(self, state):
        if self.scenario.feedforward_mode == "finite_difference":
            return (state.estimator.p_tilde - state.estimator.p_tilde_prev) / self.dt
        return None

    def _rhs(self, t, y, p_tilde_rate):
        """Derivatives of (leaders, followers, Phi) and the control input."""
        leaders, followers, phi = y
        velocities = self.leader_velocities(t)
        r = torch.addmm(phi, self.observation_map, leaders)
        phi_dot = self.estimator.update(r, self.graph)
        if p_tilde_rate is None:
            r_dot = torch.addmm(phi_dot, self.observation_map, velocities)
        else:
            r_dot = phi_dot + p_tilde_rate
        u = self.controller(followers, r, r_dot)
        return (velocities, u, phi_dot), u

    def evaluate(self, state):
        """Derivatives and control input at ``state``."""
        y = (state.leader_positions, state.follower_positions, state.estimator.phi)
        rho = torch.linalg.vector_norm(state.follower_positions - state.estimates, dim=-1)
        if float(rho.min()) < DEGENERATE_RADIUS:
            self._warn("degenerate", f"a follower reached its estimated center at t={state.t:.6g} s")
        return self._rhs(state.t, y, self._p_tilde_rate(state))

    def step(self, state, k1=None):
        """Advances ``state`` by one step of the scenario integrator

        Raises
        ------
        NumericalBlowup
            a coordinate is not finite or exceeds 1e9 in magnitude
        """
        p_tilde_rate = self._p_tilde_rate(state)

        def rhs(t, y):
            return self._rhs(t, y, p_tilde_rate)[0]

        y = (state.leader_positions, state.follower_positions, state.estimator.phi)
        leaders, followers, phi = self.integrator(rhs, state.t, y, self.dt, k1=k1)

        step = state.step + 1
        t = step * self.dt
        for value in (leaders, followers, phi):
            # NaN fails the comparison as well
            if not float(value.abs().max()) <= BLOWUP_LIMIT:
                raise NumericalBlowup(t)

        estimator = EstimatorState(
            phi=phi,
            p_tilde=self.observation_map @ leaders,
            p_tilde_prev=state.estimator.p_tilde,
        )
        return SwarmState(
            t=t, step=step, leader_positions=leaders, follower_positions=followers, estimator=estimator
        )

    def run(self):
        """Integrates over [0, duration] and returns the :class:`RunLog`."""
        if self.verbose:
            scenario = self.scenario
            print(
                f"Simulating {scenario.name}: n={scenario.n} followers, m={scenario.m} leaders, "
                f"{scenario.integrator} with dt={scenario.dt}, {self.n_steps} steps, "
                f"{scenario.estimator} estimator"
            )
            sys.stdout.flush()

        samples = {key: [] for key in ("times", "leaders", "followers", "estimates", "controls")}
        progress_every = max(1, int(round(self.log_interval / self.dt)))
        t0 = default_timer()

        state = self.initial_state()
        for k in range(self.n_steps + 1):
            k1, u = self.evaluate(state)
            if k % self.sample_stride == 0 or k == self.n_steps:
                samples["times"].append(state.t)
                samples["leaders"].append(state.leader_positions)
                samples["followers"].append(state.follower_positions)
                samples["estimates"].append(state.estimates)
                samples["controls"].append(u)
                if self.wandb_log:
                    self.log_sample(state, u)
            if self.verbose and k > 0 and k % progress_every == 0:
                print(f"[t={state.t:.2f}s] elapsed={default_timer() - t0:.2f}s")
                sys.stdout.flush()
            if k == self.n_steps:
                break
            state = self.step(state, k1=k1)

        log = build_run_log(
            self.scenario,
            self.order,
            torch.tensor(samples["times"], dtype=self.dtype, device=self.device),
            torch.stack(samples["leaders"]),
            torch.stack(samples["followers"]),
            torch.stack(samples["estimates"]),
            torch.stack(samples["controls"]),
        )
        winding = (log.delta + 1) * self.pattern.a_tensor(self.dtype, self.device)
        if bool((winding.sum(dim=-1) - 2 * torch.pi).abs().gt(1e-9).any()):
            self._warn("winding", "the included angles stopped winding once around the ring")

        if self.verbose:
            print(f"Done in {default_timer() - t0:.2f}s, {log.n_samples} samples")
            sys.stdout.flush()
        return log

    def log_sample(self, state, u):
        r = state.estimates
        lap = state.leader_positions.mean(dim=0)
        states = relative_state(state.follower_positions, r, strict=False)
        errors = _errors(states, self.order, self.pattern)
        values = dict(
            max_abs_z=errors.z.abs().max().item(),
            max_abs_delta=errors.delta.abs().max().item(),
            max_estimator_error=torch.linalg.norm(r - lap, dim=-1).max().item(),
            max_control=torch.linalg.norm(u, dim=-1).max().item(),
            V1=estimator_lyapunov(r).item(),
            V2=delta_lyapunov(errors.delta, self.gains.alpha3).item(),
        )
        wandb.log(values, step=state.step, commit=True)

    def _warn(self, key, message):
        if key in self._warned:
            return
        self._warned.add(key)
        print(f"Warning: {message}")
        sys.stdout.flush()


def run(scenario, **kwargs):
    """Simulates ``scenario`` and returns its RunLog."""
    return Simulator(scenario=scenario, **kwargs).run()
