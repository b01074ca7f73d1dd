"""
estimator.py implements the distributed estimators every follower runs to
track the leaders' average position (LAP).

Each follower i keeps an internal state Phi_i and outputs

    r_i = Phi_i + p~_i,   p~_i = (n/m) * sum_{j in N_i^T} p_j^t / |N_j^F|

where p~_i only depends on the leaders follower i observes. Two update
laws are provided for Phi:

* ``ContinuousEstimator``: Phi_i' = k_e * sum_j a_ij (r_j - r_i)^(1/alpha1)
  with the fractional power applied componentwise as a signed power,
* ``SignumEstimator``: Phi_i' = k_sgn * sum_j a_ij (r_j - r_i)/||r_j - r_i||,
  the discontinuous baseline that dithers near consensus.
"""

import math
from abc import abstractmethod
from dataclasses import dataclass

import torch


def signed_pow(x, exponent):
    """sign(x) * |x| ** exponent, the odd extension of the power function

    With exponent = q/p for odd q < p this is the real odd root, continuous
    and monotone increasing. Works on floats and tensors (componentwise).
    """
    if isinstance(x, torch.Tensor):
        return torch.copysign(torch.abs(x) ** exponent, x)
    if x == 0:
        return 0.0
    return math.copysign(abs(x) ** exponent, x)


def local_observation(observation, leader_positions, i=None):
    """p~ computed from the leaders each follower observes

    Parameters
    ----------
    observation : ObservationGraph
    leader_positions : torch.Tensor of shape (m, 2)
        leader positions, or leader velocities to get d(p~)/dt
    i : int, optional
        if given, only return p~_i

    Returns
    -------
    torch.Tensor of shape (n, 2), or (2,) when ``i`` is given
    """
    n, m = observation.n, observation.m
    weights = observation.weights().to(leader_positions)
    p_tilde = (n / m) * (weights.T @ leader_positions)
    if i is not None:
        return p_tilde[i]
    return p_tilde


@dataclass(frozen=True)
class EstimatorState:
    """Internal state of all n estimators

    Attributes
    ----------
    phi : torch.Tensor of shape (n, 2)
        internal states Phi_i
    p_tilde : torch.Tensor of shape (n, 2)
        local leader observations at the current step
    p_tilde_prev : torch.Tensor of shape (n, 2)
        local leader observations one step earlier (finite differencing)
    """

    phi: torch.Tensor
    p_tilde: torch.Tensor
    p_tilde_prev: torch.Tensor

    @property
    def r(self):
        return self.phi + self.p_tilde

    @classmethod
    def initial(cls, observation, leader_positions):
        """Phi(0) = 0, so the mean of the estimates starts on the true LAP."""
        p_tilde = local_observation(observation, leader_positions)
        return cls(phi=torch.zeros_like(p_tilde), p_tilde=p_tilde, p_tilde_prev=p_tilde)


class BaseEstimator:
    """Base class for the Phi update laws

    Subclasses register themselves by name so that scenarios can select
    them with a string, e.g. ``get_estimator('signum', k_sgn=3.5)``.
    """

    _estimators = dict()

    def __init_subclass__(cls, name=None, **kwargs):
        super().__init_subclass__(**kwargs)
        if name is None:
            name = cls.__name__
        BaseEstimator._estimators[name.lower()] = cls
        cls._name = name

    @abstractmethod
    def update(self, r, graph):
        """Phi' for every follower given the current estimates r of shape (n, 2)."""

    @staticmethod
    def pairwise_differences(r):
        """diff[i, j] = r_j - r_i, shape (n, n, 2)."""
        return r[None, :, :] - r[:, None, :]

    def coupling_weights(self, graph, like, gain=1.0):
        """gain * a_ij as an (n, n, 1) tensor matching ``like``, built once per graph."""
        cached = getattr(self, "_weights", None)
        if (
            cached is None
            or cached[0] is not graph
            or cached[1].dtype != like.dtype
            or cached[1].device != like.device
        ):
            cached = (graph, (gain * graph.adjacency.to(like))[:, :, None])
            self._weights = cached
        return cached[1]


class ContinuousEstimator(BaseEstimator, name="continuous"):
    """Continuous finite-time estimator

    Parameters
    ----------
    k_e : float
        estimator gain
    alpha1 : OddRatio
        exponent p1/q1, the coupling uses (r_j - r_i)^(q1/p1)
    """

    def __init__(self, k_e, alpha1):
        self.k_e = k_e
        self.alpha1 = alpha1
        self.exponent = alpha1.inverse

    def update(self, r, graph):
        weights = self.coupling_weights(graph, r, self.k_e)
        diff = r[None, :, :] - r[:, None, :]
        return (weights * signed_pow(diff, self.exponent)).sum(dim=1)


class SignumEstimator(BaseEstimator, name="signum"):
    """Discontinuous baseline, Phi_i' = k_sgn * sum_j a_ij unit(r_j - r_i).

    Coincident estimates contribute 0 (the 0/0 -> 0 convention).
    """

    def __init__(self, k_sgn):
        self.k_sgn = k_sgn

    def update(self, r, graph):
        diff = self.pairwise_differences(r)
        norm = torch.linalg.norm(diff, dim=-1, keepdim=True)
        nonzero = norm > 0
        unit = torch.where(nonzero, diff / torch.where(nonzero, norm, torch.ones_like(norm)), torch.zeros_like(diff))
        return (self.coupling_weights(graph, r, self.k_sgn) * unit).sum(dim=1)


def get_estimator(name, **kwargs):
    """Instantiates a registered estimator by name."""
    name = name.lower()
    if name not in BaseEstimator._estimators:
        raise ValueError(
            f"Got estimator={name} but expected one of {list(BaseEstimator._estimators)}"
        )
    return BaseEstimator._estimators[name](**kwargs)


def estimator_from_scenario(scenario):
    if scenario.estimator == "signum":
        return get_estimator("signum", k_sgn=scenario.signum_gain)
    return get_estimator("continuous", k_e=scenario.gains.k_e, alpha1=scenario.gains.alpha1)


def continuous_update(state, graph, gains):
    """Phi' of the continuous estimator for every follower."""
    return ContinuousEstimator(gains.k_e, gains.alpha1).update(state.r, graph)


def signum_update(state, graph, k_sgn):
    """Phi' of the signum baseline for every follower."""
    return SignumEstimator(k_sgn).update(state.r, graph)


def r_derivative(state, phi_dot, leader_velocities, dt, mode, observation=None):
    """Feedforward r' = Phi' + d(p~)/dt

    Parameters
    ----------
    state : EstimatorState
    phi_dot : torch.Tensor of shape (n, 2)
    leader_velocities : torch.Tensor of shape (m, 2) or None
        only read in ``'oracle_velocity'`` mode
    dt : float
        step size used by the backward difference
    mode : {'finite_difference', 'oracle_velocity'}
        ``'finite_difference'`` differentiates the observed p~ causally
        (zero on the first step), ``'oracle_velocity'`` maps the true
        leader velocities through the observation weights
    observation : ObservationGraph, optional
        required in ``'oracle_velocity'`` mode
    """
    if mode == "finite_difference":
        p_tilde_dot = (state.p_tilde - state.p_tilde_prev) / dt
    elif mode == "oracle_velocity":
        if observation is None or leader_velocities is None:
            raise ValueError("oracle_velocity mode needs the observation graph and leader velocities")
        p_tilde_dot = local_observation(observation, leader_velocities)
    else:
        raise ValueError(
            f"Got mode={mode} but expected one of ['finite_difference', 'oracle_velocity']"
        )
    return phi_dot + p_tilde_dot


def estimator_lyapunov(r):
    """V1 = 1/2 sum_{i,j} ||r_i - r_j||^2 over the last two dims (..., n, 2)."""
    diff = r[..., None, :, :] - r[..., :, None, :]
    return 0.5 * (diff ** 2).sum(dim=(-1, -2, -3))
