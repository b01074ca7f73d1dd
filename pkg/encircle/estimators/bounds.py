"""
bounds.py evaluates the closed-form accuracy and settling-time bounds of
the continuous estimator and of the enclosing controller, together with the
rule of thumb for choosing alpha1.
"""

import math
from dataclasses import dataclass

import torch

from ..errors import GainTooSmall, Infeasible
from .estimator import estimator_lyapunov, local_observation


@dataclass(frozen=True)
class EstimatorBounds:
    """Guaranteed estimator accuracy

    Attributes
    ----------
    f_value : float
        terminal level f of the Lyapunov function V1 (m^2)
    epsilon : float
        accuracy sqrt(f) of every estimate around the true LAP (m)
    t1_bound : float
        upper bound on the time V1 needs to enter [0, f] (s)
    """

    f_value: float
    epsilon: float
    t1_bound: float


def _gain_check(beta, k_e, n, eta):
    lhs = n * k_e
    rhs = eta + 2 * n * beta
    if lhs <= rhs:
        raise GainTooSmall(lhs, rhs)
    return lhs, rhs


def theoretical_bounds(beta, gains, n, V1_0, eta=None):
    """Accuracy epsilon and settling bound T1 of the continuous estimator

    f = ((eta + 2 n beta) / (n k_e))^(2 alpha1),  epsilon = f^(1/2),
    T1 = 2 (V1(0)^(1/2) - f^(1/2)) / eta, clamped at 0.

    Parameters
    ----------
    beta : float
        bound on the leader speeds
    gains : Gains
    n : int
        number of followers
    V1_0 : float
        initial value of V1
    eta : float, optional
        slack, defaults to ``gains.eta``

    Raises
    ------
    GainTooSmall
        when n k_e <= eta + 2 n beta
    """
    eta = gains.eta if eta is None else eta
    lhs, rhs = _gain_check(beta, gains.k_e, n, eta)
    alpha1 = gains.alpha1.value
    f_value = (rhs / lhs) ** (2 * alpha1)
    epsilon = math.sqrt(f_value)
    t1_bound = max(0.0, 2 * (math.sqrt(V1_0) - epsilon) / eta)
    return EstimatorBounds(f_value=f_value, epsilon=epsilon, t1_bound=t1_bound)


def tune_alpha1(epsilon_d, T1_d, beta, k_e, n, eta, V1_0):
    """Lower bound on alpha1 meeting a desired accuracy and settling time

    Returns the larger of

        ln(epsilon_d) / (ln(eta + 2 n beta) - ln(n k_e))
        ln(V1(0)^(1/2) - T1_d n (k_e - 2 beta) / 2) / (ln(eta + 2 n beta) - ln(n k_e))

    The caller rounds the result up to a ratio of odd integers.

    Raises
    ------
    GainTooSmall
        when n k_e <= eta + 2 n beta
    Infeasible
        when the argument of the settling-time logarithm is not positive
    """
    lhs, rhs = _gain_check(beta, k_e, n, eta)
    denominator = math.log(rhs) - math.log(lhs)
    accuracy = math.log(epsilon_d) / denominator

    argument = math.sqrt(V1_0) - T1_d * n * (k_e - 2 * beta) / 2
    if argument <= 0:
        raise Infeasible(
            f"settling time T1_d={T1_d} cannot be met from V1(0)={V1_0}: "
            f"log argument {argument:.6g} is not positive"
        )
    settling = math.log(argument) / denominator
    return max(accuracy, settling)


def finite_time_settling_bound(V0, c, alpha, gamma=0.0):
    """Settling time of V' <= -c V^alpha, alpha in (0, 1), into [0, gamma]

    T <= (V0^(1 - alpha) - gamma^(1 - alpha)) / (c (1 - alpha)), clamped at 0.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if gamma >= V0:
        return 0.0
    return (V0 ** (1 - alpha) - gamma ** (1 - alpha)) / (c * (1 - alpha))


def z_settling_bound(z0, gains):
    """T2 = (2 alpha2 / (k_z (alpha2 - 1))) * V(0)^((alpha2 - 1) / (2 alpha2)), V(0) = sum z_i(0)^2

    Parameters
    ----------
    z0 : torch.Tensor of shape (..., n)
        initial radial errors; leading dims are batched
    gains : Gains
    """
    alpha2 = gains.alpha2.value
    V0 = (torch.as_tensor(z0, dtype=torch.float64) ** 2).sum(dim=-1)
    return (2 * alpha2 / (gains.k_z * (alpha2 - 1))) * V0 ** ((alpha2 - 1) / (2 * alpha2))


def real_error_bounds(epsilon, pattern):
    """(epsilon_rho, epsilon_delta) = (epsilon, 2 arctan(epsilon / rho_d) / min a_i)."""
    epsilon_delta = 2 * math.atan(epsilon / pattern.rho_d) / min(pattern.a)
    return epsilon, epsilon_delta


def round_up_odd_ratio(value, max_q=9):
    """Smallest ratio p/q >= value of odd integers p > q, with q <= max_q

    Returns the pair ``(p, q)``.
    """
    best = None
    for q in range(1, max_q + 1, 2):
        p = max(q + 2, math.ceil(value * q))
        if p % 2 == 0:
            p += 1
        if best is None or p / q < best[0] / best[1]:
            best = (p, q)
    return best


def initial_estimator_lyapunov(scenario):
    """V1(0) of a scenario, the estimates starting on the local observations."""
    p_tilde = local_observation(scenario.observation_graph, scenario.leader_positions())
    return float(estimator_lyapunov(p_tilde))
