"""
enclosing.py implements the finite-time enclosing controller.

Every follower measures itself against its own LAP estimate r_i:

    dp'_i = p_i - r_i,  rho'_i = ||dp'_i||,  theta'_i = atan2(dp'_i)

and drives two errors to zero,

    z_i     = rho'_i - rho_d                    (radial)
    delta_i = theta_bar'_i / a_i - 1            (included angle)

where theta_bar'_i is the counterclockwise angle to its ring successor.
The control input is

    u_i = phi_i * w_z + phi_perp_i * w_delta + r'_i
    w_z = -k_z z_i^(1/alpha2),  w_delta = k_delta delta_i^(1/alpha3) + w_d rho'_i

All functions accept a leading batch of samples, followers on the last axis.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import torch

from ..errors import DegenerateRadius, RingOrderError
from ..estimators.estimator import signed_pow

DEGENERATE_RADIUS = 1e-9
WINDING_TOL = 1e-9


@dataclass(frozen=True)
class RelativeState:
    """Geometry of followers relative to their estimated centers

    Attributes
    ----------
    delta_p : torch.Tensor of shape (..., 2)
    rho : torch.Tensor of shape (...)
    theta : torch.Tensor of shape (...), in (-pi, pi]
    phi_unit : torch.Tensor of shape (..., 2), radial unit vector
    phi_perp : torch.Tensor of shape (..., 2), tangential unit vector
    """

    delta_p: torch.Tensor
    rho: torch.Tensor
    theta: torch.Tensor
    phi_unit: torch.Tensor
    phi_perp: torch.Tensor

    @property
    def degenerate(self):
        return self.rho < DEGENERATE_RADIUS


@dataclass(frozen=True)
class RingOrder:
    """Cyclic order of the followers, successor[i] = i_+."""

    successor: Tuple[int, ...]

    @property
    def n(self):
        return len(self.successor)

    def index(self, device="cpu"):
        return torch.tensor(self.successor, dtype=torch.long, device=device)

    def is_single_cycle(self):
        seen, node = set(), 0
        while node not in seen:
            seen.add(node)
            node = self.successor[node]
        return node == 0 and len(seen) == self.n


@dataclass(frozen=True)
class EnclosingErrors:
    z: torch.Tensor
    delta: torch.Tensor
    theta_bar: torch.Tensor

    @property
    def winding(self):
        """Sum of the included angles in turns; 1 for a valid ring."""
        return self.theta_bar.sum(dim=-1) / (2 * math.pi)


def wrap_angle(theta):
    """Maps angles into (-pi, pi]."""
    wrapped = torch.remainder(theta + math.pi, 2 * math.pi) - math.pi
    return torch.where(wrapped <= -math.pi, wrapped + 2 * math.pi, wrapped)


def relative_state(p, r, strict=True):
    """Relative position of followers ``p`` with respect to estimates ``r``

    Parameters
    ----------
    p, r : array-like of shape (..., 2)
    strict : bool, default is True
        raise :class:`DegenerateRadius` when a follower sits within 1e-9 m
        of its estimated center; otherwise the state is returned and
        ``.degenerate`` flags the offending followers
    """
    p = torch.as_tensor(p, dtype=torch.float64)
    r = torch.as_tensor(r, dtype=torch.float64).to(p)
    delta_p = p - r
    rho = torch.linalg.norm(delta_p, dim=-1)
    theta = torch.atan2(delta_p[..., 1], delta_p[..., 0])
    theta = torch.where(theta <= -math.pi, theta + 2 * math.pi, theta)
    cos, sin = torch.cos(theta), torch.sin(theta)
    state = RelativeState(
        delta_p=delta_p,
        rho=rho,
        theta=theta,
        phi_unit=torch.stack([cos, sin], dim=-1),
        phi_perp=torch.stack([-sin, cos], dim=-1),
    )
    if strict and bool(state.degenerate.any()):
        raise DegenerateRadius(torch.nonzero(state.degenerate.reshape(-1)).flatten().tolist())
    return state


def included_angle(theta_succ, theta_i):
    """theta_succ - theta_i, plus 2*pi when the difference is negative."""
    if isinstance(theta_succ, torch.Tensor) or isinstance(theta_i, torch.Tensor):
        diff = torch.as_tensor(theta_succ, dtype=torch.float64) - torch.as_tensor(theta_i, dtype=torch.float64)
        return torch.where(diff < 0, diff + 2 * math.pi, diff)
    diff = theta_succ - theta_i
    return diff + 2 * math.pi if diff < 0 else diff


def ring_order(initial_thetas):
    """Ring obtained by sorting followers by angle, ties broken by index.

    The order is computed once and kept for the whole run.
    """
    thetas = [float(t) for t in initial_thetas]
    order = sorted(range(len(thetas)), key=lambda i: (thetas[i], i))
    successor = [0] * len(order)
    for k, i in enumerate(order):
        successor[i] = order[(k + 1) % len(order)]
    return RingOrder(successor=tuple(successor))


def enclosing_errors(states, order, pattern, check_winding=True):
    """Radial and included-angle errors of every follower

    Parameters
    ----------
    states : RelativeState
        followers on the last axis
    order : RingOrder
    pattern : SpacingPattern
    check_winding : bool, default is True
        raise :class:`RingOrderError` when the included angles do not sum to 2*pi

    Raises
    ------
    DegenerateRadius
        a follower sits on its estimated center
    """
    if bool(states.degenerate.any()):
        raise DegenerateRadius(torch.nonzero(states.degenerate.reshape(-1)).flatten().tolist())
    return _errors(states, order, pattern, check_winding)


def _errors(states, order, pattern, check_winding=False):
    theta = states.theta
    theta_succ = theta.index_select(-1, order.index(theta.device))
    theta_bar = included_angle(theta_succ, theta)
    a = pattern.a_tensor(theta.dtype, theta.device)
    errors = EnclosingErrors(
        z=states.rho - pattern.rho_d,
        delta=theta_bar / a - 1,
        theta_bar=theta_bar,
    )
    if check_winding and bool((errors.theta_bar.sum(dim=-1) - 2 * math.pi).abs().gt(WINDING_TOL).any()):
        raise RingOrderError(
            f"included angles sum to {errors.theta_bar.sum(dim=-1).tolist()}, expected 2*pi"
        )
    return errors


def escape_kick(gains, pattern, dtype=torch.float64, device="cpu"):
    """Radial kick along +x applied to a follower on its estimated center."""
    return torch.tensor(
        [gains.k_z * pattern.rho_d ** gains.alpha2.inverse, 0.0], dtype=dtype, device=device
    )


def control_input(states, z, delta, gains, pattern, r_dot, wd_literal=False):
    """Finite-time enclosing control

    Parameters
    ----------
    states : RelativeState
    z, delta : torch.Tensor of shape (...)
    gains : Gains
    pattern : SpacingPattern
    r_dot : torch.Tensor of shape (..., 2)
        derivative of the LAP estimates (feedforward)
    wd_literal : bool, default is False
        if True, add w_d itself to the tangential channel; by default the
        tangential speed is w_d * rho'_i, a rigid rotation at rate w_d

    Followers on their estimated center receive :func:`escape_kick` + r'_i.
    """
    z = torch.as_tensor(z, dtype=torch.float64)
    delta = torch.as_tensor(delta, dtype=torch.float64)
    r_dot = torch.as_tensor(r_dot, dtype=torch.float64)

    w_z = -gains.k_z * signed_pow(z, gains.alpha2.inverse)
    rotation = pattern.w_d if wd_literal else pattern.w_d * states.rho
    w_delta = gains.k_delta * signed_pow(delta, gains.alpha3.inverse) + rotation
    u = states.phi_unit * w_z[..., None] + states.phi_perp * w_delta[..., None] + r_dot

    degenerate = states.degenerate
    if bool(degenerate.any()):
        kick = escape_kick(gains, pattern, u.dtype, u.device) + r_dot
        u = torch.where(degenerate[..., None], kick, u)
    return u


class EnclosingController:
    """:func:`control_input` for a fixed scenario, evaluated straight from positions

    The successor index, the angles a, the escape kick and the gains are turned into
    tensors once; :meth:`__call__` then only runs elementwise kernels on the
    (n, 2) follower block and never synchronizes with the host.

    Parameters
    ----------
    gains : Gains
    pattern : SpacingPattern
    order : RingOrder
    wd_literal : bool, default is False
        as in :func:`control_input`
    dtype : torch.dtype, default is torch.float64
    device : torch.device, or str 'cpu' or 'cuda'
    """

    def __init__(self, gains, pattern, order, wd_literal=False, dtype=torch.float64, device="cpu"):
        self.rho_d = pattern.rho_d
        self.w_d = pattern.w_d
        self.wd_literal = wd_literal
        self.k_z = gains.k_z
        self.k_delta = gains.k_delta
        self.z_exponent = gains.alpha2.inverse
        self.delta_exponent = gains.alpha3.inverse
        self.successor = order.index(device)
        self.a = pattern.a_tensor(dtype, device)
        self.kick = escape_kick(gains, pattern, dtype, device)
        # phi_perp = (-sin, cos) from phi_unit = (cos, sin)
        self.swap = torch.tensor([1, 0], dtype=torch.long, device=device)
        self.perp_sign = torch.tensor([-1.0, 1.0], dtype=dtype, device=device)

    def __call__(self, followers, r, r_dot):
        """Control inputs u of shape (n, 2) for followers at ``followers`` around estimates ``r``."""
        delta_p = followers - r
        rho = torch.linalg.vector_norm(delta_p, dim=-1)
        theta = torch.atan2(delta_p[..., 1], delta_p[..., 0])
        # included angle in [0, 2*pi)
        theta_bar = torch.remainder(theta.index_select(-1, self.successor) - theta, 2 * math.pi)
        z = rho - self.rho_d
        delta = theta_bar / self.a - 1

        w_z = signed_pow(z, self.z_exponent) * -self.k_z
        w_delta = signed_pow(delta, self.delta_exponent) * self.k_delta
        if self.wd_literal:
            w_delta = w_delta + self.w_d
        else:
            w_delta = torch.add(w_delta, rho, alpha=self.w_d)

        phi_unit = delta_p / rho[..., None]
        phi_perp = phi_unit.index_select(-1, self.swap) * self.perp_sign
        u = torch.addcmul(torch.addcmul(r_dot, phi_unit, w_z[..., None]), phi_perp, w_delta[..., None])
        degenerate = (rho < DEGENERATE_RADIUS)[..., None]
        return torch.where(degenerate, self.kick + r_dot, u)


def closed_loop_rhs(z, delta, rho, a, order, gains):
    """Reduced error dynamics under the enclosing controller

        z'      = -(k_z / 2) z^(1/alpha2)
        delta_i' = -(k_delta / (a_i rho_i)) (delta_i^(1/alpha3) - delta_{i+}^(1/alpha3))

    Parameters
    ----------
    z, delta : torch.Tensor of shape (..., n)
    rho : torch.Tensor of shape (..., n) or (n,)
        frozen radii rho'_i
    a : torch.Tensor of shape (n,)
        desired included angles
    order : RingOrder
    gains : Gains
    """
    rho = torch.as_tensor(rho, dtype=torch.float64)
    if bool((rho < DEGENERATE_RADIUS).any()):
        raise DegenerateRadius(torch.nonzero((rho < DEGENERATE_RADIUS).reshape(-1)).flatten().tolist())
    z_dot = -(gains.k_z / 2) * signed_pow(z, gains.alpha2.inverse)
    s = signed_pow(delta, gains.alpha3.inverse)
    s_succ = s.index_select(-1, order.index(s.device))
    delta_dot = -(gains.k_delta / (a * rho)) * (s - s_succ)
    return z_dot, delta_dot


def delta_lyapunov(delta, alpha3, weights=None):
    """sum_i w_i |delta_i|^(1 + 1/alpha3) over the last axis (w_i = 1 by default)

    With w_i = a_i rho'_i the function is non-increasing along
    :func:`closed_loop_rhs` for any frozen geometry.
    """
    values = torch.abs(delta) ** (1 + alpha3.inverse)
    if weights is not None:
        values = values * weights
    return values.sum(dim=-1)


def integrate_reduced(z0, delta0, rho, a, order, gains, dt, horizon, record_every=1):
    """Integrates :func:`closed_loop_rhs` with RK4 over frozen geometry

    Parameters
    ----------
    z0, delta0 : torch.Tensor of shape (..., n)
        initial errors, leading dims are independent initializations
    rho, a, order, gains
        as in :func:`closed_loop_rhs`
    dt : float
    horizon : float
    record_every : int, default is 1
        keep every record_every-th step (the last step is always kept)

    Returns
    -------
    times : torch.Tensor of shape (K,)
    z, delta : torch.Tensor of shape (K, ..., n)
    """
    from ..simulation.integrators import rk4_step

    def rhs(t, y):
        return closed_loop_rhs(y[0], y[1], rho, a, order, gains)

    n_steps = int(round(horizon / dt))
    y = (torch.as_tensor(z0, dtype=torch.float64), torch.as_tensor(delta0, dtype=torch.float64))
    steps, z_traj, delta_traj = [0], [y[0]], [y[1]]
    for k in range(n_steps):
        y = rk4_step(rhs, k * dt, y, dt)
        if (k + 1) % record_every == 0 or k + 1 == n_steps:
            steps.append(k + 1)
            z_traj.append(y[0])
            delta_traj.append(y[1])
    times = torch.tensor(steps, dtype=torch.float64) * dt
    return times, torch.stack(z_traj), torch.stack(delta_traj)
