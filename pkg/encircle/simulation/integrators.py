"""
Fixed-step integrators acting on tuples of tensors.

``rhs(t, y)`` maps a time and a tuple of tensors to the tuple of their
derivatives. A precomputed first stage ``k1`` can be passed in so that the
caller may reuse the derivatives it already evaluated at the step start.
"""

import torch


def _axpy(y, h, k):
    return tuple(torch.add(y_i, k_i, alpha=h) for y_i, k_i in zip(y, k))


def euler_step(rhs, t, y, dt, k1=None):
    """Forward Euler, y <- y + dt * f(t, y)."""
    if k1 is None:
        k1 = rhs(t, y)
    return _axpy(y, dt, k1)


def rk4_step(rhs, t, y, dt, k1=None):
    """Classical four-stage Runge-Kutta step."""
    if k1 is None:
        k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, _axpy(y, dt / 2, k1))
    k3 = rhs(t + dt / 2, _axpy(y, dt / 2, k2))
    k4 = rhs(t + dt, _axpy(y, dt, k3))
    # y + dt/6 * ((k1 + k4) + 2 (k2 + k3))
    return tuple(
        torch.add(y_i, torch.add(a + d, b + c, alpha=2), alpha=dt / 6)
        for y_i, a, b, c, d in zip(y, k1, k2, k3, k4)
    )


INTEGRATORS = {"euler": euler_step, "rk4": rk4_step}


def get_integrator(name):
    if name not in INTEGRATORS:
        raise ValueError(f"Got integrator={name} but expected one of {list(INTEGRATORS)}")
    return INTEGRATORS[name]
