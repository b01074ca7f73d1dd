"""
metrics.py computes post-run figures of merit from a RunLog.
"""

from typing import NamedTuple

import torch

from ..control.enclosing import delta_lyapunov
from ..estimators.estimator import estimator_lyapunov
from ..scenario.scenario import OddRatio


def settling_time(times, series, band):
    """Earliest sample time after which |series| stays within ``band``

    Parameters
    ----------
    times : torch.Tensor of shape (S,)
    series : torch.Tensor of shape (S,) or (S, n)
        for per-follower series the largest magnitude across followers is used
    band : float
        positive tolerance

    Returns
    -------
    float, or None if the last sample is outside the band
    """
    if not band > 0:
        raise ValueError(f"band must be positive, got {band}")
    magnitude = torch.as_tensor(series).abs()
    if magnitude.ndim > 1:
        magnitude = magnitude.reshape(magnitude.shape[0], -1).max(dim=1).values
    outside = torch.nonzero(magnitude > band).flatten()
    if outside.numel() == 0:
        return float(times[0])
    last = int(outside[-1])
    if last == magnitude.shape[0] - 1:
        return None
    return float(times[last + 1])


class DitheringMetric(NamedTuple):
    """Total variation and largest single-step jump of each follower's control."""

    total_variation: torch.Tensor
    max_jump: torch.Tensor


def dithering_metric(controls):
    """Total variation sum_k ||u(t_k+1) - u(t_k)|| per follower

    Parameters
    ----------
    controls : torch.Tensor of shape (S, n, 2) or (S, 2)
        at least two samples
    """
    controls = torch.as_tensor(controls, dtype=torch.float64)
    if controls.shape[0] < 2:
        raise ValueError(f"need at least 2 control samples, got {controls.shape[0]}")
    jumps = torch.linalg.norm(controls[1:] - controls[:-1], dim=-1)
    return DitheringMetric(total_variation=jumps.sum(dim=0), max_jump=jumps.max(dim=0).values)


def lyapunov_traces(log):
    """(V1, V2) series recomputed from the estimates and the delta errors."""
    alpha3 = OddRatio(*log.scenario["gains"]["alpha3"])
    return estimator_lyapunov(log.estimates), delta_lyapunov(log.delta, alpha3)


def mean_estimate_drift(log):
    """||mean_i r_i - lap|| at every sample."""
    return torch.linalg.norm(log.estimates.mean(dim=-2) - log.lap, dim=-1)
