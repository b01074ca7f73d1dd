"""
profiles.py implements the leader velocity profiles of a scenario.

Three kinds are supported:

* ``constant``:  v(t) = velocity
* ``sinusoid``:  v(t) = base + amplitude * sin(omega * t + phase) * e_axis
* ``piecewise``: zero-order hold over a list of (t, velocity) breakpoints

Every kind can report its supremum speed over a horizon in closed form
(or by a breakpoint scan) and its exact displacement, which the tests
use as an oracle for the integrated leader positions.
"""

import bisect
import math
from dataclasses import dataclass
from typing import Tuple

import torch

from ..errors import ParseError, ValidationError

PROFILE_KINDS = ("constant", "sinusoid", "piecewise")

Vector2 = Tuple[float, float]


def _sin_range(phase, omega, duration):
    """Range [lo, hi] of sin(omega * t + phase) for t in [0, duration]."""
    x0 = phase
    x1 = phase + omega * duration
    lo, hi = min(x0, x1), max(x0, x1)
    if hi - lo >= 2 * math.pi:
        return -1.0, 1.0

    values = [math.sin(x0), math.sin(x1)]
    # interior extrema at pi/2 + 2k*pi (peak) and -pi/2 + 2k*pi (trough)
    for extremum, value in ((math.pi / 2, 1.0), (-math.pi / 2, -1.0)):
        k = math.ceil((lo - extremum) / (2 * math.pi))
        if extremum + 2 * math.pi * k <= hi:
            values.append(value)
    return min(values), max(values)


@dataclass(frozen=True)
class VelocityProfile:
    """Velocity of a single leader as a function of time

    Parameters
    ----------
    kind : str
        one of ``'constant'``, ``'sinusoid'``, ``'piecewise'``
    velocity : (float, float)
        constant velocity (m/s), used by ``'constant'``
    base : (float, float)
        mean velocity (m/s) of a ``'sinusoid'``
    amplitude : float
        amplitude (m/s) of the oscillating component
    omega : float
        angular frequency (rad/s) of the oscillating component
    phase : float
        phase (rad) of the oscillating component
    axis : int
        0 (x) or 1 (y), the axis the oscillation acts on
    breakpoints : tuple of (float, (float, float))
        ``'piecewise'`` breakpoints sorted by time, first one at t=0
    """

    kind: str
    velocity: Vector2 = (0.0, 0.0)
    base: Vector2 = (0.0, 0.0)
    amplitude: float = 0.0
    omega: float = 0.0
    phase: float = 0.0
    axis: int = 0
    breakpoints: Tuple[Tuple[float, Vector2], ...] = ()

    def velocity_at(self, t):
        """Velocity at time ``t`` as a plain ``(vx, vy)`` tuple."""
        if self.kind == "constant":
            return self.velocity
        if self.kind == "sinusoid":
            s = self.amplitude * math.sin(self.omega * t + self.phase)
            vx, vy = self.base
            if self.axis == 0:
                return (vx + s, vy)
            return (vx, vy + s)
        times = [bt for bt, _ in self.breakpoints]
        idx = max(bisect.bisect_right(times, t) - 1, 0)
        return self.breakpoints[idx][1]

    def max_speed(self, duration):
        """Supremum of ||v(t)|| over [0, duration]."""
        if self.kind == "constant":
            return math.hypot(*self.velocity)
        if self.kind == "sinusoid":
            lo, hi = _sin_range(self.phase, self.omega, duration)
            # ||base + A s e_axis|| is convex in s: the max sits on an end of the range
            return max(math.hypot(*self._sinusoid_at(s)) for s in (lo, hi))
        return max(
            math.hypot(*v) for bt, v in self.breakpoints if bt <= duration
        )

    def displacement(self, t):
        """Exact integral of v over [0, t] as a ``(dx, dy)`` tuple."""
        if self.kind == "constant":
            return (self.velocity[0] * t, self.velocity[1] * t)
        if self.kind == "sinusoid":
            if self.omega == 0:
                extra = self.amplitude * math.sin(self.phase) * t
            else:
                extra = (
                    self.amplitude
                    * (math.cos(self.phase) - math.cos(self.omega * t + self.phase))
                    / self.omega
                )
            dx, dy = self.base[0] * t, self.base[1] * t
            if self.axis == 0:
                return (dx + extra, dy)
            return (dx, dy + extra)

        dx, dy = 0.0, 0.0
        for k, (bt, v) in enumerate(self.breakpoints):
            if bt >= t:
                break
            end = self.breakpoints[k + 1][0] if k + 1 < len(self.breakpoints) else t
            span = min(end, t) - bt
            dx += v[0] * span
            dy += v[1] * span
        return (dx, dy)

    def _sinusoid_at(self, s):
        vx, vy = self.base
        if self.axis == 0:
            return (vx + self.amplitude * s, vy)
        return (vx, vy + self.amplitude * s)

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "velocity": list(self.velocity)}
        if self.kind == "sinusoid":
            return {
                "kind": "sinusoid",
                "base": list(self.base),
                "amplitude": self.amplitude,
                "omega": self.omega,
                "phase": self.phase,
                "axis": self.axis,
            }
        return {
            "kind": "piecewise",
            "breakpoints": [[bt, list(v)] for bt, v in self.breakpoints],
        }

    @classmethod
    def from_dict(cls, data):
        """Builds a profile from its JSON representation

        Raises
        ------
        ParseError
            unknown kind, missing or mistyped parameters
        ValidationError
            piecewise breakpoints not starting at 0 or not increasing
        """
        if not isinstance(data, dict) or "kind" not in data:
            raise ParseError(f"velocity profile must be an object with a 'kind', got {data!r}")
        kind = data["kind"]
        if kind not in PROFILE_KINDS:
            raise ParseError(
                f"unknown velocity profile kind={kind!r}, expected one of {list(PROFILE_KINDS)}"
            )
        try:
            if kind == "constant":
                return cls(kind=kind, velocity=_vector2(data["velocity"]))
            if kind == "sinusoid":
                axis = int(data.get("axis", 1))
                if axis not in (0, 1):
                    raise ParseError(f"sinusoid axis must be 0 or 1, got {axis}")
                return cls(
                    kind=kind,
                    base=_vector2(data["base"]),
                    amplitude=float(data["amplitude"]),
                    omega=float(data["omega"]),
                    phase=float(data.get("phase", 0.0)),
                    axis=axis,
                )
            breakpoints = tuple(
                (float(bt), _vector2(v)) for bt, v in data["breakpoints"]
            )
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, ParseError):
                raise
            raise ParseError(f"malformed {kind} velocity profile {data!r}: {err}") from err

        if not breakpoints or breakpoints[0][0] != 0.0:
            raise ValidationError("profile", "piecewise breakpoints must start at t=0")
        times = [bt for bt, _ in breakpoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("profile", "piecewise breakpoint times must increase")
        return cls(kind=kind, breakpoints=breakpoints)


def _vector2(value):
    if len(value) != 2:
        raise ValueError(f"expected a 2-vector, got {value!r}")
    return (float(value[0]), float(value[1]))


def leader_velocities(profiles, t, dtype=torch.float64, device="cpu"):
    """Stacks the velocities of all ``profiles`` at time ``t`` into an (m, 2) tensor."""
    return torch.tensor(
        [p.velocity_at(t) for p in profiles], dtype=dtype, device=device
    )


def check_velocity_bound(profiles, beta, duration, rtol=1e-12):
    """Whether every profile's supremum speed over [0, duration] is at most ``beta``

    A relative slack of ``rtol`` absorbs the rounding of closed-form bounds
    such as sqrt(5)/2.
    """
    return all(p.max_speed(duration) <= beta * (1.0 + rtol) for p in profiles)
