"""
scenario.py defines the experiment description and its JSON file format.

A scenario file is UTF-8 JSON with the top-level sections
``followers``, ``leaders``, ``observation``, ``pattern``, ``gains`` and
``sim`` (see ``data/reference_scenario.json`` for the configuration of the
reference study: four followers, two leaders, rho_d = 8 m).
Angles are in radians, lengths in meters and times in seconds.
"""

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Optional, Tuple, Union

import torch

from ..errors import ParseError, ScenarioError, ValidationError
from ..graphs.topology import FollowerGraph, ObservationGraph, is_connected
from .profiles import VelocityProfile, check_velocity_bound

INTEGRATORS = ("euler", "rk4")
FEEDFORWARD_MODES = ("finite_difference", "oracle_velocity")
ESTIMATORS = ("continuous", "signum")

ANGLE_SUM_TOL = 1e-12

# optional keys that ``apply_overrides`` may add even when the file omits them
OPTIONAL_SIM_KEYS = ("sample_stride", "estimator", "k_sgn", "wd_literal")

REFERENCE_SCENARIO_PATH = Path(__file__).parent.joinpath("data", "reference_scenario.json")


class OddRatio(NamedTuple):
    """Exponent p/q stored as a pair of positive odd integers with p > q."""

    p: int
    q: int

    @property
    def value(self):
        return self.p / self.q

    @property
    def inverse(self):
        """q/p, the exponent applied inside the fractional-power terms."""
        return self.q / self.p

    def is_valid(self):
        return self.p % 2 == 1 and self.q % 2 == 1 and self.p > self.q >= 1


@dataclass(frozen=True)
class SpacingPattern:
    """Desired formation: radius rho_d (m), angular speed w_d (rad/s) and
    included angles a (rad), a[i] going from follower i to its successor."""

    rho_d: float
    w_d: float
    a: Tuple[float, ...]

    def a_tensor(self, dtype=torch.float64, device="cpu"):
        return torch.tensor(self.a, dtype=dtype, device=device)


@dataclass(frozen=True)
class Gains:
    """Estimator and controller gains

    alpha1 shapes the estimator coupling, alpha2 the radial channel and
    alpha3 the tangential channel; each one is an :class:`OddRatio`.
    eta is the slack used only when evaluating the theoretical bounds.
    """

    k_e: float
    alpha1: OddRatio
    k_z: float
    alpha2: OddRatio
    k_delta: float
    alpha3: OddRatio
    eta: float = 1e-6


@dataclass(frozen=True)
class Scenario:
    """Full description of an enclosing experiment."""

    follower_adjacency: Tuple[Tuple[int, ...], ...]
    observation: Tuple[Tuple[int, ...], ...]
    pattern: SpacingPattern
    gains: Gains
    leader_profiles: Tuple[VelocityProfile, ...]
    initial_follower_positions: Tuple[Tuple[float, float], ...]
    initial_leader_positions: Tuple[Tuple[float, float], ...]
    beta: float
    dt: float
    duration: float
    integrator: str = "rk4"
    feedforward_mode: str = "finite_difference"
    sample_stride: int = 10
    estimator: str = "continuous"
    k_sgn: Optional[float] = None
    wd_literal: bool = False
    name: str = "scenario"

    @property
    def n(self):
        return len(self.initial_follower_positions)

    @property
    def m(self):
        return len(self.initial_leader_positions)

    @property
    def signum_gain(self):
        """k_sgn, defaulting to 1.05 * beta * (n - 1)."""
        if self.k_sgn is not None:
            return self.k_sgn
        return 1.05 * self.beta * (self.n - 1)

    @cached_property
    def follower_graph(self):
        return FollowerGraph(torch.tensor(self.follower_adjacency, dtype=torch.float64))

    @cached_property
    def observation_graph(self):
        return ObservationGraph(torch.tensor(self.observation, dtype=torch.float64))

    def follower_positions(self, dtype=torch.float64, device="cpu"):
        return torch.tensor(self.initial_follower_positions, dtype=dtype, device=device)

    def leader_positions(self, dtype=torch.float64, device="cpu"):
        return torch.tensor(self.initial_leader_positions, dtype=dtype, device=device)

    def validate(self):
        """Checks every scenario invariant, raising :class:`ValidationError` on the first violation."""
        n, m = self.n, self.m
        if n < 2:
            raise ValidationError("follower_count", f"need at least 2 followers, got {n}")
        if m < 1:
            raise ValidationError("leader_count", f"need at least 1 leader, got {m}")

        if len(self.follower_adjacency) != n or any(len(row) != n for row in self.follower_adjacency):
            raise ValidationError("shape", f"follower adjacency must be {n}x{n}")
        if len(self.observation) != m or any(len(row) != n for row in self.observation):
            raise ValidationError("shape", f"observation must be {m}x{n} (rows = leaders)")
        if len(self.leader_profiles) != m:
            raise ValidationError(
                "shape", f"expected {m} leader profiles, got {len(self.leader_profiles)}"
            )
        if len(self.pattern.a) != n:
            raise ValidationError("shape", f"pattern.a must have {n} entries, got {len(self.pattern.a)}")

        adjacency = self.follower_adjacency
        if any(v not in (0, 1) for row in adjacency for v in row):
            raise ValidationError("weights", "follower adjacency entries must be 0 or 1")
        if any(adjacency[i][i] for i in range(n)):
            raise ValidationError("self_loop", "follower adjacency must have a zero diagonal")
        if any(adjacency[i][j] != adjacency[j][i] for i in range(n) for j in range(n)):
            raise ValidationError("symmetry", "follower adjacency must be symmetric (undirected)")
        if not is_connected(self.follower_graph):
            raise ValidationError("connectivity", "follower communication graph is not connected")

        if any(v not in (0, 1) for row in self.observation for v in row):
            raise ValidationError("weights", "observation entries must be 0 or 1")
        for j, row in enumerate(self.observation):
            if not any(row):
                raise ValidationError("observation", f"leader {j} is not observed by any follower")

        pattern = self.pattern
        if not pattern.w_d > 0:
            raise ValidationError("w_d", f"desired angular speed must be positive, got {pattern.w_d}")
        if any(not a_i > 0 for a_i in pattern.a):
            raise ValidationError("angles", f"every desired included angle must be positive, got {pattern.a}")
        if abs(sum(pattern.a) - 2 * math.pi) > ANGLE_SUM_TOL:
            raise ValidationError("angle_sum", f"desired included angles sum to {sum(pattern.a)!r}, not 2*pi")
        if not validate_pattern(pattern, self.initial_leader_positions):
            raise ValidationError(
                "admissibility",
                f"rho_d={pattern.rho_d} does not exceed the initial leader spread around their center",
            )

        gains = self.gains
        for key in ("k_e", "k_z", "k_delta", "eta"):
            if not getattr(gains, key) > 0:
                raise ValidationError("gains", f"{key} must be positive, got {getattr(gains, key)}")
        for key in ("alpha1", "alpha2", "alpha3"):
            ratio = getattr(gains, key)
            if not ratio.is_valid():
                raise ValidationError(key, f"{key}={list(ratio)} must be odd integers [p, q] with p > q >= 1")

        if not self.dt > 0:
            raise ValidationError("dt", f"step size must be positive, got {self.dt}")
        if not self.duration > 0:
            raise ValidationError("duration", f"horizon must be positive, got {self.duration}")
        if self.integrator not in INTEGRATORS:
            raise ValidationError("integrator", f"got {self.integrator!r}, expected one of {list(INTEGRATORS)}")
        if self.feedforward_mode not in FEEDFORWARD_MODES:
            raise ValidationError(
                "feedforward_mode", f"got {self.feedforward_mode!r}, expected one of {list(FEEDFORWARD_MODES)}"
            )
        if self.estimator not in ESTIMATORS:
            raise ValidationError("estimator", f"got {self.estimator!r}, expected one of {list(ESTIMATORS)}")
        if self.sample_stride < 1:
            raise ValidationError("sample_stride", f"must be >= 1, got {self.sample_stride}")
        if self.k_sgn is not None and not self.k_sgn > 0:
            raise ValidationError("k_sgn", f"must be positive, got {self.k_sgn}")
        if not self.beta > 0:
            raise ValidationError("beta", f"velocity bound must be positive, got {self.beta}")
        if not check_velocity_bound(self.leader_profiles, self.beta, self.duration):
            raise ValidationError(
                "velocity_bound", f"a leader profile exceeds beta={self.beta} over [0, {self.duration}]"
            )
        return self

    def to_dict(self):
        """JSON representation with the canonical key order."""
        return {
            "name": self.name,
            "followers": {
                "count": self.n,
                "adjacency": [list(row) for row in self.follower_adjacency],
                "initial_positions": [list(p) for p in self.initial_follower_positions],
            },
            "leaders": {
                "count": self.m,
                "initial_positions": [list(p) for p in self.initial_leader_positions],
                "profiles": [p.to_dict() for p in self.leader_profiles],
            },
            "observation": [list(row) for row in self.observation],
            "pattern": {
                "rho_d": self.pattern.rho_d,
                "w_d": self.pattern.w_d,
                "a": list(self.pattern.a),
            },
            "gains": {
                "k_e": self.gains.k_e,
                "alpha1": list(self.gains.alpha1),
                "k_z": self.gains.k_z,
                "alpha2": list(self.gains.alpha2),
                "k_delta": self.gains.k_delta,
                "alpha3": list(self.gains.alpha3),
                "eta": self.gains.eta,
            },
            "sim": {
                "dt": self.dt,
                "duration": self.duration,
                "integrator": self.integrator,
                "feedforward_mode": self.feedforward_mode,
                "beta": self.beta,
                "sample_stride": self.sample_stride,
                "estimator": self.estimator,
                "k_sgn": self.k_sgn,
                "wd_literal": self.wd_literal,
            },
        }

    @classmethod
    def from_dict(cls, data, validate=True):
        """Builds a scenario from its JSON representation

        Parameters
        ----------
        data : dict
            parsed JSON document
        validate : bool, default is True
            whether to check every invariant before returning

        Raises
        ------
        ParseError
            missing sections/keys or values of the wrong type
        ValidationError
            if ``validate`` and an invariant is violated
        """
        if not isinstance(data, dict):
            raise ParseError(f"scenario must be a JSON object, got {type(data).__name__}")
        try:
            followers = data["followers"]
            leaders = data["leaders"]
            pattern = data["pattern"]
            gains = data["gains"]
            sim = data["sim"]

            n_declared = int(followers["count"])
            m_declared = int(leaders["count"])
            follower_positions = tuple(_point(p) for p in followers["initial_positions"])
            leader_positions = tuple(_point(p) for p in leaders["initial_positions"])
            scenario = cls(
                follower_adjacency=_links(followers["adjacency"], "follower adjacency"),
                observation=_links(data["observation"], "observation"),
                pattern=SpacingPattern(
                    rho_d=float(pattern["rho_d"]),
                    w_d=float(pattern["w_d"]),
                    a=tuple(float(v) for v in pattern["a"]),
                ),
                gains=Gains(
                    k_e=float(gains["k_e"]),
                    alpha1=_odd_ratio(gains["alpha1"]),
                    k_z=float(gains["k_z"]),
                    alpha2=_odd_ratio(gains["alpha2"]),
                    k_delta=float(gains["k_delta"]),
                    alpha3=_odd_ratio(gains["alpha3"]),
                    eta=float(gains.get("eta", 1e-6)),
                ),
                leader_profiles=tuple(VelocityProfile.from_dict(p) for p in leaders["profiles"]),
                initial_follower_positions=follower_positions,
                initial_leader_positions=leader_positions,
                beta=float(sim["beta"]),
                dt=float(sim["dt"]),
                duration=float(sim["duration"]),
                integrator=str(sim.get("integrator", "rk4")),
                feedforward_mode=str(sim.get("feedforward_mode", "finite_difference")),
                sample_stride=int(sim.get("sample_stride", 10)),
                estimator=str(sim.get("estimator", "continuous")),
                k_sgn=None if sim.get("k_sgn") is None else float(sim["k_sgn"]),
                wd_literal=bool(sim.get("wd_literal", False)),
                name=str(data.get("name", "scenario")),
            )
        except ScenarioError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as err:
            raise ParseError(f"scenario does not match the schema: {err!r}") from err

        if n_declared != scenario.n:
            raise ValidationError(
                "follower_count", f"count={n_declared} but {scenario.n} initial positions given"
            )
        if m_declared != scenario.m:
            raise ValidationError(
                "leader_count", f"count={m_declared} but {scenario.m} initial positions given"
            )
        if validate:
            scenario.validate()
        return scenario


def _point(value):
    if len(value) != 2:
        raise ValueError(f"expected a 2-vector, got {value!r}")
    return (float(value[0]), float(value[1]))


def _links(rows, label):
    """0/1 link matrix; any other numeric entry is rejected before conversion."""
    matrix = []
    for row in rows:
        links = []
        for v in row:
            if isinstance(v, bool):
                links.append(int(v))
                continue
            if not isinstance(v, (int, float)):
                raise ParseError(f"{label} entries must be numbers, got {v!r}")
            if v not in (0, 1):
                raise ValidationError("weights", f"{label} entries must be 0 or 1, got {v!r}")
            links.append(int(v))
        matrix.append(tuple(links))
    return tuple(matrix)


def _odd_ratio(value):
    p, q = value
    if int(p) != p or int(q) != q:
        raise ValueError(f"exponent must be a pair of integers [p, q], got {value!r}")
    return OddRatio(int(p), int(q))


def validate_pattern(pattern, leader_positions):
    """Admissibility of a spacing pattern against the given leader positions

    True iff the included angles sum to 2*pi, w_d > 0 and rho_d exceeds the
    largest distance of a leader to the leaders' average position.
    """
    leaders = torch.as_tensor(leader_positions, dtype=torch.float64).reshape(-1, 2)
    spread = torch.linalg.norm(leaders - leaders.mean(dim=0), dim=1).max().item()
    return (
        abs(sum(pattern.a) - 2 * math.pi) <= ANGLE_SUM_TOL
        and pattern.w_d > 0
        and pattern.rho_d > spread
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Reads and validates a scenario file

    Raises
    ------
    ParseError
        unreadable file, malformed JSON, schema mismatch
    ValidationError
        an assumption or invariant does not hold
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read scenario file {path}: {err.strerror}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"scenario file {path} is not valid JSON: {err}") from err
    return Scenario.from_dict(data)


def dump_scenario(scenario: Scenario) -> str:
    """Canonical text of a scenario file."""
    return json.dumps(scenario.to_dict(), indent=2) + "\n"


def save_scenario(scenario: Scenario, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_scenario(scenario), encoding="utf-8")


def reference_scenario() -> Scenario:
    """The bundled reference scenario (two leaders, four followers)."""
    return load_scenario(REFERENCE_SCENARIO_PATH)


def read_raw(path: Union[str, Path]) -> dict:
    """Parsed JSON of a scenario file, before any schema check."""
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ParseError(f"cannot read scenario file {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise ParseError(f"scenario file {path} is not valid JSON: {err}") from err


def apply_overrides(raw: dict, assignments) -> dict:
    """Applies dotted ``section.key=value`` assignments to a raw scenario dict

    Values are parsed as JSON (so ``gains.alpha1=[9,5]`` works) and fall back
    to plain strings. Only keys of the schema can be set.

    Returns
    -------
    dict
        an updated deep copy of ``raw``
    """
    raw = json.loads(json.dumps(raw))
    for assignment in assignments:
        if "=" not in assignment:
            raise ValueError(f"override {assignment!r} must look like section.key=value")
        key, value = assignment.split("=", 1)
        try:
            value = json.loads(value)
        except json.JSONDecodeError:
            pass

        *parents, leaf = key.strip().split(".")
        node = raw
        for part in parents:
            if not isinstance(node, dict) or part not in node:
                raise ValueError(f"unknown scenario key {key!r}")
            node = node[part]
        allowed_new = parents == ["sim"] and leaf in OPTIONAL_SIM_KEYS
        if not isinstance(node, dict) or (leaf not in node and not allowed_new):
            raise ValueError(f"unknown scenario key {key!r}")
        node[leaf] = value
    return raw
