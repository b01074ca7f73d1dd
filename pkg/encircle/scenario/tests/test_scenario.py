import json
import math

import pytest

from ..scenario import (
    REFERENCE_SCENARIO_PATH,
    Scenario,
    SpacingPattern,
    apply_overrides,
    dump_scenario,
    load_scenario,
    reference_scenario,
    read_raw,
    save_scenario,
    validate_pattern,
)
from ...errors import ParseError, ValidationError


def write_raw(tmp_path, raw, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path


def test_load_reference_scenario():
    scenario = load_scenario(REFERENCE_SCENARIO_PATH)
    assert scenario.n == 4
    assert scenario.m == 2
    assert scenario.pattern.rho_d == 8.0
    expected = [2 * math.pi / 5] * 3 + [4 * math.pi / 5]
    for a_i, e_i in zip(scenario.pattern.a, expected):
        assert a_i == pytest.approx(e_i, abs=1e-15)
    assert scenario.gains.alpha1.value == pytest.approx(7 / 3)
    assert scenario.integrator == "rk4"
    assert scenario.feedforward_mode == "finite_difference"
    assert scenario.signum_gain == pytest.approx(1.05 * scenario.beta * 3)


def test_round_trip_is_byte_identical(tmp_path):
    path = tmp_path / "reference.json"
    save_scenario(reference_scenario(), path)
    first = path.read_text(encoding="utf-8")
    save_scenario(load_scenario(path), path)
    assert path.read_text(encoding="utf-8") == first
    assert first == dump_scenario(load_scenario(path))


def test_missing_file_names_path(tmp_path):
    path = tmp_path / "does_not_exist.json"
    with pytest.raises(ParseError, match="does_not_exist.json"):
        load_scenario(path)


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_scenario(path)


def test_missing_section(tmp_path):
    raw = read_raw(REFERENCE_SCENARIO_PATH)
    del raw["gains"]
    with pytest.raises(ParseError):
        load_scenario(write_raw(tmp_path, raw))


def _connectivity(raw):
    raw["followers"]["adjacency"] = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]


def _w_d(raw):
    raw["pattern"]["a"] = [math.pi, math.pi / 2, math.pi / 4, math.pi / 4]
    raw["pattern"]["w_d"] = 0.0


def _symmetry(raw):
    raw["followers"]["adjacency"][0] = [0, 1, 1, 0]


def _self_loop(raw):
    raw["followers"]["adjacency"][1][1] = 1


def _weights(raw):
    raw["followers"]["adjacency"][0][1] = 2
    raw["followers"]["adjacency"][1][0] = 2


def _observation(raw):
    raw["observation"][1] = [0, 0, 0, 0]


def _angle_sum(raw):
    raw["pattern"]["a"] = [1.0, 1.0, 1.0, 1.0]


def _angles(raw):
    raw["pattern"]["a"] = [2 * math.pi, 0.0, 0.0, 0.0]


def _admissibility(raw):
    raw["pattern"]["rho_d"] = 0.5


def _gains(raw):
    raw["gains"]["k_z"] = 0.0


def _alpha1(raw):
    raw["gains"]["alpha1"] = [3, 3]


def _alpha2(raw):
    raw["gains"]["alpha2"] = [4, 1]


def _alpha3(raw):
    raw["gains"]["alpha3"] = [1, 3]


def _dt(raw):
    raw["sim"]["dt"] = 0.0


def _duration(raw):
    raw["sim"]["duration"] = -1.0


def _integrator(raw):
    raw["sim"]["integrator"] = "midpoint"


def _feedforward_mode(raw):
    raw["sim"]["feedforward_mode"] = "guess"


def _velocity_bound(raw):
    raw["sim"]["beta"] = 1.0


def _follower_count(raw):
    raw["followers"]["count"] = 5


def _leader_count(raw):
    raw["leaders"]["count"] = 3


@pytest.mark.parametrize(
    "invariant, mutate",
    [
        ("connectivity", _connectivity),
        ("w_d", _w_d),
        ("symmetry", _symmetry),
        ("self_loop", _self_loop),
        ("weights", _weights),
        ("observation", _observation),
        ("angle_sum", _angle_sum),
        ("angles", _angles),
        ("admissibility", _admissibility),
        ("gains", _gains),
        ("alpha1", _alpha1),
        ("alpha2", _alpha2),
        ("alpha3", _alpha3),
        ("dt", _dt),
        ("duration", _duration),
        ("integrator", _integrator),
        ("feedforward_mode", _feedforward_mode),
        ("velocity_bound", _velocity_bound),
        ("follower_count", _follower_count),
        ("leader_count", _leader_count),
    ],
)
def test_invariant_violations_are_rejected(tmp_path, invariant, mutate):
    raw = read_raw(REFERENCE_SCENARIO_PATH)
    mutate(raw)
    with pytest.raises(ValidationError) as excinfo:
        load_scenario(write_raw(tmp_path, raw))
    assert excinfo.value.invariant == invariant


@pytest.mark.parametrize("weight", [1.5, 0.5, -1])
@pytest.mark.parametrize("section", ["adjacency", "observation"])
def test_fractional_link_weights_rejected(tmp_path, section, weight):
    raw = read_raw(REFERENCE_SCENARIO_PATH)
    if section == "adjacency":
        raw["followers"]["adjacency"][0][1] = weight
        raw["followers"]["adjacency"][1][0] = weight
    else:
        raw["observation"][0][0] = weight
    with pytest.raises(ValidationError) as excinfo:
        load_scenario(write_raw(tmp_path, raw))
    assert excinfo.value.invariant == "weights"


def test_boolean_and_float_unit_links_accepted(tmp_path):
    raw = read_raw(REFERENCE_SCENARIO_PATH)
    raw["followers"]["adjacency"][0][1] = 1.0
    raw["followers"]["adjacency"][1][0] = True
    scenario = load_scenario(write_raw(tmp_path, raw))
    assert scenario.follower_adjacency[0][1] == 1
    assert scenario.follower_adjacency[1][0] == 1


def test_single_follower_rejected():
    raw = read_raw(REFERENCE_SCENARIO_PATH)
    raw["followers"] = {"count": 1, "adjacency": [[0]], "initial_positions": [[10.0, 0.0]]}
    raw["observation"] = [[1], [1]]
    raw["pattern"]["a"] = [2 * math.pi]
    with pytest.raises(ValidationError) as excinfo:
        Scenario.from_dict(raw)
    assert excinfo.value.invariant == "follower_count"


@pytest.mark.parametrize(
    "pattern, leaders, admissible",
    [
        (SpacingPattern(8.0, 0.15, (2 * math.pi / 5,) * 3 + (4 * math.pi / 5,)), [[0.0, 0.0], [1.0, 1.0]], True),
        (SpacingPattern(0.5, 0.15, (2 * math.pi / 5,) * 3 + (4 * math.pi / 5,)), [[0.0, 0.0], [1.0, 1.0]], False),
        (SpacingPattern(100.0, 1.0, (math.pi, math.pi)), [[0.0, 0.0], [1.0, 1.0]], True),
        (SpacingPattern(100.0, 0.0, (math.pi, math.pi)), [[0.0, 0.0]], False),
    ],
)
def test_validate_pattern(pattern, leaders, admissible):
    assert validate_pattern(pattern, leaders) is admissible


def test_apply_overrides():
    raw = read_raw(REFERENCE_SCENARIO_PATH)
    updated = apply_overrides(raw, ["gains.k_e=12", "gains.alpha1=[9,5]", "sim.integrator=euler"])
    assert updated["gains"]["k_e"] == 12
    assert updated["gains"]["alpha1"] == [9, 5]
    assert updated["sim"]["integrator"] == "euler"
    # the input is left untouched
    assert raw["gains"]["k_e"] == 6.0

    scenario = Scenario.from_dict(updated)
    assert scenario.gains.k_e == 12.0
    assert scenario.gains.alpha1.inverse == pytest.approx(5 / 9)


def test_apply_overrides_optional_sim_keys():
    raw = read_raw(REFERENCE_SCENARIO_PATH)
    del raw["sim"]["k_sgn"]
    updated = apply_overrides(raw, ["sim.k_sgn=4.0"])
    assert Scenario.from_dict(updated).signum_gain == 4.0


@pytest.mark.parametrize("assignment", ["gains.k_x=1", "nothing.k_e=1", "gains.k_e"])
def test_apply_overrides_unknown_key(assignment):
    with pytest.raises(ValueError):
        apply_overrides(read_raw(REFERENCE_SCENARIO_PATH), [assignment])


def test_cached_graphs():
    scenario = reference_scenario()
    graph = scenario.follower_graph
    assert graph is scenario.follower_graph
    assert graph.n == 4
    assert scenario.observation_graph.m == 2
