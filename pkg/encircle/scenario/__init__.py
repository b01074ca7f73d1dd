from .profiles import VelocityProfile, check_velocity_bound, leader_velocities
from .scenario import (
    Gains,
    OddRatio,
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
