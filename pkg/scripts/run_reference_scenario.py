import sys
from pathlib import Path

from configmypy import ConfigPipeline, YamlConfig, ArgparseConfig

from encircle import Simulator
from encircle.cli import write_run
from encircle.scenario import REFERENCE_SCENARIO_PATH, Scenario, apply_overrides, read_raw
from encircle.utils import wandb_available, wandb_login

if wandb_available:
    import wandb


# Read the configuration
config_name = "default"
pipe = ConfigPipeline(
    [
        YamlConfig(
            "./default_config.yaml", config_name="default", config_folder="../config"
        ),
        ArgparseConfig(infer_types=True, config_name=None, config_file=None),
        YamlConfig(config_folder="../config"),
    ]
)
config = pipe.read_conf()
config_name = pipe.steps[-1].config_name

# Set up WandB logging
if config.wandb.log and wandb_available:
    wandb_login()
    if config.wandb.name:
        wandb_name = config.wandb.name
    else:
        wandb_name = "_".join(f"{var}" for var in [config_name, *config.scenario.overrides])
    wandb.init(
        config=config,
        name=wandb_name,
        group=config.wandb.group,
        project=config.wandb.project,
        entity=config.wandb.entity,
    )

# Print config to screen
if config.verbose:
    pipe.log()
    sys.stdout.flush()

scenario_path = config.scenario.path or REFERENCE_SCENARIO_PATH
overrides = list(config.scenario.overrides or [])
overrides.append(f"sim.sample_stride={config.scenario.sample_stride}")
scenario = Scenario.from_dict(apply_overrides(read_raw(scenario_path), overrides))

simulator = Simulator(
    scenario=scenario,
    device=config.device,
    wandb_log=config.wandb.log,
    log_interval=config.output.log_interval,
    verbose=config.verbose,
)
log = simulator.run()

out_dir = Path(config.output.folder)
report = write_run(log, scenario, out_dir, plots=config.output.plots)

if config.verbose:
    print(f"epsilon_rho={report.epsilon_rho:.6g}, epsilon_delta={report.epsilon_delta:.6g}")
    for i, follower in enumerate(report.per_follower):
        print(f"F{i + 1}: settled at {follower.settled_at}, post-settling maxima {follower.max_post_settling}")
    if report.violations:
        print("Violations:")
        for violation in report.violations:
            print(f"  {violation}")
    sys.stdout.flush()

if config.wandb.log and wandb_available:
    wandb.finish()
