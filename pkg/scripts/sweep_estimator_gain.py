import json
import sys
from pathlib import Path

from configmypy import ConfigPipeline, YamlConfig, ArgparseConfig

from encircle.analysis import settling_time
from encircle.errors import GainTooSmall
from encircle.estimators import initial_estimator_lyapunov, theoretical_bounds
from encircle.scenario import REFERENCE_SCENARIO_PATH, Scenario, apply_overrides, read_raw
from encircle.simulation import run_sweep
from encircle.utils import log_summary, wandb_available, wandb_login

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

if config.wandb.log and wandb_available:
    wandb_login()
    wandb.init(
        config=config,
        name=config.wandb.name or f"{config_name}_sweep_{config.sweep.key}",
        group=config.wandb.group,
        project=config.wandb.project,
        entity=config.wandb.entity,
    )

if config.verbose:
    pipe.log()
    sys.stdout.flush()

raw = read_raw(config.scenario.path or REFERENCE_SCENARIO_PATH)
overrides = list(config.scenario.overrides or [])
overrides.append(f"sim.sample_stride={config.scenario.sample_stride}")

scenarios = dict()
for value in config.sweep.values:
    assignment = f"{config.sweep.key}={json.dumps(value)}"
    scenarios[str(value)] = Scenario.from_dict(apply_overrides(raw, overrides + [assignment]))

logs = run_sweep(scenarios, max_workers=config.sweep.max_workers, verbose=config.verbose)

results = dict()
for label, log in logs.items():
    scenario = scenarios[label]
    try:
        epsilon = theoretical_bounds(
            scenario.beta, scenario.gains, scenario.n, initial_estimator_lyapunov(scenario)
        ).epsilon
    except GainTooSmall as err:
        print(f"Warning: {config.sweep.key}={label}: {err}")
        results[label] = dict(epsilon=None)
        continue
    settled = settling_time(log.times, log.estimator_error, epsilon)
    post = log.window(settled) if settled is not None else None
    results[label] = dict(
        epsilon=epsilon,
        settling_estimator=settled,
        max_post_estimator_error=None if post is None else float(post.estimator_error.max()),
        max_post_e_rho=None if post is None else float(post.e_rho.abs().max()),
    )
    if config.verbose:
        print(f"{config.sweep.key}={label}: {results[label]}")
        sys.stdout.flush()

out_dir = Path(config.output.folder)
out_dir.mkdir(parents=True, exist_ok=True)
out_dir.joinpath("sweep.json").write_text(json.dumps(results, indent=2) + "\n", encoding="utf-8")
log_summary(results)

if config.wandb.log and wandb_available:
    wandb.finish()
