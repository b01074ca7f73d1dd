import os

# Only import wandb and use if installed
wandb_available = False
try:
    import wandb
    wandb_available = True
except ModuleNotFoundError:
    wandb_available = False


def get_wandb_api_key(api_key_file="../config/wandb_api_key.txt"):
    try:
        return os.environ["WANDB_API_KEY"]
    except KeyError:
        with open(api_key_file, "r") as f:
            key = f.read()
        return key.strip()


def wandb_login(api_key_file="../config/wandb_api_key.txt", key=None):
    if key is None:
        key = get_wandb_api_key(api_key_file)
    wandb.login(key=key)


def flatten_report(report, prefix=""):
    """Flattens a (nested) report dict into ``{'a/b/0/c': value}`` scalars.

    Lists of dicts are indexed, lists of scalars and strings are dropped.
    """
    flat = dict()
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten_report(value, prefix=f"{name}/"))
        elif isinstance(value, list):
            for i, item in enumerate(value):
                if isinstance(item, dict):
                    flat.update(flatten_report(item, prefix=f"{name}/{i}/"))
        elif isinstance(value, (int, float)) and not isinstance(value, bool):
            flat[name] = value
    return flat


def log_summary(report):
    """Writes a report dict into the summary of the active wandb run, if any."""
    if not wandb_available or wandb.run is None:
        return False
    wandb.run.summary.update(flatten_report(report))
    return True
