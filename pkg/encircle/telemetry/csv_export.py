"""
csv_export.py writes and reads the per-sample telemetry table of a run.

Columns: ``t``, then for every follower i ``px_i, py_i, rx_i, ry_i, z_i,
delta_i, e_rho_i, e_delta_i, est_err_i, ux_i, uy_i``, then ``lapx, lapy,
V1, V2``. Values are written with 9 significant digits.
"""

import csv
from pathlib import Path
from typing import Union

import torch

FOLLOWER_COLUMNS = ("px", "py", "rx", "ry", "z", "delta", "e_rho", "e_delta", "est_err", "ux", "uy")
TRAILING_COLUMNS = ("lapx", "lapy", "V1", "V2")


def telemetry_header(n):
    header = ["t"]
    for i in range(n):
        header.extend(f"{name}_{i}" for name in FOLLOWER_COLUMNS)
    header.extend(TRAILING_COLUMNS)
    return header


def _format(value):
    return format(value, ".9g")


def telemetry_rows(log):
    """Rows of the telemetry table, one per logged sample, as strings."""
    per_follower = torch.stack(
        [
            log.follower_positions[..., 0],
            log.follower_positions[..., 1],
            log.estimates[..., 0],
            log.estimates[..., 1],
            log.z,
            log.delta,
            log.e_rho,
            log.e_delta,
            log.estimator_error,
            log.controls[..., 0],
            log.controls[..., 1],
        ],
        dim=-1,
    ).reshape(log.n_samples, -1)
    table = torch.cat(
        [log.times[:, None], per_follower, log.lap, log.V1[:, None], log.V2[:, None]], dim=1
    )
    for row in table.tolist():
        yield [_format(value) for value in row]


def write_telemetry_csv(log, path: Union[str, Path]):
    """Writes the telemetry table of ``log`` to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(telemetry_header(log.n))
        writer.writerows(telemetry_rows(log))
    return path


def read_telemetry_csv(path: Union[str, Path]):
    """Loads a telemetry table into a dict of column name -> float64 tensor

    The number of followers is stored under ``'n'``.
    """
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[float(value) for value in row] for row in reader if row]
    n = (len(header) - 1 - len(TRAILING_COLUMNS)) // len(FOLLOWER_COLUMNS)
    if header != telemetry_header(n):
        raise ValueError(f"{path} does not carry the telemetry header for n={n} followers")
    table = torch.tensor(rows, dtype=torch.float64).reshape(len(rows), len(header))
    data = {name: table[:, k] for k, name in enumerate(header)}
    data["n"] = n
    return data
