"""
plots.py renders the SVG figures of a run from its telemetry table.

Figures only read the CSV columns, plus the epsilon bands of the
``bound_report.json`` written next to it, so regenerating them from a saved
run directory reproduces the same files.
"""

import json
from pathlib import Path
from typing import Optional, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .csv_export import read_telemetry_csv  # noqa: E402

PLOT_NAMES = (
    "errors.svg",
    "real_errors.svg",
    "estimator_error.svg",
    "controls.svg",
    "trajectory.svg",
)

# fixed ids and no timestamp keep the SVG output byte-stable
SVG_RC = {"svg.hashsalt": "encircle", "svg.fonttype": "path"}


def _column(data, name):
    return data[name].tolist()


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_errors(data, path):
    """Estimated radial and included-angle errors of every follower."""
    t = _column(data, "t")
    fig, (ax_z, ax_delta) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    for i in range(data["n"]):
        ax_z.plot(t, _column(data, f"z_{i}"), linewidth=1, label=f"F{i + 1}")
        ax_delta.plot(t, _column(data, f"delta_{i}"), linewidth=1, label=f"F{i + 1}")
    ax_z.set_ylabel("z (m)")
    ax_delta.set_ylabel("delta")
    ax_delta.set_xlabel("t (s)")
    ax_z.legend(loc="upper right")
    for ax in (ax_z, ax_delta):
        ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_real_errors(data, path, bands=None):
    """Real radial and included-angle errors, with the +/- epsilon bands when known."""
    t = _column(data, "t")
    fig, (ax_rho, ax_delta) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    for i in range(data["n"]):
        ax_rho.plot(t, _column(data, f"e_rho_{i}"), linewidth=1, label=f"F{i + 1}")
        ax_delta.plot(t, _column(data, f"e_delta_{i}"), linewidth=1, label=f"F{i + 1}")
    if bands is not None:
        for ax, epsilon, name in zip((ax_rho, ax_delta), bands, ("epsilon_rho", "epsilon_delta")):
            ax.axhline(epsilon, color="k", linestyle=":", linewidth=1, label=name)
            ax.axhline(-epsilon, color="k", linestyle=":", linewidth=1)
    ax_rho.set_ylabel("e_rho (m)")
    ax_delta.set_ylabel("e_delta")
    ax_delta.set_xlabel("t (s)")
    ax_rho.legend(loc="upper right")
    for ax in (ax_rho, ax_delta):
        ax.grid(True, alpha=0.3)
    _save(fig, path)


def real_error_bands(csv_path: Union[str, Path]) -> Optional[Tuple[float, float]]:
    """(epsilon_rho, epsilon_delta) from the bound_report.json next to a telemetry CSV

    Returns None when there is no report or its bound set is empty.
    """
    path = Path(csv_path).parent / "bound_report.json"
    if not path.exists():
        return None
    report = json.loads(path.read_text(encoding="utf-8"))
    epsilon_rho, epsilon_delta = report.get("epsilon_rho"), report.get("epsilon_delta")
    if epsilon_rho is None or epsilon_delta is None:
        return None
    return float(epsilon_rho), float(epsilon_delta)


def plot_estimator_error(data, path):
    """||r_i - p_lap|| on a log scale."""
    t = _column(data, "t")
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for i in range(data["n"]):
        values = [max(v, 1e-12) for v in _column(data, f"est_err_{i}")]
        ax.semilogy(t, values, linewidth=1, label=f"F{i + 1}")
    ax.set_xlabel("t (s)")
    ax.set_ylabel("estimator error (m)")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_controls(data, path):
    t = _column(data, "t")
    fig, (ax_x, ax_y) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    for i in range(data["n"]):
        ax_x.plot(t, _column(data, f"ux_{i}"), linewidth=1, label=f"F{i + 1}")
        ax_y.plot(t, _column(data, f"uy_{i}"), linewidth=1, label=f"F{i + 1}")
    ax_x.set_ylabel("u_x (m/s)")
    ax_y.set_ylabel("u_y (m/s)")
    ax_y.set_xlabel("t (s)")
    ax_x.legend(loc="upper right")
    for ax in (ax_x, ax_y):
        ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_trajectory(data, path):
    """Follower paths around the path of the true LAP."""
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(_column(data, "lapx"), _column(data, "lapy"), "k--", linewidth=1, label="LAP")
    for i in range(data["n"]):
        px, py = _column(data, f"px_{i}"), _column(data, f"py_{i}")
        line, = ax.plot(px, py, linewidth=1, label=f"F{i + 1}")
        ax.plot(px[0], py[0], "o", color=line.get_color())
        ax.plot(px[-1], py[-1], "s", color=line.get_color())
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def write_plots(
    csv_path: Union[str, Path],
    out_dir: Union[str, Path] = None,
    bands: Optional[Tuple[float, float]] = None,
):
    """Renders every figure from a telemetry CSV

    Parameters
    ----------
    csv_path : str or Path
    out_dir : str or Path, optional
        defaults to the directory of the CSV
    bands : (epsilon_rho, epsilon_delta), optional
        bands drawn on the real errors, read from the bound report next to
        the CSV when not given

    Returns the list of written SVG paths.
    """
    csv_path = Path(csv_path)
    out_dir = csv_path.parent if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = read_telemetry_csv(csv_path)
    if bands is None:
        bands = real_error_bands(csv_path)
    painters = (
        plot_errors,
        lambda data, path: plot_real_errors(data, path, bands),
        plot_estimator_error,
        plot_controls,
        plot_trajectory,
    )
    written = []
    with plt.rc_context(SVG_RC):
        for name, painter in zip(PLOT_NAMES, painters):
            path = out_dir / name
            painter(data, path)
            written.append(path)
    return written
