from .csv_export import read_telemetry_csv, telemetry_header, write_telemetry_csv
from .plots import PLOT_NAMES, write_plots
