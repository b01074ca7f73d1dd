from .run_log import RunLog, build_run_log, log_scenario
from .metrics import (
    DitheringMetric,
    dithering_metric,
    lyapunov_traces,
    mean_estimate_drift,
    settling_time,
)
from .report import BoundReport, FollowerReport, bound_report
