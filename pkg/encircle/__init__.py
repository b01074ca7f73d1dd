__version__ = '0.1.0'

from .scenario import Scenario, load_scenario, reference_scenario, save_scenario
from .estimators import get_estimator, theoretical_bounds
from .simulation import Simulator, run, run_sweep
from .analysis import RunLog, bound_report, dithering_metric, settling_time
