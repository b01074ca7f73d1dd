from .estimator import (
    BaseEstimator,
    ContinuousEstimator,
    EstimatorState,
    SignumEstimator,
    continuous_update,
    estimator_from_scenario,
    estimator_lyapunov,
    get_estimator,
    local_observation,
    r_derivative,
    signed_pow,
    signum_update,
)
from .bounds import (
    EstimatorBounds,
    finite_time_settling_bound,
    initial_estimator_lyapunov,
    real_error_bounds,
    round_up_odd_ratio,
    theoretical_bounds,
    tune_alpha1,
    z_settling_bound,
)
