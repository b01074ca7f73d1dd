from .engine import Simulator, SwarmState, leader_velocity, run
from .integrators import INTEGRATORS, euler_step, get_integrator, rk4_step
from .sweep import run_sweep
