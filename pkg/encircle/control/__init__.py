from .enclosing import (
    DEGENERATE_RADIUS,
    EnclosingErrors,
    RelativeState,
    RingOrder,
    closed_loop_rhs,
    control_input,
    delta_lyapunov,
    enclosing_errors,
    escape_kick,
    included_angle,
    integrate_reduced,
    relative_state,
    ring_order,
    wrap_angle,
)
