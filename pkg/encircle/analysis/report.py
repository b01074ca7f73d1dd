"""
report.py checks a RunLog against the guaranteed accuracy of the
estimator and of the real enclosing errors.

Per follower, settling times are detected for the estimated radial error,
the estimated included-angle error (band ``band``) and the estimator error
(band epsilon). Once all three have settled, the real errors must stay
below (epsilon_rho, epsilon_delta); any excursion is reported as a
violation, which is data, not an error.

Without a bound set (gain below the threshold) only z and delta are
checked and every accuracy field is None.
"""

from dataclasses import asdict, dataclass, field
from typing import List, Optional

from ..estimators.bounds import real_error_bounds
from .metrics import settling_time

SETTLING_BAND = 1e-3


@dataclass
class FollowerReport:
    settling_z: Optional[float]
    settling_delta: Optional[float]
    settling_estimator: Optional[float]
    max_post_settling: dict

    @property
    def settled_at(self):
        times = (self.settling_z, self.settling_delta, self.settling_estimator)
        if any(t is None for t in times):
            return None
        return max(times)


@dataclass
class BoundReport:
    epsilon: Optional[float]
    epsilon_rho: Optional[float]
    epsilon_delta: Optional[float]
    f_value: Optional[float]
    t1_bound: Optional[float]
    t3_empirical: Optional[float]
    per_follower: List[FollowerReport]
    violations: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "epsilon_rho": self.epsilon_rho,
            "epsilon_delta": self.epsilon_delta,
            "f": self.f_value,
            "t1_bound": self.t1_bound,
            "t3_empirical": self.t3_empirical,
            "per_follower": [asdict(report) for report in self.per_follower],
            "violations": list(self.violations),
            "notes": list(self.notes),
        }


def _post_max(times, series, t_start):
    if t_start is None:
        return None
    values = series[times >= t_start].abs()
    return float(values.max()) if values.numel() else 0.0


def exponent_note(beta, gains, n):
    """Compares the printed infimum exponent 2*alpha1 with the alpha1 actually used."""
    ratio = 2 * n * beta / (n * gains.k_e)
    alpha1 = gains.alpha1.value
    return (
        f"epsilon = f^(1/2) = ((eta + 2 n beta)/(n k_e))^alpha1 -> {ratio ** alpha1:.6g} as eta -> 0; "
        f"the exponent 2*alpha1 would give {ratio ** (2 * alpha1):.6g}. "
        "The alpha1 exponent is used throughout."
    )


def bound_report(log, bounds, pattern, gains, band=SETTLING_BAND, beta=None, notes=()):
    """Settling times, post-settling maxima and bound violations of a run

    Parameters
    ----------
    log : RunLog
    bounds : EstimatorBounds or None
        theoretical accuracy of the estimator, None when the bound set is
        empty; the estimator and real-error checks are then skipped
    pattern : SpacingPattern
    gains : Gains
    band : float, default is 1e-3
        band used to detect the settling of z and delta
    beta : float, optional
        leader speed bound, only used to word the exponent note
    notes : iterable of str, optional
        extra notes placed first in the report
    """
    if bounds is None:
        epsilon_rho = epsilon_delta = None
    else:
        epsilon_rho, epsilon_delta = real_error_bounds(bounds.epsilon, pattern)
    times = log.times

    per_follower, violations = [], []
    for i in range(log.n):
        report = FollowerReport(
            settling_z=settling_time(times, log.z[:, i], band),
            settling_delta=settling_time(times, log.delta[:, i], band),
            settling_estimator=None,
            max_post_settling=dict(),
        )
        checked = [("z", report.settling_z), ("delta", report.settling_delta)]
        if bounds is not None:
            report.settling_estimator = settling_time(times, log.estimator_error[:, i], bounds.epsilon)
            checked.append(("estimator_error", report.settling_estimator))
        for name, value in checked:
            if value is None:
                violations.append(f"follower {i}: {name} never settles")

        settled = [value for _, value in checked]
        t_start = None if None in settled else max(settled)
        report.max_post_settling = {
            "z": _post_max(times, log.z[:, i], t_start),
            "delta": _post_max(times, log.delta[:, i], t_start),
            "estimator_error": _post_max(times, log.estimator_error[:, i], t_start),
            "e_rho": _post_max(times, log.e_rho[:, i], t_start),
            "e_delta": _post_max(times, log.e_delta[:, i], t_start),
        }
        if t_start is not None and bounds is not None:
            if report.max_post_settling["e_rho"] >= epsilon_rho:
                violations.append(
                    f"follower {i}: |e_rho| reaches {report.max_post_settling['e_rho']:.6g} "
                    f">= epsilon_rho={epsilon_rho:.6g} after t={t_start:.6g}"
                )
            if report.max_post_settling["e_delta"] >= epsilon_delta:
                violations.append(
                    f"follower {i}: |e_delta| reaches {report.max_post_settling['e_delta']:.6g} "
                    f">= epsilon_delta={epsilon_delta:.6g} after t={t_start:.6g}"
                )
        per_follower.append(report)

    delta_settling = [r.settling_delta for r in per_follower]
    t3 = None if any(t is None for t in delta_settling) else max(delta_settling)

    notes = list(notes)
    if beta is not None:
        notes.append(exponent_note(beta, gains, log.n))
    notes.append("T3 has no closed form, t3_empirical is the detected settling of delta")

    return BoundReport(
        epsilon=None if bounds is None else bounds.epsilon,
        epsilon_rho=epsilon_rho,
        epsilon_delta=epsilon_delta,
        f_value=None if bounds is None else bounds.f_value,
        t1_bound=None if bounds is None else bounds.t1_bound,
        t3_empirical=t3,
        per_follower=per_follower,
        violations=violations,
        notes=notes,
    )
