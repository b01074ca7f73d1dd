"""
Concurrent execution of independent scenarios.

Runs share no mutable state, each one owns its :class:`Simulator`.
"""

from concurrent.futures import ThreadPoolExecutor

from .engine import Simulator


def run_sweep(scenarios, max_workers=None, verbose=False, **simulator_kwargs):
    """Simulates every scenario of a dict concurrently

    Parameters
    ----------
    scenarios : dict[str, Scenario]
    max_workers : int, optional
        thread pool size, defaults to the number of scenarios
    verbose : bool, default is False

    Returns
    -------
    dict[str, RunLog] with the keys of ``scenarios``, in the same order
    """
    if not scenarios:
        return dict()
    max_workers = max_workers or len(scenarios)

    def _run(scenario):
        return Simulator(scenario=scenario, verbose=verbose, **simulator_kwargs).run()

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {key: pool.submit(_run, scenario) for key, scenario in scenarios.items()}
        return {key: future.result() for key, future in futures.items()}
