import logging

import pytest

from abcselect.core import RunParams, initial_states
from abcselect.probes import SyntheticBackend, SyntheticInstance


@pytest.fixture(autouse=True)
def quiet_engine_logs():
    # Divergence/anomaly warnings are expected in stress scenarios.
    logging.getLogger("abcselect").setLevel(logging.ERROR)
    yield


def params_for(instance: SyntheticInstance, seed: int, epsilon: float = 0.01,
               delta: float = 0.5, initial_train: int = 1000,
               initial_test: int = 2000, c: float = 2.0) -> RunParams:
    return RunParams(
        epsilon=epsilon,
        delta=delta,
        n_configs=instance.n_configs,
        initial_train_size=initial_train,
        initial_test_size=initial_test,
        step_factor_c=c,
        alpha_cost_exponent=1.0,
        max_train_size=instance.max_train_size,
        max_test_size=instance.max_test_size,
        seed=seed,
    )


def fresh_run_inputs(instance: SyntheticInstance, seed: int, **kwargs):
    backend = SyntheticBackend(instance, seed=seed)
    params = params_for(instance, seed, **kwargs)
    states = initial_states(list(backend.labels), params)
    return states, backend, params
