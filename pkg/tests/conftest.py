"""Shared fixtures: the long closed-loop runs are session-scoped because several
test modules score the same three 120 s scenarios."""

import time

import pytest

from ehservo import ControllerParams, FuzzyEstimator, PlantParams, Scenario, run


@pytest.fixture(scope="session")
def nominal_plant():
    return PlantParams()


@pytest.fixture(scope="session")
def nominal_controller(nominal_plant):
    return ControllerParams(model=nominal_plant)


@pytest.fixture(scope="session")
def zero_estimator():
    return FuzzyEstimator.zeros()


@pytest.fixture(scope="session")
def default_run(nominal_plant, nominal_controller, zero_estimator):
    """Default 120 s constant-supply run plus its wall-clock time."""
    start = time.perf_counter()
    result = run(Scenario(), nominal_plant, nominal_controller, zero_estimator)
    elapsed = time.perf_counter() - start
    return result, elapsed


@pytest.fixture(scope="session")
def varying_run(nominal_plant, nominal_controller, zero_estimator):
    """Same scenario with the supply pressure swinging +/-20% with position."""
    scenario = Scenario(supply_pressure_mode="varying")
    return run(scenario, nominal_plant, nominal_controller, zero_estimator)


@pytest.fixture(scope="session")
def frozen_run(nominal_plant, nominal_controller, zero_estimator):
    """Ablation: adaptation disabled, compensation forced to zero."""
    scenario = Scenario(freeze_adaptation=True)
    return run(scenario, nominal_plant, nominal_controller, zero_estimator)
