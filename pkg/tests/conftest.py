"""Session-wide fixtures: the default simulated sweep and its reduction."""

import pytest

from hpckit.defaults import (
    DEFAULT_SEED,
    default_availability_model,
    default_cost_model,
    default_effects,
    default_fault_model,
    default_knob_space,
    default_requirement_spec,
    default_workload,
)
from hpckit.metrics import derive_dataset
from hpckit.reducer import reduce as reduce_dataset
from hpckit.simulator import generate_sweep


@pytest.fixture(scope="session")
def default_space():
    return default_knob_space()


@pytest.fixture(scope="session")
def raw_dataset(default_space):
    return generate_sweep(
        default_space,
        default_workload(),
        default_effects(),
        default_fault_model(),
        seed=DEFAULT_SEED,
    )


@pytest.fixture(scope="session")
def derived_dataset(raw_dataset):
    return derive_dataset(
        raw_dataset,
        default_availability_model(),
        default_cost_model(),
        default_requirement_spec(),
    )


@pytest.fixture(scope="session")
def default_report(derived_dataset):
    return reduce_dataset(derived_dataset)
