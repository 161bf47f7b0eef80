"""Shared pytest fixtures."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from modules.group_action import ToyGroupAction  # noqa: E402
from modules.statevector import StateVector  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_action():
    """Factory: toy_action(N, seed=7) -> ToyGroupAction with a scrambled label set."""
    def make(N, seed=7):
        return ToyGroupAction.from_seed(N, seed)
    return make


@pytest.fixture
def random_state():
    """Factory: random_state(n_qubits, seed) -> normalized complex StateVector."""
    def make(n_qubits, seed=0):
        generator = np.random.default_rng(seed)
        amps = generator.standard_normal(2 ** n_qubits) + 1j * generator.standard_normal(2 ** n_qubits)
        return StateVector.from_amplitudes(amps)
    return make
