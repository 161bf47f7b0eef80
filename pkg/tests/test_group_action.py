import math
from pathlib import Path

import numpy as np
import pytest

from modules.errors import InvalidLabelError, TransformDomainError
from modules.group_action import (
    ActionState,
    ToyGroupAction,
    act,
    action_adjacency_matrix,
    action_unitary,
    conditional_action,
    fourier_basis,
    fourier_state,
    hartley_basis,
    hartley_state,
    twist,
    twist_unitary,
)
from modules.statevector import StateVector, apply_gate, inner_product

MODULES_DIR = Path(__file__).resolve().parent.parent / 'modules'


@pytest.mark.parametrize('N', [2, 8, 32])
def test_action_axioms(toy_action, N):
    ga = toy_action(N)
    for y in range(N):
        assert act(ga, 0, y) == y
        assert sorted(act(ga, g, y) for g in range(N)) == list(range(N))
        for g in range(N):
            for k in (1, 3, N - 1):
                assert act(ga, g, act(ga, k, y)) == act(ga, g + k, y)
            if g:
                assert act(ga, g, y) != y


def test_identity_action_is_addition():
    ga = ToyGroupAction.identity(8)
    assert act(ga, 3, 6) == 1
    assert twist(ga, 3) == 5


def test_group_elements_reduced_mod_N(toy_action):
    ga = toy_action(16)
    assert act(ga, 21, 4) == act(ga, 5, 4)
    assert act(ga, -3, 4) == act(ga, 13, 4)


def test_twist_is_involution(toy_action):
    ga = toy_action(32)
    for y in range(32):
        assert twist(ga, twist(ga, y)) == y
    assert twist(ga, ga.base_point) == ga.base_point


def test_labels_outside_set_rejected(toy_action):
    ga = toy_action(8)
    with pytest.raises(InvalidLabelError):
        act(ga, 1, 8)
    with pytest.raises(InvalidLabelError):
        twist(ga, -1)


@pytest.mark.parametrize('N', [3, 12, 1])
def test_non_power_of_two_orders_rejected(N):
    with pytest.raises(TransformDomainError):
        ToyGroupAction.from_seed(N, 0)


def test_bad_bijection_rejected():
    with pytest.raises(InvalidLabelError):
        ToyGroupAction(4, (0, 1, 1, 2))


def test_json_round_trip(toy_action):
    ga = toy_action(16, seed=11)
    assert ToyGroupAction.from_json(ga.to_json()) == ga


def test_same_seed_same_labels():
    assert ToyGroupAction.from_seed(64, 5) == ToyGroupAction.from_seed(64, 5)
    assert ToyGroupAction.from_seed(64, 5) != ToyGroupAction.from_seed(64, 6)


# ==================== GATES ====================

def test_action_gate_moves_basis_states(toy_action):
    ga = toy_action(16)
    for y in (0, 5, 15):
        out = apply_gate(StateVector.basis(4, y), action_unitary(ga, 3))
        assert abs(out.amplitudes[act(ga, 3, y)]) == pytest.approx(1)


@pytest.mark.parametrize('h', [0, 1, 6, 13])
def test_fourier_states_are_action_eigenvectors(toy_action, h):
    N = 16
    ga = toy_action(N)
    psi = fourier_state(ga, h).state
    for k in (1, 5, 12):
        out = apply_gate(psi, action_unitary(ga, k))
        eigenvalue = np.exp(-2j * np.pi * k * h / N)
        np.testing.assert_allclose(out.amplitudes, eigenvalue * psi.amplitudes, atol=1e-12)


def test_conditional_actions_cancel(toy_action, random_state):
    ga = toy_action(8)
    psi = random_state(6, seed=9)
    forward = apply_gate(psi, conditional_action(ga, +1))
    back = apply_gate(forward, conditional_action(ga, -1))
    np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-12)


def test_conditional_action_on_basis(toy_action):
    ga = toy_action(8)
    y, k = 6, 3
    out = apply_gate(StateVector.basis(6, k * 8 + y), conditional_action(ga, -1))
    assert abs(out.amplitudes[k * 8 + act(ga, -k, y)]) == pytest.approx(1)


def test_conditional_action_sign_checked(toy_action):
    with pytest.raises(ValueError):
        conditional_action(toy_action(8), 2)


@pytest.mark.parametrize('N', [8, 16, 64])
def test_twist_swaps_hartley_frequencies(toy_action, N):
    ga = toy_action(N)
    gate = twist_unitary(ga)
    for h in range(N):
        out = apply_gate(hartley_state(ga, h).state, gate)
        np.testing.assert_allclose(out.amplitudes, hartley_state(ga, -h).amplitudes, atol=1e-12)


def test_adjacency_is_symmetric_for_symmetric_generators(toy_action):
    A = action_adjacency_matrix(toy_action(16), [3, 13])
    np.testing.assert_array_equal(A, A.T)
    np.testing.assert_array_equal(A.sum(axis=0), np.full(16, 2))


# ==================== ORBIT STATES ====================

def test_fourier_amplitudes_on_identity_labels():
    ga = ToyGroupAction.identity(4)
    np.testing.assert_allclose(fourier_state(ga, 1).amplitudes, [0.5, 0.5j, -0.5, -0.5j], atol=1e-15)


@pytest.mark.parametrize('N', [4, 16, 64])
def test_orbit_bases_orthonormal(toy_action, N):
    ga = toy_action(N)
    for basis in (hartley_basis(ga), fourier_basis(ga)):
        np.testing.assert_allclose(basis.conj().T @ basis, np.eye(N), atol=1e-10)


def test_hartley_state_is_real(toy_action):
    assert np.max(np.abs(hartley_state(toy_action(16), 5).amplitudes.imag)) == 0


@pytest.mark.parametrize('h', [1, 3, 7])
def test_hartley_splits_into_fourier_pair(toy_action, h):
    ga = toy_action(32)
    expected = ((1 - 1j) / 2 * fourier_state(ga, h).amplitudes
                + (1 + 1j) / 2 * fourier_state(ga, -h).amplitudes)
    np.testing.assert_allclose(hartley_state(ga, h).amplitudes, expected, atol=1e-12)


def test_zero_frequency_is_uniform(toy_action):
    ga = toy_action(8)
    uniform = StateVector(np.full(8, 1 / math.sqrt(8)))
    assert inner_product(hartley_state(ga, 0).state, uniform) == pytest.approx(1)


def test_action_state_dimension_checked(toy_action):
    with pytest.raises(TransformDomainError):
        ActionState(toy_action(8), StateVector.basis(2, 0))


def test_bijection_stays_inside_group_action_module():
    offenders = [
        path.name for path in MODULES_DIR.glob('*.py')
        if path.name != 'group_action.py' and 'secret_bijection' in path.read_text(encoding='utf-8')
    ]
    assert offenders == []
