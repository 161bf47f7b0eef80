"""
Elementary Gate Library
Constructors for the gate families used by the transform and protocol circuits
"""

import math

import numpy as np

from modules.statevector import Gate

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

# R = 1/2 [[1-i, 1+i], [1+i, 1-i]], the Hartley mixing step between F^2 halves
HARTLEY_MIX = 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]], dtype=np.complex128)


def _controls(controls):
    if controls is None:
        return ()
    if isinstance(controls, dict):
        return tuple(controls.items())
    return tuple((q, 1) if isinstance(q, (int, np.integer)) else tuple(q) for q in controls)


def rotation_matrix(angle):
    """Real rotation [[cos, sin], [-sin, cos]]; maps |0> to cos|0> - sin|1>."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]], dtype=np.complex128)


# ==================== SINGLE-QUBIT FAMILIES ====================

def hadamard(qubit, controls=None):
    return Gate('H', (qubit,), matrix=HADAMARD, controls=_controls(controls))


def pauli_x(qubit, controls=None):
    """X, CNOT or multi-controlled X depending on how many controls are given."""
    controls = _controls(controls)
    if len(controls) > 1:
        return multi_controlled_x(qubit, controls)
    return Gate('CNOT' if controls else 'X', (qubit,), table=[1, 0], controls=controls)


def phase(qubit, angle, controls=None, family='P_j'):
    """diag(1, e^{i angle}); the controlled form is the QFT's P_j."""
    return Gate(family, (qubit,), diagonal=[1, np.exp(1j * angle)], controls=_controls(controls))


def rotation(qubit, angle, controls=None, family='R_j'):
    return Gate(family, (qubit,), matrix=rotation_matrix(angle), controls=_controls(controls))


def single(family, qubit, matrix, controls=None, cost=1):
    return Gate(family, (qubit,), matrix=matrix, controls=_controls(controls), cost=cost)


def multi_controlled_x(target, controls, cost=None):
    """X on `target` when every (qubit, value) control matches; cost defaults to the control count."""
    controls = _controls(controls)
    return Gate('MCX', (target,), table=[1, 0], controls=controls,
                cost=len(controls) if cost is None else cost)


# ==================== REGISTER FAMILIES ====================

def swap(a, b, controls=None):
    return Gate('SWAP', (a, b), table=[0, 2, 1, 3], controls=_controls(controls))


def permutation(family, targets, mapping, controls=None, cost=None):
    """
    Basis permutation |r> -> |mapping(r)> on the register `targets`.

    Args:
        mapping: callable on register values, or an explicit index table
        cost: elementary count; defaults to the register width
    """
    width = len(targets)
    if callable(mapping):
        table = [mapping(r) for r in range(2 ** width)]
    else:
        table = list(mapping)
    return Gate(family, tuple(targets), table=table, controls=_controls(controls),
                cost=width if cost is None else cost)


def register_unitary(family, targets, matrix, controls=None, cost=None):
    return Gate(family, tuple(targets), matrix=matrix, controls=_controls(controls),
                cost=len(targets) if cost is None else cost)


def register_diagonal(family, targets, phases, controls=None, cost=None):
    return Gate(family, tuple(targets), diagonal=phases, controls=_controls(controls),
                cost=len(targets) if cost is None else cost)


def negation_mod(targets, modulus, controls=None, family='NEG'):
    """|y> -> |(modulus - y) mod modulus> on a register of size `modulus`."""
    return permutation(family, targets, lambda y: (modulus - y) % modulus, controls=controls)


def global_phase(phase_factor, qubit=0):
    """Scalar phase on the whole register; carries no elementary cost."""
    return Gate('GPHASE', (qubit,), diagonal=[phase_factor, phase_factor], cost=0)
