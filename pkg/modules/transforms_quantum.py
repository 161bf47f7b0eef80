"""
Quantum Transform Circuits
Circuit builders for QFT, the Hartley transform (recursive and QFT-based) and the
type-I sine transform, with gate-count models and oracle helpers.

Register convention: data qubits occupy 0..n-1 (qubit 0 least significant);
ancillas sit directly above them and start and end in |0>.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from modules import gates
from modules.errors import DimensionMismatchError, TransformDomainError, UnknownVariantError
from modules.statevector import (
    Circuit,
    StateVector,
    discard_ancillas,
    ensure_budget,
    run_circuit,
    run_circuit_batch,
    with_ancillas,
)

# Import configuration
try:
    from config import EPS_STATE, MAX_CIRCUIT_N, MAX_QST_N
except ImportError:
    EPS_STATE = 1e-9
    MAX_CIRCUIT_N = 12
    MAX_QST_N = 11

logger = logging.getLogger(__name__)

# Leading coefficient of each construction's count, in units of log^2 N
COUNT_MODELS = {
    'recursive_qht': Fraction(2),
    'qft_based_qht': Fraction(5, 2),
    'decomposition_qht': Fraction(5, 2),
    'qft': Fraction(1, 2),
}


@dataclass(frozen=True)
class CountModel:
    """Symbolic gate-count claim: leading * log^2 N + lower-order terms."""

    variant: str
    leading: Fraction

    def evaluate(self, n):
        return self.leading * n * n


@dataclass(frozen=True, eq=False)
class TransformCircuit:
    """A transform circuit plus the bookkeeping needed to check it against its oracle."""

    circuit: Circuit
    n_data_qubits: int
    n_ancilla: int
    claimed_count_model: CountModel
    label: str
    subcircuit_calls: dict = field(default_factory=dict)
    input_domain: range = None

    @property
    def data_qubits(self):
        return tuple(range(self.n_data_qubits))

    @property
    def ancilla_qubits(self):
        return tuple(range(self.n_data_qubits, self.n_data_qubits + self.n_ancilla))

    @property
    def domain(self):
        return self.input_domain if self.input_domain is not None else range(2 ** self.n_data_qubits)

    def tally(self):
        return self.circuit.tally()


# ==================== COUNT MODEL ====================

def analytic_count_model(which, n):
    """
    Leading-term gate-count model for a transform of size 2^n

    Args:
        which: 'recursive_qht', 'qft_based_qht', 'decomposition_qht' or 'qft'
        n: log2 of the transform size

    Returns:
        Fraction: the model value leading * n^2
    """
    if which not in COUNT_MODELS:
        raise UnknownVariantError(f"unknown count model: {which}")
    if n < 1:
        raise TransformDomainError(f"n must be at least 1, got {n}")
    return COUNT_MODELS[which] * n * n


def fit_leading_coefficient(ns, totals):
    """Least-squares fit totals ~ a n^2 + b n + c. Returns (a, b, c)."""
    ns = np.asarray(ns, dtype=float)
    totals = np.asarray(totals, dtype=float)
    if ns.size < 3:
        raise TransformDomainError("a quadratic fit needs at least three sizes")
    a, b, c = np.polyfit(ns, totals, 2)
    return float(a), float(b), float(c)


def _check_n(n, low=1, high=MAX_CIRCUIT_N):
    if not isinstance(n, (int, np.integer)) or not low <= n <= high:
        raise TransformDomainError(f"n must be an integer in [{low}, {high}], got {n}")


# ==================== QFT ====================

def qft_gates(qubits, explicit_swaps=True, controls=()):
    """
    Gates of QFT on the register `qubits` (least significant first).

    With explicit_swaps the bit reversal is emitted as SWAP gates; otherwise the
    caller applies it as a relabel. Returns the gate list.
    """
    n = len(qubits)
    emitted = []
    for j in range(n - 1, -1, -1):
        emitted.append(gates.hadamard(qubits[j], controls=controls))
        for k in range(j - 1, -1, -1):
            angle = 2 * math.pi / 2 ** (j - k + 1)
            emitted.append(gates.phase(qubits[j], angle, controls=((qubits[k], 1),) + tuple(controls)))
    if explicit_swaps:
        for j in range(n // 2):
            emitted.append(gates.swap(qubits[j], qubits[n - 1 - j], controls=controls))
    return emitted


def build_qft(n):
    """QFT on n qubits; bit reversal is a zero-cost relabel."""
    _check_n(n)
    circuit = Circuit(n, tuple(qft_gates(list(range(n)), explicit_swaps=False)),
                      tuple(n - 1 - j for j in range(n)))
    logger.debug("built QFT for n=%d (%d gates)", n, len(circuit.gates))
    return TransformCircuit(circuit, n, 0, CountModel('qft', COUNT_MODELS['qft']), 'DFT')


# ==================== HARTLEY VIA QFT ====================

def build_qht_via_qft(n):
    """
    QHT from five QFT calls and one ancilla: H, F, controlled F^2, R, controlled F^2, H.

    The ancilla branch |1> picks up F^2 before and after R, so the data register
    ends in F((1-i)/2 + (1+i)/2 F^2) = (1-i)/2 F + (1+i)/2 F^dagger.
    """
    _check_n(n)
    data = list(range(n))
    anc = n
    on = ((anc, 1),)
    sequence = [gates.hadamard(anc)]
    sequence += qft_gates(data)
    sequence += qft_gates(data, controls=on) + qft_gates(data, controls=on)
    sequence.append(gates.single('R', anc, gates.HARTLEY_MIX))
    sequence += qft_gates(data, controls=on) + qft_gates(data, controls=on)
    sequence.append(gates.hadamard(anc))
    circuit = Circuit(n + 1, tuple(sequence))
    logger.debug("built QFT-based QHT for n=%d (%d gates)", n, len(circuit.gates))
    return TransformCircuit(circuit, n, 1, CountModel('qft_based_qht', COUNT_MODELS['qft_based_qht']),
                            'DHT_add', subcircuit_calls={'QFT': 5})


# ==================== RECURSIVE HARTLEY ====================

def _qht_gates(data, ancilla, emitted):
    """
    Append the recursive QHT on `data` (least significant first) to `emitted`.

    Returns the output layout: output bit j lives on physical qubit layout[j].
    """
    m = len(data)
    if m == 1:
        emitted.append(gates.hadamard(data[0]))
        return [data[0]]

    low = data[0]
    out_y = _qht_gates(data[1:], ancilla, emitted)
    width = len(out_y)
    half = 2 ** width

    emitted.append(gates.hadamard(ancilla))
    # |1>|y> -> |1>|N/2 - y>, y = 0 fixed
    emitted.append(gates.negation_mod(out_y, half, controls=((ancilla, 1),)))
    for j in range(width):
        angle = 2 * math.pi * 2 ** j / 2 ** m
        emitted.append(gates.rotation(ancilla, angle, controls=((out_y[j], 1), (low, 1))))
    emitted.append(gates.negation_mod(out_y, half, controls=((ancilla, 1),)))

    # sign fix for the y = 0 branch: Z on the low bit when c = 1 and y = 0
    emitted.append(gates.hadamard(low))
    emitted.append(gates.multi_controlled_x(low, ((ancilla, 1),) + tuple((q, 0) for q in out_y), cost=width))
    emitted.append(gates.hadamard(low))

    emitted.append(gates.hadamard(ancilla))
    emitted.append(gates.pauli_x(ancilla, controls=((low, 1),)))
    emitted.append(gates.hadamard(low))
    return out_y + [low]


def recursive_qht_layout(n):
    """Gate list and output layout of the recursive QHT on qubits 0..n-1 with ancilla n."""
    emitted = []
    layout = _qht_gates(list(range(n)), n, emitted)
    return emitted, layout


def build_qht_recursive(n):
    """
    Recursive QHT: QHT_{N/2} on the high bits, then one ancilla-assisted
    mixing round per level, and a single relabel at the end.
    """
    _check_n(n)
    emitted, layout = recursive_qht_layout(n)
    n_ancilla = 0 if n == 1 else 1
    relabel = tuple(layout) + tuple(range(n, n + n_ancilla))
    circuit = Circuit(n + n_ancilla, tuple(emitted), relabel)
    logger.debug("built recursive QHT for n=%d (tally %d)", n, circuit.tally().total)
    return TransformCircuit(circuit, n, n_ancilla,
                            CountModel('recursive_qht', COUNT_MODELS['recursive_qht']), 'DHT_add')


# ==================== SINE TRANSFORM ====================

def _base_change(data, flag, modulus):
    """T_N = U_N (H x 1)(X x 1): |0>|a> -> (|0>|a> - |1>|N - a>)/sqrt(2)."""
    return [
        gates.pauli_x(flag),
        gates.hadamard(flag),
        gates.negation_mod(data, modulus, controls=((flag, 1),)),
    ]


def build_qst1(n):
    """
    QS^I_{N-1} on inputs 1..N-1: T_N^dagger QHT_{2N} T_N with the flag qubit n
    above the data register and the QHT ancilla on qubit n + 1.
    """
    _check_n(n, low=2, high=MAX_QST_N)
    N = 2 ** n
    data = list(range(n))
    flag = n
    ancilla = n + 1

    emitted = _base_change(data, flag, N)
    layout = _qht_gates(data + [flag], ancilla, emitted)
    emitted += [gate.inverse() for gate in reversed(_base_change(layout[:n], layout[n], N))]

    relabel = tuple(layout) + (ancilla,)
    circuit = Circuit(n + 2, tuple(emitted), relabel)
    logger.debug("built QS^I for n=%d (tally %d)", n, circuit.tally().total)
    # one QHT_{2N} call plus O(n) base-change gates, so it inherits the QHT coefficient
    return TransformCircuit(circuit, n, 2, CountModel('qst1', COUNT_MODELS['recursive_qht']),
                            'S_I', subcircuit_calls={'QHT': 1}, input_domain=range(1, N))


# ==================== ORACLE HELPERS ====================

def _full_columns(tc, inputs):
    total = tc.circuit.n_qubits
    columns = np.zeros((2 ** total, len(inputs)), dtype=np.complex128)
    columns[list(inputs), np.arange(len(inputs))] = 1.0
    return columns


def _ancilla_trace_distance(column, n_data, n_ancilla):
    # reduced state of the ancilla register; trace distance to |0><0|
    block = column.reshape(2 ** n_ancilla, 2 ** n_data)
    rho = block @ block.conj().T
    rho[0, 0] -= 1.0
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho))))


def induced_unitary(tc):
    """
    Data-register matrix induced by the circuit with ancillas in |0>, restricted to
    the input domain (rows and columns), and the worst ancilla trace distance.
    """
    ensure_budget(tc.circuit.n_qubits)
    inputs = list(tc.domain)
    result = run_circuit_batch(_full_columns(tc, inputs), tc.circuit)
    data_dim = 2 ** tc.n_data_qubits
    worst = 0.0
    if tc.n_ancilla:
        for col in range(result.shape[1]):
            worst = max(worst, _ancilla_trace_distance(result[:, col], tc.n_data_qubits, tc.n_ancilla))
    matrix = result[:data_dim, :][inputs, :]
    return matrix, worst


def transform_basis_state(tc, a):
    """Apply the transform to |a> on the data register; returns the data-register state."""
    if a not in tc.domain:
        raise TransformDomainError(f"input {a} is outside the transform's domain {tc.domain}")
    return transform_state(tc, StateVector.basis(tc.n_data_qubits, a))


def transform_state(tc, state):
    """Apply the transform to an arbitrary data-register state (ancillas added and removed)."""
    if state.n_qubits != tc.n_data_qubits:
        raise DimensionMismatchError(
            f"state has {state.n_qubits} qubits, {tc.label} acts on {tc.n_data_qubits}"
        )
    if tc.input_domain is not None:
        outside = np.ones(state.dim, dtype=bool)
        outside[list(tc.input_domain)] = False
        stray = np.max(np.abs(state.amplitudes[outside]), initial=0.0)
        if stray > EPS_STATE:
            raise TransformDomainError(
                f"state has weight {stray:.3e} outside the domain {tc.input_domain} of {tc.label}"
            )
    full =with_ancillas(state, tc.n_ancilla) if tc.n_ancilla else state
    out, _ = run_circuit(full, tc.circuit)
    return discard_ancillas(out, tc.n_ancilla) if tc.n_ancilla else out
